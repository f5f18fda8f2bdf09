#pragma once

#include "ttlab/environments.hpp"
#include "ttlab/mpo.hpp"
#include "ttlab/mps.hpp"

namespace ttlab {

namespace detail {

/// f[a, (i1,i2), b] = L[a,B] ket[n][B,i1,B'] ket[n+1][B',i2,B''] R[b,B'']
/// where L, R are bra/ket environments around the (n, n+1) pair.
inline Tensor3 project_pair(const Matrix &lenv, const Tensor3 &k1, const Tensor3 &k2,
                            const Matrix &renv) {
  const index_t d1 = k1.phys_dim(), d2 = k2.phys_dim();
  const index_t al = lenv.rows(), ar = renv.rows();
  Tensor3 out(al, d1 * d2, ar);
  Matrix pair = k1.left_matrix() * k2.right_matrix(); // (B*d1) x (d2*B'')
  for (index_t i1 = 0; i1 < d1; ++i1)
    for (index_t i2 = 0; i2 < d2; ++i2) {
      // block[B, B''] for fixed (i1, i2)
      Matrix blk(k1.left_dim(), k2.right_dim());
      for (index_t bb = 0; bb < k1.left_dim(); ++bb)
        for (index_t b2 = 0; b2 < k2.right_dim(); ++b2)
          blk(bb, b2) = pair(bb * d1 + i1, i2 * k2.right_dim() + b2);
      Matrix proj = lenv * blk * renv.transpose(); // (al x ar)
      for (index_t a = 0; a < al; ++a)
        for (index_t b = 0; b < ar; ++b)
          out(a, i1 * d2 + i2, b) = proj(a, b);
    }
  return out;
}

/// Two-site effective operator
/// H[(a,i1',i2',b), (A,i1,i2,B)] = L[c](a,A) W1[c,i1',i1,c'] W2[c',i2',i2,c''] R[c''](b,B)
inline Matrix effective_two_site_operator(const OpEnv &lenv, const Tensor4 &w1, const Tensor4 &w2,
                                          const OpEnv &renv) {
  const index_t mid = w1.right_dim();
  Matrix out;
  for (index_t c1 = 0; c1 < mid; ++c1) {
    Matrix m1 = Matrix::Zero(lenv[0].rows() * w1.out_dim(), lenv[0].cols() * w1.in_dim());
    for (index_t c0 = 0; c0 < w1.left_dim(); ++c0)
      m1 += kron(lenv[static_cast<size_t>(c0)], w1.bond_block(c0, c1));
    Matrix m2 = Matrix::Zero(w2.out_dim() * renv[0].rows(), w2.in_dim() * renv[0].cols());
    for (index_t c2 = 0; c2 < w2.right_dim(); ++c2)
      m2 += kron(w2.bond_block(c1, c2), renv[static_cast<size_t>(c2)]);
    if (out.size() == 0)
      out = kron(m1, m2);
    else
      out += kron(m1, m2);
  }
  return out;
}

/// One-site effective operator H[(a,i',b), (A,i,B)].
inline Matrix effective_one_site_operator(const OpEnv &lenv, const Tensor4 &w, const OpEnv &renv) {
  Matrix out;
  for (index_t c0 = 0; c0 < w.left_dim(); ++c0)
    for (index_t c1 = 0; c1 < w.right_dim(); ++c1) {
      Matrix term = kron(kron(lenv[static_cast<size_t>(c0)], w.bond_block(c0, c1)),
                         renv[static_cast<size_t>(c1)]);
      if (out.size() == 0)
        out = term;
      else
        out += term;
    }
  return out;
}

/// Zero-site effective operator H[(a,b),(A,B)] joining environments at a bond.
inline Matrix effective_bond_operator(const OpEnv &lenv, const OpEnv &renv) {
  Matrix out;
  for (size_t c = 0; c < lenv.size(); ++c) {
    Matrix term = kron(lenv[c], renv[c]);
    if (out.size() == 0)
      out = term;
    else
      out += term;
  }
  return out;
}

inline Vector tensor_to_vector(const Tensor3 &t) {
  return Eigen::Map<const Vector>(t.data(), t.size());
}

inline Tensor3 vector_to_tensor(const Vector &v, index_t a, index_t d, index_t b) {
  if (v.size() != a * d * b)
    throw shape_error("vector_to_tensor: size mismatch");
  Tensor3 out(a, d, b);
  std::copy(v.data(), v.data() + v.size(), out.data());
  return out;
}

} // namespace detail

/// Projection of <v, w> onto the tensor pair (n, n+1) of `v`: the scalar
/// equals the contraction of the joined pair of `v` (conjugated) with the
/// projected tensor f_n.
class TwoSiteLinearForm {
public:
  TwoSiteLinearForm(const MPS &v, const MPS &w, index_t site) : v_(v), w_(w), site_(site) {
    if (v.size() != w.size())
      throw shape_error("TwoSiteLinearForm: states of different length");
    if (site < 0 || site + 1 >= v.size())
      throw shape_error("TwoSiteLinearForm: site out of range");
    left_.resize(static_cast<size_t>(v.size()) + 1);
    right_.resize(static_cast<size_t>(v.size()) + 1);
    left_[0] = detail::begin_environment();
    for (index_t n = 0; n < site; ++n)
      left_[static_cast<size_t>(n + 1)] =
          detail::update_left_environment(left_[static_cast<size_t>(n)], v_[n], w_[n]);
    right_[static_cast<size_t>(v.size())] = detail::begin_environment();
    for (index_t n = v.size() - 1; n > site + 1; --n)
      right_[static_cast<size_t>(n)] =
          detail::update_right_environment(right_[static_cast<size_t>(n + 1)], v_[n], w_[n]);
  }

  index_t site() const { return site_; }

  /// f_n with fused physical pair, shaped by the bonds of `v`.
  Tensor3 projection() const {
    return detail::project_pair(left_[static_cast<size_t>(site_)], w_[site_], w_[site_ + 1],
                                right_[static_cast<size_t>(site_ + 2)]);
  }

  /// Full overlap <v, w> recomputed through the projection.
  cplx scalar() const {
    const Tensor3 f = projection();
    const Tensor3 pair = detail::join_pair(v_[site_], v_[site_ + 1]);
    return detail::tensor_to_vector(pair).dot(detail::tensor_to_vector(f));
  }

private:
  MPS v_;
  MPS w_;
  index_t site_;
  std::vector<Matrix> left_;
  std::vector<Matrix> right_;
};

/// Projection of <v, U w> onto the tensor pair (n, n+1): the effective
/// operator G_n maps the joined pair of `w` to the frame of `v`.
class TwoSiteQuadraticForm {
public:
  TwoSiteQuadraticForm(const MPS &v, const MPO &op, const MPS &w, index_t site)
      : v_(v), op_(op), w_(w), site_(site) {
    if (v.size() != w.size() || op.size() != v.size())
      throw shape_error("TwoSiteQuadraticForm: size mismatch");
    if (site < 0 || site + 1 >= v.size())
      throw shape_error("TwoSiteQuadraticForm: site out of range");
    left_.resize(static_cast<size_t>(v.size()) + 1);
    right_.resize(static_cast<size_t>(v.size()) + 1);
    left_[0] = detail::begin_op_environment();
    for (index_t n = 0; n < site; ++n)
      left_[static_cast<size_t>(n + 1)] = detail::update_left_op_environment(
          left_[static_cast<size_t>(n)], v_[n], op_[n], w_[n]);
    right_[static_cast<size_t>(v.size())] = detail::begin_op_environment();
    for (index_t n = v.size() - 1; n > site + 1; --n)
      right_[static_cast<size_t>(n)] = detail::update_right_op_environment(
          right_[static_cast<size_t>(n + 1)], v_[n], op_[n], w_[n]);
  }

  index_t site() const { return site_; }

  /// Dense G_n over the joined pairs: rows follow `v`, columns follow `w`.
  Matrix matrix() const {
    return detail::effective_two_site_operator(left_[static_cast<size_t>(site_)], op_[site_],
                                               op_[site_ + 1],
                                               right_[static_cast<size_t>(site_ + 2)]);
  }

  /// <v, U w> recomputed through the projection.
  cplx scalar() const {
    const Tensor3 vpair = detail::join_pair(v_[site_], v_[site_ + 1]);
    const Tensor3 wpair = detail::join_pair(w_[site_], w_[site_ + 1]);
    return detail::tensor_to_vector(vpair).dot(matrix() * detail::tensor_to_vector(wpair));
  }

private:
  MPS v_;
  MPO op_;
  MPS w_;
  index_t site_;
  std::vector<detail::OpEnv> left_;
  std::vector<detail::OpEnv> right_;
};

} // namespace ttlab
