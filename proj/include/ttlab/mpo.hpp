#pragma once

#include <vector>

#include "ttlab/mps.hpp"
#include "ttlab/tensor.hpp"

namespace ttlab {

inline constexpr index_t DENSE_OPERATOR_GUARD = index_t(1) << 13;

/// Matrix product operator: rank-4 tensors B[n](a, out, in, b) with open
/// boundary conditions.
class MPO {
public:
  MPO() = default;
  explicit MPO(std::vector<Tensor4> tensors) : tensors_(std::move(tensors)) {
    check_shape();
  }

  index_t size() const { return static_cast<index_t>(tensors_.size()); }
  const Tensor4 &operator[](index_t n) const { return tensors_[static_cast<size_t>(n)]; }
  Tensor4 &operator[](index_t n) { return tensors_[static_cast<size_t>(n)]; }
  const std::vector<Tensor4> &tensors() const { return tensors_; }

  std::vector<index_t> bond_dimensions() const {
    std::vector<index_t> dims;
    dims.reserve(tensors_.size() + 1);
    dims.push_back(tensors_.empty() ? 1 : tensors_.front().left_dim());
    for (const auto &t : tensors_)
      dims.push_back(t.right_dim());
    return dims;
  }

  index_t max_bond_dimension() const {
    index_t chi = 1;
    for (const auto &t : tensors_)
      chi = std::max({chi, t.left_dim(), t.right_dim()});
    return chi;
  }

  std::vector<index_t> in_dimensions() const {
    std::vector<index_t> dims;
    for (const auto &t : tensors_)
      dims.push_back(t.in_dim());
    return dims;
  }
  std::vector<index_t> out_dimensions() const {
    std::vector<index_t> dims;
    for (const auto &t : tensors_)
      dims.push_back(t.out_dim());
    return dims;
  }

  MPO scaled(cplx factor) const {
    const index_t L = size();
    std::vector<Tensor4> out = tensors_;
    const double mag = std::abs(factor);
    if (mag == 0.0) {
      for (auto &t : out)
        std::fill(t.data(), t.data() + t.size(), cplx(0));
      return MPO(std::move(out));
    }
    const double root = std::pow(mag, 1.0 / static_cast<double>(L));
    const cplx phase = factor / mag;
    for (index_t n = 0; n < L; ++n) {
      cplx f = root;
      if (n == 0)
        f *= phase;
      auto &t = out[static_cast<size_t>(n)];
      for (index_t i = 0; i < t.size(); ++i)
        t.data()[i] *= f;
    }
    return MPO(std::move(out));
  }

  /// Hermitian adjoint: swap in/out indices and conjugate.
  MPO adjoint() const {
    std::vector<Tensor4> out;
    out.reserve(tensors_.size());
    for (const auto &t : tensors_) {
      Tensor4 a(t.left_dim(), t.in_dim(), t.out_dim(), t.right_dim());
      for (index_t c = 0; c < t.left_dim(); ++c)
        for (index_t j = 0; j < t.out_dim(); ++j)
          for (index_t i = 0; i < t.in_dim(); ++i)
            for (index_t cp = 0; cp < t.right_dim(); ++cp)
              a(c, i, j, cp) = std::conj(t(c, j, i, cp));
      out.push_back(std::move(a));
    }
    return MPO(std::move(out));
  }

private:
  void check_shape() const {
    if (tensors_.empty())
      return;
    if (tensors_.front().left_dim() != 1 || tensors_.back().right_dim() != 1)
      throw shape_error("MPO boundary bonds must have size one");
    for (size_t n = 0; n + 1 < tensors_.size(); ++n)
      if (tensors_[n].right_dim() != tensors_[n + 1].left_dim())
        throw shape_error("MPO bond mismatch between neighboring tensors");
  }

  std::vector<Tensor4> tensors_;
};

/// Ordered list of MPO factors representing their matrix product. Factors are
/// applied right-to-left: the last entry acts first on a vector.
class MPOList {
public:
  MPOList() = default;
  explicit MPOList(std::vector<MPO> factors) : factors_(std::move(factors)) {}

  index_t terms() const { return static_cast<index_t>(factors_.size()); }
  const MPO &operator[](index_t k) const { return factors_[static_cast<size_t>(k)]; }
  const std::vector<MPO> &factors() const { return factors_; }
  void push_back(MPO op) { factors_.push_back(std::move(op)); }

  /// Append another list on the right (applied before this one).
  MPOList concatenated(const MPOList &other) const {
    MPOList out = *this;
    for (const auto &f : other.factors_)
      out.push_back(f);
    return out;
  }

private:
  std::vector<MPO> factors_;
};

/// Identity operator with unit bonds.
inline MPO mpo_identity(index_t L, index_t d) {
  std::vector<Tensor4> tensors;
  tensors.reserve(static_cast<size_t>(L));
  for (index_t n = 0; n < L; ++n) {
    Tensor4 t(1, d, d, 1);
    for (index_t s = 0; s < d; ++s)
      t(0, s, s, 0) = 1.0;
    tensors.push_back(std::move(t));
  }
  return MPO(std::move(tensors));
}

/// Identity with per-site physical dimensions.
inline MPO mpo_identity(const std::vector<index_t> &dims) {
  std::vector<Tensor4> tensors;
  tensors.reserve(dims.size());
  for (index_t d : dims) {
    Tensor4 t(1, d, d, 1);
    for (index_t s = 0; s < d; ++s)
      t(0, s, s, 0) = 1.0;
    tensors.push_back(std::move(t));
  }
  return MPO(std::move(tensors));
}

/// Product of independent single-site operators, unit bonds.
inline MPO mpo_from_local_operators(const std::vector<Matrix> &ops) {
  std::vector<Tensor4> tensors;
  tensors.reserve(ops.size());
  for (const auto &m : ops) {
    Tensor4 t(1, m.rows(), m.cols(), 1);
    for (index_t j = 0; j < m.rows(); ++j)
      for (index_t i = 0; i < m.cols(); ++i)
        t(0, j, i, 0) = m(j, i);
    tensors.push_back(std::move(t));
  }
  return MPO(std::move(tensors));
}

/// Contract an MPO to its dense matrix, row index = output.
inline Matrix mpo_to_dense(const MPO &op, index_t guard = DENSE_OPERATOR_GUARD) {
  index_t dim_out = 1, dim_in = 1;
  for (const auto &t : op.tensors()) {
    dim_out *= t.out_dim();
    dim_in *= t.in_dim();
    if (dim_out > guard || dim_in > guard)
      throw capacity_error("mpo_to_dense: dimension exceeds guard");
  }
  // accumulate T[J, I, b] over sites, earlier sites most significant
  std::vector<Matrix> acc(1, Matrix::Ones(1, 1)); // bond -> (J x I)
  index_t jdim = 1, idim = 1;
  for (const auto &t : op.tensors()) {
    std::vector<Matrix> next(static_cast<size_t>(t.right_dim()),
                             Matrix::Zero(jdim * t.out_dim(), idim * t.in_dim()));
    for (index_t b = 0; b < t.right_dim(); ++b)
      for (index_t a = 0; a < t.left_dim(); ++a)
        next[static_cast<size_t>(b)] +=
            detail::kron(acc[static_cast<size_t>(a)], t.bond_block(a, b));
    acc = std::move(next);
    jdim *= t.out_dim();
    idim *= t.in_dim();
  }
  if (acc.size() != 1)
    throw shape_error("mpo_to_dense: unclosed bond");
  return acc.front();
}

/// Dense matrix of an MPOList (product of factor matrices).
inline Matrix mpo_to_dense(const MPOList &ops, index_t guard = DENSE_OPERATOR_GUARD) {
  if (ops.terms() == 0)
    throw shape_error("mpo_to_dense: empty MPO list");
  Matrix out = mpo_to_dense(ops[0], guard);
  for (index_t k = 1; k < ops.terms(); ++k)
    out = out * mpo_to_dense(ops[k], guard);
  return out;
}

namespace detail {

/// Raw contraction of one MPO onto one MPS, fusing bonds as (mpo, mps) pairs
/// with the MPS bond running fastest. No simplification.
inline MPS apply_raw(const MPO &op, const MPS &v) {
  if (op.size() != v.size())
    throw shape_error("apply: operator and state sizes differ");
  std::vector<Tensor3> out;
  out.reserve(static_cast<size_t>(v.size()));
  for (index_t n = 0; n < v.size(); ++n) {
    const Tensor4 &w = op[n];
    const Tensor3 &a = v[n];
    if (w.in_dim() != a.phys_dim())
      throw shape_error("apply: physical dimension mismatch");
    Tensor3 c(w.left_dim() * a.left_dim(), w.out_dim(), w.right_dim() * a.right_dim());
    for (index_t cb = 0; cb < w.left_dim(); ++cb)
      for (index_t j = 0; j < w.out_dim(); ++j)
        for (index_t i = 0; i < w.in_dim(); ++i)
          for (index_t cb2 = 0; cb2 < w.right_dim(); ++cb2) {
            const cplx wv = w(cb, j, i, cb2);
            if (wv == cplx(0))
              continue;
            for (index_t al = 0; al < a.left_dim(); ++al)
              for (index_t ar = 0; ar < a.right_dim(); ++ar)
                c(cb * a.left_dim() + al, j, cb2 * a.right_dim() + ar) += wv * a(al, i, ar);
          }
    out.push_back(std::move(c));
  }
  return MPS(std::move(out), v.error());
}

} // namespace detail

/// MPO-MPO product contracted site by site into a single MPO with fused
/// bonds; exact, bonds multiply.
inline MPO mpo_multiply(const MPO &upper, const MPO &lower) {
  if (upper.size() != lower.size())
    throw shape_error("mpo_multiply: operator sizes differ");
  std::vector<Tensor4> out;
  out.reserve(static_cast<size_t>(upper.size()));
  for (index_t n = 0; n < upper.size(); ++n) {
    const Tensor4 &u = upper[n];
    const Tensor4 &l = lower[n];
    if (u.in_dim() != l.out_dim())
      throw shape_error("mpo_multiply: physical dimension mismatch");
    Tensor4 c(u.left_dim() * l.left_dim(), u.out_dim(), l.in_dim(),
              u.right_dim() * l.right_dim());
    for (index_t a1 = 0; a1 < u.left_dim(); ++a1)
      for (index_t b1 = 0; b1 < u.right_dim(); ++b1)
        for (index_t j = 0; j < u.out_dim(); ++j)
          for (index_t k = 0; k < u.in_dim(); ++k)
            for (index_t i = 0; i < l.in_dim(); ++i)
              for (index_t a2 = 0; a2 < l.left_dim(); ++a2)
                for (index_t b2 = 0; b2 < l.right_dim(); ++b2) {
                  const cplx w = u(a1, j, k, b1) * l(a2, k, i, b2);
                  if (w != cplx(0))
                    c(a1 * l.left_dim() + a2, j, i, b1 * l.right_dim() + b2) += w;
                }
    out.push_back(std::move(c));
  }
  return MPO(std::move(out));
}

/// Weighted sum of MPOs by block concatenation; exact, bonds add.
inline MPO mpo_sum(const std::vector<cplx> &weights, const std::vector<MPO> &terms) {
  if (weights.empty() || weights.size() != terms.size())
    throw shape_error("mpo_sum: weights and terms must be non-empty and match");
  if (terms.size() == 1)
    return terms.front().scaled(weights.front());
  const index_t L = terms.front().size();
  std::vector<MPO> scaled;
  scaled.reserve(terms.size());
  for (size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].size() != L)
      throw shape_error("mpo_sum: operator sizes differ");
    scaled.push_back(terms[k].scaled(weights[k]));
  }
  std::vector<Tensor4> out;
  out.reserve(static_cast<size_t>(L));
  for (index_t n = 0; n < L; ++n) {
    index_t dl = 0, dr = 0;
    const index_t dout = scaled.front()[n].out_dim();
    const index_t din = scaled.front()[n].in_dim();
    for (const auto &t : scaled) {
      dl += t[n].left_dim();
      dr += t[n].right_dim();
    }
    const bool first = (n == 0), last = (n == L - 1);
    Tensor4 t(first ? 1 : dl, dout, din, last ? 1 : dr);
    index_t offl = 0, offr = 0;
    for (const auto &term : scaled) {
      const Tensor4 &b = term[n];
      for (index_t a = 0; a < b.left_dim(); ++a)
        for (index_t j = 0; j < dout; ++j)
          for (index_t i = 0; i < din; ++i)
            for (index_t bb = 0; bb < b.right_dim(); ++bb)
              t(first ? 0 : offl + a, j, i, last ? 0 : offr + bb) += b(a, j, i, bb);
      offl += b.left_dim();
      offr += b.right_dim();
    }
    out.push_back(std::move(t));
  }
  return MPO(std::move(out));
}

} // namespace ttlab
