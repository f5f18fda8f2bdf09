#pragma once

#include <random>
#include <vector>

#include <Eigen/QR>

#include "ttlab/environments.hpp"
#include "ttlab/schmidt.hpp"
#include "ttlab/tensor.hpp"
#include "ttlab/types.hpp"

namespace ttlab {

inline constexpr index_t DENSE_VECTOR_GUARD = index_t(1) << 26;

/// Matrix product state with open boundary conditions. Tensors are
/// A[n](a, s, b) with boundary bonds of size one. The `error` field keeps a
/// norm-2 upper bound on the accumulated truncation error of all operations
/// that produced this state.
class MPS {
public:
  MPS() = default;
  explicit MPS(std::vector<Tensor3> tensors, double error = 0.0)
      : tensors_(std::move(tensors)), error_(error) {
    check_shape();
  }

  index_t size() const { return static_cast<index_t>(tensors_.size()); }

  const Tensor3 &operator[](index_t n) const { return tensors_[static_cast<size_t>(n)]; }
  Tensor3 &operator[](index_t n) { return tensors_[static_cast<size_t>(n)]; }

  const std::vector<Tensor3> &tensors() const { return tensors_; }

  std::vector<index_t> physical_dimensions() const {
    std::vector<index_t> dims;
    dims.reserve(tensors_.size());
    for (const auto &t : tensors_)
      dims.push_back(t.phys_dim());
    return dims;
  }

  /// N+1 bond dimensions including the trivial boundary ones.
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

  /// Dimension of the represented vector space; throws past the guard.
  index_t dimension(index_t guard = DENSE_VECTOR_GUARD) const {
    index_t dim = 1;
    for (const auto &t : tensors_) {
      dim *= t.phys_dim();
      if (dim > guard)
        throw capacity_error("MPS dimension exceeds guard");
    }
    return dim;
  }

  double error() const { return error_; }
  void set_error(double err) { error_ = err; }
  /// Register an increase of the truncation bound; returns the new total.
  double update_error(double delta) {
    error_ += delta;
    return error_;
  }

  double norm_squared() const {
    Matrix env = detail::begin_environment();
    for (const auto &t : tensors_)
      env = detail::update_left_environment(env, t, t);
    return std::real(detail::end_environment(env));
  }
  double norm() const { return std::sqrt(std::max(0.0, norm_squared())); }

  MPS conj() const {
    std::vector<Tensor3> out;
    out.reserve(tensors_.size());
    for (const auto &t : tensors_)
      out.push_back(t.conj());
    return MPS(std::move(out), error_);
  }

  /// Scalar multiple, with the magnitude spread over all tensors and the
  /// phase attached to the first one; the error bound scales accordingly.
  MPS scaled(cplx factor) const {
    const index_t L = size();
    std::vector<Tensor3> out = tensors_;
    const double mag = std::abs(factor);
    if (mag == 0.0) {
      MPS zero = zero_like();
      zero.set_error(error_ * 0.0);
      return zero;
    }
    const double root = std::pow(mag, 1.0 / static_cast<double>(L));
    const cplx phase = factor / mag;
    for (index_t n = 0; n < L; ++n) {
      cplx f = root;
      if (n == 0)
        f *= phase;
      for (index_t i = 0; i < out[static_cast<size_t>(n)].size(); ++i)
        out[static_cast<size_t>(n)].data()[i] *= f;
    }
    return MPS(std::move(out), error_ * mag);
  }

  /// Bond-1 zero state with the same physical dimensions.
  MPS zero_like() const {
    std::vector<Tensor3> out;
    out.reserve(tensors_.size());
    for (const auto &t : tensors_)
      out.emplace_back(1, t.phys_dim(), 1);
    return MPS(std::move(out), 0.0);
  }

protected:
  void check_shape() const {
    if (tensors_.empty())
      return;
    if (tensors_.front().left_dim() != 1 || tensors_.back().right_dim() != 1)
      throw shape_error("MPS boundary bonds must have size one");
    for (size_t n = 0; n + 1 < tensors_.size(); ++n)
      if (tensors_[n].right_dim() != tensors_[n + 1].left_dim())
        throw shape_error("MPS bond mismatch between neighboring tensors");
    if (error_ < 0)
      throw shape_error("MPS error bound must be non-negative");
  }

  std::vector<Tensor3> tensors_;
  double error_ = 0.0;
};

namespace detail {

/// Join neighboring tensors into one with fused physical index (s1,s2).
inline Tensor3 join_pair(const Tensor3 &a, const Tensor3 &b) {
  if (a.right_dim() != b.left_dim())
    throw shape_error("join_pair: bond mismatch");
  Tensor3 out(a.left_dim(), a.phys_dim() * b.phys_dim(), b.right_dim());
  Eigen::Map<RowMatrix>(out.data(), a.left_dim() * a.phys_dim(), b.phys_dim() * b.right_dim()) =
      a.left_matrix() * b.right_matrix();
  return out;
}

struct PairSplit {
  Tensor3 left;
  Tensor3 right;
  double error;
};

/// Split a joined two-site tensor back into two, truncating per `strategy`.
inline PairSplit split_pair(const Tensor3 &joined, index_t d1, index_t d2,
                            const Strategy &strategy, SweepDirection direction) {
  if (joined.phys_dim() != d1 * d2)
    throw shape_error("split_pair: fused physical dimension mismatch");
  Eigen::Map<const RowMatrix> theta(joined.data(), joined.left_dim() * d1, d2 * joined.right_dim());
  auto split = schmidt_split(theta, strategy, direction);
  const index_t rank = split.a.cols();
  return PairSplit{Tensor3::from_matrix(split.a, joined.left_dim(), d1, rank),
                   Tensor3::from_matrix(split.b, rank, d2, joined.right_dim()), split.error};
}

} // namespace detail

/// MPS in canonical form around `center`: tensors to the left are
/// left-isometries, tensors to the right are right-isometries, and the norm
/// equals the Frobenius norm of the center tensor.
class CanonicalMPS : public MPS {
public:
  CanonicalMPS() = default;

  /// Canonicalize `state` at `center`. One exact orthogonalization pass is
  /// followed by a truncating sweep, so the reported error increment equals
  /// the norm-2 distance between input and output (root-sum-square of the
  /// per-bond truncations).
  CanonicalMPS(const MPS &state, index_t center, const Strategy &strategy)
      : MPS(state), center_(0) {
    if (center < 0 || center >= size())
      throw shape_error("canonical center out of range");
    const index_t L = size();
    // Pass 1: exact left-to-right QR orthogonalization.
    for (index_t n = 0; n + 1 < L; ++n) {
      auto &t = tensors_[static_cast<size_t>(n)];
      Eigen::HouseholderQR<Matrix> qr(t.left_matrix());
      const index_t rank = std::min(t.left_dim() * t.phys_dim(), t.right_dim());
      Matrix q = qr.householderQ() * Matrix::Identity(t.left_dim() * t.phys_dim(), rank);
      Matrix r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
      Tensor3 qt = Tensor3::from_matrix(q, t.left_dim(), t.phys_dim(), rank);
      auto &next = tensors_[static_cast<size_t>(n + 1)];
      Matrix carried = r * next.right_matrix();
      next = Tensor3::from_matrix(carried, rank, next.phys_dim(), next.right_dim());
      t = std::move(qt);
    }
    // Pass 2: truncating right-to-left sweep; errors are mutually orthogonal.
    double err2 = 0.0;
    center_ = L - 1;
    while (center_ > 0)
      err2 += square(move_center_left(strategy));
    // Pass 3: move to the requested center (normally drops nothing more).
    while (center_ < center)
      err2 += square(move_center_right(strategy));
    const double delta = std::sqrt(err2) + detail::fp_error_floor(norm());
    update_error(delta);
    if (strategy.normalize)
      normalize_in_place();
  }

  index_t center() const { return center_; }

  double norm_squared() const {
    return square(tensors_[static_cast<size_t>(center_)].frobenius_norm());
  }
  double norm() const { return tensors_[static_cast<size_t>(center_)].frobenius_norm(); }

  void normalize_in_place() {
    const double n = norm();
    if (n == 0.0)
      return;
    auto &t = tensors_[static_cast<size_t>(center_)];
    for (index_t i = 0; i < t.size(); ++i)
      t.data()[i] /= n;
    error_ /= n;
  }

  /// Move the center one site to the right, truncating per `strategy`.
  double move_center_right(const Strategy &strategy) {
    if (center_ + 1 >= size())
      throw shape_error("move_center_right: already at the last site");
    auto &t = tensors_[static_cast<size_t>(center_)];
    auto split = schmidt_split(t.left_matrix(), strategy, SweepDirection::LEFT_TO_RIGHT);
    const index_t rank = split.a.cols();
    t = Tensor3::from_matrix(split.a, t.left_dim(), t.phys_dim(), rank);
    auto &next = tensors_[static_cast<size_t>(center_ + 1)];
    Matrix carried = split.b * next.right_matrix();
    next = Tensor3::from_matrix(carried, rank, next.phys_dim(), next.right_dim());
    ++center_;
    return split.error;
  }

  /// Move the center one site to the left, truncating per `strategy`.
  double move_center_left(const Strategy &strategy) {
    if (center_ == 0)
      throw shape_error("move_center_left: already at the first site");
    auto &t = tensors_[static_cast<size_t>(center_)];
    auto split = schmidt_split(t.right_matrix(), strategy, SweepDirection::RIGHT_TO_LEFT);
    const index_t rank = split.b.rows();
    t = Tensor3::from_matrix(split.b, rank, t.phys_dim(), t.right_dim());
    auto &prev = tensors_[static_cast<size_t>(center_ - 1)];
    Matrix carried = prev.left_matrix() * split.a;
    prev = Tensor3::from_matrix(carried, prev.left_dim(), prev.phys_dim(), rank);
    --center_;
    return split.error;
  }

  /// Recenter at `target`, accounting truncation in the error ledger.
  CanonicalMPS &recenter(index_t target, const Strategy &strategy) {
    if (target < 0 || target >= size())
      throw shape_error("recenter: center out of range");
    double err2 = 0.0;
    while (center_ < target)
      err2 += square(move_center_right(strategy));
    while (center_ > target)
      err2 += square(move_center_left(strategy));
    if (err2 > 0)
      update_error(std::sqrt(err2));
    return *this;
  }

  /// Replace the (center, center+1) pair by the truncated split of `joined`
  /// and move the center in `direction`. Returns the truncation error.
  double update_two_site(const Tensor3 &joined, SweepDirection direction,
                         const Strategy &strategy) {
    const index_t n = center_;
    const bool to_right = direction == SweepDirection::LEFT_TO_RIGHT;
    if ((to_right && n + 1 >= size()) || (!to_right && n == 0))
      throw shape_error("update_two_site: no neighboring pair in that direction");
    const index_t lo = to_right ? n : n - 1;
    const index_t d1 = tensors_[static_cast<size_t>(lo)].phys_dim();
    const index_t d2 = tensors_[static_cast<size_t>(lo + 1)].phys_dim();
    auto split = detail::split_pair(joined, d1, d2, strategy, direction);
    tensors_[static_cast<size_t>(lo)] = std::move(split.left);
    tensors_[static_cast<size_t>(lo + 1)] = std::move(split.right);
    center_ = to_right ? lo + 1 : lo;
    return split.error;
  }

  /// Raw tensor write for sweep kernels; the caller maintains the isometry
  /// invariants.
  void set_tensor(index_t n, Tensor3 t) { tensors_[static_cast<size_t>(n)] = std::move(t); }
  void set_center(index_t c) { center_ = c; }

private:
  static double square(double x) { return x * x; }
  index_t center_ = 0;
};

/// Canonicalize an MPS at `center` under `strategy`.
inline CanonicalMPS canonicalize(const MPS &state, index_t center = 0,
                                 const Strategy &strategy = DEFAULT_STRATEGY) {
  return CanonicalMPS(state, center, strategy);
}

/// Already-canonical input: just move the center.
inline CanonicalMPS canonicalize(const CanonicalMPS &state, index_t center = 0,
                                 const Strategy &strategy = DEFAULT_STRATEGY) {
  CanonicalMPS out = state;
  out.recenter(center, strategy);
  if (strategy.normalize)
    out.normalize_in_place();
  return out;
}

/// Lazy weighted sum of MPS with equal shapes.
class MPSSum {
public:
  MPSSum(std::vector<cplx> weights, std::vector<MPS> states)
      : weights_(std::move(weights)), states_(std::move(states)) {
    if (weights_.empty() || weights_.size() != states_.size())
      throw shape_error("MPSSum: weights and states must be non-empty and match");
    const auto dims = states_.front().physical_dimensions();
    for (const auto &s : states_)
      if (s.physical_dimensions() != dims)
        throw shape_error("MPSSum: states must share physical dimensions");
  }

  const std::vector<cplx> &weights() const { return weights_; }
  const std::vector<MPS> &states() const { return states_; }
  index_t terms() const { return static_cast<index_t>(states_.size()); }
  index_t size() const { return states_.front().size(); }

  /// Worst-case error bound of the combination.
  double error() const {
    double acc = 0.0;
    for (size_t l = 0; l < states_.size(); ++l)
      acc += std::abs(weights_[l]) * states_[l].error();
    return acc;
  }

  /// Materialize the sum by direct block concatenation of the tensors.
  MPS join() const {
    const index_t L = size();
    const index_t nterms = terms();
    std::vector<MPS> scaled;
    scaled.reserve(states_.size());
    for (size_t l = 0; l < states_.size(); ++l)
      scaled.push_back(states_[l].scaled(weights_[l]));
    if (nterms == 1)
      return scaled.front();
    std::vector<Tensor3> out;
    out.reserve(static_cast<size_t>(L));
    for (index_t n = 0; n < L; ++n) {
      index_t dl = 0, dr = 0;
      for (const auto &s : scaled) {
        dl += s[n].left_dim();
        dr += s[n].right_dim();
      }
      const index_t d = scaled.front()[n].phys_dim();
      if (n == 0) {
        Tensor3 t(1, d, dr);
        index_t off = 0;
        for (const auto &s : scaled) {
          for (index_t sp = 0; sp < d; ++sp)
            for (index_t b = 0; b < s[n].right_dim(); ++b)
              t(0, sp, off + b) = s[n](0, sp, b);
          off += s[n].right_dim();
        }
        out.push_back(std::move(t));
      } else if (n == L - 1) {
        Tensor3 t(dl, d, 1);
        index_t off = 0;
        for (const auto &s : scaled) {
          for (index_t a = 0; a < s[n].left_dim(); ++a)
            for (index_t sp = 0; sp < d; ++sp)
              t(off + a, sp, 0) = s[n](a, sp, 0);
          off += s[n].left_dim();
        }
        out.push_back(std::move(t));
      } else {
        Tensor3 t(dl, d, dr);
        index_t offl = 0, offr = 0;
        for (const auto &s : scaled) {
          for (index_t a = 0; a < s[n].left_dim(); ++a)
            for (index_t sp = 0; sp < d; ++sp)
              for (index_t b = 0; b < s[n].right_dim(); ++b)
                t(offl + a, sp, offr + b) = s[n](a, sp, b);
          offl += s[n].left_dim();
          offr += s[n].right_dim();
        }
        out.push_back(std::move(t));
      }
    }
    return MPS(std::move(out), error());
  }

  double norm_squared() const;

private:
  std::vector<cplx> weights_;
  std::vector<MPS> states_;
};

/// <u, v> with the first argument conjugated, by left-to-right environment
/// contraction.
inline cplx scprod(const MPS &u, const MPS &v) {
  if (u.size() != v.size())
    throw shape_error("scprod: states of different length");
  Matrix env = detail::begin_environment();
  for (index_t n = 0; n < u.size(); ++n)
    env = detail::update_left_environment(env, u[n], v[n]);
  return detail::end_environment(env);
}

inline double MPSSum::norm_squared() const {
  cplx acc(0);
  for (size_t l = 0; l < states_.size(); ++l)
    for (size_t m = 0; m < states_.size(); ++m)
      acc += std::conj(weights_[l]) * weights_[m] * scprod(states_[l], states_[m]);
  return std::real(acc);
}

inline double norm(const MPS &state) { return state.norm(); }
inline double norm(const CanonicalMPS &state) { return state.norm(); }

/// Contract an MPS to the dense vector it represents, most significant
/// physical index first.
inline Vector mps_to_dense(const MPS &state, index_t guard = DENSE_VECTOR_GUARD) {
  const index_t dim = state.dimension(guard);
  RowMatrix acc = RowMatrix::Ones(1, 1);
  for (index_t n = 0; n < state.size(); ++n) {
    const auto &t = state[n];
    RowMatrix next = acc * t.right_matrix(); // (D) x (d*chi)
    acc = Eigen::Map<const RowMatrix>(next.data(), next.rows() * t.phys_dim(), t.right_dim());
  }
  if (acc.rows() != dim || acc.cols() != 1)
    throw shape_error("mps_to_dense: inconsistent contraction");
  return Vector(acc.col(0));
}

/// Encode a dense vector as a CanonicalMPS at center 0, splitting the index
/// per `dims` (most significant first) and truncating per `strategy`.
inline CanonicalMPS mps_from_dense(const Vector &v, const std::vector<index_t> &dims,
                                   const Strategy &strategy = DEFAULT_STRATEGY) {
  index_t total = 1;
  for (index_t d : dims) {
    if (d < 1)
      throw shape_error("mps_from_dense: physical dimensions must be >= 1");
    total *= d;
  }
  if (total != v.size())
    throw shape_error("mps_from_dense: vector length does not match dimensions");
  const index_t L = static_cast<index_t>(dims.size());
  std::vector<Tensor3> tensors(static_cast<size_t>(L));
  // Right-to-left splits keep every truncation orthogonal to the others.
  RowMatrix rest(1, v.size());
  for (index_t i = 0; i < v.size(); ++i)
    rest(0, i) = v(i);
  double err2 = 0.0;
  index_t right_bond = 1;
  for (index_t n = L - 1; n > 0; --n) {
    const index_t d = dims[static_cast<size_t>(n)];
    Eigen::Map<const RowMatrix> m(rest.data(), rest.rows() * rest.cols() / (d * right_bond),
                                  d * right_bond);
    auto split = schmidt_split(m, strategy, SweepDirection::RIGHT_TO_LEFT);
    err2 += split.error * split.error;
    const index_t rank = split.b.rows();
    tensors[static_cast<size_t>(n)] = Tensor3::from_matrix(split.b, rank, d, right_bond);
    rest = split.a;
    right_bond = rank;
  }
  tensors[0] = Tensor3::from_matrix(rest, 1, dims[0], right_bond);
  MPS out(std::move(tensors), std::sqrt(err2) + detail::fp_error_floor(v.norm()));
  CanonicalMPS result(out, 0, NO_TRUNCATION);
  result.set_error(out.error());
  if (strategy.normalize)
    result.normalize_in_place();
  return result;
}

/// Deterministic random MPS with entries uniform in the complex unit square
/// and interior bonds min(bond, d^k, d^(L-k)).
inline MPS random_uniform_mps(index_t L, index_t d, index_t bond, uint64_t seed) {
  if (L < 1 || d < 1 || bond < 1)
    throw shape_error("random_uniform_mps: L, d, bond must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Tensor3> tensors;
  tensors.reserve(static_cast<size_t>(L));
  auto bond_at = [&](index_t cut) {
    // cut in [0, L]; clamp growth from both chain ends
    double left = std::pow(static_cast<double>(d), static_cast<double>(cut));
    double right = std::pow(static_cast<double>(d), static_cast<double>(L - cut));
    double cap = std::min({static_cast<double>(bond), left, right});
    return static_cast<index_t>(std::max(1.0, cap));
  };
  for (index_t n = 0; n < L; ++n) {
    Tensor3 t(bond_at(n), d, bond_at(n + 1));
    for (index_t i = 0; i < t.size(); ++i)
      t.data()[i] = cplx(dist(rng), dist(rng));
    tensors.push_back(std::move(t));
  }
  return MPS(std::move(tensors), 0.0);
}

/// Product state with the same single-site vector at every site.
inline MPS product_state(index_t L, const Vector &site) {
  std::vector<Tensor3> tensors;
  tensors.reserve(static_cast<size_t>(L));
  for (index_t n = 0; n < L; ++n) {
    Tensor3 t(1, site.size(), 1);
    for (index_t s = 0; s < site.size(); ++s)
      t(0, s, 0) = site(s);
    tensors.push_back(std::move(t));
  }
  return MPS(std::move(tensors), 0.0);
}

/// Computational basis state |i> on L sites of dimension d.
inline MPS basis_state(index_t L, index_t d, index_t idx) {
  std::vector<Tensor3> tensors;
  tensors.reserve(static_cast<size_t>(L));
  index_t rem = idx;
  for (index_t n = L - 1; n >= 0; --n) {
    Tensor3 t(1, d, 1);
    t(0, rem % d, 0) = 1.0;
    tensors.push_back(std::move(t));
    rem /= d;
    if (n == 0)
      break;
  }
  std::reverse(tensors.begin(), tensors.end());
  return MPS(std::move(tensors), 0.0);
}

} // namespace ttlab
