#pragma once

#include <Eigen/Eigenvalues>

#include "ttlab/linsolvers.hpp"

namespace ttlab {

namespace detail {

inline constexpr index_t DENSE_LOCAL_SOLVER_LIMIT = 4096;

/// y = H_eff x for the two-site effective operator, without forming the
/// dense matrix. x and y are vectors over (a, s1, s2, b).
inline Vector apply_effective_two_site(const OpEnv &lenv, const Tensor4 &w1, const Tensor4 &w2,
                                       const OpEnv &renv, const Vector &x) {
  const index_t chiA = lenv[0].cols(), chiB = renv[0].cols();
  const index_t d1 = w1.in_dim(), d2 = w2.in_dim();
  const index_t d1o = w1.out_dim(), d2o = w2.out_dim();
  const index_t chiAo = lenv[0].rows(), chiBo = renv[0].rows();
  if (x.size() != chiA * d1 * d2 * chiB)
    throw shape_error("apply_effective_two_site: bad vector size");
  // step 1: X[c0][a', (s1 s2 B)] = L[c0] * x
  // step 2: contract W1 -> T[c1][a', s1', (s2 B)]
  // step 3: contract W2 -> U[c2][a', s1', s2', B]
  // step 4: contract R  -> y[a', s1', s2', b']
  Eigen::Map<const RowMatrix> xmat(x.data(), chiA, d1 * d2 * chiB);
  std::vector<RowMatrix> xl(static_cast<size_t>(w1.left_dim()));
  for (index_t c0 = 0; c0 < w1.left_dim(); ++c0)
    xl[static_cast<size_t>(c0)] = lenv[static_cast<size_t>(c0)] * xmat; // (a', d1*d2*chiB)
  std::vector<RowMatrix> t(static_cast<size_t>(w1.right_dim()),
                           RowMatrix::Zero(chiAo * d1o, d2 * chiB));
  for (index_t c0 = 0; c0 < w1.left_dim(); ++c0)
    for (index_t s1o = 0; s1o < d1o; ++s1o)
      for (index_t s1 = 0; s1 < d1; ++s1)
        for (index_t c1 = 0; c1 < w1.right_dim(); ++c1) {
          const cplx w = w1(c0, s1o, s1, c1);
          if (w == cplx(0))
            continue;
          auto &dst = t[static_cast<size_t>(c1)];
          const auto &src = xl[static_cast<size_t>(c0)];
          for (index_t a = 0; a < chiAo; ++a)
            dst.row(a * d1o + s1o) += w * src.block(a, s1 * d2 * chiB, 1, d2 * chiB);
        }
  std::vector<RowMatrix> u(static_cast<size_t>(w2.right_dim()),
                           RowMatrix::Zero(chiAo * d1o * d2o, chiB));
  for (index_t c1 = 0; c1 < w2.left_dim(); ++c1)
    for (index_t s2o = 0; s2o < d2o; ++s2o)
      for (index_t s2 = 0; s2 < d2; ++s2)
        for (index_t c2 = 0; c2 < w2.right_dim(); ++c2) {
          const cplx w = w2(c1, s2o, s2, c2);
          if (w == cplx(0))
            continue;
          auto &dst = u[static_cast<size_t>(c2)];
          const auto &src = t[static_cast<size_t>(c1)];
          for (index_t row = 0; row < chiAo * d1o; ++row)
            dst.row(row * d2o + s2o) += w * src.block(row, s2 * chiB, 1, chiB);
        }
  Vector y = Vector::Zero(chiAo * d1o * d2o * chiBo);
  Eigen::Map<RowMatrix> ymat(y.data(), chiAo * d1o * d2o, chiBo);
  for (index_t c2 = 0; c2 < w2.right_dim(); ++c2)
    ymat += u[static_cast<size_t>(c2)] * renv[static_cast<size_t>(c2)].transpose();
  return y;
}

/// Smallest eigenpair of a Hermitian operator given as a matvec, by Lanczos
/// with full reorthogonalization on a small Krylov basis.
template <typename MatVec>
std::pair<double, Vector> lanczos_smallest(const MatVec &mv, const Vector &start, int krylov_dim,
                                           double tol) {
  std::vector<Vector> basis;
  Vector q = start;
  double nq = q.norm();
  if (nq == 0.0)
    throw numeric_error("lanczos: zero start vector");
  q /= nq;
  basis.push_back(q);
  std::vector<double> alpha, beta;
  double prev = std::numeric_limits<double>::infinity();
  std::pair<double, Vector> best{0.0, start};
  for (int k = 0; k < krylov_dim; ++k) {
    Vector w = mv(basis.back());
    const double a = std::real(basis.back().dot(w));
    alpha.push_back(a);
    w -= a * basis.back();
    if (k > 0)
      w -= beta.back() * basis[static_cast<size_t>(k - 1)];
    for (const auto &v : basis) // full reorthogonalization
      w -= v.dot(w) * v;
    const double bnorm = w.norm();
    // tridiagonal eigenproblem
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<size_t>(i)];
      if (i + 1 < m)
        tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    const double lambda = eig.eigenvalues()(0);
    Vector vec = Vector::Zero(start.size());
    for (int i = 0; i < m; ++i)
      vec += eig.eigenvectors()(i, 0) * basis[static_cast<size_t>(i)];
    best = {lambda, vec.normalized()};
    if (std::abs(lambda - prev) <= tol * std::max(1.0, std::abs(lambda)) || bnorm <= 1e-14)
      break;
    prev = lambda;
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  return best;
}

/// Smallest eigenpair of the two-site effective operator; dense below the
/// size limit, Lanczos above it.
inline std::pair<double, Vector> solve_effective_two_site(const OpEnv &lenv, const Tensor4 &w1,
                                                          const Tensor4 &w2, const OpEnv &renv,
                                                          const Vector &guess) {
  if (guess.size() <= DENSE_LOCAL_SOLVER_LIMIT) {
    Matrix h = effective_two_site_operator(lenv, w1, w2, renv);
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    return {eig.eigenvalues()(0), eig.eigenvectors().col(0)};
  }
  auto mv = [&](const Vector &x) { return apply_effective_two_site(lenv, w1, w2, renv, x); };
  return lanczos_smallest(mv, guess, 20, 1e-12);
}

} // namespace detail

struct EigenSolve {
  double value = 0.0;
  CanonicalMPS state;
  SolveReport report;
};

/// Two-site DMRG search for the smallest eigenvalue of a Hermitian MPO.
inline EigenSolve dmrg_min_eigen(const MPO &H, const MPS &guess,
                                 const Strategy &strategy = DEFAULT_STRATEGY, int maxiter = 20,
                                 double tol = 1e-10) {
  const index_t L = H.size();
  if (guess.size() != L)
    throw shape_error("dmrg_min_eigen: operator and guess sizes differ");
  EigenSolve out;
  CanonicalMPS psi = canonicalize(guess, 0, strategy.with_normalize(true));
  psi.normalize_in_place();
  if (L == 1) {
    Matrix h = mpo_to_dense(H);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    out.value = eig.eigenvalues()(0);
    psi.set_tensor(0, detail::vector_to_tensor(eig.eigenvectors().col(0), 1, h.rows(), 1));
    out.state = std::move(psi);
    out.report.converged = true;
    out.report.value = out.value;
    return out;
  }

  std::vector<detail::OpEnv> lop(static_cast<size_t>(L) + 1), rop(static_cast<size_t>(L) + 1);
  lop[0] = detail::begin_op_environment();
  rop[static_cast<size_t>(L)] = detail::begin_op_environment();
  for (index_t n = L - 1; n > 0; --n)
    rop[static_cast<size_t>(n)] =
        detail::update_right_op_environment(rop[static_cast<size_t>(n + 1)], psi[n], H[n], psi[n]);

  double energy = std::real(expectation_mpo(H, psi));
  out.report.record(0, energy);
  for (int sweep = 0; sweep < maxiter; ++sweep) {
    double lambda = energy;
    for (index_t n = 0; n + 1 < L; ++n) {
      Vector local = detail::tensor_to_vector(detail::join_pair(psi[n], psi[n + 1]));
      auto [lam, vec] = detail::solve_effective_two_site(
          lop[static_cast<size_t>(n)], H[n], H[n + 1], rop[static_cast<size_t>(n + 2)], local);
      lambda = lam;
      psi.update_two_site(detail::vector_to_tensor(vec, psi[n].left_dim(),
                                                   psi[n].phys_dim() * psi[n + 1].phys_dim(),
                                                   psi[n + 1].right_dim()),
                          SweepDirection::LEFT_TO_RIGHT, strategy);
      psi.normalize_in_place();
      lop[static_cast<size_t>(n + 1)] =
          detail::update_left_op_environment(lop[static_cast<size_t>(n)], psi[n], H[n], psi[n]);
    }
    for (index_t n = L - 2; n >= 0; --n) {
      Vector local = detail::tensor_to_vector(detail::join_pair(psi[n], psi[n + 1]));
      auto [lam, vec] = detail::solve_effective_two_site(
          lop[static_cast<size_t>(n)], H[n], H[n + 1], rop[static_cast<size_t>(n + 2)], local);
      lambda = lam;
      psi.update_two_site(detail::vector_to_tensor(vec, psi[n].left_dim(),
                                                   psi[n].phys_dim() * psi[n + 1].phys_dim(),
                                                   psi[n + 1].right_dim()),
                          SweepDirection::RIGHT_TO_LEFT, strategy);
      psi.normalize_in_place();
      rop[static_cast<size_t>(n + 1)] = detail::update_right_op_environment(
          rop[static_cast<size_t>(n + 2)], psi[n + 1], H[n + 1], psi[n + 1]);
    }
    out.report.iterations = sweep + 1;
    out.report.record(sweep + 1, lambda);
    const double change = std::abs(lambda - energy);
    energy = lambda;
    if (change <= tol * std::max(1.0, std::abs(energy))) {
      out.report.converged = true;
      break;
    }
  }
  // report the Rayleigh quotient of the final state
  const cplx rq = expectation_mpo(H, psi);
  if (std::abs(std::imag(rq)) > 1e-8 * std::max(1.0, std::abs(rq)))
    out.report.warning = "operator is not Hermitian at the reported tolerance";
  out.value = std::real(rq) / psi.norm_squared();
  out.report.value = out.value;
  out.report.residual = std::abs(out.value - energy);
  out.state = std::move(psi);
  return out;
}

/// Gradient descent on the Rayleigh quotient with exact line minimization;
/// the step is computed from <H'^2> and <H'^3> of the shifted operator.
inline EigenSolve gradient_descent(const MPO &H, const MPS &guess,
                                   const Strategy &strategy = DEFAULT_STRATEGY, int maxiter = 100,
                                   double tol = 1e-10) {
  EigenSolve out;
  CanonicalMPS v = canonicalize(guess, 0, strategy.with_normalize(true));
  v.normalize_in_place();
  double energy = std::real(expectation_mpo(H, v));
  out.report.record(0, energy);
  for (int it = 0; it < maxiter; ++it) {
    CanonicalMPS w = apply(H, v, strategy); // H v
    const double e = std::real(scprod(v, w));
    const double h2 = std::real(scprod(w, w));
    const double h3 = std::real(expectation_mpo(H, w));
    const double a = h2 - e * e;            // <H'^2>
    const double b = h3 - 3 * e * h2 + 2 * e * e * e; // <H'^3>
    out.report.iterations = it + 1;
    if (a <= 1e-28 * std::max(1.0, h2)) {
      // gradient vanishes: eigenvector reached
      energy = e;
      out.report.record(it + 1, energy);
      out.report.converged = true;
      break;
    }
    const double step = (b - std::sqrt(b * b + 4 * a * a * a)) / (2 * a * a);
    v = simplify(MPSSum({cplx(1.0 - step * e), cplx(step)}, {v, w}), strategy);
    v.normalize_in_place();
    const double enew = std::real(expectation_mpo(H, v));
    out.report.record(it + 1, enew);
    const double change = std::abs(enew - energy);
    energy = enew;
    if (change <= tol * std::max(1.0, std::abs(energy))) {
      out.report.converged = true;
      break;
    }
  }
  out.value = energy;
  out.report.value = energy;
  out.state = std::move(v);
  return out;
}

/// Power iteration for the dominant eigenvalue, or for the smallest one via
/// inverse iteration with a CGS solve per step.
inline EigenSolve power_method(const MPO &H, const MPS &guess,
                               const Strategy &strategy = DEFAULT_STRATEGY, int maxiter = 100,
                               double tol = 1e-10, bool inverse = false, double shift = 0.0) {
  EigenSolve out;
  CanonicalMPS v = canonicalize(guess, 0, strategy.with_normalize(true));
  v.normalize_in_place();
  double lambda = std::real(expectation_mpo(H, v));
  out.report.record(0, lambda);
  std::optional<MPO> shifted;
  if (inverse)
    shifted = (shift == 0.0)
                  ? H
                  : mpo_sum({cplx(1), cplx(-shift)},
                            {H, mpo_identity(H.in_dimensions())});
  for (int it = 0; it < maxiter; ++it) {
    CanonicalMPS w = [&] {
      if (!inverse)
        return apply(H, v, strategy);
      auto solve = cg_solve(*shifted, v, v, strategy, 200, 1e-10, CgVariant::CGS);
      return solve.x;
    }();
    const double wnorm = w.norm();
    if (wnorm == 0.0)
      throw numeric_error("power_method: operator annihilated the iterate");
    w.normalize_in_place();
    v = std::move(w);
    const double lnew = std::real(expectation_mpo(H, v)) / v.norm_squared();
    out.report.iterations = it + 1;
    out.report.record(it + 1, lnew);
    const double change = std::abs(lnew - lambda);
    lambda = lnew;
    if (change <= tol * std::max(1.0, std::abs(lambda))) {
      out.report.converged = true;
      break;
    }
  }
  out.value = lambda;
  out.report.value = lambda;
  out.state = std::move(v);
  return out;
}

/// Krylov basis with the projected operator and overlap matrices.
class KrylovBasis {
public:
  explicit KrylovBasis(const MPO &op) : op_(op) {}

  index_t size() const { return static_cast<index_t>(vectors_.size()); }
  const std::vector<MPS> &vectors() const { return vectors_; }
  const Matrix &projected_operator() const { return a_; }
  const Matrix &overlap() const { return n_; }

  void reset(const MPS &v) {
    vectors_.clear();
    a_.resize(0, 0);
    n_.resize(0, 0);
    append(v);
  }

  void append(const MPS &v) {
    const index_t m = size();
    Matrix a2(m + 1, m + 1), n2(m + 1, m + 1);
    a2.topLeftCorner(m, m) = a_;
    n2.topLeftCorner(m, m) = n_;
    for (index_t i = 0; i < m; ++i) {
      a2(i, m) = expectation_mpo(op_, vectors_[static_cast<size_t>(i)], v);
      a2(m, i) = std::conj(a2(i, m));
      n2(i, m) = scprod(vectors_[static_cast<size_t>(i)], v);
      n2(m, i) = std::conj(n2(i, m));
    }
    a2(m, m) = std::real(expectation_mpo(op_, v));
    n2(m, m) = v.norm_squared();
    a_ = std::move(a2);
    n_ = std::move(n2);
    vectors_.push_back(v);
  }

  /// Smallest generalized eigenpair A c = lambda N c, discarding overlap
  /// directions below `rel_cut` of the largest eigenvalue of N.
  std::pair<double, Vector> solve_smallest(double rel_cut = 1e-12) const {
    Eigen::SelfAdjointEigenSolver<Matrix> overlap(n_);
    const auto &d = overlap.eigenvalues();
    const double cut = rel_cut * d.maxCoeff();
    std::vector<index_t> keep;
    for (index_t i = 0; i < d.size(); ++i)
      if (d(i) > cut)
        keep.push_back(i);
    Matrix basis(n_.rows(), static_cast<index_t>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k)
      basis.col(static_cast<index_t>(k)) =
          overlap.eigenvectors().col(keep[k]) / std::sqrt(d(keep[k]));
    Matrix reduced = basis.adjoint() * a_ * basis;
    reduced = 0.5 * (reduced + reduced.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
    return {eig.eigenvalues()(0), basis * eig.eigenvectors().col(0)};
  }

  bool ill_conditioned(double limit = 1e12) const {
    Eigen::SelfAdjointEigenSolver<Matrix> overlap(n_);
    const auto &d = overlap.eigenvalues();
    return d.minCoeff() <= 0 || d.maxCoeff() / d.minCoeff() > limit;
  }

private:
  MPO op_;
  std::vector<MPS> vectors_;
  Matrix a_;
  Matrix n_;
};

/// Restarted Arnoldi eigensolver for the smallest eigenvalue. A window of 1
/// reduces to the power update, a window of 2 to gradient descent.
inline EigenSolve arnoldi_eigh(const MPO &H, const MPS &guess, int window = 8, int maxiter = 100,
                               double tol = 1e-10, const Strategy &strategy = DEFAULT_STRATEGY) {
  if (window < 1)
    throw shape_error("arnoldi_eigh: window must be >= 1");
  if (window == 1) {
    // degenerate case: plain power updates
    return power_method(H, guess, strategy, maxiter, tol);
  }
  EigenSolve out;
  CanonicalMPS v = canonicalize(guess, 0, strategy.with_normalize(true));
  v.normalize_in_place();
  double lambda = std::real(expectation_mpo(H, v));
  out.report.record(0, lambda);
  KrylovBasis basis(H);
  basis.reset(v);
  for (int it = 0; it < maxiter; ++it) {
    CanonicalMPS w = apply(H, basis.vectors().back(), strategy);
    const double wnorm = w.norm();
    if (wnorm <= 1e-14) {
      basis.reset(v);
      continue;
    }
    w.normalize_in_place();
    basis.append(w);
    auto [lam, coeff] = basis.solve_smallest();
    std::vector<cplx> weights(coeff.data(), coeff.data() + coeff.size());
    v = simplify(MPSSum(weights, basis.vectors()), strategy);
    v.normalize_in_place();
    out.report.iterations = it + 1;
    out.report.record(it + 1, lam);
    const double change = std::abs(lam - lambda);
    lambda = lam;
    if (change <= tol * std::max(1.0, std::abs(lambda))) {
      out.report.converged = true;
      break;
    }
    if (basis.size() >= window || basis.ill_conditioned())
      basis.reset(v);
  }
  out.value = std::real(expectation_mpo(H, v)) / v.norm_squared();
  out.report.value = out.value;
  out.state = std::move(v);
  return out;
}

} // namespace ttlab
