#pragma once

#include "ttlab/blas.hpp"
#include "ttlab/report.hpp"

namespace ttlab {

enum class CgVariant { CGS, BICGSTAB };

struct LinearSolve {
  CanonicalMPS x;
  double residual = 0.0;
  SolveReport report;
};

namespace detail {

/// ||b - A x|| computed through an exact block sum and orthogonalization, so
/// small residuals are not lost to cancellation.
inline double residual_norm_exact(const MPO &A, const MPS &b, const MPS &x) {
  MPS diff = MPSSum({1.0, -1.0}, {b, apply_raw(A, x)}).join();
  return CanonicalMPS(diff, 0, NO_TRUNCATION).norm();
}

} // namespace detail

/// Conjugate-gradient solve of A x = b for Hermitian positive-definite A
/// (CGS) or the stabilized bi-conjugate recurrence for generic A (BICGSTAB),
/// with a simplification after every linear combination.
inline LinearSolve cg_solve(const MPO &A, const MPS &b, std::optional<MPS> guess = std::nullopt,
                            const Strategy &strategy = DEFAULT_STRATEGY, int maxiter = 100,
                            double tol = 1e-10, CgVariant variant = CgVariant::CGS) {
  LinearSolve out;
  const double normb = b.norm();
  CanonicalMPS x = simplify(guess ? *guess : b.zero_like(), strategy);
  auto true_residual = [&](const MPS &xv) {
    return simplify(MPSSum({1.0, -1.0}, {b, detail::apply_raw(A, xv)}), strategy);
  };
  CanonicalMPS r = true_residual(x);
  double residual = detail::residual_norm_exact(A, b, x);

  if (variant == CgVariant::CGS) {
    CanonicalMPS p = r;
    for (int it = 0; it < maxiter; ++it) {
      if (residual <= tol * normb) {
        out.report.converged = true;
        break;
      }
      CanonicalMPS ap = apply(A, p, strategy);
      const double pap = std::real(scprod(p, ap));
      if (std::abs(pap) <= 1e-14 * p.norm_squared())
        throw numeric_error("cg_solve: vanishing curvature p^H A p");
      const double alpha = residual * residual / pap;
      x = simplify(MPSSum({1.0, alpha}, {x, p}), strategy);
      r = true_residual(x);
      const double oldres = residual;
      residual = detail::residual_norm_exact(A, b, x);
      const double beta = (residual / oldres) * (residual / oldres);
      p = simplify(MPSSum({1.0, beta}, {r, p}), strategy);
      out.report.iterations = it + 1;
      out.report.record(it + 1, residual);
    }
  } else {
    // standard BiCGSTAB recurrence (van der Vorst)
    MPS rhat = r;
    cplx rho(1), alpha(1), omega(1);
    CanonicalMPS p = simplify(b.zero_like(), NO_TRUNCATION);
    CanonicalMPS v = p;
    for (int it = 0; it < maxiter; ++it) {
      if (residual <= tol * normb) {
        out.report.converged = true;
        break;
      }
      const cplx rho_new = scprod(rhat, r);
      if (std::abs(rho_new) <= 1e-30)
        throw numeric_error("bicgstab: rho breakdown");
      const cplx beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      p = simplify(MPSSum({cplx(1), beta, -beta * omega}, {r, p, v}), strategy);
      v = apply(A, p, strategy);
      const cplx rhat_v = scprod(rhat, v);
      if (std::abs(rhat_v) <= 1e-30)
        throw numeric_error("bicgstab: curvature breakdown");
      alpha = rho / rhat_v;
      CanonicalMPS s = simplify(MPSSum({cplx(1), -alpha}, {r, v}), strategy);
      if (s.norm() <= tol * normb) {
        x = simplify(MPSSum({cplx(1), alpha}, {x, p}), strategy);
        r = s;
        residual = detail::residual_norm_exact(A, b, x);
        out.report.iterations = it + 1;
        out.report.record(it + 1, residual);
        out.report.converged = true;
        break;
      }
      CanonicalMPS t = apply(A, s, strategy);
      const double tt = std::real(scprod(t, t));
      if (tt <= 1e-30)
        throw numeric_error("bicgstab: t breakdown");
      omega = scprod(t, s) / tt;
      x = simplify(MPSSum({cplx(1), alpha, omega}, {x, p, s}), strategy);
      r = simplify(MPSSum({cplx(1), -omega}, {s, t}), strategy);
      residual = detail::residual_norm_exact(A, b, x);
      out.report.iterations = it + 1;
      out.report.record(it + 1, residual);
    }
  }
  if (residual <= tol * normb)
    out.report.converged = true;
  out.residual = residual;
  out.report.residual = residual;
  out.report.value = residual;
  out.x = std::move(x);
  return out;
}

/// Restarted GMRES with modified Gram-Schmidt on MPS basis vectors.
inline LinearSolve gmres_solve(const MPO &A, const MPS &b, std::optional<MPS> guess = std::nullopt,
                               const Strategy &strategy = DEFAULT_STRATEGY, int maxiter = 100,
                               int restart_m = 20, double tol = 1e-10) {
  LinearSolve out;
  const double normb = b.norm();
  CanonicalMPS x = simplify(guess ? *guess : b.zero_like(), strategy);
  int iter = 0;
  double residual = 0.0;
  while (iter < maxiter) {
    CanonicalMPS r = simplify(MPSSum({1.0, -1.0}, {b, detail::apply_raw(A, x)}), strategy);
    const double beta = r.norm();
    residual = detail::residual_norm_exact(A, b, x);
    out.report.record(iter, residual);
    if (beta <= tol * normb) {
      out.report.converged = true;
      break;
    }
    std::vector<CanonicalMPS> basis;
    basis.push_back(simplify(r.scaled(1.0 / beta), strategy));
    Matrix h = Matrix::Zero(restart_m + 1, restart_m);
    int m_eff = 0;
    bool happy = false;
    for (int j = 0; j < restart_m && iter < maxiter; ++j, ++iter) {
      CanonicalMPS w = apply(A, basis[static_cast<size_t>(j)], strategy);
      const double wnorm0 = w.norm();
      std::vector<cplx> coeffs{cplx(1)};
      std::vector<MPS> terms{w};
      for (int i = 0; i <= j; ++i) {
        h(i, j) = scprod(basis[static_cast<size_t>(i)], w);
        coeffs.push_back(-h(i, j));
        terms.push_back(basis[static_cast<size_t>(i)]);
      }
      CanonicalMPS wperp = simplify(MPSSum(coeffs, terms), strategy);
      // one re-orthogonalization pass when truncation visibly leaked overlap
      double leak = 0.0;
      for (int i = 0; i <= j; ++i)
        leak = std::max(leak, std::abs(scprod(basis[static_cast<size_t>(i)], wperp)));
      if (leak > 1e-8 * std::max(wnorm0, 1e-300)) {
        std::vector<cplx> c2{cplx(1)};
        std::vector<MPS> t2{wperp};
        for (int i = 0; i <= j; ++i) {
          const cplx corr = scprod(basis[static_cast<size_t>(i)], wperp);
          h(i, j) += corr;
          c2.push_back(-corr);
          t2.push_back(basis[static_cast<size_t>(i)]);
        }
        wperp = simplify(MPSSum(c2, t2), strategy);
      }
      const double hnext = wperp.norm();
      h(j + 1, j) = hnext;
      m_eff = j + 1;
      if (hnext <= 1e-12 * std::max(1.0, wnorm0)) {
        happy = true; // exact solve within the subspace
        break;
      }
      basis.push_back(simplify(wperp.scaled(1.0 / hnext), strategy));
    }
    if (m_eff == 0)
      break;
    Matrix hbar = h.topLeftCorner(m_eff + 1, m_eff);
    Vector rhs = Vector::Zero(m_eff + 1);
    rhs(0) = beta;
    Vector y = hbar.colPivHouseholderQr().solve(rhs);
    std::vector<cplx> coeffs{cplx(1)};
    std::vector<MPS> terms{x};
    for (int j = 0; j < m_eff; ++j) {
      coeffs.push_back(y(j));
      terms.push_back(basis[static_cast<size_t>(j)]);
    }
    x = simplify(MPSSum(coeffs, terms), strategy);
    const double ls_estimate = (hbar * y - rhs).norm();
    out.report.iterations = iter;
    if (happy || ls_estimate <= tol * normb) {
      residual = detail::residual_norm_exact(A, b, x);
      out.report.record(iter, residual);
      if (residual <= tol * normb || happy) {
        out.report.converged = true;
        break;
      }
    } else {
      residual = ls_estimate;
    }
  }
  out.residual = residual;
  out.report.residual = residual;
  out.report.value = residual;
  out.x = std::move(x);
  return out;
}

/// Two-site sweep solver for A x = b: each local projected system
/// G_n a_n = f_n is solved densely and the pair updated under `strategy`.
inline LinearSolve dmrg_solve(const MPO &A, const MPS &b, std::optional<MPS> guess = std::nullopt,
                              const Strategy &strategy = DEFAULT_STRATEGY, int maxiter = 20,
                              double tol = 1e-10) {
  LinearSolve out;
  const index_t L = b.size();
  if (A.size() != L)
    throw shape_error("dmrg_solve: operator and vector sizes differ");
  const double normb = b.norm();
  CanonicalMPS x = canonicalize(guess ? *guess : b, 0, strategy);
  if (L == 1) {
    Matrix a = mpo_to_dense(A);
    Vector xb = a.colPivHouseholderQr().solve(mps_to_dense(b));
    x.set_tensor(0, detail::vector_to_tensor(xb, 1, b[0].phys_dim(), 1));
    out.residual = (a * xb - mps_to_dense(b)).norm() / normb;
    out.report.converged = out.residual <= tol;
    out.x = std::move(x);
    return out;
  }

  // operator environments around x (bra = ket = x) and projections of b
  std::vector<detail::OpEnv> lop(static_cast<size_t>(L) + 1), rop(static_cast<size_t>(L) + 1);
  std::vector<Matrix> lb(static_cast<size_t>(L) + 1), rb(static_cast<size_t>(L) + 1);
  lop[0] = detail::begin_op_environment();
  lb[0] = detail::begin_environment();
  rop[static_cast<size_t>(L)] = detail::begin_op_environment();
  rb[static_cast<size_t>(L)] = detail::begin_environment();
  for (index_t n = L - 1; n > 0; --n) {
    rop[static_cast<size_t>(n)] =
        detail::update_right_op_environment(rop[static_cast<size_t>(n + 1)], x[n], A[n], x[n]);
    rb[static_cast<size_t>(n)] =
        detail::update_right_environment(rb[static_cast<size_t>(n + 1)], x[n], b[n]);
  }

  double residual = 1.0;
  for (int sweep = 0; sweep < maxiter; ++sweep) {
    for (index_t n = 0; n + 1 < L; ++n) {
      Matrix g = detail::effective_two_site_operator(lop[static_cast<size_t>(n)], A[n], A[n + 1],
                                                     rop[static_cast<size_t>(n + 2)]);
      Tensor3 f = detail::project_pair(lb[static_cast<size_t>(n)], b[n], b[n + 1],
                                       rb[static_cast<size_t>(n + 2)]);
      Vector local = g.colPivHouseholderQr().solve(detail::tensor_to_vector(f));
      x.update_two_site(detail::vector_to_tensor(local, f.left_dim(), f.phys_dim(), f.right_dim()),
                        SweepDirection::LEFT_TO_RIGHT, strategy);
      lop[static_cast<size_t>(n + 1)] =
          detail::update_left_op_environment(lop[static_cast<size_t>(n)], x[n], A[n], x[n]);
      lb[static_cast<size_t>(n + 1)] =
          detail::update_left_environment(lb[static_cast<size_t>(n)], x[n], b[n]);
    }
    for (index_t n = L - 2; n >= 0; --n) {
      Matrix g = detail::effective_two_site_operator(lop[static_cast<size_t>(n)], A[n], A[n + 1],
                                                     rop[static_cast<size_t>(n + 2)]);
      Tensor3 f = detail::project_pair(lb[static_cast<size_t>(n)], b[n], b[n + 1],
                                       rb[static_cast<size_t>(n + 2)]);
      Vector local = g.colPivHouseholderQr().solve(detail::tensor_to_vector(f));
      x.update_two_site(detail::vector_to_tensor(local, f.left_dim(), f.phys_dim(), f.right_dim()),
                        SweepDirection::RIGHT_TO_LEFT, strategy);
      rop[static_cast<size_t>(n + 1)] = detail::update_right_op_environment(
          rop[static_cast<size_t>(n + 2)], x[n + 1], A[n + 1], x[n + 1]);
      rb[static_cast<size_t>(n + 1)] =
          detail::update_right_environment(rb[static_cast<size_t>(n + 2)], x[n + 1], b[n + 1]);
    }
    residual = detail::residual_norm_exact(A, b, x) / normb;
    out.report.iterations = sweep + 1;
    out.report.record(sweep + 1, residual);
    if (residual <= tol) {
      out.report.converged = true;
      break;
    }
  }
  out.residual = residual;
  out.report.residual = residual;
  out.report.value = residual;
  out.x = std::move(x);
  return out;
}

} // namespace ttlab
