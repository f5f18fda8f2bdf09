#pragma once

#include <Eigen/SVD>

#include "ttlab/tensor.hpp"
#include "ttlab/types.hpp"

namespace ttlab {

namespace detail {

struct SVDResult {
  Matrix u;
  RealVector s;
  Matrix v; // columns are right singular vectors, theta = u * diag(s) * v^H
};

inline SVDResult svd_with_retry(const Matrix &theta) {
  auto run = [](const Matrix &m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return SVDResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  };
  SVDResult out = run(theta);
  if (out.s.allFinite() && out.u.allFinite() && out.v.allFinite())
    return out;
  // Known backend instabilities: retry once on a perturbed copy.
  Matrix jittered = theta;
  const double eps = 1e-14 * theta.norm();
  for (index_t j = 0; j < jittered.cols(); ++j)
    for (index_t i = 0; i < jittered.rows(); ++i)
      jittered(i, j) += eps * cplx(((i + 31 * j) % 7) / 7.0, ((3 * i + j) % 5) / 5.0);
  out = run(jittered);
  if (out.s.allFinite() && out.u.allFinite() && out.v.allFinite())
    return out;
  throw numeric_error("SVD failed to converge after jitter retry");
}

/// Number of singular values kept under `strategy`: at most max_bond values
/// above tolerance * s_max, never fewer than one.
inline index_t truncation_rank(const RealVector &s, const Strategy &strategy) {
  if (s.size() == 0)
    return 0;
  const double cutoff = strategy.tolerance * s(0);
  index_t rank = 0;
  while (rank < s.size() && s(rank) > cutoff)
    ++rank;
  if (rank < 1)
    rank = 1;
  if (strategy.max_bond != UNBOUNDED_BOND && rank > strategy.max_bond)
    rank = strategy.max_bond;
  return rank;
}

inline double dropped_weight(const RealVector &s, index_t rank) {
  double acc = 0.0;
  for (index_t k = rank; k < s.size(); ++k)
    acc += s(k) * s(k);
  return std::sqrt(acc);
}

} // namespace detail

struct SchmidtSplit {
  Matrix a; // rows x rank
  Matrix b; // rank x cols
  double error;
};

/// Truncated two-factor split theta ~= a * b. On LEFT_TO_RIGHT sweeps the
/// left factor is an isometry (a^H a = I); on RIGHT_TO_LEFT the right one is.
/// The reported error is the norm-2 of the dropped singular values.
inline SchmidtSplit schmidt_split(const Matrix &theta, const Strategy &strategy,
                                  SweepDirection direction = SweepDirection::LEFT_TO_RIGHT) {
  if (!theta.allFinite())
    throw numeric_error("schmidt_split: non-finite input");
  auto svd = detail::svd_with_retry(theta);
  const index_t rank = detail::truncation_rank(svd.s, strategy);
  const double err = detail::dropped_weight(svd.s, rank);
  SchmidtSplit out;
  out.error = err;
  if (direction == SweepDirection::LEFT_TO_RIGHT) {
    out.a = svd.u.leftCols(rank);
    out.b = svd.s.head(rank).asDiagonal() * svd.v.leftCols(rank).adjoint();
  } else {
    out.a = svd.u.leftCols(rank) * svd.s.head(rank).asDiagonal();
    out.b = svd.v.leftCols(rank).adjoint();
  }
  return out;
}

/// Schmidt coefficients across a bipartition.
inline RealVector schmidt_values(const Matrix &theta) {
  return detail::svd_with_retry(theta).s;
}

} // namespace ttlab
