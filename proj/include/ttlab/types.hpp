#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ttlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using index_t = Eigen::Index;

inline constexpr index_t UNBOUNDED_BOND = std::numeric_limits<index_t>::max();

/// Thrown on incompatible tensor/vector shapes.
class shape_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a dense conversion would exceed the configured guard.
class capacity_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown on numerical failures (SVD non-convergence, solver breakdown).
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Truncation { SVD_TRUNCATE, VARIATIONAL };

enum class SweepDirection { LEFT_TO_RIGHT, RIGHT_TO_LEFT };

/// Truncation and simplification policy shared by all approximate operations.
///
/// `tolerance` is a relative singular-value cutoff: a two-tensor split keeps
/// singular values above `tolerance` times the largest one (and at most
/// `max_bond` of them). `simplification_tolerance` is the relative residual
/// at which variational sweeps stop. All truncation errors are accounted in
/// norm-2 units.
struct Strategy {
  Truncation method = Truncation::VARIATIONAL;
  double tolerance = 1e-12;
  double simplification_tolerance = 1e-12;
  index_t max_bond = UNBOUNDED_BOND;
  int max_sweeps = 4;
  bool normalize = false;

  Strategy with_method(Truncation m) const {
    Strategy out = *this;
    out.method = m;
    return out;
  }
  Strategy with_tolerance(double tol) const {
    Strategy out = *this;
    out.tolerance = tol;
    return out;
  }
  Strategy with_simplification_tolerance(double tol) const {
    Strategy out = *this;
    out.simplification_tolerance = tol;
    return out;
  }
  Strategy with_max_bond(index_t chi) const {
    Strategy out = *this;
    out.max_bond = chi;
    return out;
  }
  Strategy with_max_sweeps(int sweeps) const {
    Strategy out = *this;
    out.max_sweeps = sweeps;
    return out;
  }
  Strategy with_normalize(bool flag) const {
    Strategy out = *this;
    out.normalize = flag;
    return out;
  }
};

inline const Strategy DEFAULT_STRATEGY{};

/// Exact-arithmetic policy: no truncation, no bond limits.
inline const Strategy NO_TRUNCATION =
    Strategy{Truncation::SVD_TRUNCATE, 0.0, 0.0, UNBOUNDED_BOND, 4, false};

namespace detail {

// Per-operation floating-point allowance added to error ledgers so that the
// recorded bound also covers roundoff of exact contractions.
inline double fp_error_floor(double scale) {
  return 32.0 * std::numeric_limits<double>::epsilon() * scale;
}

} // namespace detail

} // namespace ttlab
