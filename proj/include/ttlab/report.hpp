#pragma once

#include <utility>
#include <vector>

#include "ttlab/types.hpp"

namespace ttlab {

/// Convergence record shared by the iterative solvers. `trace` holds one
/// (iteration, residual-or-energy) entry per recorded step.
struct SolveReport {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> trace;
  std::string warning;

  void record(int iteration, double metric) { trace.emplace_back(iteration, metric); }
};

} // namespace ttlab
