#pragma once

#include <map>

#include "ttlab/simplify.hpp"

namespace ttlab {

enum class Boundary { PERIODIC, OPEN };

namespace detail {

/// Displacement operator (D_m v)_i = v_{i+m} on an n-qubit register, built
/// as a binary adder with a carry bond of size two. Open boundaries pin the
/// final carry, periodic ones trace over it.
inline MPO shift_mpo(index_t n, long long m, Boundary boundary) {
  const long long size = 1LL << n;
  const long long m_mod = ((m % size) + size) % size;
  if (m_mod == 0 && (boundary == Boundary::PERIODIC || m == 0))
    return mpo_identity(n, 2);
  // required final carry for open boundaries: 0 for forward shifts,
  // 1 for backward ones (wrap through 2^n)
  const index_t required_carry = (boundary == Boundary::OPEN && m < 0) ? 1 : 0;
  std::vector<Tensor4> tensors(static_cast<size_t>(n));
  for (index_t site = 0; site < n; ++site) {
    const index_t bit = n - 1 - site; // significance of this site
    const index_t mbit = static_cast<index_t>((m_mod >> bit) & 1);
    const index_t right = (site == n - 1) ? 1 : 2;
    const index_t left = (site == 0) ? 1 : 2;
    Tensor4 t(left, 2, 2, right);
    for (index_t cin = 0; cin < ((site == n - 1) ? index_t(1) : index_t(2)); ++cin)
      for (index_t out = 0; out < 2; ++out) {
        const index_t in = out ^ mbit ^ cin;
        const index_t cout = (out + mbit + cin) >> 1; // carry of out + m + cin
        if (site == 0) {
          if (boundary == Boundary::PERIODIC || cout == required_carry)
            t(0, out, in, cin) = 1.0;
        } else {
          t(cout, out, in, (site == n - 1) ? 0 : cin) = 1.0;
        }
      }
    tensors[static_cast<size_t>(site)] = std::move(t);
  }
  return MPO(std::move(tensors));
}

} // namespace detail

/// sum_m weights[m] D_m with cyclic (PERIODIC) or zero-filled (OPEN) shifts;
/// the result is compressed to its exact rank, at most one above the number
/// of distinct displacements.
inline MPO mpo_weighted_shifts(index_t n, const std::map<long long, cplx> &weights,
                               Boundary boundary = Boundary::PERIODIC) {
  if (n < 1)
    throw shape_error("mpo_weighted_shifts: need at least one site");
  if (weights.empty())
    throw shape_error("mpo_weighted_shifts: no displacements");
  std::vector<cplx> w;
  std::vector<MPO> terms;
  for (const auto &[m, weight] : weights) {
    w.push_back(weight);
    terms.push_back(detail::shift_mpo(n, m, boundary));
  }
  if (terms.size() == 1)
    return terms.front().scaled(w.front());
  return simplify_mpo(w, terms,
                      Strategy{Truncation::SVD_TRUNCATE, 1e-13, 1e-13, UNBOUNDED_BOND, 4, false});
}

} // namespace ttlab
