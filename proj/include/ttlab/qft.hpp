#pragma once

#include <numbers>

#include "ttlab/blas.hpp"

namespace ttlab {

namespace detail {

/// One layer of the Fourier circuit on the qubit subset `sites` (ascending
/// positions within an L-site register). Layer `m` applies a Hadamard on
/// sites[m] and phase rotations controlled by its output on the later subset
/// qubits; a bond of size two threads through intervening sites. The adjoint
/// layer conjugates the phases and conditions them on the Hadamard input.
inline MPO qft_layer(index_t L, const std::vector<index_t> &sites, size_t m, double sign,
                     bool carry_input) {
  const index_t h_site = sites[m];
  const index_t last = sites.back();
  const bool carries = h_site < last;
  std::vector<Tensor4> tensors;
  tensors.reserve(static_cast<size_t>(L));
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (index_t n = 0; n < L; ++n) {
    if (n < h_site || n > last || (!carries && n != h_site)) {
      Tensor4 t(1, 2, 2, 1);
      t(0, 0, 0, 0) = 1;
      t(0, 1, 1, 0) = 1;
      tensors.push_back(std::move(t));
    } else if (n == h_site) {
      const index_t right = carries ? 2 : 1;
      Tensor4 t(1, 2, 2, right);
      for (index_t u = 0; u < 2; ++u)
        for (index_t s = 0; s < 2; ++s) {
          const index_t carried = carry_input ? s : u;
          t(0, u, s, carries ? carried : 0) = (u == 1 && s == 1) ? -inv_sqrt2 : inv_sqrt2;
        }
      tensors.push_back(std::move(t));
    } else {
      const index_t right = (n < last) ? 2 : 1;
      // subset qubits after m pick up a controlled phase; others are carried
      const auto it = std::find(sites.begin() + static_cast<std::ptrdiff_t>(m) + 1, sites.end(), n);
      Tensor4 t(2, 2, 2, right);
      for (index_t c = 0; c < 2; ++c)
        for (index_t s = 0; s < 2; ++s) {
          cplx w(1);
          if (it != sites.end()) {
            const auto rel = static_cast<double>(std::distance(sites.begin(), it) -
                                                 static_cast<std::ptrdiff_t>(m));
            w = std::exp(cplx(0, sign * 2.0 * std::numbers::pi * static_cast<double>(c * s) /
                                     std::pow(2.0, rel + 1.0)));
          }
          t(c, s, s, (n < last) ? c : 0) = w;
        }
      tensors.push_back(std::move(t));
    }
  }
  return MPO(std::move(tensors));
}

} // namespace detail

/// Fourier transform as a product of circuit layers. The output register
/// holds the transform with its qubits in reversed significance, so
/// qft_flip(qft(v)) equals the dense DFT with kernel exp(-2 pi i jk / 2^n).
/// With `sites`, the transform acts on that qubit subset only (ascending
/// indices), enabling per-coordinate transforms of multidimensional data.
inline MPOList qft_mpo(index_t n, bool inverse = false,
                       std::optional<std::vector<index_t>> sites = std::nullopt) {
  if (n < 1)
    throw shape_error("qft_mpo: need at least one site");
  std::vector<index_t> subset;
  if (sites) {
    subset = *sites;
    if (subset.empty())
      throw shape_error("qft_mpo: empty site subset");
    for (size_t k = 0; k + 1 < subset.size(); ++k)
      if (subset[k] >= subset[k + 1])
        throw shape_error("qft_mpo: sites must be strictly ascending");
    if (subset.front() < 0 || subset.back() >= n)
      throw shape_error("qft_mpo: site subset out of range");
  } else {
    subset.resize(static_cast<size_t>(n));
    for (index_t k = 0; k < n; ++k)
      subset[static_cast<size_t>(k)] = k;
  }
  const double sign = inverse ? +1.0 : -1.0;
  // The list is in matrix order (last factor acts first). Forward transform
  // applies layer 0 first; the inverse applies the conjugated layers in the
  // opposite order.
  std::vector<MPO> factors;
  factors.reserve(subset.size());
  if (!inverse) {
    for (size_t m = subset.size(); m-- > 0;)
      factors.push_back(detail::qft_layer(n, subset, m, sign, false));
  } else {
    for (size_t m = 0; m < subset.size(); ++m)
      factors.push_back(detail::qft_layer(n, subset, m, sign, true));
  }
  return MPOList(std::move(factors));
}

inline MPOList iqft_mpo(index_t n, std::optional<std::vector<index_t>> sites = std::nullopt) {
  return qft_mpo(n, true, std::move(sites));
}

/// One-shot transforms.
inline CanonicalMPS qft(const MPS &v, const Strategy &strategy = DEFAULT_STRATEGY) {
  return apply(qft_mpo(v.size()), v, strategy);
}
inline CanonicalMPS iqft(const MPS &v, const Strategy &strategy = DEFAULT_STRATEGY) {
  return apply(qft_mpo(v.size(), true), v, strategy);
}

/// Qubit reversal: the tensor list is reversed with transposed bonds, which
/// permutes the dense vector by bit reversal.
inline MPS qft_flip(const MPS &v) {
  std::vector<Tensor3> tensors;
  tensors.reserve(static_cast<size_t>(v.size()));
  for (index_t n = v.size() - 1; n >= 0; --n) {
    tensors.push_back(v[n].transpose_bonds());
    if (n == 0)
      break;
  }
  return MPS(std::move(tensors), v.error());
}

} // namespace ttlab
