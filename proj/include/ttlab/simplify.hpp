#pragma once

#include <optional>

#include "ttlab/forms.hpp"
#include "ttlab/mpo.hpp"
#include "ttlab/mps.hpp"

namespace ttlab {

namespace detail {

// Two-site variational compression of a weighted sum of MPS. Environments
// are kept per summand; the joined tensors of the sum are never formed.
struct CompressionEngine {
  const std::vector<cplx> &weights;
  const std::vector<MPS> &states;
  CanonicalMPS psi;
  std::vector<std::vector<Matrix>> lenv; // [term][site]
  std::vector<std::vector<Matrix>> renv;
  double target_norm2 = 0.0;

  CompressionEngine(const std::vector<cplx> &w, const std::vector<MPS> &s, MPS guess,
                    const Strategy &strategy)
      : weights(w), states(s), psi(guess, 0, strategy.with_normalize(false)) {
    const size_t terms = states.size();
    const auto L = static_cast<size_t>(psi.size());
    lenv.assign(terms, std::vector<Matrix>(L + 1));
    renv.assign(terms, std::vector<Matrix>(L + 1));
    for (size_t l = 0; l < terms; ++l) {
      lenv[l][0] = begin_environment();
      renv[l][L] = begin_environment();
      for (size_t n = L - 1; n > 0; --n)
        renv[l][n] = update_right_environment(renv[l][n + 1], psi[static_cast<index_t>(n)],
                                              states[l][static_cast<index_t>(n)]);
    }
    cplx acc(0);
    for (size_t l = 0; l < terms; ++l)
      for (size_t m = 0; m < terms; ++m)
        acc += std::conj(weights[l]) * weights[m] * scprod(states[l], states[m]);
    target_norm2 = std::max(0.0, std::real(acc));
  }

  Tensor3 projected_pair(index_t n) const {
    Tensor3 out(lenv[0][static_cast<size_t>(n)].rows(),
                states[0][n].phys_dim() * states[0][n + 1].phys_dim(),
                renv[0][static_cast<size_t>(n + 2)].rows());
    bool started = false;
    for (size_t l = 0; l < states.size(); ++l) {
      Tensor3 f = project_pair(lenv[l][static_cast<size_t>(n)], states[l][n], states[l][n + 1],
                               renv[l][static_cast<size_t>(n + 2)]);
      for (index_t i = 0; i < f.size(); ++i) {
        const cplx v = weights[l] * f.data()[i];
        if (started)
          out.data()[i] += v;
        else
          out.data()[i] = v;
      }
      started = true;
    }
    return out;
  }

  /// One full sweep (left-to-right then right-to-left); returns the exact
  /// squared distance to the target at the sweep end.
  double sweep(const Strategy &strategy) {
    const index_t L = psi.size();
    if (L == 1) {
      // no pair to optimize; project directly onto the single tensor
      Tensor3 t(1, psi[0].phys_dim(), 1);
      for (size_t l = 0; l < states.size(); ++l)
        for (index_t i = 0; i < t.size(); ++i)
          t.data()[i] += weights[l] * states[l][0].data()[i];
      psi.set_tensor(0, t);
      return std::max(0.0, target_norm2 - psi.norm_squared());
    }
    psi.recenter(0, strategy);
    for (index_t n = 0; n + 1 < L; ++n) {
      psi.update_two_site(projected_pair(n), SweepDirection::LEFT_TO_RIGHT, strategy);
      for (size_t l = 0; l < states.size(); ++l)
        lenv[l][static_cast<size_t>(n + 1)] =
            update_left_environment(lenv[l][static_cast<size_t>(n)], psi[n], states[l][n]);
    }
    for (index_t n = L - 2; n >= 0; --n) {
      psi.update_two_site(projected_pair(n), SweepDirection::RIGHT_TO_LEFT, strategy);
      for (size_t l = 0; l < states.size(); ++l)
        renv[l][static_cast<size_t>(n + 1)] = update_right_environment(
            renv[l][static_cast<size_t>(n + 2)], psi[n + 1], states[l][n + 1]);
    }
    return std::max(0.0, target_norm2 - psi.norm_squared());
  }
};

struct CompressionResult {
  CanonicalMPS state;
  double residual = 0.0;
  int sweeps = 0;
  bool converged = false;
};

inline CompressionResult variational_compress(const std::vector<cplx> &weights,
                                              const std::vector<MPS> &states, const MPS &guess,
                                              const Strategy &strategy) {
  CompressionEngine engine(weights, states, guess, strategy);
  const double target_norm = std::sqrt(engine.target_norm2);
  CompressionResult out;
  if (target_norm <= fp_error_floor(1.0)) {
    out.state = CanonicalMPS(states.front().zero_like(), 0, NO_TRUNCATION);
    out.residual = target_norm;
    out.converged = true;
    return out;
  }
  double dist2 = engine.target_norm2;
  for (int sweep = 0; sweep < std::max(1, strategy.max_sweeps); ++sweep) {
    const double prev = dist2;
    dist2 = engine.sweep(strategy);
    ++out.sweeps;
    if (std::sqrt(dist2) <= strategy.simplification_tolerance * target_norm) {
      out.converged = true;
      break;
    }
    // plateau: the bounded-rank optimum has been reached
    if (sweep > 0 && std::abs(prev - dist2) <= 1e-15 * engine.target_norm2)
      break;
  }
  out.residual = std::sqrt(std::max(0.0, dist2)) + fp_error_floor(target_norm);
  out.state = std::move(engine.psi);
  if (out.state.norm() == 0.0)
    out.state = CanonicalMPS(states.front().zero_like(), 0, NO_TRUNCATION);
  return out;
}

inline MPS default_guess(const std::vector<cplx> &weights, const std::vector<MPS> &states) {
  size_t best = 0;
  double best_weight = -1.0;
  for (size_t l = 0; l < states.size(); ++l) {
    const double w = std::abs(weights[l]) * states[l].norm();
    if (w > best_weight) {
      best_weight = w;
      best = l;
    }
  }
  return states[best].scaled(weights[best]);
}

} // namespace detail

/// Closest MPS (under `strategy` limits) to the weighted combination
/// sum_l weights[l] * states[l]. The output error adds the carried input
/// bounds and the exact final residual.
inline CanonicalMPS combine(const std::vector<cplx> &weights, const std::vector<MPS> &states,
                            const Strategy &strategy = DEFAULT_STRATEGY) {
  if (weights.empty() || weights.size() != states.size())
    throw shape_error("combine: weights and states must be non-empty and match");
  const auto dims = states.front().physical_dimensions();
  for (const auto &s : states)
    if (s.physical_dimensions() != dims)
      throw shape_error("combine: states must share physical dimensions");
  double carried = 0.0;
  for (size_t l = 0; l < states.size(); ++l)
    carried += std::abs(weights[l]) * states[l].error();

  CanonicalMPS out = [&] {
    if (strategy.method == Truncation::SVD_TRUNCATE) {
      MPS joined = MPSSum(weights, states).join();
      CanonicalMPS res(joined, 0, strategy.with_normalize(false));
      res.set_error(res.error() - joined.error()); // truncation part only
      return res;
    }
    auto res =
        detail::variational_compress(weights, states, detail::default_guess(weights, states), strategy);
    res.state.set_error(res.residual);
    return res.state;
  }();
  out.set_error(carried + out.error());
  if (strategy.normalize)
    out.normalize_in_place();
  return out;
}

/// Compress one MPS under `strategy`; `guess` seeds the variational search.
inline CanonicalMPS simplify(const MPS &target, const Strategy &strategy = DEFAULT_STRATEGY,
                             std::optional<MPS> guess = std::nullopt) {
  if (strategy.method == Truncation::SVD_TRUNCATE) {
    CanonicalMPS out(target, 0, strategy);
    return out;
  }
  const double carried = target.error();
  auto res = detail::variational_compress(
      {cplx(1)}, {target}, guess ? *guess : MPS(target), strategy);
  res.state.set_error(carried + res.residual);
  if (strategy.normalize)
    res.state.normalize_in_place();
  return res.state;
}

/// Compress a lazy sum without materializing the joined tensors.
inline CanonicalMPS simplify(const MPSSum &target, const Strategy &strategy = DEFAULT_STRATEGY,
                             std::optional<MPS> guess = std::nullopt) {
  if (strategy.method == Truncation::SVD_TRUNCATE) {
    MPS joined = target.join();
    CanonicalMPS out(joined, 0, strategy.with_normalize(false));
    if (strategy.normalize)
      out.normalize_in_place();
    return out;
  }
  double carried = target.error();
  auto res = detail::variational_compress(
      target.weights(), target.states(),
      guess ? *guess : detail::default_guess(target.weights(), target.states()), strategy);
  res.state.set_error(carried + res.residual);
  if (strategy.normalize)
    res.state.normalize_in_place();
  return res.state;
}

namespace detail {

inline MPS flatten_mpo(const MPO &op) {
  std::vector<Tensor3> tensors;
  tensors.reserve(static_cast<size_t>(op.size()));
  for (index_t n = 0; n < op.size(); ++n)
    tensors.push_back(op[n].fuse_physical());
  return MPS(std::move(tensors), 0.0);
}

inline MPO unflatten_mpo(const MPS &state, const std::vector<index_t> &out_dims,
                         const std::vector<index_t> &in_dims) {
  std::vector<Tensor4> tensors;
  tensors.reserve(static_cast<size_t>(state.size()));
  for (index_t n = 0; n < state.size(); ++n)
    tensors.push_back(Tensor4::split_physical(state[n], out_dims[static_cast<size_t>(n)],
                                              in_dims[static_cast<size_t>(n)]));
  return MPO(std::move(tensors));
}

} // namespace detail

/// Compress an MPO by flattening each tensor into a fused physical index,
/// simplifying the resulting state, and unflattening.
inline MPO simplify_mpo(const MPO &op, const Strategy &strategy = DEFAULT_STRATEGY) {
  MPS flat = detail::flatten_mpo(op);
  CanonicalMPS compact = simplify(flat, strategy.with_normalize(false));
  return detail::unflatten_mpo(compact, op.out_dimensions(), op.in_dimensions());
}

/// Compress a weighted sum of MPOs the same way.
inline MPO simplify_mpo(const std::vector<cplx> &weights, const std::vector<MPO> &terms,
                        const Strategy &strategy = DEFAULT_STRATEGY) {
  if (weights.empty() || weights.size() != terms.size())
    throw shape_error("simplify_mpo: weights and terms must be non-empty and match");
  std::vector<MPS> flats;
  flats.reserve(terms.size());
  for (const auto &t : terms)
    flats.push_back(detail::flatten_mpo(t));
  CanonicalMPS compact = simplify(MPSSum(weights, flats), strategy.with_normalize(false));
  return detail::unflatten_mpo(compact, terms.front().out_dimensions(),
                               terms.front().in_dimensions());
}

} // namespace ttlab
