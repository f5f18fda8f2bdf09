#pragma once

#include "ttlab/simplify.hpp"

namespace ttlab {

/// U v with the contracted tensors simplified per `strategy`.
inline CanonicalMPS apply(const MPO &op, const MPS &v, const Strategy &strategy = DEFAULT_STRATEGY) {
  MPS contracted = detail::apply_raw(op, v);
  return simplify(contracted, strategy);
}

inline CanonicalMPS apply(const MPO &op, const MPSSum &v,
                          const Strategy &strategy = DEFAULT_STRATEGY) {
  std::vector<MPS> applied;
  applied.reserve(static_cast<size_t>(v.terms()));
  for (const auto &s : v.states())
    applied.push_back(detail::apply_raw(op, s));
  return simplify(MPSSum(v.weights(), applied), strategy);
}

/// Sequential application of the factors, last entry first, simplifying the
/// intermediate states.
inline CanonicalMPS apply(const MPOList &ops, const MPS &v,
                          const Strategy &strategy = DEFAULT_STRATEGY) {
  if (ops.terms() == 0)
    throw shape_error("apply: empty MPO list");
  CanonicalMPS state = apply(ops[ops.terms() - 1], v, strategy);
  for (index_t k = ops.terms() - 2; k >= 0; --k)
    state = apply(ops[k], state, strategy);
  return state;
}

inline CanonicalMPS apply(const MPOList &ops, const MPSSum &v,
                          const Strategy &strategy = DEFAULT_STRATEGY) {
  if (ops.terms() == 0)
    throw shape_error("apply: empty MPO list");
  CanonicalMPS state = apply(ops[ops.terms() - 1], v, strategy);
  for (index_t k = ops.terms() - 2; k >= 0; --k)
    state = apply(ops[k], state, strategy);
  return state;
}

/// Element-wise (Hadamard) product; exact, bond dimensions multiply.
inline MPS hadamard(const MPS &u, const MPS &v) {
  if (u.size() != v.size())
    throw shape_error("hadamard: states of different length");
  std::vector<Tensor3> out;
  out.reserve(static_cast<size_t>(u.size()));
  for (index_t n = 0; n < u.size(); ++n) {
    const Tensor3 &a = u[n];
    const Tensor3 &b = v[n];
    if (a.phys_dim() != b.phys_dim())
      throw shape_error("hadamard: physical dimension mismatch");
    Tensor3 c(a.left_dim() * b.left_dim(), a.phys_dim(), a.right_dim() * b.right_dim());
    for (index_t al = 0; al < a.left_dim(); ++al)
      for (index_t bl = 0; bl < b.left_dim(); ++bl)
        for (index_t s = 0; s < a.phys_dim(); ++s)
          for (index_t ar = 0; ar < a.right_dim(); ++ar)
            for (index_t br = 0; br < b.right_dim(); ++br)
              c(al * b.left_dim() + bl, s, ar * b.right_dim() + br) = a(al, s, ar) * b(bl, s, br);
    out.push_back(std::move(c));
  }
  // carried bound is heuristic: element-wise products propagate errors in
  // sup-norm, not norm-2
  return MPS(std::move(out), u.error() + v.error());
}

/// diag(v) as an MPO: B[b, j, i, b'] = delta_ji A[b, j, b'].
inline MPO mpo_from_diagonal_mps(const MPS &v) {
  std::vector<Tensor4> out;
  out.reserve(static_cast<size_t>(v.size()));
  for (index_t n = 0; n < v.size(); ++n) {
    const Tensor3 &a = v[n];
    Tensor4 t(a.left_dim(), a.phys_dim(), a.phys_dim(), a.right_dim());
    for (index_t al = 0; al < a.left_dim(); ++al)
      for (index_t s = 0; s < a.phys_dim(); ++s)
        for (index_t ar = 0; ar < a.right_dim(); ++ar)
          t(al, s, s, ar) = a(al, s, ar);
    out.push_back(std::move(t));
  }
  return MPO(std::move(out));
}

namespace detail {

inline Tensor3 apply_local_operator(const Tensor3 &t, const Matrix &op) {
  if (op.rows() != t.phys_dim() || op.cols() != t.phys_dim())
    throw shape_error("local operator dimension mismatch");
  Tensor3 out(t.left_dim(), t.phys_dim(), t.right_dim());
  for (index_t a = 0; a < t.left_dim(); ++a)
    for (index_t sp = 0; sp < t.phys_dim(); ++sp)
      for (index_t b = 0; b < t.right_dim(); ++b) {
        cplx acc(0);
        for (index_t s = 0; s < t.phys_dim(); ++s)
          acc += op(sp, s) * t(a, s, b);
        out(a, sp, b) = acc;
      }
  return out;
}

} // namespace detail

/// <v, O_site v> or the two-point value <v, O_site O2_site2 v>. The state is
/// not normalized implicitly.
inline cplx expectation_local(const MPS &v, const Matrix &op, index_t site,
                              std::optional<Matrix> op2 = std::nullopt,
                              std::optional<index_t> site2 = std::nullopt) {
  if (site < 0 || site >= v.size())
    throw shape_error("expectation_local: site out of range");
  if (op2.has_value() != site2.has_value())
    throw shape_error("expectation_local: two-point value needs both operator and site");
  if (op2 && (*site2 < 0 || *site2 >= v.size() || *site2 == site))
    throw shape_error("expectation_local: second site out of range");
  Matrix env = detail::begin_environment();
  for (index_t n = 0; n < v.size(); ++n) {
    Tensor3 ket = v[n];
    if (n == site)
      ket = detail::apply_local_operator(ket, op);
    if (op2 && n == *site2)
      ket = detail::apply_local_operator(ket, *op2);
    env = detail::update_left_environment(env, v[n], ket);
  }
  return detail::end_environment(env);
}

/// <u, Q v> by sandwich contraction; `v` defaults to `u`.
inline cplx expectation_mpo(const MPO &op, const MPS &u, std::optional<MPS> v = std::nullopt) {
  const MPS &ket = v ? *v : u;
  if (op.size() != u.size() || ket.size() != u.size())
    throw shape_error("expectation_mpo: size mismatch");
  detail::OpEnv env = detail::begin_op_environment();
  for (index_t n = 0; n < u.size(); ++n)
    env = detail::update_left_op_environment(env, u[n], op[n], ket[n]);
  if (env.size() != 1)
    throw shape_error("expectation_mpo: unclosed MPO bond");
  return detail::end_environment(env.front());
}

enum class TensorOrder { A, B };

namespace detail {

inline MPS interleaved_product(const std::vector<MPS> &states) {
  const index_t L = states.front().size();
  for (const auto &s : states)
    if (s.size() != L)
      throw shape_error("order B requires states of equal length");
  const auto M = static_cast<index_t>(states.size());
  std::vector<Tensor3> out;
  out.reserve(static_cast<size_t>(L * M));
  for (index_t j = 0; j < L; ++j)
    for (index_t m = 0; m < M; ++m) {
      // states before m at this scale already advanced to bond j+1
      index_t left = 1, right = 1;
      for (index_t mm = 0; mm < M; ++mm) {
        const auto &t = states[static_cast<size_t>(mm)][j];
        left *= (mm < m) ? t.right_dim() : t.left_dim();
        right *= (mm <= m) ? t.right_dim() : t.left_dim();
      }
      const Tensor3 &a = states[static_cast<size_t>(m)][j];
      Tensor3 tnew(left, a.phys_dim(), right);
      // enumerate joint bond indices; identity on all but slot m
      std::vector<index_t> ldims(static_cast<size_t>(M)), rdims(static_cast<size_t>(M));
      for (index_t mm = 0; mm < M; ++mm) {
        const auto &t = states[static_cast<size_t>(mm)][j];
        ldims[static_cast<size_t>(mm)] = (mm < m) ? t.right_dim() : t.left_dim();
        rdims[static_cast<size_t>(mm)] = (mm <= m) ? t.right_dim() : t.left_dim();
      }
      std::vector<index_t> idx(static_cast<size_t>(M), 0);
      // iterate over the joint left bond; the right bond follows by replacing
      // slot m's index
      index_t total = left;
      for (index_t flat = 0; flat < total; ++flat) {
        index_t rem = flat;
        for (index_t mm = M - 1; mm >= 0; --mm) {
          idx[static_cast<size_t>(mm)] = rem % ldims[static_cast<size_t>(mm)];
          rem /= ldims[static_cast<size_t>(mm)];
          if (mm == 0)
            break;
        }
        for (index_t s = 0; s < a.phys_dim(); ++s)
          for (index_t bm = 0; bm < a.right_dim(); ++bm) {
            index_t rflat = 0;
            for (index_t mm = 0; mm < M; ++mm) {
              const index_t comp = (mm == m) ? bm : idx[static_cast<size_t>(mm)];
              rflat = rflat * rdims[static_cast<size_t>(mm)] + comp;
            }
            tnew(flat, s, rflat) = a(idx[static_cast<size_t>(m)], s, bm);
          }
      }
      out.push_back(std::move(tnew));
    }
  return MPS(std::move(out), 0.0);
}

} // namespace detail

/// Tensor product of several states. Order A concatenates the registers;
/// order B interleaves them scale by scale.
inline MPS mps_tensor_product(const std::vector<MPS> &states, TensorOrder order = TensorOrder::A) {
  if (states.empty())
    throw shape_error("mps_tensor_product: no states");
  double err = 0.0;
  for (const auto &s : states)
    err += s.error(); // valid first-order bound for normalized factors
  if (order == TensorOrder::A) {
    std::vector<Tensor3> out;
    for (const auto &s : states)
      for (index_t n = 0; n < s.size(); ++n)
        out.push_back(s[n]);
    return MPS(std::move(out), err);
  }
  MPS out = detail::interleaved_product(states);
  out.set_error(err);
  return out;
}

/// Sum of mutually extended vectors: each term embeds one state against
/// all-ones registers for the other dimensions. Exact block sum.
inline MPS mps_tensor_sum(const std::vector<MPS> &states, TensorOrder order = TensorOrder::A) {
  if (states.empty())
    throw shape_error("mps_tensor_sum: no states");
  const auto M = states.size();
  if (M == 1)
    return states.front();
  std::vector<MPS> terms;
  terms.reserve(M);
  for (size_t k = 0; k < M; ++k) {
    std::vector<MPS> factors;
    factors.reserve(M);
    for (size_t m = 0; m < M; ++m) {
      if (m == k) {
        factors.push_back(states[m]);
      } else {
        std::vector<Tensor3> ones;
        for (index_t n = 0; n < states[m].size(); ++n) {
          Tensor3 t(1, states[m][n].phys_dim(), 1);
          for (index_t s = 0; s < t.phys_dim(); ++s)
            t(0, s, 0) = 1.0;
          ones.push_back(std::move(t));
        }
        factors.emplace_back(std::move(ones), 0.0);
      }
    }
    terms.push_back(mps_tensor_product(factors, order));
  }
  return MPSSum(std::vector<cplx>(M, cplx(1)), terms).join();
}

} // namespace ttlab
