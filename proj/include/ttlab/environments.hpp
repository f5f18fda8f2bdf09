#pragma once

#include <vector>

#include "ttlab/tensor.hpp"

namespace ttlab {
namespace detail {

// Environment matrices E[a,b] accumulate the partial contraction of a
// bra/ket pair of tensor chains; `a` indexes the bra bond, `b` the ket bond.

inline Matrix begin_environment(index_t chi = 1) {
  return Matrix::Identity(chi, chi);
}

/// E'[a',b'] = sum_{a,s,b} conj(A[a,s,a']) E[a,b] B[b,s,b']
inline Matrix update_left_environment(const Matrix &env, const Tensor3 &bra, const Tensor3 &ket) {
  Matrix out = Matrix::Zero(bra.right_dim(), ket.right_dim());
  for (index_t s = 0; s < bra.phys_dim(); ++s)
    out.noalias() += bra.phys_slice(s).adjoint() * env * ket.phys_slice(s);
  return out;
}

/// E'[a,b] = sum_{a',s,b'} conj(A[a,s,a']) E[a',b'] B[b,s,b']
inline Matrix update_right_environment(const Matrix &env, const Tensor3 &bra, const Tensor3 &ket) {
  Matrix out = Matrix::Zero(bra.left_dim(), ket.left_dim());
  for (index_t s = 0; s < bra.phys_dim(); ++s)
    out.noalias() += bra.phys_slice(s).conjugate() * env * ket.phys_slice(s).transpose();
  return out;
}

inline cplx end_environment(const Matrix &env) {
  if (env.rows() != 1 || env.cols() != 1)
    throw shape_error("end_environment: unclosed environment");
  return env(0, 0);
}

// Operator environments for <bra| W |ket> sandwiches: one matrix per MPO bond
// value, E[c](a,b).

using OpEnv = std::vector<Matrix>;

inline OpEnv begin_op_environment() { return OpEnv{begin_environment(1)}; }

/// E'[c'](a',b') = sum conj(A[a,s',a']) W[c,s',s,c'] E[c](a,b) B[b,s,b']
inline OpEnv update_left_op_environment(const OpEnv &env, const Tensor3 &bra, const Tensor4 &op,
                                        const Tensor3 &ket) {
  OpEnv out(static_cast<size_t>(op.right_dim()),
            Matrix::Zero(bra.right_dim(), ket.right_dim()));
  for (index_t c = 0; c < op.left_dim(); ++c)
    for (index_t sp = 0; sp < op.out_dim(); ++sp) {
      const Matrix partial = bra.phys_slice(sp).adjoint() * env[static_cast<size_t>(c)];
      for (index_t s = 0; s < op.in_dim(); ++s)
        for (index_t cp = 0; cp < op.right_dim(); ++cp) {
          const cplx w = op(c, sp, s, cp);
          if (w != cplx(0))
            out[static_cast<size_t>(cp)].noalias() += w * (partial * ket.phys_slice(s));
        }
    }
  return out;
}

/// E'[c](a,b) = sum conj(A[a,s',a']) W[c,s',s,c'] E[c'](a',b') B[b,s,b']
inline OpEnv update_right_op_environment(const OpEnv &env, const Tensor3 &bra, const Tensor4 &op,
                                         const Tensor3 &ket) {
  OpEnv out(static_cast<size_t>(op.left_dim()),
            Matrix::Zero(bra.left_dim(), ket.left_dim()));
  for (index_t cp = 0; cp < op.right_dim(); ++cp)
    for (index_t sp = 0; sp < op.out_dim(); ++sp) {
      const Matrix partial = bra.phys_slice(sp).conjugate() * env[static_cast<size_t>(cp)];
      for (index_t s = 0; s < op.in_dim(); ++s)
        for (index_t c = 0; c < op.left_dim(); ++c) {
          const cplx w = op(c, sp, s, cp);
          if (w != cplx(0))
            out[static_cast<size_t>(c)].noalias() += w * (partial * ket.phys_slice(s).transpose());
        }
    }
  return out;
}

inline cplx end_op_environment(const OpEnv &left, const OpEnv &right) {
  if (left.size() != right.size())
    throw shape_error("end_op_environment: bond mismatch");
  cplx acc(0);
  for (size_t c = 0; c < left.size(); ++c)
    acc += (left[c].array() * right[c].array()).sum();
  return acc;
}

} // namespace detail
} // namespace ttlab
