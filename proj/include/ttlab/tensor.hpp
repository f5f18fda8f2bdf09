#pragma once

#include <array>
#include <initializer_list>
#include <vector>

#include "ttlab/types.hpp"

namespace ttlab {

/// Rank-3 tensor A[left, physical, right] with complex entries in row-major
/// order. The unfoldings used by splits and contractions are zero-copy views.
class Tensor3 {
public:
  Tensor3() : dims_{0, 0, 0} {}
  Tensor3(index_t left, index_t phys, index_t right)
      : dims_{left, phys, right}, data_(static_cast<size_t>(left * phys * right), cplx(0)) {
    if (left < 1 || phys < 1 || right < 1)
      throw shape_error("Tensor3 dimensions must be >= 1");
  }

  index_t left_dim() const { return dims_[0]; }
  index_t phys_dim() const { return dims_[1]; }
  index_t right_dim() const { return dims_[2]; }
  index_t size() const { return dims_[0] * dims_[1] * dims_[2]; }

  cplx &operator()(index_t a, index_t s, index_t b) {
    return data_[static_cast<size_t>((a * dims_[1] + s) * dims_[2] + b)];
  }
  const cplx &operator()(index_t a, index_t s, index_t b) const {
    return data_[static_cast<size_t>((a * dims_[1] + s) * dims_[2] + b)];
  }

  cplx *data() { return data_.data(); }
  const cplx *data() const { return data_.data(); }

  /// (left*phys) x right unfolding.
  Eigen::Map<const RowMatrix> left_matrix() const {
    return {data_.data(), dims_[0] * dims_[1], dims_[2]};
  }
  /// left x (phys*right) unfolding.
  Eigen::Map<const RowMatrix> right_matrix() const {
    return {data_.data(), dims_[0], dims_[1] * dims_[2]};
  }
  /// left x right slice at a fixed physical index.
  Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>> phys_slice(index_t s) const {
    return {data_.data() + s * dims_[2], dims_[0], dims_[2],
            Eigen::OuterStride<>(dims_[1] * dims_[2])};
  }

  static Tensor3 from_matrix(const Matrix &m, index_t left, index_t phys, index_t right) {
    if (m.rows() * m.cols() != left * phys * right)
      throw shape_error("Tensor3::from_matrix: size mismatch");
    Tensor3 out(left, phys, right);
    Eigen::Map<RowMatrix>(out.data(), m.rows(), m.cols()) = m;
    return out;
  }

  Tensor3 conj() const {
    Tensor3 out = *this;
    for (auto &x : out.data_)
      x = std::conj(x);
    return out;
  }

  /// Exchange left and right bond indices.
  Tensor3 transpose_bonds() const {
    Tensor3 out(dims_[2], dims_[1], dims_[0]);
    for (index_t a = 0; a < dims_[0]; ++a)
      for (index_t s = 0; s < dims_[1]; ++s)
        for (index_t b = 0; b < dims_[2]; ++b)
          out(b, s, a) = (*this)(a, s, b);
    return out;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (const auto &x : data_)
      acc += std::norm(x);
    return std::sqrt(acc);
  }

private:
  std::array<index_t, 3> dims_;
  std::vector<cplx> data_;
};

/// Rank-4 tensor B[left, out, in, right], row-major.
class Tensor4 {
public:
  Tensor4() : dims_{0, 0, 0, 0} {}
  Tensor4(index_t left, index_t dout, index_t din, index_t right)
      : dims_{left, dout, din, right},
        data_(static_cast<size_t>(left * dout * din * right), cplx(0)) {
    if (left < 1 || dout < 1 || din < 1 || right < 1)
      throw shape_error("Tensor4 dimensions must be >= 1");
  }

  index_t left_dim() const { return dims_[0]; }
  index_t out_dim() const { return dims_[1]; }
  index_t in_dim() const { return dims_[2]; }
  index_t right_dim() const { return dims_[3]; }
  index_t size() const { return dims_[0] * dims_[1] * dims_[2] * dims_[3]; }

  cplx &operator()(index_t a, index_t j, index_t i, index_t b) {
    return data_[static_cast<size_t>(((a * dims_[1] + j) * dims_[2] + i) * dims_[3] + b)];
  }
  const cplx &operator()(index_t a, index_t j, index_t i, index_t b) const {
    return data_[static_cast<size_t>(((a * dims_[1] + j) * dims_[2] + i) * dims_[3] + b)];
  }

  cplx *data() { return data_.data(); }
  const cplx *data() const { return data_.data(); }

  /// out x in operator block at fixed bond indices.
  Matrix bond_block(index_t a, index_t b) const {
    Matrix out(dims_[1], dims_[2]);
    for (index_t j = 0; j < dims_[1]; ++j)
      for (index_t i = 0; i < dims_[2]; ++i)
        out(j, i) = (*this)(a, j, i, b);
    return out;
  }

  /// Join (out,in) into one physical index of size out*in, row-major pairing.
  Tensor3 fuse_physical() const {
    Tensor3 out(dims_[0], dims_[1] * dims_[2], dims_[3]);
    std::copy(data_.begin(), data_.end(), out.data());
    return out;
  }

  static Tensor4 split_physical(const Tensor3 &t, index_t dout, index_t din) {
    if (t.phys_dim() != dout * din)
      throw shape_error("Tensor4::split_physical: physical dimension mismatch");
    Tensor4 out(t.left_dim(), dout, din, t.right_dim());
    std::copy(t.data(), t.data() + t.size(), out.data());
    return out;
  }

  Tensor4 conj() const {
    Tensor4 out = *this;
    for (auto &x : out.data_)
      x = std::conj(x);
    return out;
  }

private:
  std::array<index_t, 4> dims_;
  std::vector<cplx> data_;
};

namespace detail {

inline Matrix kron(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector &a, const Vector &b) {
  Vector out(a.size() * b.size());
  for (index_t i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

} // namespace detail

} // namespace ttlab
