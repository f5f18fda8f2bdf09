#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "ttlab/mpo.hpp"
#include "ttlab/mps.hpp"

namespace ttlab {

// Binary container: magic "TTLAB1\0", u32 version, u32 tensor count, then per
// tensor a u8 rank (3|4), u64 dims and a complex128 little-endian row-major
// payload. MPS files carry a trailing f64 error field.

namespace detail {

inline constexpr char TTLAB_MAGIC[7] = {'T', 'T', 'L', 'A', 'B', '1', '\0'};
inline constexpr uint32_t TTLAB_VERSION = 1;

inline void write_raw(std::ostream &out, const void *data, size_t bytes) {
  out.write(static_cast<const char *>(data), static_cast<std::streamsize>(bytes));
}

inline void read_raw(std::istream &in, void *data, size_t bytes) {
  in.read(static_cast<char *>(data), static_cast<std::streamsize>(bytes));
  if (!in)
    throw numeric_error("ttlab container: truncated file");
}

template <typename T> void write_pod(std::ostream &out, T value) {
  write_raw(out, &value, sizeof(T));
}

template <typename T> T read_pod(std::istream &in) {
  T value;
  read_raw(in, &value, sizeof(T));
  return value;
}

inline void write_header(std::ostream &out, uint32_t count) {
  write_raw(out, TTLAB_MAGIC, sizeof(TTLAB_MAGIC));
  write_pod<uint32_t>(out, TTLAB_VERSION);
  write_pod<uint32_t>(out, count);
}

inline uint32_t read_header(std::istream &in) {
  char magic[sizeof(TTLAB_MAGIC)];
  read_raw(in, magic, sizeof(magic));
  if (std::memcmp(magic, TTLAB_MAGIC, sizeof(magic)) != 0)
    throw numeric_error("ttlab container: bad magic");
  const uint32_t version = read_pod<uint32_t>(in);
  if (version != TTLAB_VERSION)
    throw numeric_error("ttlab container: unsupported version");
  return read_pod<uint32_t>(in);
}

} // namespace detail

inline void save_mps(std::ostream &out, const MPS &state) {
  detail::write_header(out, static_cast<uint32_t>(state.size()));
  for (index_t n = 0; n < state.size(); ++n) {
    const Tensor3 &t = state[n];
    detail::write_pod<uint8_t>(out, 3);
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.left_dim()));
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.phys_dim()));
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.right_dim()));
    detail::write_raw(out, t.data(), sizeof(cplx) * static_cast<size_t>(t.size()));
  }
  detail::write_pod<double>(out, state.error());
}

inline MPS load_mps(std::istream &in) {
  const uint32_t count = detail::read_header(in);
  std::vector<Tensor3> tensors;
  tensors.reserve(count);
  for (uint32_t n = 0; n < count; ++n) {
    if (detail::read_pod<uint8_t>(in) != 3)
      throw numeric_error("ttlab container: expected rank-3 tensor");
    const auto a = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    const auto d = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    const auto b = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    Tensor3 t(a, d, b);
    detail::read_raw(in, t.data(), sizeof(cplx) * static_cast<size_t>(t.size()));
    tensors.push_back(std::move(t));
  }
  const double error = detail::read_pod<double>(in);
  return MPS(std::move(tensors), error);
}

inline void save_mpo(std::ostream &out, const MPO &op) {
  detail::write_header(out, static_cast<uint32_t>(op.size()));
  for (index_t n = 0; n < op.size(); ++n) {
    const Tensor4 &t = op[n];
    detail::write_pod<uint8_t>(out, 4);
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.left_dim()));
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.out_dim()));
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.in_dim()));
    detail::write_pod<uint64_t>(out, static_cast<uint64_t>(t.right_dim()));
    detail::write_raw(out, t.data(), sizeof(cplx) * static_cast<size_t>(t.size()));
  }
}

inline MPO load_mpo(std::istream &in) {
  const uint32_t count = detail::read_header(in);
  std::vector<Tensor4> tensors;
  tensors.reserve(count);
  for (uint32_t n = 0; n < count; ++n) {
    if (detail::read_pod<uint8_t>(in) != 4)
      throw numeric_error("ttlab container: expected rank-4 tensor");
    const auto a = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    const auto j = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    const auto i = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    const auto b = static_cast<index_t>(detail::read_pod<uint64_t>(in));
    Tensor4 t(a, j, i, b);
    detail::read_raw(in, t.data(), sizeof(cplx) * static_cast<size_t>(t.size()));
    tensors.push_back(std::move(t));
  }
  return MPO(std::move(tensors));
}

inline void save_mps(const std::string &path, const MPS &state) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw numeric_error("cannot open file for writing: " + path);
  save_mps(out, state);
}

inline MPS load_mps(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw numeric_error("cannot open file for reading: " + path);
  return load_mps(in);
}

inline void save_mpo(const std::string &path, const MPO &op) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw numeric_error("cannot open file for writing: " + path);
  save_mpo(out, op);
}

inline MPO load_mpo(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw numeric_error("cannot open file for reading: " + path);
  return load_mpo(in);
}

} // namespace ttlab
