#pragma once

// Binary field snapshots. Layout (all little-endian):
//
//   offset  size  field
//        0     8  magic "THINOBS1"
//        8     4  u32 format version (1)
//       12     4  u32 dimension n
//       16     4  u32 resolution (nodes per tangential axis)
//       20     4  u32 flags: bit 0 converged, bit 1 slit problem
//       24     4  u32 iterations
//       28     4  u32 reserved (0)
//       32     8  f64 half-width R
//       40     8  f64 spacing h
//       48     8  f64 solver tolerance
//       56     8  f64 final residual
//       64     8  u64 config hash (0 when unknown)
//       72     8  u64 node count
//       80  8*N  f64 node values, row-major over (x_1, ..., x_n) with x_n
//                fastest; x_n runs over 0, h, ..., R only.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/solver.hpp"

namespace thinobs {

inline constexpr char snapshot_magic[8] = {'T', 'H', 'I', 'N', 'O', 'B', 'S', '1'};
inline constexpr std::uint32_t snapshot_version = 1;

struct SnapshotHeader {
  std::uint32_t dimension = 0;
  std::uint32_t resolution = 0;
  std::uint32_t flags = 0;
  std::uint32_t iterations = 0;
  double half_width = 0.0;
  double spacing = 0.0;
  double tol = 0.0;
  double residual = 0.0;
  std::uint64_t config_hash = 0;
  std::uint64_t count = 0;

  bool converged() const { return flags & 1u; }
  bool slit() const { return flags & 2u; }
};

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  out.append(b.data(), b.size());
}

template <class T>
T get_le(const char* p) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

}  // namespace detail

template <int Dim>
std::string encode_snapshot(const Solution<Dim>& s, std::uint64_t config_hash = 0) {
  const auto& g = s.grid();
  std::string out(snapshot_magic, 8);
  detail::put_le<std::uint32_t>(out, snapshot_version);
  detail::put_le<std::uint32_t>(out, Dim);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.resolution()));
  detail::put_le<std::uint32_t>(out, (s.converged ? 1u : 0u) | (s.thin == ThinCondition::slit ? 2u : 0u));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.iterations));
  detail::put_le<std::uint32_t>(out, 0u);
  detail::put_le<double>(out, g.half_width());
  detail::put_le<double>(out, g.spacing());
  detail::put_le<double>(out, s.tol);
  detail::put_le<double>(out, s.residual);
  detail::put_le<std::uint64_t>(out, config_hash);
  detail::put_le<std::uint64_t>(out, g.size());
  out.reserve(out.size() + 8 * g.size());
  for (double v : s.u.values()) detail::put_le<double>(out, v);
  return out;
}

inline SnapshotHeader decode_snapshot_header(const std::string& bytes) {
  if (bytes.size() < 80 || std::memcmp(bytes.data(), snapshot_magic, 8) != 0)
    throw Error("not a thinobs snapshot (bad magic)");
  const char* p = bytes.data();
  if (detail::get_le<std::uint32_t>(p + 8) != snapshot_version) throw Error("unsupported snapshot version");
  SnapshotHeader h;
  h.dimension = detail::get_le<std::uint32_t>(p + 12);
  h.resolution = detail::get_le<std::uint32_t>(p + 16);
  h.flags = detail::get_le<std::uint32_t>(p + 20);
  h.iterations = detail::get_le<std::uint32_t>(p + 24);
  h.half_width = detail::get_le<double>(p + 32);
  h.spacing = detail::get_le<double>(p + 40);
  h.tol = detail::get_le<double>(p + 48);
  h.residual = detail::get_le<double>(p + 56);
  h.config_hash = detail::get_le<std::uint64_t>(p + 64);
  h.count = detail::get_le<std::uint64_t>(p + 72);
  if (bytes.size() != 80 + 8 * h.count) throw Error("snapshot size does not match its node count");
  return h;
}

template <int Dim>
Solution<Dim> decode_snapshot(const std::string& bytes) {
  const auto h = decode_snapshot_header(bytes);
  if (h.dimension != Dim) throw Error("snapshot dimension " + std::to_string(h.dimension) + " does not match");
  const auto grid = build_grid<Dim>(static_cast<int>(h.resolution), h.half_width);
  if (grid.size() != h.count) throw Error("snapshot node count does not match its grid");
  std::vector<double> values(h.count);
  for (std::size_t i = 0; i < h.count; ++i) values[i] = detail::get_le<double>(bytes.data() + 80 + 8 * i);
  Solution<Dim> s{GridFunction<Dim>(grid, std::move(values))};
  s.converged = h.converged();
  s.thin = h.slit() ? ThinCondition::slit : ThinCondition::obstacle;
  s.iterations = static_cast<int>(h.iterations);
  s.tol = h.tol;
  s.residual = h.residual;
  return s;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("write to " + path + " failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace thinobs
