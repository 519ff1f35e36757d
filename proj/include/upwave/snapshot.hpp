#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/state.hpp"

namespace upwave {

inline constexpr std::array<char, 8> kSnapshotMagic{'U', 'P', 'W', 'V', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

/// A block of nodal values: `components` fields of dims.size() values each, q slowest.
struct Snapshot {
  Dims dims{};
  double t = 0.0;
  std::size_t components = 0;
  std::vector<double> data;

  double operator()(std::size_t c, std::size_t idx) const { return data[c * dims.size() + idx]; }
};

inline Snapshot volume_snapshot(const StateVector& Q, double t) {
  Snapshot s;
  s.dims = Q.dims();
  s.t = t;
  s.components = kComponents;
  s.data.assign(Q.flat().begin(), Q.flat().end());
  return s;
}

/// Values on one boundary face; the face axis collapses to a single node.
inline Snapshot face_snapshot(const StateVector& Q, const Face& f, double t) {
  const Dims& d = Q.dims();
  Snapshot s;
  s.dims = d;
  switch (f.axis) {
    case Axis::q: s.dims.nq = 1; break;
    case Axis::r: s.dims.nr = 1; break;
    case Axis::s: s.dims.ns = 1; break;
  }
  s.t = t;
  s.components = kComponents;
  const auto nodes = face_nodes(d, f);
  s.data.resize(kComponents * nodes.size());
  for (std::size_t c = 0; c < kComponents; ++c)
    for (std::size_t p = 0; p < nodes.size(); ++p) s.data[c * nodes.size() + p] = Q(c, nodes[p]);
  return s;
}

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}
inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

inline constexpr std::size_t kSnapshotHeaderBytes = 16 + 5 * 8;

}  // namespace detail

/// Layout: magic(8) version(u32) reserved(u32) | nq nr ns components (u64) t (f64) | payload f64.
/// All integers and floats little-endian.
inline void write_snapshot(const std::string& path, const Snapshot& s) {
  if (s.data.size() != s.components * s.dims.size())
    throw Error(ErrorCode::DimensionMismatch, "snapshot payload does not match its dims");
  std::string buf;
  buf.reserve(detail::kSnapshotHeaderBytes + 8 * s.data.size());
  buf.append(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put_u32(buf, kSnapshotVersion);
  detail::put_u32(buf, 0);
  detail::put_u64(buf, s.dims.nq);
  detail::put_u64(buf, s.dims.nr);
  detail::put_u64(buf, s.dims.ns);
  detail::put_u64(buf, s.components);
  detail::put_u64(buf, std::bit_cast<std::uint64_t>(s.t));
  for (double v : s.data) detail::put_u64(buf, std::bit_cast<std::uint64_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open snapshot '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing snapshot '" + path + "'");

  char time_text[40];
  std::snprintf(time_text, sizeof time_text, "%.17g", s.t);
  std::ofstream side(path + ".txt", std::ios::trunc);
  if (!side) throw Error(ErrorCode::IoError, "cannot open snapshot sidecar '" + path + ".txt'");
  side << "format: upwave snapshot version " << kSnapshotVersion << "\n"
       << "bytes 0-7: magic UPWVSNAP\n"
       << "bytes 8-11: version, uint32 little-endian\n"
       << "bytes 12-15: reserved, zero\n"
       << "bytes 16-47: nq nr ns components, uint64 little-endian\n"
       << "bytes 48-55: time, float64 little-endian\n"
       << "payload: components blocks of nq*nr*ns float64 little-endian, q slowest and s fastest\n"
       << "component order: vx vy vz sxx syy szz sxy sxz syz\n"
       << "nq: " << s.dims.nq << "\nnr: " << s.dims.nr << "\nns: " << s.dims.ns << "\ncomponents: " << s.components
       << "\nt: " << time_text << "\n";
  if (!side) throw Error(ErrorCode::IoError, "failed writing snapshot sidecar '" + path + ".txt'");
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open snapshot '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < detail::kSnapshotHeaderBytes || std::memcmp(buf.data(), kSnapshotMagic.data(), 8) != 0)
    throw Error(ErrorCode::IoError, "'" + path + "' is not a snapshot file");
  if (detail::get_u32(buf.data() + 8) != kSnapshotVersion)
    throw Error(ErrorCode::IoError, "'" + path + "' has an unsupported snapshot version");
  Snapshot s;
  s.dims = Dims{detail::get_u64(buf.data() + 16), detail::get_u64(buf.data() + 24), detail::get_u64(buf.data() + 32)};
  s.components = detail::get_u64(buf.data() + 40);
  s.t = std::bit_cast<double>(detail::get_u64(buf.data() + 48));
  const std::size_t count = s.components * s.dims.size();
  if (buf.size() != detail::kSnapshotHeaderBytes + 8 * count)
    throw Error(ErrorCode::IoError, "'" + path + "' is truncated or has trailing bytes");
  s.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    s.data[i] = std::bit_cast<double>(detail::get_u64(buf.data() + detail::kSnapshotHeaderBytes + 8 * i));
  return s;
}

}  // namespace upwave
