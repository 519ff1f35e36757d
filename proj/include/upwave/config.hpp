#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "upwave/boundary.hpp"
#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/material.hpp"
#include "upwave/operators.hpp"
#include "upwave/sources.hpp"

namespace upwave {

/// Raw `section.key = value` entries with their line numbers.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static KeyValueFile parse(std::istream& in, const std::string& origin = "<config>") {
    KeyValueFile kv;
    kv.origin_ = origin;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::BadValue, kv.where(lineno) + ": expected 'key = value'");
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty() || key.find('.') == std::string::npos || key.find_first_of(" \t") != std::string::npos)
        throw Error(ErrorCode::BadValue, kv.where(lineno) + ": key '" + key + "' must look like section.key");
      if (value.empty()) throw Error(ErrorCode::BadValue, kv.where(lineno) + ": key '" + key + "' has no value");
      if (kv.entries_.count(key))
        throw Error(ErrorCode::BadValue, kv.where(lineno) + ": duplicate key '" + key + "' (first on line " +
                                             std::to_string(kv.entries_[key].line) + ")");
      kv.entries_[key] = {value, lineno};
    }
    return kv;
  }

  static KeyValueFile read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const Entry& require(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw Error(ErrorCode::MissingKey, origin_ + ": missing required key '" + key + "'");
    return *e;
  }
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }
  std::string where(std::size_t line) const { return origin_ + ":" + std::to_string(line); }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const Entry* e = find(key);
    throw Error(ErrorCode::BadValue, (e ? where(e->line) : origin_) + ": " + key + ": " + msg);
  }

  std::vector<double> numbers(const std::string& key) const {
    const Entry& e = require(key);
    std::istringstream ss(e.value);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) fail(key, "'" + tok + "' is not a finite number");
      out.push_back(v);
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::size_t count) const {
    auto v = numbers(key);
    if (v.size() != count) fail(key, "expected " + std::to_string(count) + " numbers, got " + std::to_string(v.size()));
    return v;
  }
  double number(const std::string& key) const { return numbers(key, 1)[0]; }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  std::string text(const std::string& key) const { return require(key).value; }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? require(key).value : fallback;
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v < 0 || v != std::floor(v) || v > 9.0e15) fail(key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "expected true or false");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::string origin_;
  std::map<std::string, Entry> entries_;
};

enum class MeshType { box, topography_file, gaussian_hill };

struct MeshConfig {
  MeshType type = MeshType::box;
  Dims dims{};
  double unit_scale = 1.0;  ///< meters per config length unit
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  double depth = 1.0;
  std::optional<HorizontalExtent> horizontal;
  std::string height_file;  ///< resolved path
  double hill_amplitude = 0.0, hill_width = 1.0, hill_yc = 0.0, hill_zc = 0.0;
};

struct OperatorConfig {
  OperatorKind kind = OperatorKind::upwind_pair;
  int order = 6;
  MetricMode metrics = MetricMode::discrete;
};

struct MaterialConfig {
  bool layered = false;
  double rho = 0.0, cp = 0.0, cs = 0.0;
  std::vector<Layer> layers;  ///< top to bottom
};

struct TimeConfig {
  double t_end = 0.0;
  double cfl = 0.3;
  std::optional<double> dt_override;
};

enum class InitialType { zero, gaussian_pulse, random_smooth };

struct InitialConfig {
  InitialType type = InitialType::zero;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 0.0;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t modes = 3;
};

struct ReceiverConfig {
  std::string id;
  Vec3 location = Vec3::Zero();
};

struct OutputConfig {
  std::string directory = "output";
  double interval = 0.0;  ///< 0 means t_end / 100
  double snapshot_interval = 0.0;  ///< 0 disables snapshots
  std::vector<Face> snapshot_faces;
  bool snapshot_volume = false;
};

struct RunConfig {
  std::string source_path;
  MeshConfig mesh;
  OperatorConfig operators;
  MaterialConfig material;
  BoundarySpec boundary;
  TimeConfig time;
  std::optional<MomentSource> source;
  InitialConfig initial;
  std::vector<ReceiverConfig> receivers;
  OutputConfig output;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "mesh.type",         "mesh.dims",          "mesh.units",        "mesh.extent",      "mesh.origin",
      "mesh.depth",        "mesh.horizontal",    "mesh.height_file",  "mesh.hill",        "operators.kind",
      "operators.order",   "operators.metrics",  "material.type",     "material.rho",     "material.cp",
      "material.cs",       "bc.q0",              "bc.q1",             "bc.r0",            "bc.r1",
      "bc.s0",             "bc.s1",              "bc.mode",           "time.t_end",       "time.cfl",
      "time.dt_override",  "source.location",    "source.moment",     "source.rise_time", "initial.type",
      "initial.center",    "initial.width",      "initial.amplitude", "initial.seed",     "initial.modes",
      "output.directory",  "output.interval",    "output.snapshot_interval",              "output.snapshot_faces",
      "output.snapshot_volume"};
  return keys;
}

inline std::array<double, 3> triple(const KeyValueFile& kv, const std::string& key, double scale = 1.0) {
  const auto v = kv.numbers(key, 3);
  return {v[0] * scale, v[1] * scale, v[2] * scale};
}

inline std::optional<Face> parse_face_name(const std::string& s) {
  for (const Face& f : kFaces)
    if (face_name(f) == s) return f;
  return std::nullopt;
}

}  // namespace detail

/// Validates and converts a parsed key-value file. `base_dir` resolves relative height-map paths.
inline RunConfig build_run_config(const KeyValueFile& kv, const std::filesystem::path& base_dir = {}) {
  for (const auto& [key, e] : kv.entries()) {
    const bool dynamic = key.rfind("receiver.", 0) == 0 || key.rfind("material.layer.", 0) == 0;
    if (!dynamic && !detail::known_keys().count(key))
      throw Error(ErrorCode::BadValue, kv.where(e.line) + ": unknown key '" + key + "'");
  }
  RunConfig c;
  c.source_path = kv.origin();

  // mesh
  auto& m = c.mesh;
  const std::string units = kv.text("mesh.units", "m");
  if (units == "m")
    m.unit_scale = 1.0;
  else if (units == "km")
    m.unit_scale = 1000.0;
  else
    kv.fail("mesh.units", "expected m or km");
  const double L = m.unit_scale;
  {
    const auto d = kv.numbers("mesh.dims");
    if (d.size() != 3) throw Error(ErrorCode::InconsistentDims, kv.where(kv.require("mesh.dims").line) + ": mesh.dims needs three node counts");
    for (double v : d)
      if (v != std::floor(v) || v < 2)
        throw Error(ErrorCode::InconsistentDims,
                    kv.where(kv.require("mesh.dims").line) + ": mesh.dims entries must be integers >= 2");
    m.dims = Dims{static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[1]), static_cast<std::size_t>(d[2])};
  }
  const std::string type = kv.text("mesh.type");
  if (type == "box") {
    m.type = MeshType::box;
    m.extent = detail::triple(kv, "mesh.extent", L);
    for (double e : m.extent)
      if (!(e > 0.0)) kv.fail("mesh.extent", "extents must be positive");
    if (kv.has("mesh.origin")) m.origin = detail::triple(kv, "mesh.origin", L);
  } else if (type == "gaussian_hill" || type == "topography_file") {
    m.depth = kv.number("mesh.depth") * L;
    if (kv.has("mesh.horizontal")) {
      const auto h = kv.numbers("mesh.horizontal", 4);
      m.horizontal = HorizontalExtent{h[0] * L, h[1] * L, h[2] * L, h[3] * L};
      if (!(m.horizontal->ly > 0.0) || !(m.horizontal->lz > 0.0))
        kv.fail("mesh.horizontal", "horizontal lengths must be positive");
    }
    if (type == "gaussian_hill") {
      m.type = MeshType::gaussian_hill;
      const auto h = kv.numbers("mesh.hill", 4);
      m.hill_amplitude = h[0] * L;
      m.hill_width = h[1] * L;
      m.hill_yc = h[2] * L;
      m.hill_zc = h[3] * L;
      if (!(m.hill_width > 0.0)) kv.fail("mesh.hill", "width must be positive");
      if (!m.horizontal) throw Error(ErrorCode::MissingKey, kv.origin() + ": missing required key 'mesh.horizontal'");
    } else {
      m.type = MeshType::topography_file;
      std::filesystem::path p = kv.text("mesh.height_file");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      m.height_file = p.string();
    }
  } else {
    kv.fail("mesh.type", "expected box, gaussian_hill or topography_file");
  }

  // operators
  c.operators.kind = [&] {
    try {
      return parse_operator_kind(kv.text("operators.kind", "upwind"));
    } catch (const Error&) {
      kv.fail("operators.kind", "expected upwind or central");
    }
  }();
  {
    const double o = kv.has("operators.order") ? kv.number("operators.order") : 6.0;
    const auto& allowed = c.operators.kind == OperatorKind::upwind_pair ? kUpwindOrders : kCentralOrders;
    if (o != std::floor(o) || std::find(allowed.begin(), allowed.end(), static_cast<int>(o)) == allowed.end())
      kv.fail("operators.order", "unsupported order for this operator kind");
    c.operators.order = static_cast<int>(o);
    const std::size_t need = 2 * closure_width(c.operators.kind, c.operators.order);
    for (Axis a : kAxes)
      if (m.dims.extent(a) < need)
        throw Error(ErrorCode::InconsistentDims, kv.where(kv.require("mesh.dims").line) + ": axis " + axis_name(a) +
                                                     " has " + std::to_string(m.dims.extent(a)) + " nodes; order " +
                                                     std::to_string(c.operators.order) + " needs at least " +
                                                     std::to_string(need));
  }
  {
    const std::string mm = kv.text("operators.metrics", "discrete");
    if (mm == "discrete")
      c.operators.metrics = MetricMode::discrete;
    else if (mm == "analytic")
      c.operators.metrics = MetricMode::analytic;
    else
      kv.fail("operators.metrics", "expected discrete or analytic");
  }

  // material
  {
    const std::string mt = kv.text("material.type", "constant");
    if (mt == "constant") {
      c.material.rho = kv.number("material.rho");
      c.material.cp = kv.number("material.cp");
      c.material.cs = kv.number("material.cs");
    } else if (mt == "layered") {
      c.material.layered = true;
      std::map<std::size_t, std::string> ordered;
      for (const auto& key : kv.keys_with_prefix("material.layer.")) {
        const std::string idx = key.substr(std::string("material.layer.").size());
        if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos)
          kv.fail(key, "layer keys must be material.layer.<index>");
        ordered[std::stoul(idx)] = key;
      }
      if (ordered.empty()) throw Error(ErrorCode::MissingKey, kv.origin() + ": missing required key 'material.layer.1'");
      for (const auto& [i, key] : ordered) {
        const auto v = kv.numbers(key, 4);
        c.material.layers.push_back(Layer{v[0] * L, v[1], v[2], v[3]});
      }
      for (std::size_t i = 1; i + 1 < c.material.layers.size(); ++i)
        if (!(c.material.layers[i].bottom > c.material.layers[i - 1].bottom))
          kv.fail(ordered.rbegin()->second, "layer bottoms must increase with depth");
      if (m.type == MeshType::box) {
        // Interfaces must coincide with grid planes.
        const double h = m.extent[0] / static_cast<double>(m.dims.nq - 1);
        for (std::size_t i = 0; i + 1 < c.material.layers.size(); ++i) {
          const double pos = (c.material.layers[i].bottom - m.origin[0]) / h;
          if (pos > 0 && pos < static_cast<double>(m.dims.nq - 1) && std::abs(pos - std::round(pos)) > 1e-9)
            throw Error(ErrorCode::InconsistentDims,
                        kv.origin() + ": layer interface at x = " + std::to_string(c.material.layers[i].bottom) +
                            " does not fall on a grid plane");
        }
      }
    } else {
      kv.fail("material.type", "expected constant or layered");
    }
    for (const auto& ly : c.material.layered ? c.material.layers : std::vector<Layer>{{0, c.material.rho, c.material.cp, c.material.cs}}) {
      if (!(ly.rho > 0.0) || !(ly.cs > 0.0) || !(ly.cp > ly.cs * std::sqrt(4.0 / 3.0)))
        throw Error(ErrorCode::BadValue, kv.origin() + ": material needs rho > 0, cs > 0 and cp > sqrt(4/3) cs");
    }
  }

  // boundaries
  for (const Face& f : kFaces) {
    const std::string key = "bc." + face_name(f);
    if (!kv.has(key)) continue;
    try {
      c.boundary[f] = parse_face_condition(kv.text(key));
    } catch (const Error& e) {
      kv.fail(key, e.what());
    }
  }
  {
    const std::string mode = kv.text("bc.mode", "general");
    if (mode == "general")
      c.boundary.mode = SatMode::general;
    else if (mode == "free_surface_direct")
      c.boundary.mode = SatMode::free_surface_direct;
    else
      kv.fail("bc.mode", "expected general or free_surface_direct");
    try {
      validate(c.boundary);
    } catch (const Error& e) {
      kv.fail("bc.mode", e.what());
    }
  }

  // time
  c.time.t_end = kv.number("time.t_end");
  if (!(c.time.t_end > 0.0)) kv.fail("time.t_end", "must be positive");
  c.time.cfl = kv.number("time.cfl", 0.3);
  if (!(c.time.cfl > 0.0) || c.time.cfl > 1.0) kv.fail("time.cfl", "must lie in (0, 1]");
  if (kv.has("time.dt_override")) {
    c.time.dt_override = kv.number("time.dt_override");
    if (!(*c.time.dt_override > 0.0)) kv.fail("time.dt_override", "must be positive");
  }

  // source
  if (kv.has("source.location") || kv.has("source.moment") || kv.has("source.rise_time")) {
    MomentSource s;
    const auto p = detail::triple(kv, "source.location", L);
    s.location = Vec3(p[0], p[1], p[2]);
    const auto mv = kv.numbers("source.moment", kComponents);
    std::copy(mv.begin(), mv.end(), s.moment.begin());
    s.rise_time = kv.number("source.rise_time", 0.1);
    if (!(s.rise_time > 0.0)) kv.fail("source.rise_time", "must be positive");
    c.source = s;
  }

  // initial
  {
    const std::string it = kv.text("initial.type", "zero");
    if (it == "zero") {
      c.initial.type = InitialType::zero;
    } else if (it == "gaussian_pulse") {
      c.initial.type = InitialType::gaussian_pulse;
      c.initial.center = detail::triple(kv, "initial.center", L);
      c.initial.width = kv.number("initial.width") * L;
      if (!(c.initial.width > 0.0)) kv.fail("initial.width", "must be positive");
    } else if (it == "random_smooth") {
      c.initial.type = InitialType::random_smooth;
    } else {
      kv.fail("initial.type", "expected zero, gaussian_pulse or random_smooth");
    }
    c.initial.amplitude = kv.number("initial.amplitude", 1.0);
    c.initial.seed = kv.integer("initial.seed", 1);
    c.initial.modes = kv.integer("initial.modes", 3);
    if (c.initial.modes == 0) kv.fail("initial.modes", "must be at least 1");
  }

  // receivers
  for (const auto& key : kv.keys_with_prefix("receiver.")) {
    ReceiverConfig r;
    r.id = key.substr(std::string("receiver.").size());
    if (r.id.empty() || r.id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                            std::string::npos)
      kv.fail(key, "receiver ids may contain letters, digits, '_' and '-'");
    const auto p = detail::triple(kv, key, L);
    r.location = Vec3(p[0], p[1], p[2]);
    c.receivers.push_back(r);
  }

  // output
  c.output.directory = kv.text("output.directory", "output");
  c.output.interval = kv.number("output.interval", c.time.t_end / 100.0);
  if (!(c.output.interval > 0.0)) kv.fail("output.interval", "must be positive");
  c.output.snapshot_interval = kv.number("output.snapshot_interval", 0.0);
  if (c.output.snapshot_interval < 0.0) kv.fail("output.snapshot_interval", "must not be negative");
  if (kv.has("output.snapshot_faces")) {
    std::istringstream ss(kv.text("output.snapshot_faces"));
    std::string tok;
    while (ss >> tok) {
      const auto f = detail::parse_face_name(tok);
      if (!f) kv.fail("output.snapshot_faces", "unknown face '" + tok + "'");
      c.output.snapshot_faces.push_back(*f);
    }
  }
  c.output.snapshot_volume = kv.boolean("output.snapshot_volume", false);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  const auto kv = KeyValueFile::read(path);
  return build_run_config(kv, std::filesystem::path(path).parent_path());
}

inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
  std::istringstream in(text);
  return build_run_config(KeyValueFile::parse(in), base_dir);
}

}  // namespace upwave
