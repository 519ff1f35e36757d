#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upwave/config.hpp"
#include "upwave/diagnostics.hpp"
#include "upwave/snapshot.hpp"
#include "upwave/sources.hpp"
#include "upwave/timestepper.hpp"

namespace upwave {

inline CurvilinearMesh build_mesh(const MeshConfig& m) {
  switch (m.type) {
    case MeshType::box:
      return build_box_mesh(m.extent, m.dims, m.origin);
    case MeshType::gaussian_hill:
      return build_topography_mesh(gaussian_hill(m.hill_amplitude, m.hill_width, m.hill_yc, m.hill_zc), m.depth,
                                   m.dims, *m.horizontal);
    case MeshType::topography_file: {
      const auto map = HeightMap::read(m.height_file, m.unit_scale);
      const HorizontalExtent ext = m.horizontal.value_or(
          HorizontalExtent{map.y_min(), map.y_max() - map.y_min(), map.z_min(), map.z_max() - map.z_min()});
      return build_topography_mesh(map.surface(), m.depth, m.dims, ext);
    }
  }
  throw Error(ErrorCode::BadValue, "unknown mesh type");
}

inline Material build_material(const MaterialConfig& c, const CurvilinearMesh& mesh) {
  if (c.layered) return layered_material(mesh, c.layers);
  return constant_material(mesh.dims, c.rho, c.cp, c.cs);
}

/// Everything the time loop needs, assembled from a configuration.
struct Problem {
  CurvilinearMesh mesh;
  Semidiscretization sd;
  std::optional<DiscretePointSource> source;
};

inline Problem build_problem(const RunConfig& cfg) {
  auto mesh = build_mesh(cfg.mesh);
  auto ops = make_operator_set(cfg.operators.kind, cfg.operators.order, mesh.dims);
  auto met = compute_metrics(mesh, ops, cfg.operators.metrics);
  auto mat = build_material(cfg.material, mesh);
  std::optional<DiscretePointSource> src;
  if (cfg.source) src = discretize_point_source(*cfg.source, mesh, met, ops);
  Semidiscretization sd(std::move(ops), std::move(met), std::move(mat), cfg.boundary);
  if (src) sd.add_forcing([ps = *src](double t, StateVector& b) { ps.add(t, b); });
  return Problem{std::move(mesh), std::move(sd), src};
}

namespace detail {

/// Uniform double in [0, 1) from the fully specified 64-bit Mersenne twister.
inline double unit_draw(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace detail

inline StateVector initial_state(const InitialConfig& ic, const CurvilinearMesh& mesh) {
  const Dims& d = mesh.dims;
  StateVector Q(d);
  switch (ic.type) {
    case InitialType::zero:
      break;
    case InitialType::gaussian_pulse: {
      // Isotropic stress pulse, velocities at rest.
      const double w2 = ic.width * ic.width;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double dx = mesh.x[i] - ic.center[0], dy = mesh.y[i] - ic.center[1], dz = mesh.z[i] - ic.center[2];
        const double g = ic.amplitude * std::exp(-(dx * dx + dy * dy + dz * dz) / w2);
        Q(sxx, i) = Q(syy, i) = Q(szz, i) = g;
      }
      break;
    }
    case InitialType::random_smooth: {
      // A few low sine modes per component in reference coordinates.
      std::mt19937_64 gen(ic.seed);
      struct Mode {
        double a;
        std::array<double, 3> k, phi;
      };
      const auto nm = static_cast<std::size_t>(ic.modes);
      std::vector<Mode> modes(kComponents * nm);
      for (auto& m : modes) {
        m.a = 2.0 * detail::unit_draw(gen) - 1.0;
        for (int a = 0; a < 3; ++a) {
          m.k[a] = 1.0 + std::floor(detail::unit_draw(gen) * static_cast<double>(nm));
          m.phi[a] = 2.0 * detail::unit_draw(gen);
        }
      }
      for (std::size_t i = 0; i < d.nq; ++i)
        for (std::size_t j = 0; j < d.nr; ++j)
          for (std::size_t k = 0; k < d.ns; ++k) {
            const std::array<double, 3> u{unit_node(i, d.nq), unit_node(j, d.nr), unit_node(k, d.ns)};
            const std::size_t idx = d.index(i, j, k);
            for (std::size_t c = 0; c < kComponents; ++c) {
              double v = 0.0;
              for (std::size_t m = 0; m < nm; ++m) {
                const Mode& md = modes[c * nm + m];
                double p = md.a;
                for (int a = 0; a < 3; ++a) p *= std::sin(std::numbers::pi * (md.k[a] * u[a] + md.phi[a]));
                v += p;
              }
              Q(c, idx) = ic.amplitude * v / static_cast<double>(nm);
            }
          }
      break;
    }
  }
  return Q;
}

struct Receiver {
  std::string id;
  Vec3 location = Vec3::Zero();
  std::size_t node = 0;
  std::array<std::size_t, 3> ijk{};
  std::vector<std::array<double, 4>> samples;  ///< t, vx, vy, vz
};

inline std::vector<Receiver> place_receivers(const std::vector<ReceiverConfig>& rc, const CurvilinearMesh& mesh) {
  std::vector<Receiver> out;
  for (const auto& r : rc) {
    if (!inside_mesh(mesh, r.location))
      throw Error(ErrorCode::BadValue, "receiver '" + r.id + "' lies outside the mesh");
    Receiver rec;
    rec.id = r.id;
    rec.location = r.location;
    rec.node = nearest_node(mesh, r.location);
    rec.ijk = mesh.dims.unflatten(rec.node);
    out.push_back(std::move(rec));
  }
  return out;
}

/// dt is shrunk so that a whole number of steps spans each output interval.
struct TimePlan {
  double dt_stable = 0.0;
  double dt = 0.0;
  std::size_t steps_per_output = 1;
  std::size_t outputs = 1;
  std::size_t steps_per_snapshot = 0;  ///< 0: no snapshots
  std::size_t total_steps() const { return steps_per_output * outputs; }
  double time_at(std::size_t step) const { return static_cast<double>(step) * dt; }
};

inline TimePlan plan_time(const RunConfig& cfg, const Semidiscretization& sd) {
  TimePlan p;
  p.dt_stable = cfg.time.dt_override ? *cfg.time.dt_override
                                     : compute_dt(sd.metrics(), sd.material(), sd.operators(), cfg.time.cfl);
  const double interval = cfg.output.interval;
  p.steps_per_output = static_cast<std::size_t>(std::ceil(interval / p.dt_stable * (1.0 - 1e-12)));
  p.steps_per_output = std::max<std::size_t>(p.steps_per_output, 1);
  p.dt = interval / static_cast<double>(p.steps_per_output);
  p.outputs = static_cast<std::size_t>(std::ceil(cfg.time.t_end / interval * (1.0 - 1e-12)));
  p.outputs = std::max<std::size_t>(p.outputs, 1);
  if (cfg.output.snapshot_interval > 0.0)
    p.steps_per_snapshot =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.output.snapshot_interval / p.dt)));
  return p;
}

struct RunOptions {
  bool write_outputs = true;
  bool energy_every_step = false;
  std::ostream* log = nullptr;
};

struct RunResult {
  TimePlan plan;
  std::vector<EnergyReport> energy;  ///< at output times, or every step if requested
  std::vector<Receiver> receivers;
  std::vector<std::string> files;
  std::size_t steps_done = 0;
  StateVector final_state;
};

inline nlohmann::json certification_json(const OperatorSet& ops) {
  nlohmann::json j;
  for (Axis a : kAxes) {
    const auto r = certify(ops[a]);
    double acc = 0.0;
    for (double v : r.accuracy_residual) acc = std::max(acc, v);
    j[axis_name(a)] = {{"n", r.n_points},
                       {"family", r.family},
                       {"duality_residual", r.duality_residual},
                       {"semidefinite_max_eigenvalue", r.semidefinite_max_eigenvalue},
                       {"semidefinite_max_form", r.semidefinite_max_form},
                       {"accuracy_residual", acc},
                       {"passed", r.passed()}};
  }
  return j;
}

inline nlohmann::json manifest_json(const RunConfig& cfg, const Problem& pb, const TimePlan& plan,
                                    const std::vector<Receiver>& receivers) {
  const auto& ops = pb.sd.operators();
  nlohmann::json m;
  m["config"] = cfg.source_path;
  m["operators"] = {{"kind", to_string(cfg.operators.kind)},
                    {"interior_order", ops[Axis::q].interior_order},
                    {"boundary_order", ops[Axis::q].boundary_order},
                    {"family", ops[Axis::q].family},
                    {"metrics", cfg.operators.metrics == MetricMode::discrete ? "discrete" : "analytic"}};
  const Dims& d = pb.mesh.dims;
  const char* type = cfg.mesh.type == MeshType::box             ? "box"
                     : cfg.mesh.type == MeshType::gaussian_hill ? "gaussian_hill"
                                                                : "topography_file";
  m["grid"] = {{"type", type}, {"dims", {d.nq, d.nr, d.ns}}, {"nodes", d.size()}};
  m["time"] = {{"dt", plan.dt},
               {"dt_stable", plan.dt_stable},
               {"steps_per_output", plan.steps_per_output},
               {"outputs", plan.outputs},
               {"total_steps", plan.total_steps()},
               {"t_final", plan.time_at(plan.total_steps())}};
  m["certification"] = certification_json(ops);
  nlohmann::json bc;
  for (const Face& f : kFaces) bc[face_name(f)] = pb.sd.boundary()[f].gamma;
  bc["mode"] = pb.sd.boundary().mode == SatMode::general ? "general" : "free_surface_direct";
  m["boundary"] = bc;
  if (pb.source)
    m["source"] = {{"node", pb.source->ijk}, {"rise_time", pb.source->src.rise_time}, {"moment", pb.source->src.moment}};
  nlohmann::json rj = nlohmann::json::object();
  for (const auto& r : receivers)
    rj[r.id] = {{"requested", {r.location[0], r.location[1], r.location[2]}},
                {"node", r.ijk},
                {"position", {pb.mesh.x[r.node], pb.mesh.y[r.node], pb.mesh.z[r.node]}}};
  m["receivers"] = rj;
  return m;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + p.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + p.string() + "'");
}

}  // namespace detail

/// Runs the configured simulation. Outputs are written only after the loop succeeds, except the
/// manifest, which is also written (flagged partial) when the loop fails.
inline RunResult simulate(const RunConfig& cfg, const RunOptions& opt = {}) {
  Problem pb = build_problem(cfg);
  RunResult res;
  res.plan = plan_time(cfg, pb.sd);
  res.receivers = place_receivers(cfg.receivers, pb.mesh);
  const auto& plan = res.plan;
  const Dims& d = pb.mesh.dims;
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output.directory;
  if (opt.write_outputs) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "': " + ec.message());
    if (plan.steps_per_snapshot) fs::create_directories(dir / "snapshots", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create snapshot directory: " + ec.message());
  }
  auto manifest = manifest_json(cfg, pb, plan, res.receivers);

  StateVector Q = initial_state(cfg.initial, pb.mesh);
  LowStorageRk4 rk(d);
  const RhsFunction f = [&pb](const StateVector& q, double t, StateVector& out) { pb.sd.rhs(q, t, out); };

  auto record = [&](std::size_t step) {
    const double t = plan.time_at(step);
    for (auto& r : res.receivers) r.samples.push_back({t, Q(vx, r.node), Q(vy, r.node), Q(vz, r.node)});
  };
  std::size_t snap_index = 0;
  auto snapshot = [&](std::size_t step) {
    if (!opt.write_outputs || !plan.steps_per_snapshot || step % plan.steps_per_snapshot) return;
    const double t = plan.time_at(step);
    char tag[16];
    std::snprintf(tag, sizeof tag, "%06zu", snap_index++);
    for (const Face& face : cfg.output.snapshot_faces) {
      const fs::path p = dir / "snapshots" / ("face_" + face_name(face) + "_" + tag + ".snap");
      write_snapshot(p.string(), face_snapshot(Q, face, t));
      res.files.push_back(p.string());
    }
    if (cfg.output.snapshot_volume) {
      const fs::path p = dir / "snapshots" / (std::string("volume_") + tag + ".snap");
      write_snapshot(p.string(), volume_snapshot(Q, t));
      res.files.push_back(p.string());
    }
  };

  try {
    res.energy.push_back(energy_report(Q, pb.sd, 0.0));
    record(0);
    snapshot(0);
    for (std::size_t step = 1; step <= plan.total_steps(); ++step) {
      rk.step(Q, f, plan.time_at(step - 1), plan.dt);
      res.steps_done = step;
      const bool output = step % plan.steps_per_output == 0;
      if (output || opt.energy_every_step) res.energy.push_back(energy_report(Q, pb.sd, plan.time_at(step)));
      if (output) {
        record(step);
        if (opt.log)
          *opt.log << "t = " << format_g17(plan.time_at(step)) << "  E = " << format_g17(res.energy.back().energy)
                   << "\n";
      }
      snapshot(step);
    }
  } catch (const Error& e) {
    if (opt.write_outputs) {
      manifest["status"] = "failed";
      manifest["error"] = e.what();
      manifest["steps_completed"] = res.steps_done;
      detail::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    }
    throw;
  }

  if (opt.write_outputs) {
    std::ostringstream es;
    write_energy_csv_header(es);
    for (const auto& r : res.energy) write_energy_csv_row(es, r);
    detail::write_text_file(dir / "energy.csv", es.str());
    res.files.push_back((dir / "energy.csv").string());
    for (const auto& r : res.receivers) {
      std::ostringstream os;
      os << "t,vx,vy,vz\n";
      for (const auto& s : r.samples)
        os << format_g17(s[0]) << ',' << format_g17(s[1]) << ',' << format_g17(s[2]) << ',' << format_g17(s[3]) << '\n';
      const fs::path p = dir / ("receiver_" + r.id + ".csv");
      detail::write_text_file(p, os.str());
      res.files.push_back(p.string());
    }
    manifest["status"] = "complete";
    manifest["steps_completed"] = res.steps_done;
    detail::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    res.files.push_back((dir / "manifest.json").string());
  }
  res.final_state = std::move(Q);
  return res;
}

enum class AuditKind { conservative, dissipative, forced };

inline const char* to_string(AuditKind k) {
  switch (k) {
    case AuditKind::conservative: return "conservative";
    case AuditKind::dissipative: return "dissipative";
    case AuditKind::forced: return "forced";
  }
  return "?";
}

struct AuditReport {
  AuditKind kind = AuditKind::forced;
  std::size_t steps = 0;
  double dt = 0.0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_relative_drift = 0.0;     ///< max |E_n - E_0| / E_0
  double max_relative_increase = 0.0;  ///< max (E_{n+1} - E_n) / E_0
  double max_identity_residual = 0.0;  ///< semi-discrete rate identity, relative to |Q|_H^2
  double drift_tolerance = 1e-6;
  double increase_tolerance = 1e-12;
  double identity_tolerance = 1e-10;
  bool passed = false;
};

/// Steps the configured problem, tracking energy every step. Unforced runs are conservative with
/// the direct free-surface treatment and dissipative with the general penalty.
inline AuditReport energy_audit(const RunConfig& cfg, std::ostream* log = nullptr) {
  RunConfig c = cfg;
  c.receivers.clear();
  c.output.snapshot_interval = 0.0;
  RunOptions opt;
  opt.write_outputs = false;
  opt.energy_every_step = true;
  opt.log = log;
  const auto res = simulate(c, opt);

  AuditReport a;
  const bool forced = cfg.source.has_value();
  const bool direct = cfg.boundary.mode == SatMode::free_surface_direct;
  a.kind = forced ? AuditKind::forced : (direct ? AuditKind::conservative : AuditKind::dissipative);
  a.steps = res.steps_done;
  a.dt = res.plan.dt;
  a.initial_energy = res.energy.front().energy;
  a.final_energy = res.energy.back().energy;
  const double e0 = a.initial_energy > 0.0 ? a.initial_energy : 1.0;
  for (std::size_t i = 0; i < res.energy.size(); ++i) {
    a.max_relative_drift = std::max(a.max_relative_drift, std::abs(res.energy[i].energy - a.initial_energy) / e0);
    if (i) a.max_relative_increase = std::max(a.max_relative_increase, (res.energy[i].energy - res.energy[i - 1].energy) / e0);
  }
  // Semi-discrete identity on the initial and final states.
  const Problem pb = build_problem(c);
  const std::array<StateVector, 2> audited{initial_state(c.initial, pb.mesh), res.final_state};
  for (const StateVector& Q : audited) {
    const double norm2 = h_inner(Q, Q, pb.sd.operators());
    if (!(norm2 > 0.0)) continue;
    const auto b = boundary_terms(Q, pb.sd);
    const double rate = energy_rate(Q, pb.sd, {.with_sat = true, .with_forcing = false});
    const double expect = pb.sd.boundary().mode == SatMode::free_surface_direct ? 0.0 : b.fluctuation + b.hat_work;
    a.max_identity_residual = std::max(a.max_identity_residual, std::abs(rate - expect) / norm2);
  }
  const bool identity_ok = a.max_identity_residual <= a.identity_tolerance;
  switch (a.kind) {
    case AuditKind::conservative:
      a.passed = identity_ok && a.max_relative_drift <= a.drift_tolerance;
      break;
    case AuditKind::dissipative:
      a.passed = identity_ok && a.max_relative_increase <= a.increase_tolerance;
      break;
    case AuditKind::forced:
      a.passed = identity_ok;
      break;
  }
  return a;
}

inline std::string to_text(const AuditReport& a) {
  std::ostringstream os;
  os << "kind: " << to_string(a.kind) << "\n"
     << "steps: " << a.steps << "\n"
     << "dt: " << format_g17(a.dt) << "\n"
     << "initial_energy: " << format_g17(a.initial_energy) << "\n"
     << "final_energy: " << format_g17(a.final_energy) << "\n"
     << "max_relative_drift: " << format_g17(a.max_relative_drift) << "\n"
     << "max_relative_increase: " << format_g17(a.max_relative_increase) << "\n"
     << "max_identity_residual: " << format_g17(a.max_identity_residual) << "\n";
  if (a.kind == AuditKind::conservative) os << "drift_tolerance: " << format_g17(a.drift_tolerance) << "\n";
  if (a.kind == AuditKind::dissipative) os << "increase_tolerance: " << format_g17(a.increase_tolerance) << "\n";
  os << "identity_tolerance: " << format_g17(a.identity_tolerance) << "\n"
     << "verdict: " << (a.passed ? "pass" : "FAIL") << "\n";
  return os.str();
}

struct ConvergenceLevel {
  Dims dims{};
  double h = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  MmsError error;
};

struct ConvergenceReport {
  OperatorKind kind{};
  int order = 0;
  double t_end = 0.0;
  std::vector<ConvergenceLevel> levels;
  std::vector<double> pairwise_l2;  ///< log2 ratios between successive levels
  double fitted_l2 = 0.0;
  double fitted_max = 0.0;
};

/// Manufactured-solution study on successively doubled grids (n -> 2n - 1), starting from the
/// configured dims. Mesh, operators, boundaries, cfl and t_end come from the config; the material
/// is the manufactured one.
inline ConvergenceReport convergence_study(const RunConfig& cfg, std::size_t levels = 3, std::ostream* log = nullptr,
                                           const MmsSolution& sol = {}) {
  if (levels < 2) throw Error(ErrorCode::BadValue, "a convergence study needs at least two grids");
  ConvergenceReport rep;
  rep.kind = cfg.operators.kind;
  rep.order = cfg.operators.order;
  rep.t_end = cfg.time.t_end;
  std::vector<double> hs, l2, mx;
  Dims d = cfg.mesh.dims;
  for (std::size_t lv = 0; lv < levels; ++lv) {
    MeshConfig mc = cfg.mesh;
    mc.dims = d;
    const auto mesh = build_mesh(mc);
    auto ops = make_operator_set(cfg.operators.kind, cfg.operators.order, d);
    auto met = compute_metrics(mesh, ops, cfg.operators.metrics);
    Semidiscretization sd(ops, std::move(met), sol.material(d), cfg.boundary);
    MmsForcing forcing(sol, mesh, sd);
    sd.add_forcing([&forcing](double t, StateVector& b) { forcing.add(t, b); });
    const double dt_max = compute_dt(sd.metrics(), sd.material(), ops, cfg.time.cfl);
    ConvergenceLevel L;
    L.dims = d;
    L.h = 1.0 / static_cast<double>(std::max({d.nq, d.nr, d.ns}) - 1);
    L.steps = static_cast<std::size_t>(std::ceil(cfg.time.t_end / dt_max * (1.0 - 1e-12)));
    L.dt = cfg.time.t_end / static_cast<double>(L.steps);
    StateVector Q = sol.sample(mesh, 0.0);
    LowStorageRk4 rk(d);
    const RhsFunction f = [&sd](const StateVector& q, double t, StateVector& out) { sd.rhs(q, t, out); };
    for (std::size_t s = 0; s < L.steps; ++s) rk.step(Q, f, static_cast<double>(s) * L.dt, L.dt);
    L.error = mms_error(Q, sol, mesh, ops, cfg.time.t_end);
    if (log)
      *log << "dims " << d.nq << "x" << d.nr << "x" << d.ns << "  steps " << L.steps << "  l2 "
           << format_g17(L.error.l2_all) << "  max " << format_g17(L.error.max_all) << "\n";
    hs.push_back(L.h);
    l2.push_back(L.error.l2_all);
    mx.push_back(L.error.max_all);
    rep.levels.push_back(L);
    d = Dims{2 * d.nq - 1, 2 * d.nr - 1, 2 * d.ns - 1};
  }
  for (std::size_t i = 1; i < l2.size(); ++i) rep.pairwise_l2.push_back(std::log(l2[i - 1] / l2[i]) / std::log(hs[i - 1] / hs[i]));
  rep.fitted_l2 = fitted_order(hs, l2);
  rep.fitted_max = fitted_order(hs, mx);
  return rep;
}

inline std::string to_text(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "kind: " << to_string(r.kind) << "\norder: " << r.order << "\nt_end: " << format_g17(r.t_end) << "\n";
  for (const auto& L : r.levels)
    os << "level: dims=" << L.dims.nq << "x" << L.dims.nr << "x" << L.dims.ns << " h=" << format_g17(L.h)
       << " dt=" << format_g17(L.dt) << " steps=" << L.steps << " l2=" << format_g17(L.error.l2_all)
       << " max=" << format_g17(L.error.max_all) << "\n";
  for (std::size_t i = 0; i < r.pairwise_l2.size(); ++i)
    os << "slope_l2[" << i << "]: " << format_g17(r.pairwise_l2[i]) << "\n";
  os << "fitted_order_l2: " << format_g17(r.fitted_l2) << "\nfitted_order_max: " << format_g17(r.fitted_max) << "\n";
  return os.str();
}

}  // namespace upwave
