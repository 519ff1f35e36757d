#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "upwave/boundary.hpp"
#include "upwave/grid.hpp"
#include "upwave/material.hpp"
#include "upwave/parallel.hpp"
#include "upwave/physics.hpp"
#include "upwave/state.hpp"

namespace upwave {

/// E = sum_nodes h_i h_j h_k J (rho |v|^2 + sigma^T S sigma) / 2.
inline double energy(const StateVector& Q, const Metrics& met, const Material& mat, const OperatorSet& ops) {
  const Dims& d = Q.dims();
  require_same_dims(d, met.dims, "state vs metrics");
  const auto& hq = ops[Axis::q].h_weights;
  const auto& hr = ops[Axis::r].h_weights;
  const auto& hs = ops[Axis::s].h_weights;
  return ordered_reduce(d.nq, [&](std::size_t i) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < d.nr; ++j)
      for (std::size_t k = 0; k < d.ns; ++k) {
        const std::size_t idx = d.index(i, j, k);
        const double kin = mat.rho[idx] * (Q(vx, idx) * Q(vx, idx) + Q(vy, idx) * Q(vy, idx) + Q(vz, idx) * Q(vz, idx));
        const std::array<double, 6> s = stress_at(Q, idx);
        const auto Ss = apply_compliance(mat.lambda[idx], mat.mu[idx], s);
        double strain = 0.0;
        for (std::size_t c = 0; c < 6; ++c) strain += s[c] * Ss[c];
        acc.add(0.5 * hq[i] * hr[j] * hs[k] * met.jac[idx] * (kin + strain));
      }
    return acc.value();
  });
}

inline double energy(const StateVector& Q, const Semidiscretization& sd) {
  return energy(Q, sd.metrics(), sd.material(), sd.operators());
}

/// <Q, P~^{-1} dQ/dt>_H, i.e. the H inner product of Q with the bracket; equals dE/dt.
inline double energy_rate(const StateVector& Q, const Semidiscretization& sd, BracketOptions opt = {}, double t = 0.0) {
  StateVector b(Q.dims());
  sd.bracket(Q, t, b, opt);
  return h_inner(Q, b, sd.operators());
}

/// sum over face nodes of f * (tangential h products) * J |grad xi|.
inline double surface_cubature(std::span<const double> f, const FaceGeometry& geo) {
  if (f.size() != geo.size()) throw Error(ErrorCode::DimensionMismatch, "face field length mismatch");
  CompensatedSum acc;
  for (std::size_t p = 0; p < f.size(); ++p) acc.add(f[p] * geo.cubature[p]);
  return acc.value();
}

/// Signed sum over the six faces, + on side 1 and - on side 0.
template <class PerNode>
double signed_surface_sum(const std::array<FaceGeometry, 6>& faces, PerNode&& value) {
  CompensatedSum acc;
  for (const Face& f : kFaces) {
    const FaceGeometry& geo = faces[face_slot(f)];
    std::vector<double> vals(geo.size());
    for (std::size_t p = 0; p < geo.size(); ++p) vals[p] = value(geo, p);
    const double s = surface_cubature(vals, geo);
    acc.add(f.side ? s : -s);
  }
  return acc.value();
}

/// I(v^T T).
inline double boundary_work(const StateVector& Q, const std::array<FaceGeometry, 6>& faces) {
  return signed_surface_sum(faces, [&](const FaceGeometry& g, std::size_t p) {
    const std::size_t idx = g.nodes[p];
    return velocity_at(Q, idx).dot(traction(stress_at(Q, idx), g.normal[p]));
  });
}

struct BoundaryTerms {
  double boundary_work = 0.0;  ///< I(v^T T)
  double hat_work = 0.0;       ///< I(v_hat^T T_hat)
  double fluctuation = 0.0;    ///< F_luc, never positive
};

inline BoundaryTerms boundary_terms(const StateVector& Q, const Material& mat, const std::array<FaceGeometry, 6>& faces,
                                    const BoundarySpec& spec) {
  BoundaryTerms b;
  b.boundary_work = boundary_work(Q, faces);
  if (spec.mode == SatMode::free_surface_direct) return b;
  CompensatedSum hat, fl;
  for (const Face& f : kFaces) {
    const FaceGeometry& geo = faces[face_slot(f)];
    std::vector<double> hv(geo.size()), fv(geo.size());
    for (std::size_t p = 0; p < geo.size(); ++p) {
      const auto s = boundary_node_state(Q, mat, geo, spec[f], spec.mode, p);
      hv[p] = s.hat_work;
      fv[p] = s.fluctuation;
    }
    const double h = surface_cubature(hv, geo);
    hat.add(f.side ? h : -h);
    fl.add(-surface_cubature(fv, geo));
  }
  b.hat_work = hat.value();
  b.fluctuation = fl.value();
  return b;
}

inline BoundaryTerms boundary_terms(const StateVector& Q, const Semidiscretization& sd) {
  return boundary_terms(Q, sd.material(), sd.faces(), sd.boundary());
}

struct EnergyReport {
  double t = 0.0;
  double energy = 0.0;
  double boundary_work = 0.0;
  double hat_work = 0.0;
  double fluctuation = 0.0;
  double energy_rate_residual = 0.0;  ///< |dE/dt (centred difference) - (F_luc + hat_work)|
};

inline EnergyReport energy_report(const StateVector& Q, const Semidiscretization& sd, double t) {
  EnergyReport r;
  r.t = t;
  r.energy = energy(Q, sd);
  const auto b = boundary_terms(Q, sd);
  r.boundary_work = b.boundary_work;
  r.hat_work = b.hat_work;
  r.fluctuation = b.fluctuation;
  return r;
}

/// Fills energy_rate_residual with centred (one-sided at the ends) differences of E.
inline void fill_rate_residuals(std::vector<EnergyReport>& reports) {
  const std::size_t n = reports.size();
  if (n < 2) return;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    const double dt = reports[b].t - reports[a].t;
    if (!(dt > 0.0)) continue;
    const double rate = (reports[b].energy - reports[a].energy) / dt;
    reports[i].energy_rate_residual = std::abs(rate - (reports[i].fluctuation + reports[i].hat_work));
  }
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_energy_csv_header(std::ostream& os) { os << "t,energy,boundary_work,hat_work,fluctuation\n"; }

inline void write_energy_csv_row(std::ostream& os, const EnergyReport& r) {
  os << format_g17(r.t) << ',' << format_g17(r.energy) << ',' << format_g17(r.boundary_work) << ','
     << format_g17(r.hat_work) << ',' << format_g17(r.fluctuation) << '\n';
}

}  // namespace upwave
