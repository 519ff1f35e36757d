#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "upwave/boundary.hpp"
#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/material.hpp"
#include "upwave/physics.hpp"
#include "upwave/state.hpp"

namespace upwave {

/// g(t) = (t / T^2) exp(-t / T); zero before the onset.
inline double source_time_function(double t, double T) {
  if (!(T > 0.0)) throw Error(ErrorCode::BadValue, "rise time must be positive");
  if (t <= 0.0) return 0.0;
  return t / (T * T) * std::exp(-t / T);
}

struct MomentSource {
  Vec3 location = Vec3::Zero();
  std::array<double, kComponents> moment{};  ///< ordered like the state rows
  double rise_time = 0.1;
};

/// Nearest-node delta: bracket(c, node) += J M_c g(t) delta with delta = 1 / (J h_i h_j h_k).
struct DiscretePointSource {
  std::size_t node = 0;
  std::array<std::size_t, 3> ijk{};
  double delta = 0.0;     ///< 1 / (J h_i h_j h_k)
  double jacobian = 0.0;  ///< J at the node
  MomentSource src;

  void add(double t, StateVector& bracket) const {
    const double g = source_time_function(t, src.rise_time);
    if (g == 0.0) return;
    for (std::size_t c = 0; c < kComponents; ++c) bracket(c, node) += jacobian * src.moment[c] * g * delta;
  }
};

inline std::size_t nearest_node(const CurvilinearMesh& mesh, const Vec3& p) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.dims.size(); ++i) {
    const double dx = mesh.x[i] - p[0], dy = mesh.y[i] - p[1], dz = mesh.z[i] - p[2];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < bd) {
      bd = d2;
      best = i;
    }
  }
  return best;
}

/// True if p lies in the hexahedral cell hull of the mesh, judged by the nearest node's neighbourhood.
inline bool inside_mesh(const CurvilinearMesh& mesh, const Vec3& p) {
  double lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    const auto& c = mesh.coord(a).values();
    lo[a] = *std::min_element(c.begin(), c.end());
    hi[a] = *std::max_element(c.begin(), c.end());
    if (!(p[a] >= lo[a] && p[a] <= hi[a])) return false;
  }
  // For curvilinear meshes the box test is not enough: the point must lie between the q = 0 and
  // q = 1 surfaces along its vertical grid line.
  const std::size_t idx = nearest_node(mesh, p);
  const auto ijk = mesh.dims.unflatten(idx);
  const double top = mesh.x(0, ijk[1], ijk[2]);
  const double bottom = mesh.x(mesh.dims.nq - 1, ijk[1], ijk[2]);
  return p[0] >= std::min(top, bottom) && p[0] <= std::max(top, bottom);
}

inline DiscretePointSource discretize_point_source(const MomentSource& src, const CurvilinearMesh& mesh,
                                                   const Metrics& met, const OperatorSet& ops) {
  if (!(src.rise_time > 0.0)) throw Error(ErrorCode::BadValue, "rise time must be positive");
  if (!inside_mesh(mesh, src.location))
    throw Error(ErrorCode::SourceOutsideDomain, "source location lies outside the mesh");
  DiscretePointSource d;
  d.src = src;
  d.node = nearest_node(mesh, src.location);
  d.ijk = mesh.dims.unflatten(d.node);
  d.jacobian = met.jac[d.node];
  const double w = ops[Axis::q].h_weights[d.ijk[0]] * ops[Axis::r].h_weights[d.ijk[1]] * ops[Axis::s].h_weights[d.ijk[2]];
  d.delta = 1.0 / (d.jacobian * w);
  return d;
}

/// Manufactured solution in a homogeneous medium:
/// Q*_c = amp_c sin(k_x x + a_c) sin(k_y y + b_c) sin(k_z z + c_c) cos(omega t + psi).
struct MmsSolution {
  double rho = 1.0, lambda = 2.0, mu = 1.0;
  double omega = 2.0 * std::numbers::pi;
  double psi = 0.3;
  std::array<double, 3> k{std::numbers::pi, 1.25 * std::numbers::pi, 0.75 * std::numbers::pi};
  std::array<double, kComponents> amp{1.0, 0.8, 0.6, 1.2, 0.9, 1.1, 0.7, 0.5, 0.4};
  std::array<std::array<double, 3>, kComponents> phase{{{0.1, 0.2, 0.3},
                                                        {0.4, 0.5, 0.6},
                                                        {0.7, 0.8, 0.9},
                                                        {1.0, 0.3, 0.5},
                                                        {0.2, 1.1, 0.4},
                                                        {0.6, 0.1, 1.2},
                                                        {0.9, 0.7, 0.2},
                                                        {0.3, 0.9, 0.8},
                                                        {1.3, 0.4, 0.1}}};

  /// Spatial part and its gradient.
  double spatial(std::size_t c, const Vec3& x) const {
    return amp[c] * std::sin(k[0] * x[0] + phase[c][0]) * std::sin(k[1] * x[1] + phase[c][1]) *
           std::sin(k[2] * x[2] + phase[c][2]);
  }
  Vec3 spatial_gradient(std::size_t c, const Vec3& x) const {
    const double s0 = std::sin(k[0] * x[0] + phase[c][0]), s1 = std::sin(k[1] * x[1] + phase[c][1]),
                 s2 = std::sin(k[2] * x[2] + phase[c][2]);
    const double c0 = std::cos(k[0] * x[0] + phase[c][0]), c1 = std::cos(k[1] * x[1] + phase[c][1]),
                 c2 = std::cos(k[2] * x[2] + phase[c][2]);
    return amp[c] * Vec3(k[0] * c0 * s1 * s2, k[1] * s0 * c1 * s2, k[2] * s0 * s1 * c2);
  }
  double value(std::size_t c, const Vec3& x, double t) const { return spatial(c, x) * std::cos(omega * t + psi); }
  double time_derivative(std::size_t c, const Vec3& x, double t) const {
    return -omega * spatial(c, x) * std::sin(omega * t + psi);
  }

  StateVector sample(const CurvilinearMesh& mesh, double t) const {
    StateVector Q(mesh.dims);
    for (std::size_t i = 0; i < mesh.dims.size(); ++i) {
      const Vec3 x(mesh.x[i], mesh.y[i], mesh.z[i]);
      for (std::size_t c = 0; c < kComponents; ++c) Q(c, i) = value(c, x, t);
    }
    return Q;
  }

  StateVector sample_time_derivative(const CurvilinearMesh& mesh, double t) const {
    StateVector Q(mesh.dims);
    for (std::size_t i = 0; i < mesh.dims.size(); ++i) {
      const Vec3 x(mesh.x[i], mesh.y[i], mesh.z[i]);
      for (std::size_t c = 0; c < kComponents; ++c) Q(c, i) = time_derivative(c, x, t);
    }
    return Q;
  }

  Material material(const Dims& d) const {
    Material m{GridFunction3(d, rho), GridFunction3(d, lambda), GridFunction3(d, mu)};
    validate_material(m);
    return m;
  }
};

/// Forcing that makes the manufactured fields an exact solution of the semi-discrete
/// problem's continuous counterpart, including the boundary penalty of Q* itself:
/// f(t) = J (P^{-1} Q*_t - L Q*) - SAT(Q*), separated as cos(wt + psi) F1 + sin(wt + psi) F2.
class MmsForcing {
 public:
  MmsForcing(const MmsSolution& sol, const CurvilinearMesh& mesh, const Semidiscretization& sd) : sol_(sol) {
    const Dims& d = mesh.dims;
    require_same_dims(d, sd.dims(), "mesh vs discretisation");
    const std::size_t n = d.size();
    f_cos_.assign(kComponents * n, 0.0);
    f_sin_.assign(kComponents * n, 0.0);
    StateVector spatial(d);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 x(mesh.x[i], mesh.y[i], mesh.z[i]);
      const double J = sd.metrics().jac[i];
      std::array<Vec3, kComponents> g;
      std::array<double, kComponents> s;
      for (std::size_t c = 0; c < kComponents; ++c) {
        s[c] = sol.spatial(c, x);
        g[c] = sol.spatial_gradient(c, x);
        spatial(c, i) = s[c];
      }
      // L Q: velocity rows div(sigma), stress rows the symmetric velocity gradient.
      std::array<double, kComponents> L{};
      L[vx] = g[sxx][0] + g[sxy][1] + g[sxz][2];
      L[vy] = g[sxy][0] + g[syy][1] + g[syz][2];
      L[vz] = g[sxz][0] + g[syz][1] + g[szz][2];
      L[sxx] = g[vx][0];
      L[syy] = g[vy][1];
      L[szz] = g[vz][2];
      L[sxy] = g[vx][1] + g[vy][0];
      L[sxz] = g[vx][2] + g[vz][0];
      L[syz] = g[vy][2] + g[vz][1];
      // P^{-1} applied to the spatial part of Q*_t = -omega sin(.) spatial.
      std::array<double, kComponents> pinv{};
      for (std::size_t c = 0; c < 3; ++c) pinv[c] = sol.rho * s[c];
      const auto Ss = apply_compliance(sol.lambda, sol.mu, {s[3], s[4], s[5], s[6], s[7], s[8]});
      for (std::size_t c = 0; c < 6; ++c) pinv[3 + c] = Ss[c];
      for (std::size_t c = 0; c < kComponents; ++c) {
        f_cos_[c * n + i] = -J * L[c];
        f_sin_[c * n + i] = -J * sol.omega * pinv[c];
      }
    }
    StateVector sat(d);
    assemble_sat(spatial, sd.material(), sd.faces(), sd.boundary(), sat);
    for (std::size_t c = 0; c < kComponents; ++c)
      for (std::size_t i = 0; i < n; ++i) f_cos_[c * n + i] -= sat(c, i);
  }

  void add(double t, StateVector& bracket) const {
    const double cs = std::cos(sol_.omega * t + sol_.psi), sn = std::sin(sol_.omega * t + sol_.psi);
    auto b = bracket.flat();
    parallel_for(b.size(), [&](std::size_t i) { b[i] += cs * f_cos_[i] + sn * f_sin_[i]; });
  }

 private:
  MmsSolution sol_;
  std::vector<double> f_cos_, f_sin_;
};

struct MmsError {
  std::array<double, kComponents> max_error{};
  std::array<double, kComponents> l2_error{};  ///< sqrt(sum_H e_c^2)
  double max_all = 0.0;
  double l2_all = 0.0;  ///< sqrt(sum_H |e|^2)
};

inline MmsError mms_error(const StateVector& Q, const MmsSolution& sol, const CurvilinearMesh& mesh,
                          const OperatorSet& ops, double t) {
  const Dims& d = Q.dims();
  require_same_dims(d, mesh.dims, "state vs mesh");
  MmsError e;
  std::array<CompensatedSum, kComponents> acc;
  const auto& hq = ops[Axis::q].h_weights;
  const auto& hr = ops[Axis::r].h_weights;
  const auto& hs = ops[Axis::s].h_weights;
  for (std::size_t i = 0; i < d.nq; ++i)
    for (std::size_t j = 0; j < d.nr; ++j)
      for (std::size_t k = 0; k < d.ns; ++k) {
        const std::size_t idx = d.index(i, j, k);
        const Vec3 x(mesh.x[idx], mesh.y[idx], mesh.z[idx]);
        const double w = hq[i] * hr[j] * hs[k];
        for (std::size_t c = 0; c < kComponents; ++c) {
          const double err = Q(c, idx) - sol.value(c, x, t);
          e.max_error[c] = std::max(e.max_error[c], std::abs(err));
          acc[c].add(w * err * err);
        }
      }
  double tot = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) {
    e.l2_error[c] = std::sqrt(acc[c].value());
    e.max_all = std::max(e.max_all, e.max_error[c]);
    tot += acc[c].value();
  }
  e.l2_all = std::sqrt(tot);
  return e;
}

/// Least-squares slope of log(error) against log(h).
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw Error(ErrorCode::BadValue, "need at least two samples to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace upwave
