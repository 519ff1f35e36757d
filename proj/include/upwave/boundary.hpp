#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/material.hpp"
#include "upwave/state.hpp"

namespace upwave {

/// sigma . n for sigma given as (xx, yy, zz, xy, xz, yz).
inline Vec3 traction(const std::array<double, 6>& s, const Vec3& n) {
  return Vec3(s[0] * n[0] + s[3] * n[1] + s[4] * n[2], s[3] * n[0] + s[1] * n[1] + s[5] * n[2],
              s[4] * n[0] + s[5] * n[1] + s[2] * n[2]);
}

struct CharacteristicPair {
  double q = 0.0;  ///< (Z v + T) / 2
  double p = 0.0;  ///< (Z v - T) / 2
};

inline CharacteristicPair characteristics(double v, double T, double Z) {
  if (!(Z > 0.0)) throw Error(ErrorCode::NonpositiveImpedance, "impedance must be positive, got " + std::to_string(Z));
  return {0.5 * (Z * v + T), 0.5 * (Z * v - T)};
}

struct HatState {
  double v = 0.0;
  double T = 0.0;
};

inline void check_gamma(double gamma) {
  if (!std::isfinite(gamma) || std::abs(gamma) > 1.0)
    throw Error(ErrorCode::InvalidGamma, "gamma must lie in [-1, 1], got " + std::to_string(gamma));
}

/// Boundary data from the outgoing characteristic: q at side 0, p at side 1.
inline HatState hat_variables(double outgoing, double gamma, double Z, int side) {
  check_gamma(gamma);
  if (!(Z > 0.0)) throw Error(ErrorCode::NonpositiveImpedance, "impedance must be positive, got " + std::to_string(Z));
  if (side == 0) return {(1.0 + gamma) * outgoing / Z, (1.0 - gamma) * outgoing};
  return {(1.0 + gamma) * outgoing / Z, -(1.0 - gamma) * outgoing};
}

struct Penalty {
  double G = 0.0;
  double G_tilde = 0.0;
};

inline Penalty penalties(double v, double T, double v_hat, double T_hat, double Z, int side) {
  const double jump_t = side == 0 ? -0.5 * (T - T_hat) : 0.5 * (T - T_hat);
  const double G = 0.5 * Z * (v - v_hat) + jump_t;
  return {G, G / Z};
}

/// gamma per mode (n, m, l) on one face.
struct FaceCondition {
  std::array<double, 3> gamma{1.0, 1.0, 1.0};
};

enum class SatMode { general, free_surface_direct };

struct BoundarySpec {
  std::array<FaceCondition, 6> faces;  ///< indexed by face_slot
  SatMode mode = SatMode::general;

  FaceCondition& operator[](const Face& f) { return faces[face_slot(f)]; }
  const FaceCondition& operator[](const Face& f) const { return faces[face_slot(f)]; }

  static BoundarySpec uniform(double gamma, SatMode mode = SatMode::general) {
    BoundarySpec b;
    for (auto& f : b.faces) f.gamma = {gamma, gamma, gamma};
    b.mode = mode;
    return b;
  }
};

inline void validate(const BoundarySpec& spec) {
  for (const Face& f : kFaces)
    for (double g : spec[f].gamma) {
      if (!std::isfinite(g) || std::abs(g) > 1.0)
        throw Error(ErrorCode::InvalidGamma, "face " + face_name(f) + ": gamma " + std::to_string(g) + " outside [-1, 1]");
    }
  if (spec.mode == SatMode::free_surface_direct)
    for (const Face& f : kFaces)
      for (double g : spec[f].gamma)
        if (g != 1.0)
          throw Error(ErrorCode::SpecMismatch, "free_surface_direct requires gamma = 1 on every face (face " +
                                                   face_name(f) + ")");
}

/// free_surface | absorbing | clamped | gamma:<g> | gamma:<n>,<m>,<l>
inline FaceCondition parse_face_condition(const std::string& text) {
  FaceCondition fc;
  if (text == "free_surface") return fc;
  if (text == "absorbing") {
    fc.gamma = {0.0, 0.0, 0.0};
    return fc;
  }
  if (text == "clamped") {
    fc.gamma = {-1.0, -1.0, -1.0};
    return fc;
  }
  if (text.rfind("gamma:", 0) == 0) {
    std::vector<double> vals;
    std::stringstream ss(text.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || end == tok.c_str() || *end != '\0')
        throw Error(ErrorCode::BadValue, "bad gamma value '" + tok + "'");
      vals.push_back(v);
    }
    if (vals.size() == 1) vals.assign(3, vals[0]);
    if (vals.size() != 3) throw Error(ErrorCode::BadValue, "gamma needs one or three values");
    fc.gamma = {vals[0], vals[1], vals[2]};
    for (double g : fc.gamma) check_gamma(g);
    return fc;
  }
  throw Error(ErrorCode::BadValue, "unknown boundary condition '" + text + "'");
}

/// Everything computed at one face node during SAT evaluation; physical-frame vectors.
struct BoundaryNodeState {
  Vec3 v = Vec3::Zero();
  Vec3 T = Vec3::Zero();
  Vec3 G = Vec3::Zero();
  Vec3 G_tilde = Vec3::Zero();
  double hat_work = 0.0;     ///< sum_eta v_hat T_hat
  double fluctuation = 0.0;  ///< sum_eta G_eta^2 / Z_eta (non-negative)
  std::array<double, kComponents> sat{};  ///< SAT_0 or SAT_n before the -(w / h) scaling
};

inline std::array<double, 6> stress_at(const StateVector& Q, std::size_t idx) {
  return {Q(sxx, idx), Q(syy, idx), Q(szz, idx), Q(sxy, idx), Q(sxz, idx), Q(syz, idx)};
}

inline Vec3 velocity_at(const StateVector& Q, std::size_t idx) { return Vec3(Q(vx, idx), Q(vy, idx), Q(vz, idx)); }

/// Evaluates the penalty machinery at face node p.
inline BoundaryNodeState boundary_node_state(const StateVector& Q, const Material& mat, const FaceGeometry& geo,
                                             const FaceCondition& fc, SatMode mode, std::size_t p) {
  const std::size_t idx = geo.nodes[p];
  const int side = geo.face.side;
  BoundaryNodeState s;
  const Vec3& n = geo.normal[p];
  s.v = velocity_at(Q, idx);
  s.T = traction(stress_at(Q, idx), n);
  if (mode == SatMode::free_surface_direct) {
    // Direct form, sign folded so that the common -(w / h) scaling applies.
    const double sign = side == 0 ? -1.0 : 1.0;
    for (int a = 0; a < 3; ++a) s.sat[static_cast<std::size_t>(a)] = sign * s.T[a];
    return s;
  }
  const Mat3& R = geo.rotation[p];
  const Vec3 vl = R * s.v;
  const Vec3 Tl = R * s.T;
  const double zp = mat.rho[idx] * mat.cp(idx);
  const double zs = mat.rho[idx] * mat.cs(idx);
  const std::array<double, 3> Z{zp, zs, zs};
  Vec3 Gl, Gtl;
  for (int e = 0; e < 3; ++e) {
    const auto ch = characteristics(vl[e], Tl[e], Z[static_cast<std::size_t>(e)]);
    const double out = side == 0 ? ch.q : ch.p;
    const auto hat = hat_variables(out, fc.gamma[static_cast<std::size_t>(e)], Z[static_cast<std::size_t>(e)], side);
    const auto pen = penalties(vl[e], Tl[e], hat.v, hat.T, Z[static_cast<std::size_t>(e)], side);
    Gl[e] = pen.G;
    Gtl[e] = pen.G_tilde;
    s.hat_work += hat.v * hat.T;
    s.fluctuation += pen.G * pen.G / Z[static_cast<std::size_t>(e)];
  }
  s.G = R.transpose() * Gl;
  s.G_tilde = R.transpose() * Gtl;
  const double sg = side == 0 ? -1.0 : 1.0;
  const Vec3& g = s.G_tilde;
  s.sat = {s.G[0],
           s.G[1],
           s.G[2],
           sg * n[0] * g[0],
           sg * n[1] * g[1],
           sg * n[2] * g[2],
           sg * (n[1] * g[0] + n[0] * g[1]),
           sg * (n[2] * g[0] + n[0] * g[2]),
           sg * (n[2] * g[1] + n[1] * g[2])};
  return s;
}

/// Adds sum over faces of SAT_{xi,i} = -(1/h_b) w SAT_i into `out` (bracket scale, before P~).
inline void assemble_sat(const StateVector& Q, const Material& mat, const std::array<FaceGeometry, 6>& faces,
                         const BoundarySpec& spec, StateVector& out) {
  for (const Face& f : kFaces) {
    const FaceGeometry& geo = faces[face_slot(f)];
    if (!(geo.face == f)) throw Error(ErrorCode::SpecMismatch, "face geometry out of order");
    const auto& fc = spec[f];
    // Nodes within one face are distinct, so the loop is race free.
    parallel_for(geo.size(), [&](std::size_t p) {
      const auto s = boundary_node_state(Q, mat, geo, fc, spec.mode, p);
      const double scale = -geo.face_weight[p] / geo.boundary_h[p];
      const std::size_t idx = geo.nodes[p];
      for (std::size_t c = 0; c < kComponents; ++c) out(c, idx) += scale * s.sat[c];
    });
  }
}

/// Convenience form returning a fresh field that is nonzero only on boundary nodes.
inline StateVector assemble_sat(const StateVector& Q, const Material& mat, const std::array<FaceGeometry, 6>& faces,
                                const BoundarySpec& spec) {
  validate(spec);
  for (const auto& g : faces)
    if (!g.nodes.empty() && g.nodes.back() >= Q.nodes())
      throw Error(ErrorCode::SpecMismatch, "face geometry does not match the state dims");
  StateVector out(Q.dims());
  assemble_sat(Q, mat, faces, spec, out);
  return out;
}

}  // namespace upwave
