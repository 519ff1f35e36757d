#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "upwave/boundary.hpp"
#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/material.hpp"
#include "upwave/operators.hpp"
#include "upwave/parallel.hpp"
#include "upwave/state.hpp"

namespace upwave {

namespace detail {

/// Stress component index for the symmetric pair (a, b), a, b in {0, 1, 2}.
inline constexpr std::size_t stress_index(std::size_t a, std::size_t b) {
  constexpr std::size_t t[3][3] = {{sxx, sxy, sxz}, {sxy, syy, syz}, {sxz, syz, szz}};
  return t[a][b];
}

inline void check_state(const StateVector& Q, const Dims& d) { require_same_dims(Q.dims(), d, "state"); }

}  // namespace detail

/// F_xi(Q): velocity rows hold the stress tensor contracted with e_xi = J grad(xi).
inline StateVector flux_term(const StateVector& Q, const Metrics& met, Axis xi) {
  detail::check_state(Q, met.dims);
  StateVector F(Q.dims());
  const std::size_t x = static_cast<std::size_t>(axis_index(xi));
  parallel_for(Q.nodes(), [&](std::size_t i) {
    const double J = met.jac[i];
    const double e[3] = {J * met.inv[x][0][i], J * met.inv[x][1][i], J * met.inv[x][2][i]};
    for (std::size_t a = 0; a < 3; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < 3; ++b) acc += e[b] * Q(detail::stress_index(a, b), i);
      F(a, i) = acc;
    }
  });
  return F;
}

/// Velocity derivatives along xi; grad(c, idx) holds d v_c / d xi in slots 0..2, the rest unused.
inline StateVector velocity_gradient(const StateVector& Q, const OperatorSet& ops, Axis xi) {
  StateVector g(Q.dims());
  for (std::size_t c = 0; c < 3; ++c) apply_along_axis(ops[xi].d_plus, Q.component(c), Q.dims(), xi, g.component(c));
  return g;
}

/// B_xi: stress rows of the non-conservative product, given d v / d xi in rows 0..2 of `grad`.
inline StateVector nonconservative_term(const StateVector& grad, const Metrics& met, Axis xi) {
  detail::check_state(grad, met.dims);
  StateVector B(grad.dims());
  const std::size_t x = static_cast<std::size_t>(axis_index(xi));
  parallel_for(grad.nodes(), [&](std::size_t i) {
    const double J = met.jac[i];
    const double e[3] = {J * met.inv[x][0][i], J * met.inv[x][1][i], J * met.inv[x][2][i]};
    const double d[3] = {grad(vx, i), grad(vy, i), grad(vz, i)};
    B(sxx, i) = e[0] * d[0];
    B(syy, i) = e[1] * d[1];
    B(szz, i) = e[2] * d[2];
    B(sxy, i) = e[1] * d[0] + e[0] * d[1];
    B(sxz, i) = e[2] * d[0] + e[0] * d[2];
    B(syz, i) = e[2] * d[1] + e[1] * d[2];
  });
  return B;
}

/// H-weighted sum over nodes of a * b for two state-shaped fields.
inline double h_inner(const StateVector& a, const StateVector& b, const OperatorSet& ops) {
  const Dims& d = a.dims();
  const auto& hq = ops[Axis::q].h_weights;
  const auto& hr = ops[Axis::r].h_weights;
  const auto& hs = ops[Axis::s].h_weights;
  return ordered_reduce(d.nq, [&](std::size_t i) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < d.nr; ++j)
      for (std::size_t k = 0; k < d.ns; ++k) {
        const std::size_t idx = d.index(i, j, k);
        double s = 0.0;
        for (std::size_t c = 0; c < kComponents; ++c) s += a(c, idx) * b(c, idx);
        acc.add(hq[i] * hr[j] * hs[k] * s);
      }
    return acc.value();
  });
}

struct AntisymmetryReport {
  std::array<double, 3> raw{};         ///< |<D+ Q, F> - <Q, B>|_H per axis
  std::array<double, 3> magnitude{};   ///< sum_H (|D+Q . F| + |Q . B|) per axis
  double normalized = 0.0;             ///< max over axes of raw / magnitude (0 if magnitude is 0)
};

/// Discrete anti-symmetry: ((I x D+_xi) Q)^T F_xi(Q) - Q^T B_xi(grad_{D+} Q), H-weighted over the grid.
inline AntisymmetryReport antisymmetry_report(const StateVector& Q, const Metrics& met, const OperatorSet& ops) {
  detail::check_state(Q, met.dims);
  AntisymmetryReport rep;
  const Dims& d = Q.dims();
  const auto& hq = ops[Axis::q].h_weights;
  const auto& hr = ops[Axis::r].h_weights;
  const auto& hs = ops[Axis::s].h_weights;
  for (Axis xi : kAxes) {
    StateVector dQ(d);
    for (std::size_t c = 0; c < kComponents; ++c)
      apply_along_axis(ops[xi].d_plus, Q.component(c), d, xi, dQ.component(c));
    const auto F = flux_term(Q, met, xi);
    const auto B = nonconservative_term(dQ, met, xi);
    CompensatedSum diff, mag;
    for (std::size_t i = 0; i < d.nq; ++i)
      for (std::size_t j = 0; j < d.nr; ++j)
        for (std::size_t k = 0; k < d.ns; ++k) {
          const std::size_t idx = d.index(i, j, k);
          double a = 0.0, b = 0.0;
          for (std::size_t c = 0; c < kComponents; ++c) {
            a += dQ(c, idx) * F(c, idx);
            b += Q(c, idx) * B(c, idx);
          }
          const double w = hq[i] * hr[j] * hs[k];
          diff.add(w * (a - b));
          mag.add(w * (std::abs(a) + std::abs(b)));
        }
    const std::size_t x = static_cast<std::size_t>(axis_index(xi));
    rep.raw[x] = std::abs(diff.value());
    rep.magnitude[x] = mag.value();
    if (rep.magnitude[x] > 0.0) rep.normalized = std::max(rep.normalized, rep.raw[x] / rep.magnitude[x]);
  }
  return rep;
}

inline double antisymmetry_residual(const StateVector& Q, const Metrics& met, const OperatorSet& ops) {
  return antisymmetry_report(Q, met, ops).normalized;
}

/// Adds a time-dependent contribution to the bracket (before P~ scaling).
using Forcing = std::function<void(double t, StateVector& bracket)>;

struct BracketOptions {
  bool with_sat = true;
  bool with_forcing = true;
};

/// The spatial discretisation: immutable geometry and material plus boundary data.
class Semidiscretization {
 public:
  Semidiscretization(OperatorSet ops, Metrics metrics, Material material, BoundarySpec bc)
      : ops_(std::move(ops)), met_(std::move(metrics)), mat_(std::move(material)), bc_(bc) {
    require_same_dims(ops_.dims(), met_.dims, "operators vs metrics");
    require_same_dims(met_.dims, mat_.dims(), "metrics vs material");
    validate_material(mat_);
    validate(bc_);
    faces_ = all_face_geometry(met_, ops_);
    const std::size_t n = met_.dims.size();
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t a = 0; a < 3; ++a) {
        e_[x][a].resize(n);
        for (std::size_t i = 0; i < n; ++i) e_[x][a][i] = met_.jac[i] * met_.inv[x][a][i];
      }
  }

  const Dims& dims() const { return met_.dims; }
  const OperatorSet& operators() const { return ops_; }
  const Metrics& metrics() const { return met_; }
  const Material& material() const { return mat_; }
  const BoundarySpec& boundary() const { return bc_; }
  const std::array<FaceGeometry, 6>& faces() const { return faces_; }

  void add_forcing(Forcing f) { forcing_.push_back(std::move(f)); }
  void clear_forcing() { forcing_.clear(); }

  /// out = sum_xi D-_xi F_xi(Q) + sum_xi B_xi(grad_{D+} Q) [+ SAT] [+ forcing].
  void bracket(const StateVector& Q, double t, StateVector& out, BracketOptions opt = {}) const {
    const Dims& d = dims();
    detail::check_state(Q, d);
    detail::check_state(out, d);
    out.fill(0.0);
    const std::size_t n = d.size();
    std::vector<double> field(n), deriv(n);
    for (Axis xi : kAxes) {
      const std::size_t x = static_cast<std::size_t>(axis_index(xi));
      const auto& e = e_[x];
      const auto& t3 = ops_[xi];
      for (std::size_t a = 0; a < 3; ++a) {
        const auto s0 = Q.component(detail::stress_index(a, 0));
        const auto s1 = Q.component(detail::stress_index(a, 1));
        const auto s2 = Q.component(detail::stress_index(a, 2));
        parallel_for(n, [&](std::size_t i) { field[i] = e[0][i] * s0[i] + e[1][i] * s1[i] + e[2][i] * s2[i]; });
        apply_along_axis(t3.d_minus, field, d, xi, deriv);
        auto o = out.component(a);
        parallel_for(n, [&](std::size_t i) { o[i] += deriv[i]; });
      }
      for (std::size_t b = 0; b < 3; ++b) {
        apply_along_axis(t3.d_plus, Q.component(b), d, xi, deriv);
        // d v_b / d xi enters stress row (a, b) with weight e_a.
        for (std::size_t a = 0; a < 3; ++a) {
          auto o = out.component(detail::stress_index(a, b));
          const auto& ea = e[a];
          parallel_for(n, [&](std::size_t i) { o[i] += ea[i] * deriv[i]; });
        }
      }
    }
    if (opt.with_sat) assemble_sat(Q, mat_, faces_, bc_, out);
    if (opt.with_forcing)
      for (const auto& f : forcing_) f(t, out);
  }

  /// In place: rows 1-3 divided by J rho, rows 4-9 replaced by C (.) / J.
  void apply_mass_inverse(StateVector& b) const {
    parallel_for(dims().size(), [&](std::size_t i) {
      const double J = met_.jac[i];
      const double r = 1.0 / (J * mat_.rho[i]);
      b(vx, i) *= r;
      b(vy, i) *= r;
      b(vz, i) *= r;
      const auto c = apply_stiffness(mat_.lambda[i], mat_.mu[i],
                                     {b(sxx, i), b(syy, i), b(szz, i), b(sxy, i), b(sxz, i), b(syz, i)});
      for (std::size_t k = 0; k < 6; ++k) b(3 + k, i) = c[k] / J;
    });
  }

  void rhs(const StateVector& Q, double t, StateVector& out, BracketOptions opt = {}) const {
    bracket(Q, t, out, opt);
    apply_mass_inverse(out);
    if (!out.all_finite()) throw Error(ErrorCode::NonFiniteState, "right-hand side produced non-finite values");
  }

  StateVector rhs(const StateVector& Q, double t, BracketOptions opt = {}) const {
    StateVector out(Q.dims());
    rhs(Q, t, out, opt);
    return out;
  }

 private:
  OperatorSet ops_;
  Metrics met_;
  Material mat_;
  BoundarySpec bc_;
  std::array<FaceGeometry, 6> faces_;
  std::array<std::array<std::vector<double>, 3>, 3> e_;  ///< e_[xi][a] = J d xi / d x_a
  std::vector<Forcing> forcing_;
};

}  // namespace upwave
