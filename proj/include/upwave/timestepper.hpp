#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/material.hpp"
#include "upwave/operators.hpp"
#include "upwave/parallel.hpp"
#include "upwave/state.hpp"

namespace upwave {

/// Five-stage, fourth-order, two-register (2N) Runge-Kutta scheme of Carpenter and Kennedy.
struct RkScheme {
  static constexpr int stages = 5;
  static constexpr std::array<double, 5> A{
      0.0,
      -567301805773.0 / 1357537059087.0,
      -2404267990393.0 / 2016746695238.0,
      -3550918686646.0 / 2091501179385.0,
      -1275806237668.0 / 842570457699.0,
  };
  static constexpr std::array<double, 5> B{
      1432997174477.0 / 9575080441755.0,  5161836677717.0 / 13612068292357.0, 1720146321549.0 / 2090206949498.0,
      3134564353537.0 / 4481467310338.0,  2277821191437.0 / 14882151754819.0,
  };
  static constexpr std::array<double, 5> C{
      0.0,
      1432997174477.0 / 9575080441755.0,
      2526269341429.0 / 6820363962896.0,
      2006345519317.0 / 3224310063776.0,
      2802321613138.0 / 2924317926251.0,
  };

  /// Stability polynomial R(z) for y' = lambda y, evaluated by running the stages on a scalar.
  static double amplification(double z) {
    double y = 1.0, k = 0.0;
    for (int s = 0; s < stages; ++s) {
      k = A[static_cast<std::size_t>(s)] * k + z * y;
      y += B[static_cast<std::size_t>(s)] * k;
    }
    return y;
  }
};

struct StepControl {
  double cfl = 0.3;
  double dt = 0.0;
  double t_end = 0.0;
};

/// dt = cfl * min over nodes of 1 / sum_xi (cp |grad xi| / d xi).
inline double compute_dt(const Metrics& met, const Material& mat, const OperatorSet& ops, double cfl) {
  if (!(cfl > 0.0) || cfl > 1.0) throw Error(ErrorCode::BadValue, "cfl must lie in (0, 1]");
  require_same_dims(met.dims, mat.dims(), "metrics vs material");
  const std::array<double, 3> inv_spacing{1.0 / ops[Axis::q].spacing, 1.0 / ops[Axis::r].spacing,
                                          1.0 / ops[Axis::s].spacing};
  double worst = 0.0;
  for (std::size_t i = 0; i < met.dims.size(); ++i) {
    const double c = mat.cp(i);
    double rate = 0.0;
    for (std::size_t x = 0; x < 3; ++x) {
      const double gx = met.inv[x][0][i], gy = met.inv[x][1][i], gz = met.inv[x][2][i];
      rate += c * std::sqrt(gx * gx + gy * gy + gz * gz) * inv_spacing[x];
    }
    if (!std::isfinite(rate)) throw Error(ErrorCode::DegenerateMetrics, "non-finite wave rate");
    worst = std::max(worst, rate);
  }
  if (!(worst > 0.0)) throw Error(ErrorCode::DegenerateMetrics, "zero wave rate; cannot bound the time step");
  return cfl / worst;
}

using RhsFunction = std::function<void(const StateVector& Q, double t, StateVector& out)>;

/// Two state registers (Q and the stage accumulator) plus the rhs output buffer.
class LowStorageRk4 {
 public:
  explicit LowStorageRk4(const Dims& dims) : dq_(dims), k_(dims) {}

  /// Advances Q from t to t + dt in place.
  void step(StateVector& Q, const RhsFunction& f, double t, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::BadValue, "dt must be positive");
    require_same_dims(Q.dims(), dq_.dims(), "state vs stepper");
    auto q = Q.flat();
    auto dq = dq_.flat();
    auto k = k_.flat();
    const std::size_t n = q.size();
    for (int s = 0; s < RkScheme::stages; ++s) {
      const auto si = static_cast<std::size_t>(s);
      f(Q, t + RkScheme::C[si] * dt, k_);
      const double a = RkScheme::A[si], b = RkScheme::B[si];
      parallel_for(n, [&](std::size_t i) {
        dq[i] = a * dq[i] + dt * k[i];
        q[i] += b * dq[i];
      });
    }
    if (!Q.all_finite()) throw Error(ErrorCode::NonFiniteState, "state became non-finite at t = " + std::to_string(t + dt));
  }

 private:
  StateVector dq_;
  StateVector k_;
};

/// One step with freshly allocated registers.
inline StateVector step(const StateVector& Q, const RhsFunction& f, double t, double dt) {
  StateVector next = Q;
  LowStorageRk4 rk(Q.dims());
  rk.step(next, f, t, dt);
  return next;
}

}  // namespace upwave
