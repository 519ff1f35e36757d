#include <gtest/gtest.h>

#include <cmath>

#include "upwave/diagnostics.hpp"
#include "upwave/sources.hpp"
#include "upwave/timestepper.hpp"

using namespace upwave;

TEST(SourceTimeFunction, Values) {
  EXPECT_EQ(source_time_function(0.0, 0.1), 0.0);
  EXPECT_EQ(source_time_function(-1.0, 0.1), 0.0);
  EXPECT_NEAR(source_time_function(0.1, 0.1), 10.0 * std::exp(-1.0), 1e-14);
  EXPECT_NEAR(source_time_function(0.1, 0.1), 3.678794, 1e-6);
  const double h = 1e-6;
  EXPECT_NEAR((source_time_function(0.1 + h, 0.1) - source_time_function(0.1 - h, 0.1)) / (2 * h), 0.0, 1e-6);
  EXPECT_THROW(source_time_function(0.1, 0.0), Error);
}

namespace {

struct Domain {
  Dims d;
  OperatorSet ops;
  CurvilinearMesh mesh;
  Metrics met;
};

Domain hill_domain(const Dims& d) {
  auto ops = make_operator_set(OperatorKind::upwind_pair, 3, d);
  auto mesh = build_topography_mesh(gaussian_hill(0.2, 0.3, 0.5, 0.5), 1.0, d, {0, 1, 0, 1});
  auto met = compute_metrics(mesh, ops, MetricMode::discrete);
  return {d, std::move(ops), std::move(mesh), std::move(met)};
}

}  // namespace

TEST(PointSource, DeltaHasUnitIntegral) {
  for (std::size_t n : {9u, 17u}) {
    auto dom = hill_domain(Dims{n, n, n});
    MomentSource src;
    src.location = Vec3(0.5, 0.3, 0.7);
    const auto ps = discretize_point_source(src, dom.mesh, dom.met, dom.ops);
    const auto [i, j, k] = ps.ijk;
    const double w = dom.ops[Axis::q].h_weights[i] * dom.ops[Axis::r].h_weights[j] * dom.ops[Axis::s].h_weights[k];
    EXPECT_NEAR(w * dom.met.jac[ps.node] * ps.delta, 1.0, 1e-14);
  }
}

TEST(PointSource, SnapsToNearestNode) {
  const Dims d{11, 11, 11};
  auto ops = make_operator_set(OperatorKind::upwind_pair, 2, d);
  auto mesh = build_box_mesh({1, 1, 1}, d);
  auto met = compute_metrics(mesh, ops, MetricMode::analytic);
  MomentSource src;
  src.location = Vec3(0.31, 0.49, 0.86);
  const auto ps = discretize_point_source(src, mesh, met, ops);
  EXPECT_EQ(ps.ijk, (std::array<std::size_t, 3>{3, 5, 9}));
}

TEST(PointSource, OutsideDomainThrows) {
  auto dom = hill_domain(Dims{9, 9, 9});
  MomentSource src;
  for (const Vec3& p : {Vec3(0.5, 1.2, 0.5), Vec3(1.5, 0.5, 0.5), Vec3(-0.1, 0.05, 0.05)}) {
    src.location = p;
    try {
      discretize_point_source(src, dom.mesh, dom.met, dom.ops);
      FAIL() << p.transpose();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SourceOutsideDomain);
    }
  }
}

TEST(PointSource, StressSlotGivesNoInitialResponse) {
  const Dims d{9, 9, 9};
  auto ops = make_operator_set(OperatorKind::upwind_pair, 3, d);
  auto mesh = build_box_mesh({1, 1, 1}, d);
  auto met = compute_metrics(mesh, ops, MetricMode::analytic);
  MomentSource src;
  src.location = Vec3(0.5, 0.5, 0.5);
  src.moment[syz] = 1.0;
  const auto ps = discretize_point_source(src, mesh, met, ops);
  StateVector b(d);
  ps.add(0.0, b);
  for (double v : b.flat()) EXPECT_EQ(v, 0.0);
  ps.add(0.1, b);
  EXPECT_GT(b(syz, ps.node), 0.0);
  for (std::size_t c = 0; c < kComponents; ++c) {
    if (c == syz) continue;
    EXPECT_EQ(b(c, ps.node), 0.0);
  }
}

TEST(PointSource, SymmetricMomentGivesMirrorSymmetricField) {
  // An explosive source at the centre of a symmetric box: v_y is odd across y = 1/2, v_x is even.
  // Central operators are reflection symmetric, so the mirror property holds to rounding.
  const Dims d{9, 9, 9};
  auto ops = make_operator_set(OperatorKind::traditional_central, 4, d);
  auto mesh = build_box_mesh({1, 1, 1}, d);
  auto met = compute_metrics(mesh, ops, MetricMode::analytic);
  Semidiscretization sd(ops, met, constant_material(d, 1.0, 2.0, 1.0), BoundarySpec::uniform(0.0));
  MomentSource src;
  src.location = Vec3(0.5, 0.5, 0.5);
  src.moment[sxx] = src.moment[syy] = src.moment[szz] = 1.0;
  src.rise_time = 0.05;
  const auto ps = discretize_point_source(src, mesh, met, ops);
  sd.add_forcing([ps](double t, StateVector& b) { ps.add(t, b); });
  StateVector Q(d);
  LowStorageRk4 rk(d);
  const double dt = compute_dt(met, sd.material(), ops, 0.3);
  for (int s = 0; s < 30; ++s) rk.step(Q, [&](const StateVector& q, double t, StateVector& o) { sd.rhs(q, t, o); }, s * dt, dt);
  double peak = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < d.nq; ++i)
    for (std::size_t j = 0; j < d.nr; ++j)
      for (std::size_t k = 0; k < d.ns; ++k) {
        const std::size_t a = d.index(i, j, k), b = d.index(i, d.nr - 1 - j, k);
        peak = std::max(peak, std::abs(Q(vy, a)));
        worst = std::max(worst, std::abs(Q(vy, a) + Q(vy, b)));
        worst = std::max(worst, std::abs(Q(vx, a) - Q(vx, b)));
      }
  EXPECT_GT(peak, 0.0);
  EXPECT_LT(worst, 1e-12 * peak);
}

TEST(Mms, ConstantFieldsForceOnlyTheBoundary) {
  const Dims d{9, 9, 9};
  auto ops = make_operator_set(OperatorKind::upwind_pair, 3, d);
  auto mesh = build_box_mesh({1, 1, 1}, d);
  auto met = compute_metrics(mesh, ops, MetricMode::analytic);
  MmsSolution sol;
  sol.k = {0.0, 0.0, 0.0};
  sol.omega = 0.0;
  sol.psi = 0.0;
  for (auto& ph : sol.phase) ph = {1.0, 1.0, 1.0};
  Semidiscretization sd(ops, met, sol.material(d), BoundarySpec::uniform(0.0));
  MmsForcing f(sol, mesh, sd);
  StateVector b(d);
  f.add(0.3, b);
  double boundary = 0.0;
  for (std::size_t i = 0; i < d.nq; ++i)
    for (std::size_t j = 0; j < d.nr; ++j)
      for (std::size_t k = 0; k < d.ns; ++k) {
        const bool interior = i > 0 && j > 0 && k > 0 && i + 1 < d.nq && j + 1 < d.nr && k + 1 < d.ns;
        for (std::size_t c = 0; c < kComponents; ++c) {
          if (interior)
            EXPECT_EQ(b(c, d.index(i, j, k)), 0.0);
          else
            boundary = std::max(boundary, std::abs(b(c, d.index(i, j, k))));
        }
      }
  EXPECT_GT(boundary, 0.0);
}

TEST(Mms, FrozenTimeTruncationConverges) {
  MmsSolution sol;
  std::vector<double> err;
  for (std::size_t n : {17u, 33u, 65u}) {
    const Dims d{n, n, n};
    auto ops = make_operator_set(OperatorKind::upwind_pair, 6, d);
    auto mesh = build_box_mesh({1, 1, 1}, d);
    auto met = compute_metrics(mesh, ops, MetricMode::analytic);
    Semidiscretization sd(ops, met, sol.material(d), BoundarySpec::uniform(0.0));
    MmsForcing f(sol, mesh, sd);
    sd.add_forcing([&f](double t, StateVector& b) { f.add(t, b); });
    const double t = 0.37;
    const auto r = sd.rhs(sol.sample(mesh, t), t);
    const auto exact = sol.sample_time_derivative(mesh, t);
    double e = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) e = std::max(e, std::abs(r.flat()[i] - exact.flat()[i]));
    err.push_back(e);
  }
  // Max-norm truncation is governed by the boundary closure (third order).
  EXPECT_GT(std::log2(err[0] / err[1]), 2.5);
  EXPECT_GT(std::log2(err[1] / err[2]), 2.5);
}

TEST(Mms, ErrorOfExactSampleIsZero) {
  const Dims d{9, 9, 9};
  auto ops = make_operator_set(OperatorKind::upwind_pair, 3, d);
  auto mesh = build_box_mesh({1, 1, 1}, d);
  MmsSolution sol;
  const auto e = mms_error(sol.sample(mesh, 0.2), sol, mesh, ops, 0.2);
  EXPECT_EQ(e.max_all, 0.0);
  EXPECT_EQ(e.l2_all, 0.0);
  StateVector Q = sol.sample(mesh, 0.2);
  Q(vz, 0) += 1.0;
  const auto e2 = mms_error(Q, sol, mesh, ops, 0.2);
  EXPECT_DOUBLE_EQ(e2.max_error[vz], 1.0);
  EXPECT_NEAR(e2.l2_all, std::sqrt(ops[Axis::q].h_weights[0] * ops[Axis::r].h_weights[0] * ops[Axis::s].h_weights[0]), 1e-15);
}

TEST(FittedOrder, RecoversPowerLaw) {
  EXPECT_NEAR(fitted_order({0.1, 0.05, 0.025}, {3e-4, 3e-4 / 16, 3e-4 / 256}), 4.0, 1e-12);
  EXPECT_THROW(fitted_order({0.1}, {1.0}), Error);
}
