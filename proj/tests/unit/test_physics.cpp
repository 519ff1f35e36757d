#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "upwave/physics.hpp"

using namespace upwave;

namespace {

StateVector random_state(const Dims& d, unsigned seed) {
  StateVector Q(d);
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  for (double& v : Q.flat()) v = nd(gen);
  return Q;
}

struct Setup {
  Dims d;
  OperatorSet ops;
  CurvilinearMesh mesh;
  Metrics met;
  Material mat;
};

Setup unit_box(const Dims& d, int order = 3) {
  auto ops = make_operator_set(OperatorKind::upwind_pair, order, d);
  auto mesh = build_box_mesh({1, 1, 1}, d);
  auto met = compute_metrics(mesh, ops, MetricMode::analytic);
  auto mat = constant_material(d, 1.0, 2.0, 1.0);
  return {d, std::move(ops), std::move(mesh), std::move(met), std::move(mat)};
}

Setup hill(const Dims& d, int order = 3) {
  auto ops = make_operator_set(OperatorKind::upwind_pair, order, d);
  auto mesh = build_topography_mesh(gaussian_hill(0.2, 0.3, 0.5, 0.5), 1.0, d, {0, 1, 0, 1});
  auto met = compute_metrics(mesh, ops, MetricMode::discrete);
  auto mat = constant_material(d, 1.5, 2.0, 1.0);
  return {d, std::move(ops), std::move(mesh), std::move(met), std::move(mat)};
}

}  // namespace

TEST(FluxTerm, IdentityMapPicksStressColumn) {
  auto s = unit_box(Dims{8, 8, 8});
  // Unit box on [0,1]^3 has J = 1 and grad q = e_x.
  StateVector Q(s.d);
  EXPECT_EQ(flux_term(Q, s.met, Axis::q).flat()[0], 0.0);
  std::fill(Q.component(sxx).begin(), Q.component(sxx).end(), 1.0);
  const auto F = flux_term(Q, s.met, Axis::q);
  for (std::size_t c = 0; c < kComponents; ++c) EXPECT_DOUBLE_EQ(F(c, 17), c == vx ? 1.0 : 0.0);
}

TEST(FluxTerm, RandomStateMatchesStressContraction) {
  auto s = unit_box(Dims{8, 8, 8});
  const auto Q = random_state(s.d, 1);
  for (Axis xi : kAxes) {
    const auto F = flux_term(Q, s.met, xi);
    const int a = axis_index(xi);
    for (std::size_t i = 0; i < s.d.size(); ++i) {
      Mat3 S;
      S << Q(sxx, i), Q(sxy, i), Q(sxz, i), Q(sxy, i), Q(syy, i), Q(syz, i), Q(sxz, i), Q(syz, i), Q(szz, i);
      for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(F(r, i), S(static_cast<int>(r), a), 1e-14);
      for (std::size_t r = 3; r < kComponents; ++r) EXPECT_EQ(F(r, i), 0.0);
    }
  }
}

TEST(NonconservativeTerm, SingleGradientEntry) {
  auto s = unit_box(Dims{8, 8, 8});
  StateVector g(s.d);
  EXPECT_EQ(nonconservative_term(g, s.met, Axis::q).flat()[3], 0.0);
  std::fill(g.component(vx).begin(), g.component(vx).end(), 1.0);
  const auto B = nonconservative_term(g, s.met, Axis::q);
  for (std::size_t c = 0; c < kComponents; ++c) EXPECT_DOUBLE_EQ(B(c, 9), c == sxx ? 1.0 : 0.0);
}

TEST(NonconservativeTerm, SumOverAxesIsStrainRate) {
  auto s = unit_box(Dims{8, 8, 8});
  std::array<StateVector, 3> grads{random_state(s.d, 2), random_state(s.d, 3), random_state(s.d, 4)};
  StateVector sum(s.d);
  for (Axis xi : kAxes) {
    const auto B = nonconservative_term(grads[static_cast<std::size_t>(axis_index(xi))], s.met, xi);
    for (std::size_t i = 0; i < sum.size(); ++i) sum.flat()[i] += B.flat()[i];
  }
  for (std::size_t i = 0; i < s.d.size(); ++i) {
    // Cartesian: grads[b](a, i) = d v_a / d x_b.
    auto dv = [&](std::size_t a, std::size_t b) { return grads[b](a, i); };
    EXPECT_NEAR(sum(sxx, i), dv(0, 0), 1e-14);
    EXPECT_NEAR(sum(syy, i), dv(1, 1), 1e-14);
    EXPECT_NEAR(sum(szz, i), dv(2, 2), 1e-14);
    EXPECT_NEAR(sum(sxy, i), dv(0, 1) + dv(1, 0), 1e-14);
    EXPECT_NEAR(sum(sxz, i), dv(0, 2) + dv(2, 0), 1e-14);
    EXPECT_NEAR(sum(syz, i), dv(1, 2) + dv(2, 1), 1e-14);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(sum(c, i), 0.0);
  }
}

TEST(Antisymmetry, ZeroStateIsZero) {
  auto s = unit_box(Dims{9, 9, 9});
  EXPECT_EQ(antisymmetry_residual(StateVector(s.d), s.met, s.ops), 0.0);
}

TEST(Antisymmetry, RandomStatesOnBoxAndHill) {
  for (int order : {2, 3}) {
    for (auto* make : {&unit_box, &hill}) {
      auto s = make(Dims{9, 9, 9}, order);
      for (unsigned seed = 0; seed < 10; ++seed) {
        const auto rep = antisymmetry_report(random_state(s.d, seed), s.met, s.ops);
        EXPECT_LT(rep.normalized, 1e-11);
        EXPECT_GT(rep.magnitude[0], 0.0);
      }
    }
  }
}

TEST(Rhs, ZeroStateGivesZero) {
  auto s = unit_box(Dims{9, 9, 9});
  Semidiscretization sd(s.ops, s.met, s.mat, BoundarySpec::uniform(0.0));
  const auto r = sd.rhs(StateVector(s.d), 0.0);
  for (double v : r.flat()) EXPECT_EQ(v, 0.0);
}

TEST(Rhs, ConstantStateHasZeroInteriorRate) {
  auto box = unit_box(Dims{9, 9, 9});
  StateVector Q(box.d);
  for (std::size_t c = 0; c < kComponents; ++c) std::fill(Q.component(c).begin(), Q.component(c).end(), 0.1 * (c + 1));
  Semidiscretization sdb(box.ops, box.met, box.mat, BoundarySpec::uniform(1.0));
  const auto r = sdb.rhs(Q, 0.0, {.with_sat = false});
  for (double v : r.flat()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Rhs, IsLinear) {
  auto s = hill(Dims{9, 9, 9});
  Semidiscretization sd(s.ops, s.met, s.mat, BoundarySpec::uniform(0.3));
  const auto a = random_state(s.d, 5), b = random_state(s.d, 6);
  StateVector c(s.d);
  for (std::size_t i = 0; i < c.size(); ++i) c.flat()[i] = 2.0 * a.flat()[i] - 0.5 * b.flat()[i];
  const auto ra = sd.rhs(a, 0.0), rb = sd.rhs(b, 0.0), rc = sd.rhs(c, 0.0);
  double scale = 0.0;
  for (double v : rc.flat()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < c.size(); ++i)
    EXPECT_NEAR(rc.flat()[i], 2.0 * ra.flat()[i] - 0.5 * rb.flat()[i], 1e-13 * scale);
}

TEST(Rhs, PlaneWaveTimeDerivativeConverges) {
  // Plane P wave along x: v_x = f(x - cp t), sigma_xx = -rho cp f, sigma_yy = sigma_zz = -lambda/cp f.
  const double rho = 1.0, cp = 2.0, cs = 1.0;
  const auto [lambda, mu] = lame_from_speeds(rho, cp, cs);
  const double k = 2.0 * std::numbers::pi;
  std::vector<double> err;
  for (std::size_t n : {17u, 33u, 65u}) {
    const Dims dd{n, 13, 13};
    auto ops = make_operator_set(OperatorKind::upwind_pair, 6, dd);
    auto mesh = build_box_mesh({1, 1, 1}, dd);
    auto met = compute_metrics(mesh, ops, MetricMode::analytic);
    Semidiscretization sd(ops, met, constant_material(dd, rho, cp, cs), BoundarySpec::uniform(0.0));
    StateVector Q(dd), exact(dd);
    for (std::size_t i = 0; i < dd.size(); ++i) {
      const double x = mesh.x[i];
      const double f = std::sin(k * x), df = k * std::cos(k * x);
      Q(vx, i) = f;
      Q(sxx, i) = -rho * cp * f;
      Q(syy, i) = Q(szz, i) = -lambda / cp * f;
      exact(vx, i) = -cp * df;
      exact(sxx, i) = rho * cp * cp * df;
      exact(syy, i) = exact(szz, i) = lambda * df;
    }
    const auto r = sd.rhs(Q, 0.0, {.with_sat = false});
    double e = 0.0;
    for (std::size_t i = 8; i + 8 < n; ++i)
      for (std::size_t c = 0; c < kComponents; ++c) e = std::max(e, std::abs(r(c, dd.index(i, 6, 6)) - exact(c, dd.index(i, 6, 6))));
    err.push_back(e);
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 5.0);
  EXPECT_GT(std::log2(err[1] / err[2]), 5.0);
}

TEST(Rhs, NonFiniteInputThrows) {
  auto s = unit_box(Dims{8, 8, 8});
  Semidiscretization sd(s.ops, s.met, s.mat, BoundarySpec::uniform(1.0));
  StateVector Q(s.d);
  Q(vx, 100) = std::numeric_limits<double>::infinity();
  try {
    sd.rhs(Q, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteState);
  }
}

TEST(Rhs, MismatchedStateThrows) {
  auto s = unit_box(Dims{8, 8, 8});
  Semidiscretization sd(s.ops, s.met, s.mat, BoundarySpec::uniform(1.0));
  try {
    sd.rhs(StateVector(Dims{8, 8, 9}), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}
