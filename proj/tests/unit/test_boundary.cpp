#include <gtest/gtest.h>

#include <random>

#include "upwave/boundary.hpp"
#include "upwave/physics.hpp"

using namespace upwave;

TEST(Traction, ContractsSymmetricStress) {
  const auto t1 = traction({1, 0, 0, 0, 0, 0}, Vec3(1, 0, 0));
  EXPECT_EQ(t1, Vec3(1, 0, 0));
  const auto t2 = traction({0, 0, 0, 1, 0, 0}, Vec3(1, 0, 0));
  EXPECT_EQ(t2, Vec3(0, 1, 0));
  std::mt19937 gen(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 6> s;
    for (double& v : s) v = nd(gen);
    Mat3 S;
    S << s[0], s[3], s[4], s[3], s[1], s[5], s[4], s[5], s[2];
    const Vec3 n = Vec3(nd(gen), nd(gen), nd(gen)).normalized();
    EXPECT_LT((traction(s, n) - S * n).norm(), 1e-14);
  }
}

TEST(Characteristics, HandValues) {
  const auto c = characteristics(1.0, 4.0, 2.0);
  EXPECT_DOUBLE_EQ(c.q, 3.0);
  EXPECT_DOUBLE_EQ(c.p, -1.0);
  EXPECT_NEAR(characteristics(0.7, 2.1, 3.0).p, 0.0, 1e-15);
  try {
    characteristics(1.0, 1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonpositiveImpedance);
  }
}

TEST(Characteristics, RoundTrip) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double v = u(gen), T = u(gen), Z = 0.1 + std::abs(u(gen));
    const auto c = characteristics(v, T, Z);
    EXPECT_NEAR((c.q + c.p) / Z, v, 1e-14 * (1 + std::abs(v)) / Z * 4);
    EXPECT_NEAR(c.q - c.p, T, 1e-15 * 8);
  }
}

TEST(HatVariables, FreeAbsorbingClamped) {
  auto h = hat_variables(3.0, 1.0, 2.0, 0);
  EXPECT_DOUBLE_EQ(h.v, 3.0);
  EXPECT_DOUBLE_EQ(h.T, 0.0);
  h = hat_variables(3.0, 0.0, 2.0, 0);
  EXPECT_DOUBLE_EQ(h.v, 1.5);
  EXPECT_DOUBLE_EQ(h.T, 3.0);
  EXPECT_DOUBLE_EQ(characteristics(h.v, h.T, 2.0).p, 0.0);
  EXPECT_DOUBLE_EQ(hat_variables(-4.2, -1.0, 1.3, 1).v, 0.0);
  EXPECT_DOUBLE_EQ(hat_variables(5.0, -1.0, 1.3, 0).v, 0.0);
  try {
    hat_variables(1.0, 1.5, 1.0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGamma);
  }
}

TEST(HatVariables, PreserveOutgoingAndSatisfyCondition) {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = 3 * u(gen), T = 3 * u(gen), Z = 0.2 + 2 * std::abs(u(gen)), g = u(gen);
    const auto c = characteristics(v, T, Z);
    const double scale = std::abs(v) * Z + std::abs(T) + 1.0;
    for (int side = 0; side < 2; ++side) {
      const double out = side == 0 ? c.q : c.p;
      const auto h = hat_variables(out, g, Z, side);
      const auto ch = characteristics(h.v, h.T, Z);
      EXPECT_NEAR(side == 0 ? ch.q : ch.p, out, 1e-14 * scale);
      // (1 - g)/2 Z v_hat - (1 + g)/2 T_hat at side 0, + at side 1.
      const double bc = 0.5 * (1 - g) * Z * h.v + (side == 0 ? -1.0 : 1.0) * 0.5 * (1 + g) * h.T;
      EXPECT_NEAR(bc, 0.0, 1e-14 * scale);
      if (side == 0)
        EXPECT_GE(h.v * h.T, -1e-14 * scale * scale);
      else
        EXPECT_LE(h.v * h.T, 1e-14 * scale * scale);
    }
  }
}

TEST(Penalties, HandChain) {
  const auto c = characteristics(1.0, 4.0, 2.0);
  const auto h = hat_variables(c.q, 0.0, 2.0, 0);
  const auto p = penalties(1.0, 4.0, h.v, h.T, 2.0, 0);
  EXPECT_DOUBLE_EQ(p.G, -1.0);
  EXPECT_DOUBLE_EQ(p.G_tilde, -0.5);
  EXPECT_DOUBLE_EQ(penalties(0.3, 0.0, 0.3, 0.0, 2.0, 0).G, 0.0);
  EXPECT_DOUBLE_EQ(penalties(0.3, 1.1, 0.3, 1.1, 2.0, 1).G, 0.0);
}

TEST(Penalties, IdentityBothSides) {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = 3 * u(gen), T = 3 * u(gen), Z = 0.2 + 2 * std::abs(u(gen)), g = u(gen);
    const auto c = characteristics(v, T, Z);
    {
      const auto h = hat_variables(c.q, g, Z, 0);
      const auto p = penalties(v, T, h.v, h.T, Z, 0);
      EXPECT_NEAR(v * p.G - T * p.G_tilde + v * T, p.G * p.G / Z + h.v * h.T, 1e-12 * (1 + v * v + T * T) / Z);
    }
    {
      const auto h = hat_variables(c.p, g, Z, 1);
      const auto p = penalties(v, T, h.v, h.T, Z, 1);
      EXPECT_NEAR(v * p.G + T * p.G_tilde - v * T, p.G * p.G / Z - h.v * h.T, 1e-12 * (1 + v * v + T * T) / Z);
    }
  }
}

TEST(FaceConditions, Parse) {
  EXPECT_EQ(parse_face_condition("free_surface").gamma, (std::array<double, 3>{1, 1, 1}));
  EXPECT_EQ(parse_face_condition("absorbing").gamma, (std::array<double, 3>{0, 0, 0}));
  EXPECT_EQ(parse_face_condition("clamped").gamma, (std::array<double, 3>{-1, -1, -1}));
  EXPECT_EQ(parse_face_condition("gamma:0.5").gamma, (std::array<double, 3>{0.5, 0.5, 0.5}));
  EXPECT_EQ(parse_face_condition("gamma:0.5,0,-1").gamma, (std::array<double, 3>{0.5, 0, -1}));
  EXPECT_THROW(parse_face_condition("gamma:2"), Error);
  EXPECT_THROW(parse_face_condition("gamma:1,2"), Error);
  EXPECT_THROW(parse_face_condition("slippery"), Error);
}

TEST(BoundarySpec, DirectModeNeedsFreeSurface) {
  auto spec = BoundarySpec::uniform(1.0, SatMode::free_surface_direct);
  EXPECT_NO_THROW(validate(spec));
  spec[Face{Axis::r, 1}].gamma[2] = 0.0;
  try {
    validate(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpecMismatch);
  }
}

namespace {

struct Fixture {
  Dims d{9, 9, 9};
  OperatorSet ops = make_operator_set(OperatorKind::upwind_pair, 3, d);
  CurvilinearMesh mesh = build_topography_mesh(gaussian_hill(0.2, 0.3, 0.4, 0.6), 1.0, d, {0, 1, 0, 1});
  Metrics met = compute_metrics(mesh, ops, MetricMode::discrete);
  Material mat = constant_material(d, 1.3, 2.0, 1.1);
  std::array<FaceGeometry, 6> faces = all_face_geometry(met, ops);
};

StateVector random_state(const Dims& d, unsigned seed) {
  StateVector Q(d);
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  for (double& v : Q.flat()) v = nd(gen);
  return Q;
}

}  // namespace

TEST(AssembleSat, ZeroStateGivesZero) {
  Fixture f;
  StateVector Q(f.d);
  for (double g : {1.0, 0.0, -1.0, 0.4}) {
    const auto s = assemble_sat(Q, f.mat, f.faces, BoundarySpec::uniform(g));
    for (double v : s.flat()) EXPECT_EQ(v, 0.0);
  }
}

TEST(AssembleSat, TractionFreeStateIsUntouchedByFreeSurface) {
  Fixture f;
  auto Q = random_state(f.d, 2);
  for (std::size_t c = sxx; c <= syz; ++c) std::fill(Q.component(c).begin(), Q.component(c).end(), 0.0);
  for (auto mode : {SatMode::general, SatMode::free_surface_direct}) {
    const auto s = assemble_sat(Q, f.mat, f.faces, BoundarySpec::uniform(1.0, mode));
    for (double v : s.flat()) EXPECT_NEAR(v, 0.0, 1e-13);
  }
}

TEST(AssembleSat, OnlyBoundaryNodesAreTouched) {
  Fixture f;
  const auto Q = random_state(f.d, 3);
  const auto s = assemble_sat(Q, f.mat, f.faces, BoundarySpec::uniform(0.0));
  for (std::size_t i = 1; i + 1 < f.d.nq; ++i)
    for (std::size_t j = 1; j + 1 < f.d.nr; ++j)
      for (std::size_t k = 1; k + 1 < f.d.ns; ++k)
        for (std::size_t c = 0; c < kComponents; ++c) EXPECT_EQ(s(c, f.d.index(i, j, k)), 0.0);
}

TEST(AssembleSat, NodeScalarProductMatchesPenaltyIdentity) {
  Fixture f;
  const auto Q = random_state(f.d, 4);
  for (double g : {1.0, 0.0, -1.0, 0.3}) {
    for (const Face& face : kFaces) {
      const auto& geo = f.faces[face_slot(face)];
      FaceCondition fc{{g, g, g}};
      for (std::size_t p = 0; p < geo.size(); ++p) {
        const auto s = boundary_node_state(Q, f.mat, geo, fc, SatMode::general, p);
        const std::size_t idx = geo.nodes[p];
        double qs = 0.0;
        for (std::size_t c = 0; c < kComponents; ++c) qs += Q(c, idx) * s.sat[c];
        // Q . SAT = v.G -/+ T.G~ with the sign of the side.
        const double sg = face.side == 0 ? -1.0 : 1.0;
        const double expect = s.v.dot(s.G) + sg * s.T.dot(s.G_tilde);
        EXPECT_NEAR(qs, expect, 1e-12 * (1 + std::abs(expect)));
        // Per-mode identity, summed over modes, side 0 form: vG - TG~ + vT = G^2/Z + vhat That.
        const double lhs = s.v.dot(s.G) + sg * s.T.dot(s.G_tilde) - sg * s.v.dot(s.T);
        EXPECT_NEAR(lhs, s.fluctuation - sg * s.hat_work, 1e-11 * (1 + std::abs(lhs)));
      }
    }
  }
}
