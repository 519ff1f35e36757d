#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "upwave/error.hpp"

namespace upwave::sbp {

/// Boundary closure of a diagonal-norm central SBP operator on a unit-spaced
/// grid: D = H^{-1} Q with Q + Q^T = diag(-1, 0, ..., 0, 1).
struct CentralClosure {
  std::size_t rows = 0;                ///< closure rows b (H differs from 1 there)
  int accuracy = 0;                    ///< boundary accuracy p
  std::vector<double> interior;        ///< c_1..c_w of the antisymmetric interior stencil
  std::vector<double> norm;            ///< h_0..h_{b-1}
  std::vector<double> q;               ///< Q rows 0..b-1, columns 0..b+w-1, row-major

  std::size_t half_width() const { return interior.size(); }
  std::size_t cols() const { return rows + interior.size(); }
  double q_entry(std::size_t i, std::size_t j) const { return q[i * cols() + j]; }
};

struct FixedEntry {
  std::size_t i;
  std::size_t j;  ///< i < j
  double value;
};

/// Solves the linear accuracy system  Q xi^k = H k xi^{k-1}, k = 0..p, on the
/// first b rows for the boundary norm weights and the skew closure block.
/// Entries listed in `fixed` are treated as known. The remaining unknowns
/// must be uniquely determined.
inline CentralClosure solve_central_closure(std::size_t rows, int accuracy, std::vector<double> interior,
                                            const std::vector<FixedEntry>& fixed = {}) {
  const std::size_t b = rows;
  const std::size_t w = interior.size();
  const std::size_t cols = b + w;

  auto is_fixed = [&](std::size_t i, std::size_t j, double* value) {
    for (const auto& f : fixed)
      if (f.i == i && f.j == j) {
        if (value) *value = f.value;
        return true;
      }
    return false;
  };

  // Unknown layout: h_0..h_{b-1}, then q_ij for i<j<b not fixed.
  std::vector<std::pair<std::size_t, std::size_t>> skew;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = i + 1; j < b; ++j)
      if (!is_fixed(i, j, nullptr)) skew.emplace_back(i, j);
  const std::size_t n_unknown = b + skew.size();
  const std::size_t n_eq = b * static_cast<std::size_t>(accuracy + 1);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_eq), static_cast<Eigen::Index>(n_unknown));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_eq));

  auto known_q = [&](std::size_t i, std::size_t j) -> double {
    if (j >= b) {
      const std::size_t off = j - i;
      return (off >= 1 && off <= w) ? interior[off - 1] : 0.0;
    }
    if (i == j) return i == 0 ? -0.5 : 0.0;
    double v = 0.0;
    if (i < j && is_fixed(i, j, &v)) return v;
    if (j < i && is_fixed(j, i, &v)) return -v;
    return 0.0;
  };

  Eigen::Index row = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (int k = 0; k <= accuracy; ++k, ++row) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double xk = std::pow(static_cast<double>(j), k);
        rhs(row) -= known_q(i, j) * xk;
      }
      for (std::size_t u = 0; u < skew.size(); ++u) {
        const auto [p, c] = skew[u];
        const auto col = static_cast<Eigen::Index>(b + u);
        if (p == i) a(row, col) += std::pow(static_cast<double>(c), k);
        if (c == i) a(row, col) -= std::pow(static_cast<double>(p), k);
      }
      if (k > 0) a(row, static_cast<Eigen::Index>(i)) -= k * std::pow(static_cast<double>(i), k - 1);
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (static_cast<std::size_t>(qr.rank()) != n_unknown)
    throw Error(ErrorCode::UnsupportedOrder, "closure system is not uniquely solvable (rank " +
                                                 std::to_string(qr.rank()) + " of " +
                                                 std::to_string(n_unknown) + ")");
  const Eigen::VectorXd x = qr.solve(rhs);
  if ((a * x - rhs).lpNorm<Eigen::Infinity>() > 1e-11)
    throw Error(ErrorCode::UnsupportedOrder, "closure system is inconsistent");

  CentralClosure out;
  out.rows = b;
  out.accuracy = accuracy;
  out.norm.assign(x.data(), x.data() + b);
  out.q.assign(b * cols, 0.0);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < cols; ++j) out.q[i * cols + j] = known_q(i, j);
  for (std::size_t u = 0; u < skew.size(); ++u) {
    const auto [p, c] = skew[u];
    const double v = x(static_cast<Eigen::Index>(b + u));
    out.q[p * cols + c] = v;
    out.q[c * cols + p] = -v;
  }
  out.interior = std::move(interior);
  return out;
}

/// Second-order interior, first-order boundary.
inline CentralClosure central_2_1() { return solve_central_closure(1, 1, {0.5}); }

/// Fourth-order interior, second-order boundary.
inline CentralClosure central_4_2() { return solve_central_closure(4, 2, {2.0 / 3.0, -1.0 / 12.0}); }

/// Sixth-order interior, third-order boundary. The closure family has one free
/// parameter (q_45); it is fixed at 70057/99900, near the minimiser of the
/// operator's spectral radius. Exact rationals.
inline CentralClosure central_6_3() {
  CentralClosure c;
  c.rows = 6;
  c.accuracy = 3;
  c.interior = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  c.norm = {13649.0 / 43200.0, 12013.0 / 8640.0, 2711.0 / 4320.0,
            5359.0 / 4320.0,   7877.0 / 8640.0,  43801.0 / 43200.0};
  const double upper[6][6] = {
      {0, 385081.0 / 599400.0, -85759.0 / 1918080.0, -25273.0 / 177600.0, 316607.0 / 9590400.0, 55417.0 / 4795200.0},
      {0, 0, 127681.0 / 319680.0, 690233.0 / 1918080.0, -30719.0 / 319680.0, -22081.0 / 1065600.0},
      {0, 0, 0, 182429.0 / 479520.0, -1021.0 / 71040.0, -3637.0 / 319680.0},
      {0, 0, 0, 0, 123791.0 / 191808.0, -614387.0 / 9590400.0},
      {0, 0, 0, 0, 0, 70057.0 / 99900.0},
      {0, 0, 0, 0, 0, 0},
  };
  const std::size_t cols = c.cols();
  c.q.assign(6 * cols, 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      c.q[i * cols + j] = upper[i][j];
      c.q[j * cols + i] = -upper[i][j];
    }
    for (std::size_t j = 6; j < cols; ++j) {
      const std::size_t off = j - i;
      c.q[i * cols + j] = (off >= 1 && off <= 3) ? c.interior[off - 1] : 0.0;
    }
  }
  c.q[0] = -0.5;
  return c;
}

}  // namespace upwave::sbp
