#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "upwave/error.hpp"
#include "upwave/grid_function.hpp"
#include "upwave/parallel.hpp"
#include "upwave/sbp_closures.hpp"

namespace upwave {

enum class OperatorKind { upwind_pair, traditional_central };
enum class Which { minus, plus };

inline const char* to_string(OperatorKind k) {
  return k == OperatorKind::upwind_pair ? "upwind_pair" : "traditional_central";
}

inline OperatorKind parse_operator_kind(const std::string& s) {
  if (s == "upwind" || s == "upwind_pair") return OperatorKind::upwind_pair;
  if (s == "central" || s == "traditional" || s == "traditional_central") return OperatorKind::traditional_central;
  throw Error(ErrorCode::BadValue, "unknown operator kind '" + s + "'");
}

/// Square operator with dense boundary blocks and a Toeplitz interior.
///
/// Rows [0, b) are stored densely over columns [0, c); rows [n-b, n) densely
/// over columns [n-c, n). Interior rows apply `stencil` at offsets
/// lo, lo+1, ... relative to the row index.
class BandedOperator {
 public:
  BandedOperator() = default;

  /// Compresses a dense row-major n x n matrix. Interior rows are checked
  /// against the supplied stencil.
  static BandedOperator from_dense(std::size_t n, std::span<const double> dense, std::size_t closure_rows,
                                   int stencil_lo, std::vector<double> stencil) {
    BandedOperator op;
    op.n_ = n;
    op.rows_ = closure_rows;
    op.lo_ = stencil_lo;
    op.stencil_ = std::move(stencil);
    std::size_t c = 0;
    for (std::size_t i = 0; i < closure_rows; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (dense[i * n + j] != 0.0) c = std::max(c, j + 1);
        if (dense[(n - 1 - i) * n + (n - 1 - j)] != 0.0) c = std::max(c, j + 1);
      }
    op.cols_ = c;
    op.left_.assign(closure_rows * c, 0.0);
    op.right_.assign(closure_rows * c, 0.0);
    for (std::size_t i = 0; i < closure_rows; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        op.left_[i * c + j] = dense[i * n + j];
        op.right_[i * c + j] = dense[(n - closure_rows + i) * n + (n - c + j)];
      }
    for (std::size_t i = closure_rows; i + closure_rows < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double expect = op.entry(i, j);
        if (std::abs(dense[i * n + j] - expect) > 1e-12 * (1.0 + std::abs(expect)))
          throw Error(ErrorCode::SpecMismatch, "interior row does not match stencil");
      }
    return op;
  }

  std::size_t size() const { return n_; }
  std::size_t closure_rows() const { return rows_; }
  std::size_t closure_cols() const { return cols_; }
  int stencil_lo() const { return lo_; }
  const std::vector<double>& stencil() const { return stencil_; }

  double entry(std::size_t i, std::size_t j) const {
    if (i < rows_) return j < cols_ ? left_[i * cols_ + j] : 0.0;
    if (i + rows_ >= n_) {
      const std::size_t r = i - (n_ - rows_);
      return j + cols_ >= n_ ? right_[r * cols_ + (j - (n_ - cols_))] : 0.0;
    }
    const auto off = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i) - lo_;
    if (off < 0 || off >= static_cast<std::ptrdiff_t>(stencil_.size())) return 0.0;
    return stencil_[static_cast<std::size_t>(off)];
  }

  /// Copy with one stored entry replaced (used to build defective operators in tests).
  BandedOperator with_entry(std::size_t i, std::size_t j, double value) const {
    BandedOperator op = *this;
    if (i < rows_ && j < cols_) {
      op.left_[i * cols_ + j] = value;
    } else if (i + rows_ >= n_ && j + cols_ >= n_) {
      op.right_[(i - (n_ - rows_)) * cols_ + (j - (n_ - cols_))] = value;
    } else {
      // Interior entries are shared by the stencil; promote the row to explicit storage.
      op.patch_row_ = i;
      op.patch_.assign(n_, 0.0);
      for (std::size_t c = 0; c < n_; ++c) op.patch_[c] = entry(i, c);
      op.patch_[j] = value;
    }
    return op;
  }

  std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) d[i * n_ + j] = patched_entry(i, j);
    return d;
  }

  /// out[i*os] = sum_j A_ij in[j*is]
  void apply(const double* in, std::ptrdiff_t is, double* out, std::ptrdiff_t os) const {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    const auto b = static_cast<std::ptrdiff_t>(rows_);
    const auto c = static_cast<std::ptrdiff_t>(cols_);
    const auto w = static_cast<std::ptrdiff_t>(stencil_.size());
    for (std::ptrdiff_t i = 0; i < b; ++i) {
      double acc = 0.0;
      const double* row = left_.data() + i * c;
      for (std::ptrdiff_t j = 0; j < c; ++j) acc += row[j] * in[j * is];
      out[i * os] = acc;
    }
    for (std::ptrdiff_t i = b; i < n - b; ++i) {
      double acc = 0.0;
      const double* base = in + (i + lo_) * is;
      for (std::ptrdiff_t m = 0; m < w; ++m) acc += stencil_[static_cast<std::size_t>(m)] * base[m * is];
      out[i * os] = acc;
    }
    for (std::ptrdiff_t r = 0; r < b; ++r) {
      double acc = 0.0;
      const double* row = right_.data() + r * c;
      const double* base = in + (n - c) * is;
      for (std::ptrdiff_t j = 0; j < c; ++j) acc += row[j] * base[j * is];
      out[(n - b + r) * os] = acc;
    }
    if (!patch_.empty()) {
      double acc = 0.0;
      for (std::ptrdiff_t j = 0; j < n; ++j) acc += patch_[static_cast<std::size_t>(j)] * in[j * is];
      out[static_cast<std::ptrdiff_t>(patch_row_) * os] = acc;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(n_);
    apply(x.data(), 1, y.data(), 1);
    return y;
  }

 private:
  double patched_entry(std::size_t i, std::size_t j) const {
    if (!patch_.empty() && i == patch_row_) return patch_[j];
    return entry(i, j);
  }

  std::size_t n_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int lo_ = 0;
  std::vector<double> stencil_;
  std::vector<double> left_;
  std::vector<double> right_;
  std::size_t patch_row_ = 0;
  std::vector<double> patch_;
};

/// One axis's diagonal norm and derivative pair. Immutable after build_operator.
struct OperatorTriple {
  OperatorKind kind = OperatorKind::upwind_pair;
  int interior_order = 0;
  int boundary_order = 0;
  std::size_t n_points = 0;
  double spacing = 0.0;
  std::vector<double> h_weights;  ///< diagonal of H, spacing folded in
  BandedOperator d_minus;
  BandedOperator d_plus;
  std::size_t closure_width = 0;
  std::string family;

  const BandedOperator& op(Which w) const { return w == Which::minus ? d_minus : d_plus; }
};

namespace detail {

struct Dissipation {
  int difference_order;  // undivided difference used for D~
  double alpha;          // A = alpha * D~^T D~
};

inline std::vector<double> binomial_difference(int k) {
  std::vector<double> row(static_cast<std::size_t>(k) + 1);
  double c = 1.0;
  for (int m = 0; m <= k; ++m) {
    row[static_cast<std::size_t>(m)] = ((k - m) % 2 == 0 ? 1.0 : -1.0) * c;
    c = c * (k - m) / (m + 1);
  }
  return row;
}

/// Dense n x n central SBP matrix D = H^{-1} Q and the norm weights (spacing folded in).
inline void dense_central(const sbp::CentralClosure& cl, std::size_t n, double spacing, std::vector<double>& h,
                          std::vector<double>& d) {
  const std::size_t b = cl.rows;
  const std::size_t w = cl.half_width();
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= w; ++k) {
      if (i + k < n) q[i * n + i + k] = cl.interior[k - 1];
      if (i >= k) q[i * n + i - k] = -cl.interior[k - 1];
    }
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < cl.cols() && j < n; ++j) {
      q[i * n + j] = cl.q_entry(i, j);
      q[(n - 1 - i) * n + (n - 1 - j)] = -cl.q_entry(i, j);
    }
  // Skew coupling of interior rows into the closure columns.
  for (std::size_t j = 0; j < b; ++j)
    for (std::size_t i = b; i < cl.cols() && i < n - b; ++i) {
      q[i * n + j] = -cl.q_entry(j, i);
      q[(n - 1 - i) * n + (n - 1 - j)] = cl.q_entry(j, i);
    }
  h.assign(n, spacing);
  for (std::size_t i = 0; i < b; ++i) {
    h[i] = cl.norm[i] * spacing;
    h[n - 1 - i] = cl.norm[i] * spacing;
  }
  d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = q[i * n + j] / h[i];
}

}  // namespace detail

inline constexpr std::array<int, 3> kUpwindOrders{2, 3, 6};
inline constexpr std::array<int, 3> kCentralOrders{2, 4, 6};

/// Rows at each end whose coefficients differ from the interior stencil.
inline std::size_t closure_width(OperatorKind kind, int interior_order) {
  if (kind == OperatorKind::traditional_central) {
    switch (interior_order) {
      case 2: return 1;
      case 4: return 4;
      case 6: return 6;
      default: break;
    }
  } else {
    switch (interior_order) {
      case 2: return 2;
      case 3: return 4;
      case 6: return 6;
      default: break;
    }
  }
  throw Error(ErrorCode::UnsupportedOrder, std::string(to_string(kind)) + " interior order " +
                                               std::to_string(interior_order) + " is not supported");
}

inline OperatorTriple build_operator(OperatorKind kind, int interior_order, std::size_t n_points, double spacing) {
  const std::size_t width = closure_width(kind, interior_order);
  if (!(spacing > 0.0)) throw Error(ErrorCode::BadValue, "operator spacing must be positive");
  if (n_points < 2 * width)
    throw Error(ErrorCode::GridTooSmall, std::to_string(n_points) + " points cannot hold two closures of width " +
                                             std::to_string(width));

  sbp::CentralClosure cl;
  detail::Dissipation diss{0, 0.0};
  int boundary_order = 0;
  std::string family;
  if (kind == OperatorKind::traditional_central) {
    cl = interior_order == 2 ? sbp::central_2_1() : interior_order == 4 ? sbp::central_4_2() : sbp::central_6_3();
    boundary_order = interior_order / 2;
    family = "central 2p, p=" + std::to_string(interior_order / 2);
  } else {
    switch (interior_order) {
      case 2:
        cl = sbp::central_2_1();
        diss = {2, -1.0 / 4.0};
        boundary_order = 1;
        family = "upwind even 2p, p=1";
        break;
      case 3:
        cl = sbp::central_4_2();
        diss = {2, -1.0 / 12.0};
        boundary_order = 1;
        family = "upwind odd 2p+1, p=1";
        break;
      default:
        cl = sbp::central_6_3();
        diss = {4, -1.0 / 120.0};
        boundary_order = 3;
        family = "upwind even 2p, p=3";
        break;
    }
  }

  const std::size_t n = n_points;
  std::vector<double> h, dc;
  detail::dense_central(cl, n, spacing, h, dc);

  // Interior stencil of the central part, offsets -w..w.
  const int w = static_cast<int>(cl.half_width());
  std::vector<double> central_stencil(static_cast<std::size_t>(2 * w + 1), 0.0);
  for (int k = 1; k <= w; ++k) {
    central_stencil[static_cast<std::size_t>(w + k)] = cl.interior[static_cast<std::size_t>(k - 1)] / spacing;
    central_stencil[static_cast<std::size_t>(w - k)] = -cl.interior[static_cast<std::size_t>(k - 1)] / spacing;
  }

  OperatorTriple t;
  t.kind = kind;
  t.interior_order = interior_order;
  t.boundary_order = boundary_order;
  t.n_points = n;
  t.spacing = spacing;
  t.h_weights = h;
  t.closure_width = width;
  t.family = family;

  if (kind == OperatorKind::traditional_central) {
    t.d_minus = BandedOperator::from_dense(n, dc, width, -w, central_stencil);
    t.d_plus = t.d_minus;
    return t;
  }

  // A = alpha * Dt^T Dt with Dt the undivided difference of order k (rectangular).
  const int k = diss.difference_order;
  const auto row = detail::binomial_difference(k);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t r = 0; r + static_cast<std::size_t>(k) < n; ++r)
    for (int p = 0; p <= k; ++p)
      for (int m = 0; m <= k; ++m)
        a[(r + static_cast<std::size_t>(p)) * n + r + static_cast<std::size_t>(m)] +=
            diss.alpha * row[static_cast<std::size_t>(p)] * row[static_cast<std::size_t>(m)];

  std::vector<double> dp(n * n), dm(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      dp[i * n + j] = dc[i * n + j] + a[i * n + j] / h[i];
      dm[i * n + j] = dc[i * n + j] - a[i * n + j] / h[i];
    }

  // Interior stencils span offsets -max(w,k)..max(w,k).
  const int half = std::max(w, k);
  std::vector<double> sp(static_cast<std::size_t>(2 * half + 1), 0.0), sm(sp.size(), 0.0);
  for (int o = -w; o <= w; ++o) {
    sp[static_cast<std::size_t>(half + o)] += central_stencil[static_cast<std::size_t>(w + o)];
    sm[static_cast<std::size_t>(half + o)] += central_stencil[static_cast<std::size_t>(w + o)];
  }
  const auto auto_corr = [&](int o) {
    double s = 0.0;
    for (int m = 0; m <= k; ++m) {
      const int p = m + o;
      if (p >= 0 && p <= k) s += row[static_cast<std::size_t>(m)] * row[static_cast<std::size_t>(p)];
    }
    return s;
  };
  for (int o = -k; o <= k; ++o) {
    sp[static_cast<std::size_t>(half + o)] += diss.alpha * auto_corr(o) / spacing;
    sm[static_cast<std::size_t>(half + o)] -= diss.alpha * auto_corr(o) / spacing;
  }
  t.d_plus = BandedOperator::from_dense(n, dp, width, -half, sp);
  t.d_minus = BandedOperator::from_dense(n, dm, width, -half, sm);
  return t;
}

/// Applies one operator of the pair along `axis` of a flattened grid function.
/// Lines are independent, so the result is bit-identical for any thread count.
inline void apply_along_axis(const BandedOperator& op, std::span<const double> in, const Dims& dims, Axis axis,
                             std::span<double> out) {
  if (op.size() != dims.extent(axis))
    throw Error(ErrorCode::DimensionMismatch, std::string("operator size ") + std::to_string(op.size()) +
                                                  " vs extent " + std::to_string(dims.extent(axis)) +
                                                  " along " + axis_name(axis));
  if (in.size() != dims.size() || out.size() != dims.size())
    throw Error(ErrorCode::DimensionMismatch, "field length does not match dims");
  const auto stride = static_cast<std::ptrdiff_t>(dims.stride(axis));
  parallel_for(dims.line_count(axis), [&](std::size_t line) {
    const std::size_t off = dims.line_offset(axis, line);
    op.apply(in.data() + off, stride, out.data() + off, stride);
  });
}

inline GridFunction3 apply_along_axis(const OperatorTriple& t, Which which, const GridFunction3& f, Axis axis) {
  if (t.n_points != f.dims().extent(axis))
    throw Error(ErrorCode::DimensionMismatch, "operator n_points does not match field extent");
  GridFunction3 out(f.dims());
  apply_along_axis(t.op(which), f.span(), f.dims(), axis, out.span());
  return out;
}

/// Residuals of every operator invariant; failures are reported, never thrown.
struct CertificationReport {
  OperatorKind kind{};
  int interior_order = 0;
  int boundary_order = 0;
  std::size_t n_points = 0;
  double spacing = 0.0;
  std::string family;

  double min_norm_weight = 0.0;
  double duality_residual = 0.0;
  double duality_threshold = 0.0;
  double semidefinite_max_form = 0.0;        ///< max x^T S+ x over sampled unit vectors
  double semidefinite_max_eigenvalue = 0.0;  ///< largest eigenvalue of S+
  double semidefinite_threshold = 1e-12;
  std::size_t semidefinite_samples = 0;
  std::vector<double> accuracy_residual;  ///< per monomial degree 0..interior_order
  double accuracy_threshold = 1e-10;
  double self_dual_residual = 0.0;        ///< max |D- - D+| (must vanish for central)

  bool norm_ok = false;
  bool duality_ok = false;
  bool semidefinite_ok = false;
  bool accuracy_ok = false;
  bool self_dual_ok = true;

  bool passed() const { return norm_ok && duality_ok && semidefinite_ok && accuracy_ok && self_dual_ok; }
};

struct CertifyOptions {
  std::size_t random_vectors = 100;
  std::uint64_t seed = 20240611;
};

inline CertificationReport certify(const OperatorTriple& t, const CertifyOptions& opt = {}) {
  const std::size_t n = t.n_points;
  CertificationReport rep;
  rep.kind = t.kind;
  rep.interior_order = t.interior_order;
  rep.boundary_order = t.boundary_order;
  rep.n_points = n;
  rep.spacing = t.spacing;
  rep.family = t.family;

  rep.min_norm_weight = *std::min_element(t.h_weights.begin(), t.h_weights.end());
  rep.norm_ok = rep.min_norm_weight > 0.0;

  const auto dp = t.d_plus.to_dense();
  const auto dm = t.d_minus.to_dense();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Dp(
      dp.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Dm(
      dm.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd hv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) hv(static_cast<Eigen::Index>(i)) = t.h_weights[i];
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  B(0, 0) = -1.0;
  B(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1)) = 1.0;

  const Eigen::MatrixXd HDm = hv.asDiagonal() * Dm;
  const Eigen::MatrixXd HDp = hv.asDiagonal() * Dp;
  rep.duality_residual = (HDm + HDp.transpose() - B).cwiseAbs().maxCoeff();
  rep.duality_threshold = 1e-12 / t.spacing;
  rep.duality_ok = rep.duality_residual <= rep.duality_threshold;

  const Eigen::MatrixXd S = HDp + HDp.transpose() - B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  rep.semidefinite_max_eigenvalue = eig.eigenvalues().maxCoeff();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < opt.random_vectors; ++s) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    x.normalize();
    worst = std::max(worst, x.dot(S * x));
  }
  rep.semidefinite_samples = opt.random_vectors + n;
  rep.semidefinite_max_form = worst;
  rep.semidefinite_ok = rep.semidefinite_max_form <= rep.semidefinite_threshold &&
                        rep.semidefinite_max_eigenvalue <= rep.semidefinite_threshold;

  // Accuracy: every row for degree <= boundary order, interior rows up to the interior order.
  rep.accuracy_residual.assign(static_cast<std::size_t>(t.interior_order) + 1, 0.0);
  std::vector<double> xi(n), mono(n), deriv(n);
  for (std::size_t j = 0; j < n; ++j) xi[j] = static_cast<double>(j) / static_cast<double>(n - 1);
  for (int deg = 0; deg <= t.interior_order; ++deg) {
    for (std::size_t j = 0; j < n; ++j) {
      mono[j] = std::pow(xi[j], deg);
      deriv[j] = deg == 0 ? 0.0 : deg * std::pow(xi[j], deg - 1);
    }
    const std::size_t first = deg <= t.boundary_order ? 0 : t.closure_width;
    const std::size_t last = deg <= t.boundary_order ? n : n - t.closure_width;
    const double scale = std::max(1.0, static_cast<double>(deg));
    double res = 0.0;
    for (const auto* op : {&t.d_minus, &t.d_plus}) {
      const auto y = op->apply(mono);
      for (std::size_t j = first; j < last; ++j) res = std::max(res, std::abs(y[j] - deriv[j]) / scale);
    }
    rep.accuracy_residual[static_cast<std::size_t>(deg)] = res;
  }
  rep.accuracy_ok = std::all_of(rep.accuracy_residual.begin(), rep.accuracy_residual.end(),
                                [&](double r) { return r <= rep.accuracy_threshold; });

  rep.self_dual_residual = (Dm - Dp).cwiseAbs().maxCoeff();
  if (t.kind == OperatorKind::traditional_central) rep.self_dual_ok = rep.self_dual_residual == 0.0;
  return rep;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

/// Structured key/value text, one item per line.
inline std::string to_text(const CertificationReport& r) {
  std::ostringstream os;
  auto verdict = [](bool ok) { return ok ? "pass" : "FAIL"; };
  os << "kind: " << to_string(r.kind) << "\n"
     << "interior_order: " << r.interior_order << "\n"
     << "boundary_order: " << r.boundary_order << "\n"
     << "family: " << r.family << "\n"
     << "n_points: " << r.n_points << "\n"
     << "spacing: " << format_double(r.spacing) << "\n"
     << "min_norm_weight: " << format_double(r.min_norm_weight) << " [" << verdict(r.norm_ok) << "]\n"
     << "duality_residual: " << format_double(r.duality_residual) << " <= "
     << format_double(r.duality_threshold) << " [" << verdict(r.duality_ok) << "]\n"
     << "semidefinite_max_form: " << format_double(r.semidefinite_max_form) << " over " << r.semidefinite_samples
     << " vectors\n"
     << "semidefinite_max_eigenvalue: " << format_double(r.semidefinite_max_eigenvalue) << " <= "
     << format_double(r.semidefinite_threshold) << " [" << verdict(r.semidefinite_ok) << "]\n";
  for (std::size_t d = 0; d < r.accuracy_residual.size(); ++d)
    os << "accuracy_residual[" << d << "]: " << format_double(r.accuracy_residual[d])
       << (static_cast<int>(d) <= r.boundary_order ? " (all nodes)" : " (interior nodes)") << "\n";
  os << "accuracy: <= " << format_double(r.accuracy_threshold) << " [" << verdict(r.accuracy_ok) << "]\n"
     << "self_dual_residual: " << format_double(r.self_dual_residual) << " [" << verdict(r.self_dual_ok) << "]\n"
     << "certified: " << (r.passed() ? "yes" : "no") << "\n";
  return os.str();
}

/// Plain-text matrix dump: header lines, then H, D_minus and D_plus as dense rows.
inline void write_operator_dump(std::ostream& os, const OperatorTriple& t) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# upwave operator dump\n"
     << "kind " << to_string(t.kind) << "\n"
     << "interior_order " << t.interior_order << "\n"
     << "boundary_order " << t.boundary_order << "\n"
     << "n_points " << t.n_points << "\n"
     << "spacing " << num(t.spacing) << "\n"
     << "H\n";
  for (std::size_t i = 0; i < t.n_points; ++i) os << (i ? " " : "") << num(t.h_weights[i]);
  os << "\n";
  for (const auto& [name, op] : {std::pair{"D_minus", &t.d_minus}, std::pair{"D_plus", &t.d_plus}}) {
    os << name << "\n";
    const auto d = op->to_dense();
    for (std::size_t i = 0; i < t.n_points; ++i) {
      for (std::size_t j = 0; j < t.n_points; ++j) os << (j ? " " : "") << num(d[i * t.n_points + j]);
      os << "\n";
    }
  }
}

/// The three per-axis operators used on a grid with the given dims; unit cube, uniform spacing.
struct OperatorSet {
  std::array<OperatorTriple, 3> axis;

  const OperatorTriple& operator[](Axis a) const { return axis[static_cast<std::size_t>(axis_index(a))]; }
  OperatorKind kind() const { return axis[0].kind; }
  int interior_order() const { return axis[0].interior_order; }
  Dims dims() const { return {axis[0].n_points, axis[1].n_points, axis[2].n_points}; }
};

inline OperatorSet make_operator_set(OperatorKind kind, int interior_order, const Dims& dims) {
  OperatorSet set;
  for (Axis a : kAxes) {
    const std::size_t n = dims.extent(a);
    if (n < 2) throw Error(ErrorCode::BadDims, "each axis needs at least two nodes");
    set.axis[static_cast<std::size_t>(axis_index(a))] =
        build_operator(kind, interior_order, n, 1.0 / static_cast<double>(n - 1));
  }
  return set;
}

}  // namespace upwave
