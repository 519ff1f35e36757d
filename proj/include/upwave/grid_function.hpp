#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "upwave/error.hpp"

namespace upwave {

enum class Axis { q = 0, r = 1, s = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::q, Axis::r, Axis::s};

inline constexpr int axis_index(Axis a) { return static_cast<int>(a); }

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::q: return "q";
    case Axis::r: return "r";
    case Axis::s: return "s";
  }
  return "?";
}

/// Node counts along q, r, s. Flattening is row-wise with q slowest.
struct Dims {
  std::size_t nq = 0;
  std::size_t nr = 0;
  std::size_t ns = 0;

  constexpr std::size_t size() const { return nq * nr * ns; }
  constexpr std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * nr + j) * ns + k;
  }
  constexpr std::size_t extent(Axis a) const {
    return a == Axis::q ? nq : (a == Axis::r ? nr : ns);
  }
  constexpr std::size_t stride(Axis a) const {
    return a == Axis::q ? nr * ns : (a == Axis::r ? ns : 1);
  }
  /// Number of independent grid lines running along `a`.
  constexpr std::size_t line_count(Axis a) const { return size() / extent(a); }
  /// Flat offset of the first node of line `line` along `a`.
  constexpr std::size_t line_offset(Axis a, std::size_t line) const {
    switch (a) {
      case Axis::q: return line;
      case Axis::r: return (line / ns) * nr * ns + line % ns;
      case Axis::s: return line * ns;
    }
    return 0;
  }
  constexpr std::array<std::size_t, 3> unflatten(std::size_t idx) const {
    return {idx / (nr * ns), (idx / ns) % nr, idx % ns};
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return "(" + std::to_string(d.nq) + "," + std::to_string(d.nr) + "," + std::to_string(d.ns) + ")";
}

inline void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b))
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
}

/// Scalar field sampled on the structured grid.
class GridFunction3 {
 public:
  GridFunction3() = default;
  explicit GridFunction3(Dims dims, double fill = 0.0) : dims_(dims), values_(dims.size(), fill) {}
  GridFunction3(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
    if (values_.size() != dims_.size())
      throw Error(ErrorCode::DimensionMismatch, "grid function length does not match dims");
  }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[dims_.index(i, j, k)]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return values_[dims_.index(i, j, k)]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  double operator[](std::size_t idx) const { return values_[idx]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  Dims dims_{};
  std::vector<double> values_;
};

/// Samples f(i, j, k) at every node.
template <class F>
GridFunction3 sample(Dims dims, F&& f) {
  GridFunction3 g(dims);
  for (std::size_t i = 0; i < dims.nq; ++i)
    for (std::size_t j = 0; j < dims.nr; ++j)
      for (std::size_t k = 0; k < dims.ns; ++k) g(i, j, k) = f(i, j, k);
  return g;
}

}  // namespace upwave
