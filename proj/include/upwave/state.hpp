#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "upwave/error.hpp"
#include "upwave/grid_function.hpp"

namespace upwave {

enum Component : std::size_t { vx = 0, vy, vz, sxx, syy, szz, sxy, sxz, syz };

inline constexpr std::size_t kComponents = 9;

inline constexpr std::array<const char*, kComponents> kComponentNames{"vx",  "vy",  "vz",  "sxx", "syy",
                                                                      "szz", "sxy", "sxz", "syz"};

/// Q = (v, sigma) stored component-major; each component is a row-wise flattened grid function.
///
/// Every instance holding storage is counted, so tests can bound the number of
/// state-sized buffers alive at once.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(const Dims& dims) : dims_(dims), data_(kComponents * dims.size(), 0.0) { acquire(); }

  StateVector(const StateVector& o) : dims_(o.dims_), data_(o.data_) {
    if (!data_.empty()) acquire();
  }
  StateVector(StateVector&& o) noexcept : dims_(o.dims_), data_(std::move(o.data_)) { o.data_.clear(); }
  StateVector& operator=(const StateVector& o) {
    if (this == &o) return *this;
    const bool had = !data_.empty();
    dims_ = o.dims_;
    data_ = o.data_;
    if (!had && !data_.empty()) acquire();
    if (had && data_.empty()) release();
    return *this;
  }
  StateVector& operator=(StateVector&& o) noexcept {
    if (this == &o) return *this;
    if (!data_.empty()) release();
    dims_ = o.dims_;
    data_ = std::move(o.data_);
    o.data_.clear();
    return *this;
  }
  ~StateVector() {
    if (!data_.empty()) release();
  }

  const Dims& dims() const { return dims_; }
  std::size_t nodes() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> component(std::size_t c) { return {data_.data() + c * dims_.size(), dims_.size()}; }
  std::span<const double> component(std::size_t c) const { return {data_.data() + c * dims_.size(), dims_.size()}; }
  double& operator()(std::size_t c, std::size_t idx) { return data_[c * dims_.size() + idx]; }
  double operator()(std::size_t c, std::size_t idx) const { return data_[c * dims_.size() + idx]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  GridFunction3 grid_function(std::size_t c) const {
    const auto s = component(c);
    return GridFunction3(dims_, std::vector<double>(s.begin(), s.end()));
  }
  void set_component(std::size_t c, const GridFunction3& g) {
    require_same_dims(dims_, g.dims(), "state component");
    std::copy(g.values().begin(), g.values().end(), component(c).begin());
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  static long live_count() { return live().load(); }
  static long peak_count() { return peak().load(); }
  static void reset_peak() { peak().store(live().load()); }

 private:
  static std::atomic<long>& live() {
    static std::atomic<long> v{0};
    return v;
  }
  static std::atomic<long>& peak() {
    static std::atomic<long> v{0};
    return v;
  }
  static void acquire() {
    const long now = ++live();
    long p = peak().load();
    while (now > p && !peak().compare_exchange_weak(p, now)) {
    }
  }
  static void release() { --live(); }

  Dims dims_{};
  std::vector<double> data_;
};

}  // namespace upwave
