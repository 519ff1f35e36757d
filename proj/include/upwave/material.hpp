#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "upwave/error.hpp"
#include "upwave/grid.hpp"
#include "upwave/grid_function.hpp"

namespace upwave {

/// Isotropic elastic medium, node-collocated.
struct Material {
  GridFunction3 rho, lambda, mu;

  const Dims& dims() const { return rho.dims(); }
  double cp(std::size_t i) const { return std::sqrt((2.0 * mu[i] + lambda[i]) / rho[i]); }
  double cs(std::size_t i) const { return std::sqrt(mu[i] / rho[i]); }
};

/// Lame parameters from density and wave speeds: mu = rho cs^2, lambda = rho cp^2 - 2 mu.
inline std::array<double, 2> lame_from_speeds(double rho, double cp, double cs) {
  const double mu = rho * cs * cs;
  return {rho * cp * cp - 2.0 * mu, mu};
}

inline void validate_material(const Material& m) {
  require_same_dims(m.rho.dims(), m.lambda.dims(), "rho vs lambda");
  require_same_dims(m.rho.dims(), m.mu.dims(), "rho vs mu");
  for (std::size_t i = 0; i < m.rho.size(); ++i) {
    const double r = m.rho[i], l = m.lambda[i], u = m.mu[i];
    if (!std::isfinite(r) || !std::isfinite(l) || !std::isfinite(u))
      throw Error(ErrorCode::BadValue, "material parameters must be finite");
    if (!(r > 0.0)) throw Error(ErrorCode::BadValue, "density must be positive");
    if (!(u > 0.0)) throw Error(ErrorCode::BadValue, "shear modulus must be positive");
    if (!(3.0 * l + 2.0 * u > 0.0)) throw Error(ErrorCode::BadValue, "stiffness is not positive definite (3 lambda + 2 mu <= 0)");
  }
}

inline Material constant_material(const Dims& dims, double rho, double cp, double cs) {
  const auto [l, u] = lame_from_speeds(rho, cp, cs);
  Material m{GridFunction3(dims, rho), GridFunction3(dims, l), GridFunction3(dims, u)};
  validate_material(m);
  return m;
}

struct Layer {
  double bottom;  ///< x coordinate of the layer's lower boundary (x grows with depth)
  double rho, cp, cs;
};

/// Layers ordered top to bottom; a node at x belongs to the first layer with x <= bottom.
/// The last layer extends downward without limit, so its bottom is ignored.
inline Material layered_material(const CurvilinearMesh& mesh, const std::vector<Layer>& layers) {
  if (layers.empty()) throw Error(ErrorCode::BadValue, "layered material needs at least one layer");
  for (std::size_t i = 1; i + 1 < layers.size(); ++i)
    if (!(layers[i].bottom > layers[i - 1].bottom))
      throw Error(ErrorCode::BadValue, "layer bottoms must increase with depth");
  Material m{GridFunction3(mesh.dims), GridFunction3(mesh.dims), GridFunction3(mesh.dims)};
  for (std::size_t i = 0; i < mesh.dims.size(); ++i) {
    std::size_t L = layers.size() - 1;
    for (std::size_t k = 0; k + 1 < layers.size(); ++k)
      if (mesh.x[i] <= layers[k].bottom) {
        L = k;
        break;
      }
    const auto [l, u] = lame_from_speeds(layers[L].rho, layers[L].cp, layers[L].cs);
    m.rho[i] = layers[L].rho;
    m.lambda[i] = l;
    m.mu[i] = u;
  }
  validate_material(m);
  return m;
}

/// C b for the six stress-like components (xx, yy, zz, xy, xz, yz).
inline std::array<double, 6> apply_stiffness(double lambda, double mu, const std::array<double, 6>& b) {
  const double tr = lambda * (b[0] + b[1] + b[2]);
  return {tr + 2.0 * mu * b[0], tr + 2.0 * mu * b[1], tr + 2.0 * mu * b[2], mu * b[3], mu * b[4], mu * b[5]};
}

/// S sigma with S = C^{-1}.
inline std::array<double, 6> apply_compliance(double lambda, double mu, const std::array<double, 6>& s) {
  const double den = mu * (3.0 * lambda + 2.0 * mu);
  const double diag = (lambda + mu) / den;
  const double off = -lambda / (2.0 * den);
  return {diag * s[0] + off * (s[1] + s[2]), diag * s[1] + off * (s[0] + s[2]), diag * s[2] + off * (s[0] + s[1]),
          s[3] / mu, s[4] / mu, s[5] / mu};
}

}  // namespace upwave
