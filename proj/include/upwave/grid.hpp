#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "upwave/error.hpp"
#include "upwave/grid_function.hpp"
#include "upwave/operators.hpp"
#include "upwave/parallel.hpp"

namespace upwave {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Smooth map from the unit cube. derivative(q,r,s)(a, xi) = d(x,y,z)_a / d xi.
struct MeshMap {
  std::function<Vec3(double, double, double)> position;
  std::function<Mat3(double, double, double)> derivative;
};

struct CurvilinearMesh {
  Dims dims;
  GridFunction3 x, y, z;
  std::optional<MeshMap> map;  ///< present when the mesh came from an analytic map

  const GridFunction3& coord(int a) const { return a == 0 ? x : a == 1 ? y : z; }
};

inline double unit_node(std::size_t i, std::size_t n) { return static_cast<double>(i) / static_cast<double>(n - 1); }

inline void validate_dims(const Dims& d) {
  if (d.nq < 2 || d.nr < 2 || d.ns < 2)
    throw Error(ErrorCode::BadDims, "every axis needs at least two nodes, got " + to_string(d));
}

/// No two consecutive nodes on any grid line coincide.
inline void check_injective(const CurvilinearMesh& m) {
  const Dims& d = m.dims;
  for (Axis a : kAxes) {
    const std::size_t st = d.stride(a);
    for (std::size_t line = 0; line < d.line_count(a); ++line) {
      const std::size_t off = d.line_offset(a, line);
      for (std::size_t i = 0; i + 1 < d.extent(a); ++i) {
        const std::size_t p = off + i * st, q = p + st;
        if (m.x[p] == m.x[q] && m.y[p] == m.y[q] && m.z[p] == m.z[q])
          throw Error(ErrorCode::BadDims, std::string("duplicate node along ") + axis_name(a));
      }
    }
  }
}

inline CurvilinearMesh mesh_from_map(const Dims& dims, MeshMap map) {
  validate_dims(dims);
  CurvilinearMesh m{dims, GridFunction3(dims), GridFunction3(dims), GridFunction3(dims), std::nullopt};
  parallel_for(dims.nq, [&](std::size_t i) {
    for (std::size_t j = 0; j < dims.nr; ++j)
      for (std::size_t k = 0; k < dims.ns; ++k) {
        const Vec3 p = map.position(unit_node(i, dims.nq), unit_node(j, dims.nr), unit_node(k, dims.ns));
        m.x(i, j, k) = p[0];
        m.y(i, j, k) = p[1];
        m.z(i, j, k) = p[2];
      }
  });
  m.map = std::move(map);
  check_injective(m);
  return m;
}

/// Affine box [origin, origin + extents] with q along x, r along y, s along z.
inline CurvilinearMesh build_box_mesh(const std::array<double, 3>& extents, const Dims& dims,
                                      const std::array<double, 3>& origin = {0.0, 0.0, 0.0}) {
  validate_dims(dims);
  for (double e : extents)
    if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorCode::BadDims, "box extents must be positive");
  MeshMap map;
  map.position = [extents, origin](double q, double r, double s) {
    return Vec3(origin[0] + q * extents[0], origin[1] + r * extents[1], origin[2] + s * extents[2]);
  };
  map.derivative = [extents](double, double, double) {
    Mat3 d = Mat3::Zero();
    d(0, 0) = extents[0];
    d(1, 1) = extents[1];
    d(2, 2) = extents[2];
    return d;
  };
  return mesh_from_map(dims, std::move(map));
}

/// Free surface X(y, z) with its gradient (dX/dy, dX/dz).
struct Surface {
  std::function<double(double, double)> height;
  std::function<std::array<double, 2>(double, double)> gradient;
};

/// X(y,z) = -A exp(-((y-yc)^2 + (z-zc)^2) / L^2); x points downward so A > 0 is a hill.
inline Surface gaussian_hill(double amplitude, double width, double yc = 0.0, double zc = 0.0) {
  if (!(width > 0.0)) throw Error(ErrorCode::BadValue, "hill width must be positive");
  Surface s;
  s.height = [=](double y, double z) {
    const double r2 = (y - yc) * (y - yc) + (z - zc) * (z - zc);
    return -amplitude * std::exp(-r2 / (width * width));
  };
  s.gradient = [=](double y, double z) {
    const double r2 = (y - yc) * (y - yc) + (z - zc) * (z - zc);
    const double g = amplitude * std::exp(-r2 / (width * width)) * 2.0 / (width * width);
    return std::array<double, 2>{g * (y - yc), g * (z - zc)};
  };
  return s;
}

/// Uniformly sampled height map with bilinear interpolation.
class HeightMap {
 public:
  HeightMap(std::size_t ny, std::size_t nz, double y0, double dy, double z0, double dz, std::vector<double> h)
      : ny_(ny), nz_(nz), y0_(y0), dy_(dy), z0_(z0), dz_(dz), h_(std::move(h)) {
    if (ny_ < 2 || nz_ < 2) throw Error(ErrorCode::BadValue, "height map needs at least 2x2 samples");
    if (!(dy_ > 0.0) || !(dz_ > 0.0)) throw Error(ErrorCode::BadValue, "height map spacing must be positive");
    if (h_.size() != ny_ * nz_) throw Error(ErrorCode::BadValue, "height map sample count mismatch");
    for (double v : h_)
      if (!std::isfinite(v)) throw Error(ErrorCode::BadValue, "height map contains non-finite samples");
  }

  /// First line `ny nz y0 dy z0 dz`, then ny*nz heights with y slow. `scale` converts to meters.
  static HeightMap read(const std::string& path, double scale = 1.0) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open height map '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
      while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
      }
      return false;
    };
    if (!next_line()) throw Error(ErrorCode::BadValue, path + ": empty height map");
    std::istringstream head(line);
    double ny = 0, nz = 0, y0 = 0, dy = 0, z0 = 0, dz = 0;
    std::string extra;
    if (!(head >> ny >> nz >> y0 >> dy >> z0 >> dz) || (head >> extra) || ny != std::floor(ny) ||
        nz != std::floor(nz) || ny < 2 || nz < 2)
      throw Error(ErrorCode::BadValue, path + ":" + std::to_string(lineno) + ": header must be 'ny nz y0 dy z0 dz'");
    const auto count = static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    std::vector<double> h;
    h.reserve(count);
    while (next_line()) {
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size())
          throw Error(ErrorCode::BadValue, path + ":" + std::to_string(lineno) + ": bad height token '" + tok + "'");
        if (h.size() == count)
          throw Error(ErrorCode::BadValue, path + ":" + std::to_string(lineno) + ": expected " +
                                               std::to_string(count) + " heights, found more");
        h.push_back(v * scale);
      }
    }
    if (h.size() != count)
      throw Error(ErrorCode::BadValue, path + ":" + std::to_string(lineno) + ": expected " + std::to_string(count) +
                                           " heights, found " + std::to_string(h.size()));
    return HeightMap(static_cast<std::size_t>(ny), static_cast<std::size_t>(nz), y0 * scale, dy * scale, z0 * scale,
                     dz * scale, std::move(h));
  }

  double y_min() const { return y0_; }
  double y_max() const { return y0_ + dy_ * static_cast<double>(ny_ - 1); }
  double z_min() const { return z0_; }
  double z_max() const { return z0_ + dz_ * static_cast<double>(nz_ - 1); }
  double at(std::size_t iy, std::size_t iz) const { return h_[iy * nz_ + iz]; }

  Surface surface() const {
    auto self = std::make_shared<const HeightMap>(*this);
    Surface s;
    s.height = [self](double y, double z) { return self->eval(y, z).value; };
    s.gradient = [self](double y, double z) {
      const auto e = self->eval(y, z);
      return std::array<double, 2>{e.dy, e.dz};
    };
    return s;
  }

 private:
  struct Eval {
    double value, dy, dz;
  };
  Eval eval(double y, double z) const {
    auto cell = [](double u, double u0, double du, std::size_t n, std::size_t& c, double& t) {
      const double p = std::clamp((u - u0) / du, 0.0, static_cast<double>(n - 1));
      c = std::min(static_cast<std::size_t>(p), n - 2);
      t = p - static_cast<double>(c);
    };
    std::size_t cy = 0, cz = 0;
    double ty = 0, tz = 0;
    cell(y, y0_, dy_, ny_, cy, ty);
    cell(z, z0_, dz_, nz_, cz, tz);
    const double f00 = at(cy, cz), f10 = at(cy + 1, cz), f01 = at(cy, cz + 1), f11 = at(cy + 1, cz + 1);
    Eval e;
    e.value = (1 - ty) * (1 - tz) * f00 + ty * (1 - tz) * f10 + (1 - ty) * tz * f01 + ty * tz * f11;
    e.dy = ((1 - tz) * (f10 - f00) + tz * (f11 - f01)) / dy_;
    e.dz = ((1 - ty) * (f01 - f00) + ty * (f11 - f10)) / dz_;
    return e;
  }

  std::size_t ny_, nz_;
  double y0_, dy_, z0_, dz_;
  std::vector<double> h_;
};

struct HorizontalExtent {
  double y0 = 0.0, ly = 1.0, z0 = 0.0, lz = 1.0;
};

/// x(q,r,s) = X(y,z) + q (depth - X(y,z)), y = y0 + r ly, z = z0 + s lz.
inline CurvilinearMesh build_topography_mesh(const Surface& surface, double depth, const Dims& dims,
                                             const HorizontalExtent& ext) {
  validate_dims(dims);
  if (!(ext.ly > 0.0) || !(ext.lz > 0.0)) throw Error(ErrorCode::BadDims, "horizontal extents must be positive");
  for (std::size_t j = 0; j < dims.nr; ++j)
    for (std::size_t k = 0; k < dims.ns; ++k) {
      const double h = surface.height(ext.y0 + unit_node(j, dims.nr) * ext.ly, ext.z0 + unit_node(k, dims.ns) * ext.lz);
      if (!std::isfinite(h)) throw Error(ErrorCode::BadValue, "surface height is not finite");
      if (!(h < depth))
        throw Error(ErrorCode::SurfaceBelowDepth, "surface height " + std::to_string(h) +
                                                      " is not above the bottom at " + std::to_string(depth));
    }
  MeshMap map;
  map.position = [surface, depth, ext](double q, double r, double s) {
    const double y = ext.y0 + r * ext.ly, z = ext.z0 + s * ext.lz;
    const double h = surface.height(y, z);
    return Vec3(h + q * (depth - h), y, z);
  };
  map.derivative = [surface, depth, ext](double q, double r, double s) {
    const double y = ext.y0 + r * ext.ly, z = ext.z0 + s * ext.lz;
    const double h = surface.height(y, z);
    const auto g = surface.gradient(y, z);
    Mat3 d = Mat3::Zero();
    d(0, 0) = depth - h;
    d(0, 1) = (1.0 - q) * g[0] * ext.ly;
    d(0, 2) = (1.0 - q) * g[1] * ext.lz;
    d(1, 1) = ext.ly;
    d(2, 2) = ext.lz;
    return d;
  };
  return mesh_from_map(dims, std::move(map));
}

enum class MetricMode { analytic, discrete };

/// J and the nine inverse-map derivatives at every node.
struct Metrics {
  Dims dims;
  GridFunction3 jac;
  std::array<std::array<GridFunction3, 3>, 3> fwd;  ///< fwd[a][xi] = d x_a / d xi
  std::array<std::array<GridFunction3, 3>, 3> inv;  ///< inv[xi][a] = d xi / d x_a
  std::array<GridFunction3, 3> face_weight;         ///< J |grad xi|, every node

  const GridFunction3& metric(Axis xi, int a) const { return inv[static_cast<std::size_t>(axis_index(xi))][static_cast<std::size_t>(a)]; }
  /// J grad(xi) at a node.
  Vec3 scaled_gradient(Axis xi, std::size_t idx) const {
    const auto& m = inv[static_cast<std::size_t>(axis_index(xi))];
    return jac[idx] * Vec3(m[0][idx], m[1][idx], m[2][idx]);
  }
};

namespace detail {

inline void metrics_from_derivatives(Metrics& m) {
  const std::size_t n = m.dims.size();
  m.jac = GridFunction3(m.dims);
  for (auto& row : m.inv)
    for (auto& g : row) g = GridFunction3(m.dims);
  for (auto& g : m.face_weight) g = GridFunction3(m.dims);
  auto& f = m.fwd;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double xq = f[0][0][idx], xr = f[0][1][idx], xs = f[0][2][idx];
    const double yq = f[1][0][idx], yr = f[1][1][idx], ys = f[1][2][idx];
    const double zq = f[2][0][idx], zr = f[2][1][idx], zs = f[2][2][idx];
    const double J = xq * (yr * zs - zr * ys) - yq * (xr * zs - zr * xs) + zq * (xr * ys - yr * xs);
    if (!std::isfinite(J)) throw Error(ErrorCode::DegenerateMetrics, "non-finite Jacobian");
    if (!(J > 0.0)) {
      const auto [i, j, k] = m.dims.unflatten(idx);
      throw Error(ErrorCode::NegativeJacobian, "J = " + std::to_string(J) + " at node (" + std::to_string(i) + "," +
                                                   std::to_string(j) + "," + std::to_string(k) + ")");
    }
    m.jac[idx] = J;
    m.inv[0][0][idx] = (yr * zs - zr * ys) / J;
    m.inv[0][1][idx] = (zr * xs - xr * zs) / J;
    m.inv[0][2][idx] = (xr * ys - yr * xs) / J;
    m.inv[1][0][idx] = (zq * ys - yq * zs) / J;
    m.inv[1][1][idx] = (xq * zs - zq * xs) / J;
    m.inv[1][2][idx] = (yq * xs - xq * ys) / J;
    m.inv[2][0][idx] = (yq * zr - zq * yr) / J;
    m.inv[2][1][idx] = (zq * xr - xq * zr) / J;
    m.inv[2][2][idx] = (xq * yr - yq * xr) / J;
    for (std::size_t xi = 0; xi < 3; ++xi) {
      const double gx = m.inv[xi][0][idx], gy = m.inv[xi][1][idx], gz = m.inv[xi][2][idx];
      m.face_weight[xi][idx] = J * std::sqrt(gx * gx + gy * gy + gz * gz);
    }
  }
}

}  // namespace detail

inline Metrics compute_metrics(const CurvilinearMesh& mesh, const OperatorSet& ops, MetricMode mode) {
  require_same_dims(mesh.dims, ops.dims(), "mesh vs operators");
  Metrics m;
  m.dims = mesh.dims;
  for (auto& row : m.fwd)
    for (auto& g : row) g = GridFunction3(m.dims);
  if (mode == MetricMode::analytic) {
    if (!mesh.map) throw Error(ErrorCode::BadValue, "analytic metrics need an analytic mesh map");
    const Dims& d = m.dims;
    parallel_for(d.nq, [&](std::size_t i) {
      for (std::size_t j = 0; j < d.nr; ++j)
        for (std::size_t k = 0; k < d.ns; ++k) {
          const Mat3 der = mesh.map->derivative(unit_node(i, d.nq), unit_node(j, d.nr), unit_node(k, d.ns));
          const std::size_t idx = d.index(i, j, k);
          for (int a = 0; a < 3; ++a)
            for (int xi = 0; xi < 3; ++xi) m.fwd[static_cast<std::size_t>(a)][static_cast<std::size_t>(xi)][idx] = der(a, xi);
        }
    });
  } else {
    GridFunction3 tmp(m.dims);
    for (int a = 0; a < 3; ++a)
      for (Axis xi : kAxes) {
        const auto& t = ops[xi];
        auto& out = m.fwd[static_cast<std::size_t>(a)][static_cast<std::size_t>(axis_index(xi))];
        apply_along_axis(t.d_minus, mesh.coord(a).span(), m.dims, xi, out.span());
        apply_along_axis(t.d_plus, mesh.coord(a).span(), m.dims, xi, tmp.span());
        for (std::size_t idx = 0; idx < m.dims.size(); ++idx) out[idx] = 0.5 * (out[idx] + tmp[idx]);
      }
  }
  detail::metrics_from_derivatives(m);
  return m;
}

struct Face {
  Axis axis = Axis::q;
  int side = 0;
  friend bool operator==(const Face&, const Face&) = default;
};

inline constexpr std::array<Face, 6> kFaces{Face{Axis::q, 0}, Face{Axis::q, 1}, Face{Axis::r, 0},
                                            Face{Axis::r, 1}, Face{Axis::s, 0}, Face{Axis::s, 1}};

inline std::string face_name(const Face& f) { return std::string(axis_name(f.axis)) + (f.side ? "1" : "0"); }

inline std::size_t face_slot(const Face& f) { return static_cast<std::size_t>(axis_index(f.axis) * 2 + f.side); }

/// The two tangential axes of a face, slower first.
inline std::array<Axis, 2> tangential_axes(Axis a) {
  switch (a) {
    case Axis::q: return {Axis::r, Axis::s};
    case Axis::r: return {Axis::q, Axis::s};
    default: return {Axis::q, Axis::r};
  }
}

/// Flat volume indices of the face nodes, tangential axes in order (slower first).
inline std::vector<std::size_t> face_nodes(const Dims& d, const Face& f) {
  const auto [a, b] = tangential_axes(f.axis);
  const std::size_t fixed = f.side ? d.extent(f.axis) - 1 : 0;
  std::vector<std::size_t> out;
  out.reserve(d.extent(a) * d.extent(b));
  for (std::size_t u = 0; u < d.extent(a); ++u)
    for (std::size_t v = 0; v < d.extent(b); ++v)
      out.push_back(fixed * d.stride(f.axis) + u * d.stride(a) + v * d.stride(b));
  return out;
}

struct FaceGeometry {
  Face face;
  std::size_t n_tangential[2] = {0, 0};
  std::vector<std::size_t> nodes;   ///< flat volume indices
  std::vector<Vec3> normal;         ///< grad xi / |grad xi|, not oriented outward
  std::vector<Mat3> rotation;       ///< rows n, m, l
  std::vector<double> face_weight;  ///< J |grad xi|
  std::vector<double> cubature;     ///< tangential h products times face_weight
  std::vector<double> boundary_h;   ///< H weight along the face axis at the face node

  std::size_t size() const { return nodes.size(); }
};

/// Rows n, m, l with m from Gram-Schmidt of the candidate (0,1,0) or (0,0,1) less aligned with n.
inline Mat3 rotation_from_normal(const Vec3& n) {
  const Vec3 c1(0.0, 1.0, 0.0), c2(0.0, 0.0, 1.0);
  const Vec3 m0 = std::abs(n.dot(c1)) <= std::abs(n.dot(c2)) ? c1 : c2;
  Vec3 m = m0 - n.dot(m0) * n;
  const double len = m.norm();
  if (!(len > 1e-8)) throw Error(ErrorCode::DegenerateNormal, "cannot complete the normal to a basis");
  m /= len;
  const Vec3 l = n.cross(m);
  Mat3 r;
  r.row(0) = n.transpose();
  r.row(1) = m.transpose();
  r.row(2) = l.transpose();
  return r;
}

inline FaceGeometry face_geometry(const Metrics& met, const OperatorSet& ops, const Face& f) {
  require_same_dims(met.dims, ops.dims(), "metrics vs operators");
  FaceGeometry g;
  g.face = f;
  const auto [ta, tb] = tangential_axes(f.axis);
  g.n_tangential[0] = met.dims.extent(ta);
  g.n_tangential[1] = met.dims.extent(tb);
  g.nodes = face_nodes(met.dims, f);
  const std::size_t nf = g.nodes.size();
  g.normal.resize(nf);
  g.rotation.resize(nf);
  g.face_weight.resize(nf);
  g.cubature.resize(nf);
  g.boundary_h.resize(nf);
  const auto& hx = ops[f.axis].h_weights;
  const auto& ha = ops[ta].h_weights;
  const auto& hb = ops[tb].h_weights;
  const std::size_t xi = static_cast<std::size_t>(axis_index(f.axis));
  for (std::size_t p = 0; p < nf; ++p) {
    const std::size_t idx = g.nodes[p];
    const Vec3 grad(met.inv[xi][0][idx], met.inv[xi][1][idx], met.inv[xi][2][idx]);
    const double len = grad.norm();
    if (!(len > 0.0) || !std::isfinite(len))
      throw Error(ErrorCode::DegenerateNormal, "zero metric gradient on face " + face_name(f));
    g.normal[p] = grad / len;
    g.rotation[p] = rotation_from_normal(g.normal[p]);
    g.face_weight[p] = met.face_weight[xi][idx];
    const auto ijk = met.dims.unflatten(idx);
    const std::size_t u = ijk[static_cast<std::size_t>(axis_index(ta))];
    const std::size_t v = ijk[static_cast<std::size_t>(axis_index(tb))];
    g.cubature[p] = ha[u] * hb[v] * g.face_weight[p];
    g.boundary_h[p] = hx[f.side ? hx.size() - 1 : 0];
  }
  return g;
}

inline std::array<FaceGeometry, 6> all_face_geometry(const Metrics& met, const OperatorSet& ops) {
  std::array<FaceGeometry, 6> out;
  for (const Face& f : kFaces) out[face_slot(f)] = face_geometry(met, ops, f);
  return out;
}

/// max over nodes of sum_a |sum_xi D-_xi (J xi_a)|; a diagnostic, not an assertion.
inline double free_stream_residual(const Metrics& met, const OperatorSet& ops) {
  const Dims& d = met.dims;
  GridFunction3 acc(d), field(d), tmp(d);
  std::vector<double> per_node(d.size(), 0.0);
  for (int a = 0; a < 3; ++a) {
    std::fill(acc.values().begin(), acc.values().end(), 0.0);
    for (Axis xi : kAxes) {
      const auto& m = met.inv[static_cast<std::size_t>(axis_index(xi))][static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < d.size(); ++i) field[i] = met.jac[i] * m[i];
      apply_along_axis(ops[xi].d_minus, field.span(), d, xi, tmp.span());
      for (std::size_t i = 0; i < d.size(); ++i) acc[i] += tmp[i];
    }
    for (std::size_t i = 0; i < d.size(); ++i) per_node[i] += std::abs(acc[i]);
  }
  double mx = 0.0;
  for (double v : per_node) mx = std::max(mx, v);
  return mx;
}

}  // namespace upwave
