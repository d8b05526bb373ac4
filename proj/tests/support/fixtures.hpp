#pragma once

#include "tracefem/benchmark.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

namespace fixtures {

using namespace tracefem;

/// Mesh, level set, classification and space kept alive together.
struct SphereSetup {
  OctreeMesh mesh;
  std::unique_ptr<LevelSetField> field;
  std::unique_ptr<CutClassification> cuts;
  std::unique_ptr<Discretization> space;

  SphereSetup(OctreeMesh m, int degree, const ScalarField& phi = sphere_level_set) : mesh(std::move(m)) {
    field = std::make_unique<LevelSetField>(LevelSetField::interpolate(phi, mesh, degree));
    SurfaceRuleOptions o;
    o.order = degree + 1;
    o.avoid_points = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
    cuts = std::make_unique<CutClassification>(classify(*field, mesh, o));
    space = std::make_unique<Discretization>(Discretization::build(mesh, *field, *cuts, degree));
  }
};

inline OctreeMesh benchmark_mesh(int n0 = 8) { return OctreeMesh::create_uniform(Vec3::Constant(-2), Vec3::Constant(2), n0); }

/// Benchmark mesh refined `times` times around the north pole, which leaves
/// hanging nodes on the surface.
inline OctreeMesh graded_mesh(int times) {
  auto mesh = benchmark_mesh();
  for (int i = 0; i < times; ++i) {
    std::vector<CellId> marked;
    for (const auto& c : mesh.active_cells()) {
      const auto g = mesh.cell_geometry(c);
      if ((g.center - Vec3(0, 0, 1)).norm() < 1.5 * g.size) marked.push_back(c);
    }
    mesh.refine_with_closure(marked);
  }
  return mesh;
}

/// Random mesh obtained by marking random cells a few times.
inline OctreeMesh random_mesh(std::mt19937_64& rng, int n0, int rounds, double fraction) {
  auto mesh = OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), n0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < rounds; ++r) {
    std::vector<CellId> marked;
    for (const auto& c : mesh.active_cells())
      if (u(rng) < fraction) marked.push_back(c);
    mesh.refine_with_closure(marked);
  }
  return mesh;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

/// Area of the polygon {x : a.x = b} clipped to the box [lo, lo + s]^3,
/// from the convex hull of the plane's crossings of the twelve box edges.
inline double plane_box_area(const Vec3& a, double b, const Vec3& lo, double s) {
  std::vector<Vec3> pts;
  for (int axis = 0; axis < 3; ++axis) {
    const int p = (axis + 1) % 3, q = (axis + 2) % 3;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Vec3 x0 = lo;
        x0[p] += i * s;
        x0[q] += j * s;
        Vec3 x1 = x0;
        x1[axis] += s;
        const double f0 = a.dot(x0) - b, f1 = a.dot(x1) - b;
        if ((f0 < 0) != (f1 < 0)) pts.push_back(x0 + (x1 - x0) * (f0 / (f0 - f1)));
      }
  }
  if (pts.size() < 3) return 0.0;
  Vec3 c = Vec3::Zero();
  for (const auto& x : pts) c += x;
  c /= static_cast<double>(pts.size());
  const Vec3 n = a.normalized();
  const Vec3 e1 = (pts[0] - c).normalized();
  const Vec3 e2 = n.cross(e1);
  std::sort(pts.begin(), pts.end(), [&](const Vec3& x, const Vec3& y) {
    return std::atan2((x - c).dot(e2), (x - c).dot(e1)) < std::atan2((y - c).dot(e2), (y - c).dot(e1));
  });
  double area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) area += n.dot((pts[i] - c).cross(pts[(i + 1) % pts.size()] - c));
  return 0.5 * std::abs(area);
}

/// Laplace-Beltrami operator on the unit sphere at x by central differences
/// along two orthogonal great circles.
template <class F>
double sphere_laplacian_fd(const F& f, const Vec3& x, double delta) {
  Vec3 t1 = x.unitOrthogonal();
  Vec3 t2 = x.cross(t1);
  double lap = 0.0;
  for (const Vec3& t : {t1, t2}) {
    auto g = [&](double s) { return f(Vec3(std::cos(s) * x + std::sin(s) * t)); };
    lap += (g(delta) - 2.0 * g(0.0) + g(-delta)) / (delta * delta);
  }
  return lap;
}

/// Slope of log(y) against log(x) by least squares.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

/// ||sin^l(theta) sin(phi)||^2 over the unit sphere, pi^{3/2} Gamma(l+1) / Gamma(l+3/2).
inline double manufactured_norm_sq(double lambda) {
  return std::pow(std::numbers::pi, 1.5) * std::tgamma(lambda + 1.0) / std::tgamma(lambda + 1.5);
}

/// The same norm by a midpoint rule in (theta, phi).
inline double manufactured_norm_sq_sampled(double lambda, int n) {
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = pi * (i + 0.5) / n;
    const double st = std::sin(th);
    double row = 0.0;
    for (int j = 0; j < 2 * n; ++j) {
      const double ph = -pi + pi * (j + 0.5) / n;
      const double v = std::pow(st, lambda) * std::sin(ph);
      row += v * v;
    }
    s += row * st;
  }
  return s * (pi / n) * (pi / n);
}

}  // namespace fixtures
