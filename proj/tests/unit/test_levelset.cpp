#include "fixtures.hpp"

#include <doctest.h>

using namespace tracefem;

namespace {

SurfaceRuleOptions rule_options(int k) {
  SurfaceRuleOptions o;
  o.order = k + 1;
  return o;
}

double box_min_sq(const Vec3& lo, double h) {
  double s = 0;
  for (int d = 0; d < 3; ++d) {
    const double c = std::clamp(0.0, lo[d], lo[d] + h);
    s += c * c;
  }
  return s;
}

double box_max_sq(const Vec3& lo, double h) {
  double s = 0;
  for (int d = 0; d < 3; ++d) s += std::max(lo[d] * lo[d], (lo[d] + h) * (lo[d] + h));
  return s;
}

}  // namespace

TEST_CASE("level set interpolation") {
  auto mesh = fixtures::benchmark_mesh();
  auto f1 = LevelSetField::interpolate(sphere_level_set, mesh, 1);
  for (const auto& c : mesh.active_cells())
    for (const auto& v : mesh.cell_geometry(c).vertices) CHECK(f1.value(c, v) == doctest::Approx(sphere_level_set(v)).epsilon(1e-14));

  auto affine = [](const Vec3& x) { return 0.3 * x[0] - x[1] + 0.7 * x[2] + 0.1; };
  auto fa = LevelSetField::interpolate(affine, mesh, 1);
  auto f2 = LevelSetField::interpolate(sphere_level_set, mesh, 2);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int s = 0; s < 200; ++s) {
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK(std::abs(fa.value(x) - affine(x)) < 1e-13);
    CHECK(std::abs(f2.value(x) - sphere_level_set(x)) < 1e-13);
  }
  CHECK_THROWS_AS(LevelSetField::interpolate(sphere_level_set, mesh, 3), ConfigError);
}

TEST_CASE("cell classification on the benchmark grid") {
  auto mesh = fixtures::benchmark_mesh();
  auto field = LevelSetField::interpolate(sphere_level_set, mesh, 1);
  auto cuts = classify(field, mesh, rule_options(1));
  CHECK(cuts.tag(CellId{0, {5, 5, 5}}) == CellTag::cut);
  CHECK(cuts.tag(CellId{0, {3, 3, 3}}) == CellTag::interior);
  CHECK(cuts.tag(CellId{0, {7, 7, 7}}) == CellTag::exterior);
  CHECK(std::is_sorted(cuts.cut_cells.begin(), cuts.cut_cells.end()));
  for (const auto& c : cuts.cut_cells) CHECK(cuts.is_cut(c));
}

TEST_CASE("classification matches exact sign analysis for polynomial level sets") {
  // the sphere is reproduced by Q2; the plane by Q1
  for (int k = 1; k <= 2; ++k) {
    auto mesh = fixtures::graded_mesh(2);
    const Vec3 a(0.31, -0.57, 0.76);
    const double b = 0.123;
    auto plane = [&](const Vec3& x) { return a.dot(x) - b; };
    const ScalarField phi = k == 1 ? ScalarField(plane) : ScalarField(sphere_level_set);
    auto field = LevelSetField::interpolate(phi, mesh, k);
    auto cuts = classify(field, mesh, rule_options(k));
    for (const auto& c : mesh.active_cells()) {
      const auto g = mesh.cell_geometry(c);
      double mn, mx;
      if (k == 1) {
        mn = 1e300;
        mx = -1e300;
        for (const auto& v : g.vertices) {
          mn = std::min(mn, plane(v));
          mx = std::max(mx, plane(v));
        }
      } else {
        mn = box_min_sq(g.lower, g.size) - 1.0;
        mx = box_max_sq(g.lower, g.size) - 1.0;
      }
      const CellTag expected = (mn < 0 && mx > 0) ? CellTag::cut : (mx <= 0 ? CellTag::interior : CellTag::exterior);
      CHECK(cuts.tag(c) == expected);
    }
  }
}

TEST_CASE("normals") {
  auto mesh = fixtures::benchmark_mesh();
  auto f2 = LevelSetField::interpolate(sphere_level_set, mesh, 2);
  CHECK((f2.normal(Vec3(0, 0, 1)) - Vec3(0, 0, 1)).norm() < 1e-14);
  CHECK((f2.normal(Vec3(0, 0.8, 0)) - Vec3(0, 1, 0)).norm() < 1e-14);
  CHECK_THROWS_AS(f2.normal(Vec3::Zero()), GeometryError);

  // Q1 normals converge at first order near the pole
  double prev = 0;
  for (int n0 : {8, 16, 32}) {
    auto m = fixtures::benchmark_mesh(n0);
    auto f1 = LevelSetField::interpolate(sphere_level_set, m, 1);
    const Vec3 x(0.01, 0.02, std::sqrt(1 - 0.0005));
    const double err = (f1.normal(x) - x.normalized()).norm();
    const double h = 4.0 / n0;
    CHECK(err <= h);
    if (prev > 0) CHECK(err < 0.7 * prev);
    prev = err;
  }
}

TEST_CASE("normal Jacobian") {
  auto mesh = fixtures::benchmark_mesh();
  auto f2 = LevelSetField::interpolate(sphere_level_set, mesh, 2);
  const CellId top = *mesh.locate(Vec3(0.1, 0.1, 0.9));
  Mat3 J = f2.normal_jacobian(top, Vec3(0, 0, 1));
  Mat3 expect = Vec3(1, 1, 0).asDiagonal();
  CHECK((J - expect).norm() < 1e-13);

  auto affine = [](const Vec3& x) { return 0.3 * x[0] - x[1] + 0.7 * x[2]; };
  auto fa = LevelSetField::interpolate(affine, mesh, 1);
  CHECK(fa.normal_jacobian(top, Vec3(0.1, 0.2, 0.8)).norm() < 1e-13);

  // against central differences of the normal
  auto phi = [](const Vec3& x) { return x[0] * x[0] + 2 * x[1] * x[1] + 0.5 * x[2] * x[2] + x[0] * x[1] - 0.7; };
  for (int k = 1; k <= 2; ++k) {
    auto f = LevelSetField::interpolate(phi, mesh, k);
    std::mt19937_64 rng(k + 10);
    std::uniform_real_distribution<double> u(0.05, 0.45);
    for (int s = 0; s < 20; ++s) {
      const CellId c{0, {4, 5, 5}};
      const Vec3 x = mesh.cell_lower(c) + Vec3(u(rng), u(rng), u(rng));
      const Mat3 Jx = f.normal_jacobian(c, x);
      const double d = 1e-5;
      Mat3 fd;
      for (int j = 0; j < 3; ++j) {
        Vec3 e = Vec3::Zero();
        e[j] = d;
        fd.col(j) = (f.normal(c, x + e) - f.normal(c, x - e)) / (2 * d);
      }
      CHECK((Jx - fd).norm() < 1e-6 * std::max(1.0, Jx.norm()));
    }
  }
}

TEST_CASE("level set is continuous across coarse-fine interfaces") {
  auto mesh = fixtures::graded_mesh(2);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u01(0, 1);
  auto phi = [](const Vec3& x) { return std::sin(x[0]) + x[1] * x[2] - 0.2 + std::exp(0.3 * x[2]); };
  for (int k = 1; k <= 2; ++k) {
    auto field = LevelSetField::interpolate(phi, mesh, k);
    std::vector<std::tuple<CellId, CellId, int>> pairs;
    for (const auto& c : mesh.active_cells())
      for (int axis = 0; axis < 3; ++axis)
        for (const auto& nb : mesh.face_neighbors(c, axis, 1))
          if (nb.level != c.level) pairs.emplace_back(c, nb, axis);
    REQUIRE(!pairs.empty());
    double worst = 0;
    for (int s = 0; s < 1000; ++s) {
      const auto& [a, b, axis] = pairs[rng() % pairs.size()];
      const CellId& fine = a.level > b.level ? a : b;
      const auto g = mesh.cell_geometry(fine);
      Vec3 x = g.lower + g.size * Vec3(u01(rng), u01(rng), u01(rng));
      x[axis] = mesh.cell_lower(a)[axis] + mesh.cell_size(a.level);
      const double va = field.value(a, x), vb = field.value(b, x);
      worst = std::max(worst, std::abs(va - vb) / std::max(1.0, std::abs(va)));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("surface points approach the sphere at order k+1") {
  // Q1: distance decays like h^2; Q2 reproduces the quadratic level set, so the surface is exact
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> hs, ds;
    for (int n0 : {8, 16, 32, 64}) {
      auto mesh = fixtures::benchmark_mesh(n0);
      auto field = LevelSetField::interpolate(sphere_level_set, mesh, k);
      auto cuts = classify(field, mesh, rule_options(k));
      double d = 0;
      for (const auto& [c, rule] : cuts.surface_rules)
        for (const auto& x : rule.points) d = std::max(d, std::abs(x.norm() - 1.0));
      hs.push_back(4.0 / n0);
      ds.push_back(d);
    }
    if (k == 1) {
      for (std::size_t i = 1; i < ds.size(); ++i) CHECK(std::log2(ds[i - 1] / ds[i]) >= 1.7);
    } else {
      for (double d : ds) CHECK(d < 1e-12);
    }
  }
}
