#include "fixtures.hpp"

#include <doctest.h>

#include <numeric>

using namespace tracefem;

namespace {

std::vector<CellIndicator> from_values(const std::vector<double>& eta2) {
  std::vector<CellIndicator> out;
  for (std::size_t i = 0; i < eta2.size(); ++i) {
    CellIndicator c;
    c.cell = CellId{0, {static_cast<int>(i), 0, 0}};
    c.eta2 = eta2[i];
    out.push_back(c);
  }
  return out;
}

double sum_of(const std::vector<CellIndicator>& ind, const std::vector<CellId>& cells) {
  double s = 0;
  for (const auto& c : cells)
    for (const auto& i : ind)
      if (i.cell == c) s += i.eta2;
  return s;
}

// unit cube split 2x2x2 with the plane z = 0.3 cutting the bottom layer
fixtures::SphereSetup plane_setup(int k) {
  return fixtures::SphereSetup(OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2), k,
                               [](const Vec3& x) { return x[2] - 0.3; });
}

}  // namespace

TEST_CASE("indicator combination") {
  const auto nv = IndicatorWeights::defaults_for(StabilizationKind::nv);
  const auto jf = IndicatorWeights::defaults_for(StabilizationKind::jf);
  CHECK((nv.alpha_r == 1 && nv.alpha_e == 1 && nv.alpha_s == 1));
  CHECK((jf.alpha_r == 1 && jf.alpha_e == 0 && jf.alpha_s == 1));
  auto c = combine(CellId{}, 3, 4, 0, nv);
  CHECK(c.eta2 == 25.0);
  CHECK(std::sqrt(c.eta2) == 5.0);
  CHECK(c.eta_R2 == 9.0);
  CHECK(c.eta_F2 == 16.0);
  c = combine(CellId{}, 3, 4, 0.5, jf);
  CHECK(c.eta2 == 9.5);
}

TEST_CASE("Dorfler marking examples") {
  auto a = from_values({4, 1, 1, 1, 1});
  CHECK(dorfler_mark(a, 0.5).size() == 2);
  auto b = from_values({1, 1, 1, 1});
  CHECK(dorfler_mark(b, 0.9).size() == 4);
  auto m = dorfler_mark(a, 1e-9);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == a[0].cell);
  // ties go to the smaller CellId
  m = dorfler_mark(b, 0.3);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == b[0].cell);
  CHECK(m[1] == b[1].cell);
  CHECK_THROWS_AS(dorfler_mark(std::vector<CellIndicator>{}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(dorfler_mark(a, 1.0), ConfigError);
  CHECK_THROWS_AS(dorfler_mark(a, 0.0), ConfigError);
}

TEST_CASE("Dorfler marking is minimal, strict and scale invariant") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u01(0, 1);
  std::uniform_int_distribution<int> small(0, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 60);
    std::vector<double> v(n);
    // integer values produce ties and exact boundary cases
    for (double& x : v) x = trial % 2 ? small(rng) : std::pow(u01(rng), 4);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0; })) v[0] = 1;
    const double theta = trial % 5 == 0 ? 0.5 : 0.05 + 0.9 * u01(rng);
    auto ind = from_values(v);
    double total = 0;
    for (double x : v) total += x;
    auto m = dorfler_mark(ind, theta);
    REQUIRE(!m.empty());
    const double s = sum_of(ind, m);
    CHECK(s > theta * total);
    // dropping the last cell loses the property
    auto shorter = m;
    shorter.pop_back();
    CHECK(sum_of(ind, shorter) <= theta * total);
    // marked values dominate unmarked ones
    double min_marked = 1e300, max_rest = -1;
    for (const auto& i : ind) {
      const bool in = std::find(m.begin(), m.end(), i.cell) != m.end();
      if (in) min_marked = std::min(min_marked, i.eta2);
      else max_rest = std::max(max_rest, i.eta2);
    }
    CHECK(min_marked >= max_rest);

    auto scaled = ind;
    const double f = std::pow(2.0, static_cast<int>(rng() % 40) - 20);
    for (auto& i : scaled) i.eta2 *= f;
    CHECK(dorfler_mark(scaled, theta) == m);
    auto shuffled = ind;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(dorfler_mark(shuffled, theta) == m);
  }
}

TEST_CASE("residual indicator examples") {
  fixtures::SphereSetup s(fixtures::benchmark_mesh(), 1);
  const auto& dofs = s.space->dofs();
  std::vector<double> one(dofs.n_dofs(), 1.0), zero(dofs.n_dofs(), 0.0);
  auto f1 = [](const Vec3&) { return 1.0; };
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) {
    CHECK(eta_residual(*s.space, one, ci, f1) < 1e-12);
    const double a = s.space->surface_rule(ci).measure();
    CHECK(eta_residual(*s.space, zero, ci, f1) == doctest::Approx(dofs.cell_size(ci) * std::sqrt(a)).epsilon(1e-13));
  }
  auto ind = total_indicator(*s.space, one, f1, IndicatorWeights{}, StabilizationConfig{});
  CHECK(ind.global <= 1e-8);
  CHECK(ind.cells.size() == dofs.n_cells());
}

TEST_CASE("discrete surface Laplacian on planar cuts against finite differences") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> c(-1, 1);
  for (int k = 1; k <= 2; ++k) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vec3 a = fixtures::random_unit(rng);
      const Vec3 p(0.5 + 0.2 * c(rng), 0.5 + 0.2 * c(rng), 0.5 + 0.2 * c(rng));
      auto phi = [&](const Vec3& x) { return a.dot(x - p); };
      fixtures::SphereSetup s(OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2), k, phi);
      const auto& dofs = s.space->dofs();
      std::vector<double> u(dofs.n_dofs());
      for (double& v : u) v = c(rng);
      s.space->constraints().distribute(u);
      const Vec3 t1 = a.unitOrthogonal(), t2 = a.cross(t1);
      for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) {
        const auto poly = cell_function(dofs, ci, u);
        const auto& rule = s.space->surface_rule(ci);
        for (std::size_t q = 0; q < rule.size(); q += 3) {
          const Vec3& x = rule.points[q];
          // stay inside the cell for the stencil
          const Vec3 lo = dofs.cell_lower(ci);
          const double h = dofs.cell_size(ci);
          if ((x - lo).minCoeff() < 1e-3 || (lo + Vec3::Constant(h) - x).minCoeff() < 1e-3) continue;
          const double d = 1e-4;
          double fd = 0;
          for (const Vec3& t : {t1, t2}) fd += (poly.value(x + d * t) - 2 * poly.value(x) + poly.value(x - d * t)) / (d * d);
          const double lap = surface_laplacian(*s.space, poly, ci, x);
          CHECK(std::abs(lap - fd) <= 1e-5 * std::max(1.0, std::abs(lap)));
        }
      }
    }
  }
}

TEST_CASE("discrete surface Laplacian on the sphere") {
  // Q2 reproduces the sphere, so for polynomial data the only error is the finite difference
  fixtures::SphereSetup s(fixtures::benchmark_mesh(), 2);
  const auto& dofs = s.space->dofs();
  auto g = [](const Vec3& x) { return x[0] * x[1] + 0.5 * x[2] - x[1] * x[1]; };
  auto lin = [](const Vec3& x) { return x[0]; };
  auto ug = interpolate(dofs, s.space->constraints(), g);
  auto ul = interpolate(dofs, s.space->constraints(), lin);
  double worst = 0, worst_lin = 0;
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) {
    const auto pg = cell_function(dofs, ci, ug), pl = cell_function(dofs, ci, ul);
    const auto& rule = s.space->surface_rule(ci);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3& x = rule.points[q];
      // Delta x_1 = -2 x_1 on the unit sphere
      worst_lin = std::max(worst_lin, std::abs(surface_laplacian(*s.space, pl, ci, x) + 2 * x[0]));
      // the extension of g is not constant in the normal direction; compare the
      // restriction of the polynomial itself
      const double fd = fixtures::sphere_laplacian_fd([&](const Vec3& y) { return pg.value(y); }, x, 1e-4);
      worst = std::max(worst, std::abs(surface_laplacian(*s.space, pg, ci, x) - fd));
    }
  }
  CHECK(worst_lin < 1e-11);
  CHECK(worst < 1e-5);
}

TEST_CASE("face jump indicator") {
  // global polynomials in the space have continuous gradients
  for (int k = 1; k <= 2; ++k) {
    fixtures::SphereSetup s(fixtures::graded_mesh(2), k);
    auto u = interpolate(s.space->dofs(), s.space->constraints(), [k](const Vec3& x) {
      return k == 1 ? 0.3 - x[1] + 0.2 * x[0] : x[0] * x[0] - x[1] * x[2] + 0.2 * x[0];
    });
    for (std::size_t ci = 0; ci < s.space->dofs().n_cells(); ++ci) CHECK(eta_facejump(*s.space, u, ci) < 1e-12);
  }

  // kink of unit normal slope across the face x = 0.5 of area 1/4
  auto s = plane_setup(1);
  const auto& dofs = s.space->dofs();
  REQUIRE(dofs.n_cells() == 4);
  auto u = interpolate(dofs, s.space->constraints(), [](const Vec3& x) { return std::max(0.0, x[0] - 0.5); });
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) CHECK(eta_facejump(*s.space, u, ci) == doctest::Approx(0.5).epsilon(1e-13));

  // JF weights drop the jump
  auto ind = total_indicator(*s.space, u, [](const Vec3&) { return 0.0; },
                             IndicatorWeights::defaults_for(StabilizationKind::jf), StabilizationConfig{});
  for (const auto& c : ind.cells) CHECK(c.eta2 == doctest::Approx(c.eta_R2 + c.stab_energy).epsilon(1e-14));

  // a lone cut cell has no faces to integrate over
  // a cap around the domain corner cuts a single cell
  auto ball = [](const Vec3& x) { return (x + Vec3::Constant(0.01)).squaredNorm() - 0.04; };
  fixtures::SphereSetup lone(OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2), 2, ball);
  REQUIRE(lone.space->dofs().n_cells() == 1);
  std::vector<double> w(lone.space->dofs().n_dofs());
  std::iota(w.begin(), w.end(), 0.0);
  CHECK(eta_facejump(*lone.space, w, 0) == 0.0);
}
