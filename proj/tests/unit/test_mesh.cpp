#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace tracefem;

namespace {

auto face_key(const FaceId& f) {
  return std::tuple(f.minus_cell, f.plus_cell, f.axis, f.lower[0], f.lower[1], f.lower[2]);
}

bool scan_balanced(const OctreeMesh& mesh) {
  for (const auto& c : mesh.active_cells())
    for (int axis = 0; axis < 3; ++axis)
      for (int side : {-1, 1})
        for (const auto& nb : mesh.face_neighbors(c, axis, side))
          if (std::abs(nb.level - c.level) > 1) return false;
  return true;
}

}  // namespace

TEST_CASE("uniform benchmark grid") {
  auto mesh = fixtures::benchmark_mesh();
  CHECK(mesh.num_active() == 512);
  for (const auto& c : mesh.active_cells()) {
    CHECK(c.level == 0);
    CHECK(mesh.cell_geometry(c).size == doctest::Approx(0.5));
  }
  auto one = OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 1);
  CHECK(one.num_active() == 1);
  CHECK(one.cell_geometry(CellId{0, {0, 0, 0}}).size == 1.0);
  CHECK_THROWS_AS(OctreeMesh::create_uniform(Vec3::Constant(-2), Vec3::Constant(2), 0), ConfigError);
  CHECK_THROWS_AS(OctreeMesh::create_uniform(Vec3::Zero(), Vec3(1, 2, 1), 2), ConfigError);
}

TEST_CASE("cell geometry") {
  auto mesh = fixtures::benchmark_mesh();
  const CellId c{0, {0, 0, 0}};
  auto g = mesh.cell_geometry(c);
  CHECK((g.center - Vec3::Constant(-1.75)).norm() < 1e-15);
  CHECK(g.size == 0.5);
  mesh.refine_with_closure(std::vector<CellId>{c});
  CHECK(mesh.cell_geometry(c.child(0)).size == 0.25);
  CHECK_THROWS_AS(mesh.cell_geometry(c), std::out_of_range);
  CHECK_THROWS_AS(mesh.cell_geometry(CellId{3, {0, 0, 0}}), std::out_of_range);
}

TEST_CASE("refinement closure") {
  auto mesh = OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2);
  const CellId c{0, {0, 0, 0}};
  mesh.refine_with_closure(std::vector<CellId>{c});
  CHECK(mesh.num_active() == 15);
  CHECK(mesh.is_balanced());

  // the corner child facing the other level-0 cells forces them to refine
  const CellId inner = c.child(7);
  mesh.refine_with_closure(std::vector<CellId>{inner});
  CHECK(mesh.is_balanced());
  CHECK(scan_balanced(mesh));
  for (const auto& nb : {CellId{0, {1, 0, 0}}, CellId{0, {0, 1, 0}}, CellId{0, {0, 0, 1}}}) CHECK_FALSE(mesh.is_active(nb));
  // the edge and corner neighbours are not constrained
  CHECK(mesh.is_active(CellId{0, {1, 1, 1}}));

  const auto before = mesh.active_cells();
  mesh.refine_with_closure(std::vector<CellId>{});
  CHECK(mesh.active_cells() == before);
}

TEST_CASE("closure is deterministic and keeps the 2:1 rule on random meshes") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seed = rng();
    std::mt19937_64 a(seed), b(seed);
    auto m1 = fixtures::random_mesh(a, 2, 4, 0.15);
    auto m2 = fixtures::random_mesh(b, 2, 4, 0.15);
    CHECK(m1.active_cells() == m2.active_cells());
    CHECK(m1.is_balanced());
    CHECK(scan_balanced(m1));
    double vol = 0.0;
    for (const auto& c : m1.active_cells()) vol += std::pow(m1.cell_geometry(c).size, 3);
    CHECK(vol == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("internal faces") {
  auto mesh = OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2);
  auto all = mesh.active_cells();
  CHECK(mesh.internal_faces(CellSet(all.begin(), all.end())).size() == 12);
  CHECK(mesh.internal_faces(CellSet{all[0]}).empty());

  // a coarse cell next to four fine cells
  auto m = OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2);
  const CellId left{0, {0, 0, 0}}, right{0, {1, 0, 0}};
  m.refine_with_closure(std::vector<CellId>{right});
  CellSet set{left};
  for (int i = 0; i < 8; ++i)
    if ((i & 1) == 0) set.insert(right.child(i));
  int across = 0;
  for (const auto& f : m.internal_faces(set)) {
    if (f.minus_cell != left) continue;
    ++across;
    CHECK(f.axis == 0);
    CHECK(f.h_F == 0.25);
    CHECK(f.lower[0] == 0.5);
    CHECK(f.upper[1] - f.lower[1] == 0.25);
    CHECK(f.upper[2] - f.lower[2] == 0.25);
  }
  CHECK(across == 4);
}

TEST_CASE("internal faces do not depend on enumeration order") {
  std::mt19937_64 rng(5);
  auto mesh = fixtures::random_mesh(rng, 2, 3, 0.2);
  auto cells = mesh.active_cells();
  std::set<decltype(face_key(FaceId{}))> reference;
  for (const auto& f : mesh.internal_faces(CellSet(cells.begin(), cells.end()))) reference.insert(face_key(f));
  for (int t = 0; t < 5; ++t) {
    std::shuffle(cells.begin(), cells.end(), rng);
    CellSet set;
    set.reserve(3 * cells.size());
    for (const auto& c : cells) set.insert(c);
    std::set<decltype(face_key(FaceId{}))> got;
    for (const auto& f : mesh.internal_faces(set)) got.insert(face_key(f));
    CHECK(got == reference);
  }
}

TEST_CASE("point location and touching cells") {
  auto mesh = fixtures::graded_mesh(2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    auto c = mesh.locate(x);
    REQUIRE(c);
    const auto g = mesh.cell_geometry(*c);
    for (int d = 0; d < 3; ++d) {
      CHECK(x[d] >= g.lower[d] - 1e-14);
      CHECK(x[d] <= g.lower[d] + g.size + 1e-14);
    }
  }
  CHECK_FALSE(mesh.locate(Vec3(3, 0, 0)));
  const CellId corner{0, {0, 0, 0}};
  CHECK(mesh.cells_touching(corner).size() == 8);
}

TEST_CASE("vtk export") {
  auto mesh = OctreeMesh::create_uniform(Vec3::Zero(), Vec3::Ones(), 2);
  const auto path = (std::filesystem::temp_directory_path() / "tracefem_mesh_test.vtk").string();
  std::unordered_map<CellId, double, CellIdHash> level;
  for (const auto& c : mesh.active_cells()) level[c] = c.level;
  write_vtk(path, mesh, {{"level", level}});
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first.find("vtk DataFile") != std::string::npos);
  std::filesystem::remove(path);
}
