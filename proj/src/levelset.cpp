#include "tracefem/levelset.hpp"

#include <algorithm>
#include <cmath>

namespace tracefem {

LevelSetField LevelSetField::interpolate(const ScalarField& phi, const OctreeMesh& mesh, int degree) {
  if (degree < 1 || degree > kMaxDegree) throw ConfigError("LevelSetField: degree must be 1 or 2");
  LevelSetField f;
  f.mesh_ = &mesh;
  const auto cells = mesh.active_cells();
  f.dofs_ = DofMap::build(mesh, cells, degree);
  f.constraints_ = ConstraintSet::build(mesh, f.dofs_);
  f.values_ = tracefem::interpolate(f.dofs_, f.constraints_, phi);
  f.polys_.reserve(f.dofs_.n_cells());
  for (std::size_t ci = 0; ci < f.dofs_.n_cells(); ++ci) f.polys_.push_back(cell_function(f.dofs_, ci, f.values_));
  return f;
}

const CellPolynomial& LevelSetField::on_cell(const CellId& cell) const {
  const int ci = dofs_.cell_index(cell);
  if (ci < 0) throw std::out_of_range("LevelSetField: no data on cell " + cell.str());
  return polys_[ci];
}

const CellId& LevelSetField::locate(const Vec3& x, CellId& storage) const {
  auto c = mesh_ ? mesh_->locate(x) : std::nullopt;
  if (!c) throw std::out_of_range("LevelSetField: point outside the domain");
  storage = *c;
  return storage;
}

double LevelSetField::value(const Vec3& x) const {
  CellId c;
  return value(locate(x, c), x);
}

void LevelSetField::normal_and_jacobian(const CellPolynomial& poly, const CellId& cell, const Vec3& x, Vec3& n,
                                        Mat3* jacobian) {
  Vec3 g;
  Mat3 H;
  poly.evaluate(x, nullptr, &g, jacobian ? &H : nullptr);
  const double gn = g.norm();
  if (!(gn > 1e-10 / poly.size())) throw GeometryError(cell, "level set gradient vanishes");
  n = g / gn;
  if (jacobian) *jacobian = (Mat3::Identity() - n * n.transpose()) * H / gn;
}

Vec3 LevelSetField::normal(const CellId& cell, const Vec3& x) const {
  Vec3 n;
  normal_and_jacobian(on_cell(cell), cell, x, n, nullptr);
  return n;
}

Vec3 LevelSetField::normal(const Vec3& x) const {
  CellId c;
  return normal(locate(x, c), x);
}

Mat3 LevelSetField::normal_jacobian(const CellId& cell, const Vec3& x) const {
  Vec3 n;
  Mat3 J;
  normal_and_jacobian(on_cell(cell), cell, x, n, &J);
  return J;
}

CutClassification classify(const LevelSetField& field, const OctreeMesh& mesh, const SurfaceRuleOptions& options) {
  CutClassification out;
  const auto cells = mesh.active_cells();
  out.tags.reserve(cells.size());
  for (const auto& c : cells) {
    const auto& poly = field.on_cell(c);
    const auto nodal = poly.nodal();
    const auto [mn, mx] = std::minmax_element(nodal.begin(), nodal.end());
    const bool sign_change = *mn < 0.0 && *mx > 0.0;
    auto rule = surface_rule(poly, c, options);
    if (sign_change || !rule.empty()) {
      out.tags.emplace(c, CellTag::cut);
      out.cut_cells.push_back(c);
      out.surface_rules.emplace(c, std::move(rule));
    } else {
      const double centre = poly.value_reference(Vec3::Constant(0.5));
      out.tags.emplace(c, centre < 0.0 ? CellTag::interior : CellTag::exterior);
    }
  }
  return out;
}

}  // namespace tracefem
