#pragma once

#include "tracefem/fe_space.hpp"
#include "tracefem/quadrature.hpp"

#include <unordered_map>
#include <vector>

namespace tracefem {

/// Continuous Q_k interpolant phi_h of a level-set function on every active
/// cell; its zero set is the discrete surface.
class LevelSetField {
 public:
  static LevelSetField interpolate(const ScalarField& phi, const OctreeMesh& mesh, int degree);

  int degree() const { return dofs_.degree(); }
  const DofMap& dofs() const { return dofs_; }
  const ConstraintSet& constraints() const { return constraints_; }
  std::span<const double> nodal_values() const { return values_; }

  /// Throws std::out_of_range for a cell the field was not built on.
  const CellPolynomial& on_cell(const CellId& cell) const;

  double value(const CellId& cell, const Vec3& x) const { return on_cell(cell).value(x); }
  /// Value at a point, evaluated on the active cell containing it.
  double value(const Vec3& x) const;

  /// n_h = grad phi_h / |grad phi_h|. Throws GeometryError when
  /// |grad phi_h| <= 1e-10 / h.
  Vec3 normal(const CellId& cell, const Vec3& x) const;
  Vec3 normal(const Vec3& x) const;
  /// grad n_h = (I - n n^T) hess(phi_h) / |grad phi_h|.
  Mat3 normal_jacobian(const CellId& cell, const Vec3& x) const;

  /// Normal and its Jacobian from one polynomial evaluation.
  static void normal_and_jacobian(const CellPolynomial& poly, const CellId& cell, const Vec3& x, Vec3& n,
                                  Mat3* jacobian);

 private:
  const CellId& locate(const Vec3& x, CellId& storage) const;

  const OctreeMesh* mesh_ = nullptr;
  DofMap dofs_;
  ConstraintSet constraints_;
  std::vector<double> values_;
  std::vector<CellPolynomial> polys_;
};

enum class CellTag { interior, exterior, cut };

/// Interior/exterior/cut tags for every active cell. The surface rules
/// computed while classifying are kept for the cut cells.
struct CutClassification {
  std::unordered_map<CellId, CellTag, CellIdHash> tags;
  std::vector<CellId> cut_cells;  // sorted
  std::unordered_map<CellId, SurfaceQuadrature, CellIdHash> surface_rules;

  CellTag tag(const CellId& c) const { return tags.at(c); }
  bool is_cut(const CellId& c) const {
    auto it = tags.find(c);
    return it != tags.end() && it->second == CellTag::cut;
  }
};

CutClassification classify(const LevelSetField& field, const OctreeMesh& mesh, const SurfaceRuleOptions& options);

}  // namespace tracefem
