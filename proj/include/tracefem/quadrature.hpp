#pragma once

#include "tracefem/mesh.hpp"
#include "tracefem/polynomial.hpp"

#include <vector>

namespace tracefem {

class LevelSetField;

/// Points and positive weights on Gamma_h intersected with one cell.
struct SurfaceQuadrature {
  CellId cell;
  std::vector<Vec3> points;
  std::vector<double> weights;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  double measure() const;
};

/// Tensor Gauss rule on a cell volume or a face rectangle.
struct TensorQuadrature {
  std::vector<Vec3> points;
  std::vector<double> weights;
  int order = 0;
};

struct SurfaceRuleOptions {
  int order = 2;          // Gauss points per axis on every sub-interval
  int max_depth = 8;      // bisection depth before a cut is declared degenerate
  double tol_root = 1e-12;
  /// Points the rule must not contain (singularities of the data); nodes
  /// closer than 1e-12 are nudged along the base direction.
  std::vector<Vec3> avoid_points;
};

/// Surface rule for {phi = 0} in the cell by dimension reduction: a height
/// axis along which phi is monotone, base intervals split at the roots of the
/// restrictions to the top and bottom faces, and one root per base node.
/// Throws GeometryError for a cut that stays non-monotone after max_depth
/// bisections or a vanishing gradient.
SurfaceQuadrature surface_rule(const CellPolynomial& phi, const CellId& cell, const SurfaceRuleOptions& options);
SurfaceQuadrature surface_rule(const LevelSetField& field, const CellId& cell, const SurfaceRuleOptions& options);

/// Tensor Gauss rule with `order` points per axis (exact to degree 2 order - 1).
TensorQuadrature cell_rule(const OctreeMesh& mesh, const CellId& cell, int order);
TensorQuadrature box_rule(const Vec3& lower, double size, int order);
TensorQuadrature face_rule(const FaceId& face, int order);

}  // namespace tracefem
