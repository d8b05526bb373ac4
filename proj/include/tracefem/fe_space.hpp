#pragma once

#include "tracefem/mesh.hpp"
#include "tracefem/polynomial.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace tracefem {

/// Support point on the global integer lattice of a DofMap.
struct LatticePoint {
  std::array<std::int64_t, 3> c{};
  auto operator<=>(const LatticePoint&) const = default;
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto v : p.c) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 0x100000001b3ull;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Continuous Q_k Lagrange dofs over a set of active cells. Shared support
/// points are identified on an integer lattice fine enough to hold every
/// node of the finest cell.
class DofMap {
 public:
  static DofMap build(const OctreeMesh& mesh, std::span<const CellId> cells, int degree);

  int degree() const { return k_; }
  int dofs_per_cell() const { return nodes_per_cell(k_); }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_dofs() const { return points_.size(); }

  std::span<const CellId> cells() const { return cells_; }
  const CellId& cell(std::size_t ci) const { return cells_[ci]; }
  /// Index of `id` among the cells, or -1.
  int cell_index(const CellId& id) const;
  std::span<const int> cell_dofs(std::size_t ci) const {
    return {cell_dofs_.data() + ci * dofs_per_cell(), static_cast<std::size_t>(dofs_per_cell())};
  }
  const Vec3& cell_lower(std::size_t ci) const { return lower_[ci]; }
  double cell_size(std::size_t ci) const { return size_[ci]; }

  const Vec3& support_point(int dof) const { return points_[dof]; }
  const LatticePoint& lattice_point(int dof) const { return lattice_[dof]; }
  /// Lattice level: one cell of this level spans `degree` lattice units.
  int lattice_level() const { return lattice_level_; }

 private:
  int k_ = 1;
  int lattice_level_ = 0;
  std::vector<CellId> cells_;
  std::unordered_map<CellId, int, CellIdHash> index_;
  std::vector<int> cell_dofs_;
  std::vector<Vec3> lower_;
  std::vector<double> size_;
  std::vector<Vec3> points_;
  std::vector<LatticePoint> lattice_;
};

struct ConstraintEntry {
  int master = 0;
  double coefficient = 0.0;
};

/// Hanging-node constraints u_d = sum c_m u_m, closed under substitution so
/// no master is itself constrained. Also provides the condensed numbering of
/// the unconstrained dofs.
class ConstraintSet {
 public:
  /// Throws std::invalid_argument for an unbalanced mesh.
  static ConstraintSet build(const OctreeMesh& mesh, const DofMap& dofs);

  std::size_t n_dofs() const { return free_index_.size(); }
  std::size_t n_constrained() const { return n_dofs() - n_free_; }
  std::size_t n_free() const { return n_free_; }
  bool is_constrained(int dof) const { return free_index_[dof] < 0; }
  /// Condensed index of an unconstrained dof, -1 for constrained ones.
  int free_index(int dof) const { return free_index_[dof]; }
  std::span<const ConstraintEntry> masters(int dof) const;

  /// Overwrite constrained entries of a full dof vector from their masters.
  void distribute(std::span<double> values) const;
  /// Full dof vector from condensed unknowns.
  std::vector<double> expand(std::span<const double> free_values) const;

 private:
  std::vector<int> free_index_;
  std::size_t n_free_ = 0;
  std::unordered_map<int, std::vector<ConstraintEntry>> constraints_;
};

/// Basis values, physical gradients and Hessians of one cell's local basis.
struct ShapeValues {
  int n = 0;
  std::array<double, kMaxNodes> value{};
  std::array<Vec3, kMaxNodes> grad;
  std::array<Mat3, kMaxNodes> hess;
};

/// Evaluate the local basis of cell `ci` at a physical point. Throws
/// std::out_of_range if the point is outside the cell (1e-12 relative slack).
void evaluate_shapes(const DofMap& dofs, std::size_t ci, const Vec3& x, ShapeValues& out,
                     bool with_hessians = true);
ShapeValues evaluate_shapes(const DofMap& dofs, std::size_t ci, const Vec3& x);

/// Interpolate `f` at the support points and apply the constraints.
std::vector<double> interpolate(const DofMap& dofs, const ConstraintSet& constraints, const ScalarField& f);

/// Value/gradient/Hessian of a full dof vector restricted to cell `ci`.
CellPolynomial cell_function(const DofMap& dofs, std::size_t ci, std::span<const double> values);

}  // namespace tracefem
