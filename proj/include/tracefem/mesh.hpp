#pragma once

#include "tracefem/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tracefem {

using CellSet = std::unordered_set<CellId, CellIdHash>;

struct CellGeometry {
  Vec3 lower;
  Vec3 center;
  double size = 0.0;
  std::array<Vec3, 8> vertices;
};

/// A finest-level face between two active cells. `minus_cell` lies on the
/// lower side along `axis`. The rectangle is the face of the finer cell.
struct FaceId {
  CellId minus_cell;
  CellId plus_cell;
  int axis = 0;
  Vec3 lower;
  Vec3 upper;
  double h_F = 0.0;
};

/// Balanced octree over a cube, refined from an n0^3 uniform grid. Only face
/// neighbours are subject to the 2:1 rule.
class OctreeMesh {
 public:
  static constexpr int max_supported_level = 24;

  static OctreeMesh create_uniform(const Vec3& lower, const Vec3& upper, int n0);

  const Vec3& domain_lower() const { return lower_; }
  double domain_length() const { return length_; }
  int initial_cells_per_axis() const { return n0_; }
  int max_level() const { return max_level_; }
  double cell_size(int level) const;

  std::size_t num_active() const { return active_.size(); }
  bool is_active(const CellId& id) const { return active_.contains(id); }
  /// Active cells in CellId order.
  std::vector<CellId> active_cells() const;

  /// Throws std::out_of_range for an inactive id.
  CellGeometry cell_geometry(const CellId& id) const;
  Vec3 cell_lower(const CellId& id) const;

  /// Replace every marked cell by its children and refine further until all
  /// face-adjacent cells differ by at most one level.
  void refine_with_closure(std::span<const CellId> marked);

  /// Active cells across one face of `id` (side is -1 or +1). Empty on the
  /// domain boundary.
  std::vector<CellId> face_neighbors(const CellId& id, int axis, int side) const;

  /// The active cell covering the region of `region`, if it is not subdivided.
  std::optional<CellId> active_covering(const CellId& region) const;

  /// Active cell containing the lattice cube `anchor` at `level`, searching
  /// levels outward from `hint_level`. The cube must lie in the domain.
  CellId locate(int level, const std::array<std::int64_t, 3>& anchor, int hint_level) const;
  std::optional<CellId> locate(const Vec3& x) const;

  /// All finest-level faces whose two adjacent cells are both in `cells`.
  std::vector<FaceId> internal_faces(const CellSet& cells) const;

  /// Active cells whose closure intersects the closure of `id` (id included).
  std::vector<CellId> cells_touching(const CellId& id) const;

  bool is_balanced() const;
  bool in_domain(const CellId& id) const;

 private:
  void refine_one(const CellId& id, std::vector<CellId>& queue);
  void collect_facing_descendants(const CellId& region, int axis, int side,
                                  std::vector<CellId>& out) const;

  Vec3 lower_ = Vec3::Zero();
  double length_ = 1.0;
  int n0_ = 1;
  int max_level_ = 0;
  CellSet active_;
};

/// Legacy-VTK unstructured grid of all active cells with cell scalars.
void write_vtk(const std::string& path, const OctreeMesh& mesh,
               const std::vector<std::pair<std::string, std::unordered_map<CellId, double, CellIdHash>>>&
                   cell_fields);

}  // namespace tracefem
