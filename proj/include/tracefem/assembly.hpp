#pragma once

#include "tracefem/fe_space.hpp"
#include "tracefem/levelset.hpp"
#include "tracefem/sparse.hpp"

#include <span>
#include <string>
#include <vector>

namespace tracefem {

enum class StabilizationKind { nv, jf };

StabilizationKind parse_stabilization(const std::string& name);
std::string to_string(StabilizationKind kind);

struct StabilizationConfig {
  StabilizationKind kind = StabilizationKind::nv;
  double rho_scale = 10.0;  // normal-gradient volume term uses rho_scale / h_S
  double sigma_F = 10.0;
  double sigma_Gamma = 10.0;
  double sigma_F_tilde = 10.0;
  double sigma_Gamma_tilde = 10.0;

  /// Throws ConfigError on negative or non-finite parameters.
  void validate() const;
};

/// Everything tied to one mesh state: the active cut cells, the Q_k space on
/// them with hanging-node constraints, and the internal faces between cut
/// cells. The mesh, field and classification must outlive it.
class Discretization {
 public:
  static Discretization build(const OctreeMesh& mesh, const LevelSetField& field, const CutClassification& cuts,
                              int degree);

  const OctreeMesh& mesh() const { return *mesh_; }
  const LevelSetField& field() const { return *field_; }
  const CutClassification& cuts() const { return *cuts_; }
  const DofMap& dofs() const { return dofs_; }
  const ConstraintSet& constraints() const { return constraints_; }
  int degree() const { return dofs_.degree(); }
  /// Gauss points per axis for cell, face and surface rules.
  int quadrature_order() const { return degree() + 1; }

  const std::vector<FaceId>& faces() const { return faces_; }
  /// Indices into faces() of the faces bounding DofMap cell `ci`.
  std::span<const int> cell_faces(std::size_t ci) const {
    return {cell_face_idx_.data() + cell_face_ptr_[ci], static_cast<std::size_t>(cell_face_ptr_[ci + 1] - cell_face_ptr_[ci])};
  }
  /// DofMap cell indices on the two sides of face `f`.
  int face_minus(int f) const { return face_minus_[f]; }
  int face_plus(int f) const { return face_plus_[f]; }
  const SurfaceQuadrature& surface_rule(std::size_t ci) const { return *rules_[ci]; }

  /// Free-dof expansion of a dof: itself, or the masters of a constrained dof.
  std::span<const int> expansion_free(int dof) const {
    return {exp_free_.data() + exp_ptr_[dof], static_cast<std::size_t>(exp_ptr_[dof + 1] - exp_ptr_[dof])};
  }
  std::span<const double> expansion_coef(int dof) const {
    return {exp_coef_.data() + exp_ptr_[dof], static_cast<std::size_t>(exp_ptr_[dof + 1] - exp_ptr_[dof])};
  }

 private:
  const OctreeMesh* mesh_ = nullptr;
  const LevelSetField* field_ = nullptr;
  const CutClassification* cuts_ = nullptr;
  DofMap dofs_;
  ConstraintSet constraints_;
  std::vector<FaceId> faces_;
  std::vector<int> face_minus_, face_plus_;
  std::vector<int> cell_face_ptr_, cell_face_idx_;
  std::vector<const SurfaceQuadrature*> rules_;
  std::vector<int> exp_ptr_, exp_free_;
  std::vector<double> exp_coef_;
};

/// Condensed system over the unconstrained dofs.
struct TraceSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  const Discretization* space = nullptr;
};

enum AssemblyTerms : unsigned { surface_terms = 1u, stabilization_terms = 2u, all_terms = 3u };

/// Surface bilinear form, stabilization and load. `f` may be empty for a
/// zero load. Throws GeometryError for a degenerate normal in a cut cell.
TraceSystem assemble(const Discretization& space, const StabilizationConfig& stab, const ScalarField& f,
                     unsigned terms = all_terms);

/// Cell-local stabilization energy s*_S(u, u) of a full dof vector. Summed
/// over all cut cells it equals u^T S u of the assembled stabilization.
double cell_stab_energy(const Discretization& space, const StabilizationConfig& stab, std::span<const double> u,
                        std::size_t ci);

}  // namespace tracefem
