#pragma once

#include "tracefem/estimator.hpp"
#include "tracefem/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tracefem {

/// Manufactured solution on the unit sphere, u = sin^lambda(theta) sin(phi),
/// extended off the surface through p(x) = x / |x|.
class ManufacturedCase {
 public:
  static constexpr double pole_guard = 1e-12;

  /// Throws ConfigError unless 0 < lambda <= 1.
  explicit ManufacturedCase(double lambda);

  double lambda() const { return lambda_; }
  static Vec3 project(const Vec3& x);
  /// Throws std::invalid_argument at the origin.
  double u(const Vec3& x) const;
  /// Throws std::domain_error within pole_guard of the poles.
  double f(const Vec3& x) const;
  /// Tangential gradient of u at p(x), as a 3-vector.
  Vec3 grad_u(const Vec3& x) const;

 private:
  double lambda_;
};

double sphere_level_set(const Vec3& x);

struct SurfaceErrors {
  double l2 = 0.0;
  double h1 = 0.0;
  std::vector<double> cell_h1_sq;  // squared gradient error per DofMap cell
};

SurfaceErrors surface_errors(const Discretization& space, std::span<const double> u, const ManufacturedCase& mc);

struct EfficiencyIndexes {
  double I1 = 0.0, I2 = 0.0, I3 = 0.0;
  int skipped = 0;  // cells with a vanishing error denominator
  bool defined = false;
};

/// Whether Gamma_h crosses the face rectangle.
bool face_intersected(const Discretization& space, int face);

EfficiencyIndexes efficiency_indexes(const Discretization& space, const IndicatorSet& indicators,
                                     const SurfaceErrors& errors);

enum class RefinementMode { uniform, adaptive };

struct RunConfig {
  int degree = 1;
  StabilizationConfig stab;
  std::optional<IndicatorWeights> weights;  // defaults follow the stabilization kind
  double lambda = 1.0;
  double theta = 0.5;
  RefinementMode mode = RefinementMode::adaptive;
  int cycles = 5;
  int n0 = 8;
  double domain_half_width = 2.0;
  SolverOptions solver;
  std::string out_path;  // CSV, empty for none
  std::string vtk_dir;   // empty for none

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

struct ConvergenceRecord {
  int cycle = 0;
  std::size_t dofs = 0;
  double l2_error = 0.0;
  double h1_error = 0.0;
  double estimator = 0.0;
  double I1 = 0.0, I2 = 0.0, I3 = 0.0;
  int cg_iters = 0;
  double wall_seconds = 0.0;
};

/// State handed to a run observer after each cycle's estimate, before refinement.
struct CycleView {
  const ConvergenceRecord& record;
  const OctreeMesh& mesh;
  const Discretization& space;
  std::span<const double> solution;
  const IndicatorSet& indicators;
  const std::vector<CellId>& marked;
};

using CycleObserver = std::function<void(const CycleView&)>;

std::string csv_header();
std::string csv_row(const ConvergenceRecord& r);

/// Solve-estimate-mark-refine loop. Throws SolverError when CG does not
/// converge and GeometryError on a degenerate cut; the CSV keeps the rows of
/// the completed cycles.
std::vector<ConvergenceRecord> run(const RunConfig& config, const CycleObserver& observer = {});

}  // namespace tracefem
