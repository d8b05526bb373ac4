#pragma once

#include "tracefem/assembly.hpp"

#include <span>
#include <vector>

namespace tracefem {

struct IndicatorWeights {
  double alpha_r = 1.0;
  double alpha_e = 1.0;
  double alpha_s = 1.0;

  /// (1, 1, 1) for the normal-gradient stabilization, (1, 0, 1) for face jumps.
  static IndicatorWeights defaults_for(StabilizationKind kind);
};

struct CellIndicator {
  CellId cell;
  double eta_R2 = 0.0;
  double eta_F2 = 0.0;
  double stab_energy = 0.0;
  double eta2 = 0.0;
};

CellIndicator combine(const CellId& cell, double eta_R, double eta_F, double stab_energy, const IndicatorWeights& w);

struct IndicatorSet {
  std::vector<CellIndicator> cells;  // aligned with the DofMap cells
  double global = 0.0;               // sqrt of the sum of eta^2
};

/// h_S ||f + Delta_{Gamma_h} u_h - u_h|| over the cut of DofMap cell `ci`.
double eta_residual(const Discretization& space, std::span<const double> u, std::size_t ci, const ScalarField& f);

/// Discrete Laplace-Beltrami operator of the cell's polynomial `u` at a point
/// of the cut: tr(P H_u) - (n . grad u) tr(grad n_h).
double surface_laplacian(const Discretization& space, const CellPolynomial& u, std::size_t ci, const Vec3& x);

/// L2 norm of the gradient jump over the cell's faces shared with other cut cells.
double eta_facejump(const Discretization& space, std::span<const double> u, std::size_t ci);

IndicatorSet total_indicator(const Discretization& space, std::span<const double> u, const ScalarField& f,
                             const IndicatorWeights& weights, const StabilizationConfig& stab);

/// Shortest prefix of the cells sorted by eta^2 (descending, ties by CellId)
/// whose sum strictly exceeds theta times the total.
std::vector<CellId> dorfler_mark(std::span<const CellIndicator> indicators, double theta);

}  // namespace tracefem
