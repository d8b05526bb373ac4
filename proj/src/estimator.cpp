#include "tracefem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tracefem {

IndicatorWeights IndicatorWeights::defaults_for(StabilizationKind kind) {
  if (kind == StabilizationKind::jf) return {1.0, 0.0, 1.0};
  return {1.0, 1.0, 1.0};
}

CellIndicator combine(const CellId& cell, double eta_R, double eta_F, double stab_energy, const IndicatorWeights& w) {
  CellIndicator c;
  c.cell = cell;
  c.eta_R2 = eta_R * eta_R;
  c.eta_F2 = eta_F * eta_F;
  c.stab_energy = stab_energy;
  c.eta2 = w.alpha_r * c.eta_R2 + w.alpha_e * c.eta_F2 + w.alpha_s * c.stab_energy;
  return c;
}

double surface_laplacian(const Discretization& space, const CellPolynomial& u, std::size_t ci, const Vec3& x) {
  const CellId& cell = space.dofs().cell(ci);
  Vec3 n, g;
  Mat3 jn, hu;
  LevelSetField::normal_and_jacobian(space.field().on_cell(cell), cell, x, n, &jn);
  u.evaluate(x, nullptr, &g, &hu);
  const Mat3 p = Mat3::Identity() - n * n.transpose();
  return (p * hu).trace() - n.dot(g) * jn.trace();
}

double eta_residual(const Discretization& space, std::span<const double> u, std::size_t ci, const ScalarField& f) {
  const auto uc = cell_function(space.dofs(), ci, u);
  const auto& rule = space.surface_rule(ci);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec3& x = rule.points[q];
    const double r = (f ? f(x) : 0.0) + surface_laplacian(space, uc, ci, x) - uc.value(x);
    s += rule.weights[q] * r * r;
  }
  return space.dofs().cell_size(ci) * std::sqrt(s);
}

double eta_facejump(const Discretization& space, std::span<const double> u, std::size_t ci) {
  double s = 0.0;
  for (int fi : space.cell_faces(ci)) {
    const FaceId& face = space.faces()[fi];
    const auto um = cell_function(space.dofs(), static_cast<std::size_t>(space.face_minus(fi)), u);
    const auto up = cell_function(space.dofs(), static_cast<std::size_t>(space.face_plus(fi)), u);
    const auto rule = face_rule(face, space.quadrature_order());
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      s += rule.weights[q] * (up.gradient(rule.points[q]) - um.gradient(rule.points[q])).squaredNorm();
  }
  return std::sqrt(s);
}

IndicatorSet total_indicator(const Discretization& space, std::span<const double> u, const ScalarField& f,
                             const IndicatorWeights& weights, const StabilizationConfig& stab) {
  IndicatorSet out;
  const std::size_t nc = space.dofs().n_cells();
  out.cells.reserve(nc);
  double total = 0.0;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    const double er = eta_residual(space, u, ci, f);
    const double ef = weights.alpha_e != 0.0 ? eta_facejump(space, u, ci) : 0.0;
    const double se = weights.alpha_s != 0.0 ? cell_stab_energy(space, stab, u, ci) : 0.0;
    out.cells.push_back(combine(space.dofs().cell(ci), er, ef, se, weights));
    total += out.cells.back().eta2;
  }
  out.global = std::sqrt(total);
  return out;
}

std::vector<CellId> dorfler_mark(std::span<const CellIndicator> indicators, double theta) {
  if (indicators.empty()) throw std::invalid_argument("dorfler_mark: empty indicator list");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("dorfler_mark: theta must lie in (0, 1)");
  std::vector<std::size_t> order(indicators.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (indicators[a].eta2 != indicators[b].eta2) return indicators[a].eta2 > indicators[b].eta2;
    return indicators[a].cell < indicators[b].cell;
  });
  double total = 0.0;
  for (const auto& c : indicators) total += c.eta2;
  const double target = theta * total;
  std::vector<CellId> marked;
  double acc = 0.0;
  for (std::size_t i : order) {
    marked.push_back(indicators[i].cell);
    acc += indicators[i].eta2;
    if (acc > target) break;
  }
  return marked;
}

}  // namespace tracefem
