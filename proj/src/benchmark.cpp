#include "tracefem/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tracefem {

ManufacturedCase::ManufacturedCase(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
}

Vec3 ManufacturedCase::project(const Vec3& x) {
  const double r = x.norm();
  if (r == 0.0) throw std::invalid_argument("closest point undefined at the origin");
  return x / r;
}

double ManufacturedCase::u(const Vec3& x) const {
  const Vec3 p = project(x);
  const double rho = std::hypot(p[0], p[1]);
  if (rho == 0.0) return 0.0;
  return std::pow(rho, lambda_ - 1.0) * p[1];
}

double ManufacturedCase::f(const Vec3& x) const {
  const Vec3 p = project(x);
  const double rho = std::hypot(p[0], p[1]);
  if (rho <= pole_guard) throw std::domain_error("load evaluated at a pole");
  const double l = lambda_;
  return (1.0 + l + l * l) * std::pow(rho, l - 1.0) * p[1] + (1.0 - l * l) * std::pow(rho, l - 3.0) * p[1];
}

Vec3 ManufacturedCase::grad_u(const Vec3& x) const {
  const Vec3 p = project(x);
  const double s = p[0] * p[0] + p[1] * p[1];
  if (s == 0.0) throw std::domain_error("gradient evaluated at a pole");
  const double l = lambda_;
  // u is the restriction of the lambda-homogeneous U = s^((l-1)/2) y
  const double a = std::pow(s, 0.5 * (l - 1.0));
  const double b = (l - 1.0) * std::pow(s, 0.5 * (l - 3.0));
  const Vec3 gU(b * p[0] * p[1], b * p[1] * p[1] + a, 0.0);
  return gU - l * (a * p[1]) * p;
}

double sphere_level_set(const Vec3& x) { return x.squaredNorm() - 1.0; }

SurfaceErrors surface_errors(const Discretization& space, std::span<const double> u, const ManufacturedCase& mc) {
  SurfaceErrors e;
  const auto& dofs = space.dofs();
  e.cell_h1_sq.assign(dofs.n_cells(), 0.0);
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) {
    const CellId& cell = dofs.cell(ci);
    const auto& phi = space.field().on_cell(cell);
    const auto uc = cell_function(dofs, ci, u);
    const auto& rule = space.surface_rule(ci);
    double cell_h1 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3& x = rule.points[q];
      double v;
      Vec3 g, n;
      uc.evaluate(x, &v, &g, nullptr);
      LevelSetField::normal_and_jacobian(phi, cell, x, n, nullptr);
      const Vec3 tg = g - n.dot(g) * n;
      const double dv = v - mc.u(x);
      l2 += rule.weights[q] * dv * dv;
      cell_h1 += rule.weights[q] * (tg - mc.grad_u(x)).squaredNorm();
    }
    e.cell_h1_sq[ci] = cell_h1;
    h1 += cell_h1;
  }
  e.l2 = std::sqrt(l2);
  e.h1 = std::sqrt(h1);
  return e;
}

bool face_intersected(const Discretization& space, int fi) {
  const FaceId& face = space.faces()[fi];
  const auto& phi = space.field().on_cell(face.minus_cell);
  const Vec3 lo = phi.to_reference(face.lower), hi = phi.to_reference(face.upper);
  if (phi.bernstein(lo, hi).strict_sign() != 0) return false;
  const int a1 = (face.axis + 1) % 3, a2 = (face.axis + 2) % 3;
  const int m = 4 * space.degree() + 1;
  bool neg = false, pos = false;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) {
      Vec3 x = face.lower;
      x[a1] += (face.upper[a1] - face.lower[a1]) * i / m;
      x[a2] += (face.upper[a2] - face.lower[a2]) * j / m;
      const double v = phi.value(x);
      neg = neg || v < 0.0;
      pos = pos || v > 0.0;
      if (neg && pos) return true;
    }
  return false;
}

EfficiencyIndexes efficiency_indexes(const Discretization& space, const IndicatorSet& indicators,
                                     const SurfaceErrors& errors) {
  constexpr double tiny = 1e-14;
  const auto& dofs = space.dofs();
  const std::size_t nc = dofs.n_cells();
  std::vector<int> crossed(space.faces().size(), -1);
  EfficiencyIndexes out;
  bool any = false;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    const double eta = std::sqrt(indicators.cells[ci].eta2);
    const double own = errors.cell_h1_sq[ci];

    double vertex_patch = 0.0;
    for (const auto& c : space.mesh().cells_touching(dofs.cell(ci))) {
      const int cj = dofs.cell_index(c);
      if (cj >= 0) vertex_patch += errors.cell_h1_sq[cj];
    }
    double face_patch = own;
    for (int fi : space.cell_faces(ci)) {
      if (crossed[fi] < 0) crossed[fi] = face_intersected(space, fi) ? 1 : 0;
      if (!crossed[fi]) continue;
      const int other = space.face_minus(fi) == static_cast<int>(ci) ? space.face_plus(fi) : space.face_minus(fi);
      face_patch += errors.cell_h1_sq[other];
    }

    if (std::sqrt(own) < tiny || std::sqrt(vertex_patch) < tiny || std::sqrt(face_patch) < tiny) {
      ++out.skipped;
      continue;
    }
    any = true;
    out.I1 = std::max(out.I1, eta / std::sqrt(vertex_patch));
    out.I2 = std::max(out.I2, eta / std::sqrt(face_patch));
    out.I3 = std::max(out.I3, std::sqrt(indicators.cells[ci].eta_R2) / std::sqrt(own));
  }
  out.defined = any;
  if (!any) out.I1 = out.I2 = out.I3 = std::numeric_limits<double>::quiet_NaN();
  return out;
}

void RunConfig::validate() const {
  if (degree != 1 && degree != 2) throw ConfigError("degree must be 1 or 2");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (cycles < 1) throw ConfigError("cycles must be at least 1");
  if (n0 < 1) throw ConfigError("n0 must be at least 1");
  if (!(domain_half_width > 1.0)) throw ConfigError("domain must contain the unit sphere");
  if (!(solver.rel_tol > 0.0) || solver.max_iter < 1) throw ConfigError("invalid solver tolerances");
  stab.validate();
  if (weights && (weights->alpha_r < 0.0 || weights->alpha_e < 0.0 || weights->alpha_s < 0.0))
    throw ConfigError("indicator weights must be non-negative");
}

std::string csv_header() { return "cycle,dofs,l2_error,h1_error,estimator,I1,I2,I3,cg_iters,wall_seconds"; }

std::string csv_row(const ConvergenceRecord& r) {
  std::ostringstream os;
  os << std::setprecision(10) << r.cycle << ',' << r.dofs << ',' << r.l2_error << ',' << r.h1_error << ','
     << r.estimator << ',' << r.I1 << ',' << r.I2 << ',' << r.I3 << ',' << r.cg_iters << ',' << std::setprecision(4)
     << r.wall_seconds;
  return os.str();
}

namespace {

void write_cycle_vtk(const RunConfig& cfg, int cycle, const OctreeMesh& mesh, const IndicatorSet& ind,
                     const SurfaceErrors& err) {
  std::filesystem::create_directories(cfg.vtk_dir);
  std::unordered_map<CellId, double, CellIdHash> eta, h1;
  for (std::size_t i = 0; i < ind.cells.size(); ++i) {
    eta.emplace(ind.cells[i].cell, std::sqrt(ind.cells[i].eta2));
    h1.emplace(ind.cells[i].cell, std::sqrt(err.cell_h1_sq[i]));
  }
  std::ostringstream name;
  name << "cycle_" << std::setw(3) << std::setfill('0') << cycle << ".vtk";
  write_vtk((std::filesystem::path(cfg.vtk_dir) / name.str()).string(), mesh,
            {{"indicator", std::move(eta)}, {"h1_error", std::move(h1)}});
}

// previous solution evaluated on the new cells; zero where no ancestor was cut
std::vector<double> transfer(const DofMap& from, std::span<const double> u, const DofMap& to) {
  std::vector<double> out(to.n_dofs(), 0.0);
  for (std::size_t ci = 0; ci < to.n_cells(); ++ci) {
    const CellId& c = to.cell(ci);
    int src = from.cell_index(c);
    if (src < 0 && c.level > 0) src = from.cell_index(c.parent());
    if (src < 0) continue;
    const auto poly = cell_function(from, static_cast<std::size_t>(src), u);
    for (int d : to.cell_dofs(ci)) out[d] = poly.value(to.support_point(d));
  }
  return out;
}

}  // namespace

std::vector<ConvergenceRecord> run(const RunConfig& cfg, const CycleObserver& observer) {
  cfg.validate();
  const ManufacturedCase mc(cfg.lambda);
  const IndicatorWeights weights = cfg.weights.value_or(IndicatorWeights::defaults_for(cfg.stab.kind));
  auto mesh = OctreeMesh::create_uniform(Vec3::Constant(-cfg.domain_half_width), Vec3::Constant(cfg.domain_half_width),
                                         cfg.n0);
  SurfaceRuleOptions qopt;
  qopt.order = cfg.degree + 1;
  qopt.avoid_points = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
  const ScalarField load = [&mc](const Vec3& x) { return mc.f(x); };

  std::ofstream csv;
  if (!cfg.out_path.empty()) {
    csv.open(cfg.out_path);
    if (!csv) throw ConfigError("cannot open output file " + cfg.out_path);
    csv << csv_header() << '\n' << std::flush;
  }

  std::vector<ConvergenceRecord> records;
  std::optional<DofMap> prev_dofs;
  std::vector<double> prev_u;
  for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto field = LevelSetField::interpolate(sphere_level_set, mesh, cfg.degree);
    const auto cuts = classify(field, mesh, qopt);
    const auto space = Discretization::build(mesh, field, cuts, cfg.degree);
    const auto system = assemble(space, cfg.stab, load);
    // warm start from the previous cycle
    const auto guess = prev_dofs ? transfer(*prev_dofs, prev_u, space.dofs()) : std::vector<double>{};
    const auto sol = solve(system, cfg.solver, guess);
    if (!sol.report.converged) {
      std::ostringstream msg;
      msg << "CG did not converge in cycle " << cycle << " after " << sol.report.iterations
          << " iterations (relative residual " << std::scientific << sol.report.relative_residual << ")";
      throw SolverError(msg.str());
    }
    const auto err = surface_errors(space, sol.values, mc);
    const auto ind = total_indicator(space, sol.values, load, weights, cfg.stab);
    const auto eff = efficiency_indexes(space, ind, err);
    const auto marked =
        cfg.mode == RefinementMode::adaptive ? dorfler_mark(ind.cells, cfg.theta) : cuts.cut_cells;

    ConvergenceRecord rec;
    rec.cycle = cycle;
    rec.dofs = space.dofs().n_dofs();
    rec.l2_error = err.l2;
    rec.h1_error = err.h1;
    rec.estimator = ind.global;
    rec.I1 = eff.I1;
    rec.I2 = eff.I2;
    rec.I3 = eff.I3;
    rec.cg_iters = sol.report.iterations;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records.push_back(rec);

    if (csv.is_open()) csv << csv_row(rec) << '\n' << std::flush;
    if (!cfg.vtk_dir.empty()) write_cycle_vtk(cfg, cycle, mesh, ind, err);
    if (observer) observer(CycleView{records.back(), mesh, space, sol.values, ind, marked});
    if (cycle + 1 < cfg.cycles) {
      prev_dofs = space.dofs();
      prev_u = sol.values;
      mesh.refine_with_closure(marked);
    }
  }
  return records;
}

}  // namespace tracefem
