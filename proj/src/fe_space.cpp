#include "tracefem/fe_space.hpp"

#include <algorithm>
#include <cmath>

namespace tracefem {

DofMap DofMap::build(const OctreeMesh& mesh, std::span<const CellId> cells, int degree) {
  if (degree < 1 || degree > kMaxDegree) throw ConfigError("DofMap: degree must be 1 or 2");
  DofMap map;
  map.k_ = degree;
  map.lattice_level_ = mesh.max_level();
  map.cells_.assign(cells.begin(), cells.end());
  std::sort(map.cells_.begin(), map.cells_.end());
  map.cells_.erase(std::unique(map.cells_.begin(), map.cells_.end()), map.cells_.end());

  const int n = degree + 1;
  const int L = map.lattice_level_;
  const double unit = mesh.cell_size(L) / degree;
  const Vec3& origin = mesh.domain_lower();
  std::unordered_map<LatticePoint, int, LatticePointHash> lookup;
  lookup.reserve(map.cells_.size() * 4);
  map.cell_dofs_.reserve(map.cells_.size() * nodes_per_cell(degree));
  map.lower_.reserve(map.cells_.size());
  map.size_.reserve(map.cells_.size());

  for (std::size_t ci = 0; ci < map.cells_.size(); ++ci) {
    const CellId& c = map.cells_[ci];
    if (!mesh.is_active(c)) throw std::invalid_argument("DofMap: inactive cell " + c.str());
    map.index_.emplace(c, static_cast<int>(ci));
    map.lower_.push_back(mesh.cell_lower(c));
    map.size_.push_back(mesh.cell_size(c.level));
    const std::int64_t spacing = std::int64_t{1} << (L - c.level);
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          LatticePoint p;
          const int id[3] = {i, j, l};
          for (int a = 0; a < 3; ++a) p.c[a] = (c.anchor[a] * std::int64_t{degree} + id[a]) * spacing;
          auto [it, inserted] = lookup.try_emplace(p, static_cast<int>(map.points_.size()));
          if (inserted) {
            map.lattice_.push_back(p);
            map.points_.push_back(origin + unit * Vec3(static_cast<double>(p.c[0]), static_cast<double>(p.c[1]),
                                                       static_cast<double>(p.c[2])));
          }
          map.cell_dofs_.push_back(it->second);
        }
  }
  return map;
}

int DofMap::cell_index(const CellId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

ConstraintSet ConstraintSet::build(const OctreeMesh& mesh, const DofMap& dofs) {
  if (!mesh.is_balanced()) throw std::invalid_argument("ConstraintSet: mesh is not 2:1 balanced");
  if (dofs.lattice_level() != mesh.max_level())
    throw std::invalid_argument("ConstraintSet: DofMap was built for a different mesh");

  const int k = dofs.degree();
  const int L = dofs.lattice_level();
  const int unit_level = L + (k == 2 ? 1 : 0);
  const std::int64_t extent = static_cast<std::int64_t>(mesh.initial_cells_per_axis()) * k << L;

  std::vector<int> owner_level(dofs.n_dofs(), -1);
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci)
    for (int d : dofs.cell_dofs(ci))
      if (owner_level[d] < 0) owner_level[d] = dofs.cell(ci).level;

  // Direct constraints against the coarsest cell whose boundary holds the
  // point without having it as a node.
  std::unordered_map<int, std::vector<ConstraintEntry>> direct;
  std::vector<CellId> around;
  for (int dof = 0; dof < static_cast<int>(dofs.n_dofs()); ++dof) {
    const LatticePoint& p = dofs.lattice_point(dof);
    around.clear();
    for (int oct = 0; oct < 8; ++oct) {
      std::array<std::int64_t, 3> q{};
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        q[a] = p.c[a] - (((oct >> a) & 1) ? 0 : 1);
        inside = inside && q[a] >= 0 && q[a] < extent;
      }
      if (!inside) continue;
      const CellId c = mesh.locate(unit_level, q, owner_level[dof]);
      if (dofs.cell_index(c) >= 0 && std::find(around.begin(), around.end(), c) == around.end())
        around.push_back(c);
    }
    const CellId* coarsest = nullptr;
    for (const auto& c : around) {
      const std::int64_t spacing = std::int64_t{1} << (L - c.level);
      bool node = true;
      for (int a = 0; a < 3; ++a) node = node && (p.c[a] % spacing == 0);
      if (!node && (!coarsest || c < *coarsest)) coarsest = &c;
    }
    if (!coarsest) continue;

    const CellId& D = *coarsest;
    const std::int64_t spacing = std::int64_t{1} << (L - D.level);
    const double side = static_cast<double>(spacing * k);
    std::array<Basis1D, 3> basis;
    for (int a = 0; a < 3; ++a) {
      const double rel = static_cast<double>(p.c[a] - D.anchor[a] * std::int64_t{k} * spacing);
      basis[a] = lagrange_1d(k, rel / side);
    }
    const auto master_dofs = dofs.cell_dofs(static_cast<std::size_t>(dofs.cell_index(D)));
    std::vector<ConstraintEntry> entries;
    const int n = k + 1;
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double w = basis[0].v[i] * basis[1].v[j] * basis[2].v[l];
          if (std::abs(w) > 1e-14) entries.push_back({master_dofs[i + n * (j + n * l)], w});
        }
    direct.emplace(dof, std::move(entries));
  }

  // Close under substitution; chains terminate because masters always come
  // from strictly coarser cells.
  ConstraintSet cs;
  std::unordered_map<int, std::vector<ConstraintEntry>> resolved;
  std::function<const std::vector<ConstraintEntry>&(int)> resolve = [&](int dof) -> const std::vector<ConstraintEntry>& {
    if (auto it = resolved.find(dof); it != resolved.end()) return it->second;
    std::unordered_map<int, double> acc;
    for (const auto& e : direct.at(dof)) {
      if (direct.contains(e.master)) {
        for (const auto& f : resolve(e.master)) acc[f.master] += e.coefficient * f.coefficient;
      } else {
        acc[e.master] += e.coefficient;
      }
    }
    std::vector<ConstraintEntry> out;
    for (const auto& [m, c] : acc)
      if (std::abs(c) > 1e-14) out.push_back({m, c});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.master < b.master; });
    return resolved.emplace(dof, std::move(out)).first->second;
  };
  for (const auto& [dof, entries] : direct) resolve(dof);
  cs.constraints_ = std::move(resolved);

  cs.free_index_.assign(dofs.n_dofs(), -1);
  int next = 0;
  for (int dof = 0; dof < static_cast<int>(dofs.n_dofs()); ++dof)
    if (!cs.constraints_.contains(dof)) cs.free_index_[dof] = next++;
  cs.n_free_ = static_cast<std::size_t>(next);
  return cs;
}

std::span<const ConstraintEntry> ConstraintSet::masters(int dof) const {
  auto it = constraints_.find(dof);
  if (it == constraints_.end()) return {};
  return it->second;
}

void ConstraintSet::distribute(std::span<double> values) const {
  for (const auto& [dof, entries] : constraints_) {
    double v = 0.0;
    for (const auto& e : entries) v += e.coefficient * values[e.master];
    values[dof] = v;
  }
}

std::vector<double> ConstraintSet::expand(std::span<const double> free_values) const {
  std::vector<double> full(n_dofs(), 0.0);
  for (std::size_t d = 0; d < full.size(); ++d)
    if (free_index_[d] >= 0) full[d] = free_values[free_index_[d]];
  distribute(full);
  return full;
}

void evaluate_shapes(const DofMap& dofs, std::size_t ci, const Vec3& x, ShapeValues& out, bool with_hessians) {
  const double h = dofs.cell_size(ci);
  const Vec3 t = (x - dofs.cell_lower(ci)) / h;
  for (int a = 0; a < 3; ++a)
    if (t[a] < -1e-12 || t[a] > 1.0 + 1e-12)
      throw std::out_of_range("evaluate_shapes: point outside cell " + dofs.cell(ci).str());
  const int k = dofs.degree();
  const int n = k + 1;
  const auto bx = lagrange_1d(k, t[0]), by = lagrange_1d(k, t[1]), bz = lagrange_1d(k, t[2]);
  const double ih = 1.0 / h, ih2 = ih * ih;
  out.n = nodes_per_cell(k);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int q = i + n * (j + n * l);
        out.value[q] = bx.v[i] * by.v[j] * bz.v[l];
        out.grad[q] = Vec3(bx.d1[i] * by.v[j] * bz.v[l], bx.v[i] * by.d1[j] * bz.v[l], bx.v[i] * by.v[j] * bz.d1[l]) * ih;
        if (with_hessians) {
          Mat3& H = out.hess[q];
          H(0, 0) = bx.d2[i] * by.v[j] * bz.v[l] * ih2;
          H(1, 1) = bx.v[i] * by.d2[j] * bz.v[l] * ih2;
          H(2, 2) = bx.v[i] * by.v[j] * bz.d2[l] * ih2;
          H(0, 1) = H(1, 0) = bx.d1[i] * by.d1[j] * bz.v[l] * ih2;
          H(0, 2) = H(2, 0) = bx.d1[i] * by.v[j] * bz.d1[l] * ih2;
          H(1, 2) = H(2, 1) = bx.v[i] * by.d1[j] * bz.d1[l] * ih2;
        }
      }
}

ShapeValues evaluate_shapes(const DofMap& dofs, std::size_t ci, const Vec3& x) {
  ShapeValues s;
  evaluate_shapes(dofs, ci, x, s, true);
  return s;
}

std::vector<double> interpolate(const DofMap& dofs, const ConstraintSet& constraints, const ScalarField& f) {
  std::vector<double> v(dofs.n_dofs());
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = f(dofs.support_point(static_cast<int>(d)));
  constraints.distribute(v);
  return v;
}

CellPolynomial cell_function(const DofMap& dofs, std::size_t ci, std::span<const double> values) {
  std::array<double, kMaxNodes> nodal{};
  const auto ids = dofs.cell_dofs(ci);
  for (std::size_t q = 0; q < ids.size(); ++q) nodal[q] = values[ids[q]];
  return CellPolynomial(dofs.degree(), dofs.cell_lower(ci), dofs.cell_size(ci),
                        std::span<const double>(nodal.data(), ids.size()));
}

}  // namespace tracefem
