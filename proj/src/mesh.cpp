#include "tracefem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

namespace tracefem {

std::string CellId::str() const {
  std::ostringstream os;
  os << "(level " << level << ", anchor " << anchor[0] << ',' << anchor[1] << ',' << anchor[2]
     << ')';
  return os.str();
}

OctreeMesh OctreeMesh::create_uniform(const Vec3& lower, const Vec3& upper, int n0) {
  if (n0 < 1) throw ConfigError("create_uniform: n0 must be at least 1");
  const Vec3 ext = upper - lower;
  const double len = ext[0];
  if (!(len > 0.0) || std::abs(ext[1] - len) > 1e-12 * len || std::abs(ext[2] - len) > 1e-12 * len)
    throw ConfigError("create_uniform: domain must be a cube with positive edge length");

  OctreeMesh mesh;
  mesh.lower_ = lower;
  mesh.length_ = len;
  mesh.n0_ = n0;
  mesh.active_.reserve(static_cast<std::size_t>(n0) * n0 * n0);
  for (int k = 0; k < n0; ++k)
    for (int j = 0; j < n0; ++j)
      for (int i = 0; i < n0; ++i) mesh.active_.insert(CellId{0, {i, j, k}});
  return mesh;
}

double OctreeMesh::cell_size(int level) const {
  return length_ / (static_cast<double>(n0_) * std::ldexp(1.0, level));
}

std::vector<CellId> OctreeMesh::active_cells() const {
  std::vector<CellId> out(active_.begin(), active_.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool OctreeMesh::in_domain(const CellId& id) const {
  if (id.level < 0) return false;
  const std::int64_t n = static_cast<std::int64_t>(n0_) << id.level;
  for (auto a : id.anchor)
    if (a < 0 || a >= n) return false;
  return true;
}

Vec3 OctreeMesh::cell_lower(const CellId& id) const {
  const double h = cell_size(id.level);
  return lower_ + h * Vec3(id.anchor[0], id.anchor[1], id.anchor[2]);
}

CellGeometry OctreeMesh::cell_geometry(const CellId& id) const {
  if (!is_active(id)) throw std::out_of_range("cell_geometry: inactive cell " + id.str());
  CellGeometry g;
  g.size = cell_size(id.level);
  g.lower = cell_lower(id);
  g.center = g.lower + Vec3::Constant(0.5 * g.size);
  for (int v = 0; v < 8; ++v)
    g.vertices[v] = g.lower + g.size * Vec3(v & 1, (v >> 1) & 1, (v >> 2) & 1);
  return g;
}

std::optional<CellId> OctreeMesh::active_covering(const CellId& region) const {
  for (int l = region.level; l >= 0; --l) {
    const int s = region.level - l;
    CellId c{l, {region.anchor[0] >> s, region.anchor[1] >> s, region.anchor[2] >> s}};
    if (active_.contains(c)) return c;
  }
  return std::nullopt;
}

CellId OctreeMesh::locate(int level, const std::array<std::int64_t, 3>& anchor,
                          int hint_level) const {
  const int top = std::min(level, max_level_);
  hint_level = std::clamp(hint_level, 0, top);
  for (int d = 0; d <= top; ++d) {
    const int candidates[2] = {hint_level - d, hint_level + d};
    for (int i = 0; i < (d == 0 ? 1 : 2); ++i) {
      const int l = candidates[i];
      if (l < 0 || l > top) continue;
      const int s = level - l;
      CellId c{l,
               {static_cast<std::int32_t>(anchor[0] >> s), static_cast<std::int32_t>(anchor[1] >> s),
                static_cast<std::int32_t>(anchor[2] >> s)}};
      if (active_.contains(c)) return c;
    }
  }
  throw std::out_of_range("locate: lattice cube outside the active mesh");
}

std::optional<CellId> OctreeMesh::locate(const Vec3& x) const {
  const double h = cell_size(max_level_);
  std::array<std::int64_t, 3> a{};
  const std::int64_t n = static_cast<std::int64_t>(n0_) << max_level_;
  for (int d = 0; d < 3; ++d) {
    const double t = (x[d] - lower_[d]) / h;
    if (!(t >= -1e-9 * n && t <= n * (1.0 + 1e-12))) return std::nullopt;
    a[d] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t)), 0, n - 1);
  }
  return locate(max_level_, a, max_level_);
}

void OctreeMesh::refine_one(const CellId& id, std::vector<CellId>& queue) {
  if (id.level + 1 > max_supported_level)
    throw std::length_error("refine: maximum octree level exceeded");
  active_.erase(id);
  for (int i = 0; i < 8; ++i) active_.insert(id.child(i));
  max_level_ = std::max(max_level_, id.level + 1);
  for (int axis = 0; axis < 3; ++axis) {
    for (int side : {-1, 1}) {
      CellId region = id;
      region.anchor[axis] += side;
      if (!in_domain(region)) continue;
      auto cov = active_covering(region);
      if (cov && cov->level < id.level) queue.push_back(*cov);
    }
  }
}

void OctreeMesh::refine_with_closure(std::span<const CellId> marked) {
  std::vector<CellId> sorted(marked.begin(), marked.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::deque<CellId> work(sorted.begin(), sorted.end());
  std::vector<CellId> pending;
  while (!work.empty()) {
    const CellId c = work.front();
    work.pop_front();
    if (!active_.contains(c)) continue;
    pending.clear();
    refine_one(c, pending);
    std::sort(pending.begin(), pending.end());
    for (const auto& p : pending) work.push_back(p);
  }
}

void OctreeMesh::collect_facing_descendants(const CellId& region, int axis, int side,
                                            std::vector<CellId>& out) const {
  // Children of `region` that touch the face shared with the cell on `-side`.
  const int bit = side > 0 ? 0 : 1;
  for (int i = 0; i < 8; ++i) {
    if (((i >> axis) & 1) != bit) continue;
    CellId ch = region.child(i);
    if (active_.contains(ch))
      out.push_back(ch);
    else if (ch.level < max_level_)
      collect_facing_descendants(ch, axis, side, out);
  }
}

std::vector<CellId> OctreeMesh::face_neighbors(const CellId& id, int axis, int side) const {
  std::vector<CellId> out;
  CellId region = id;
  region.anchor[axis] += side;
  if (!in_domain(region)) return out;
  if (auto cov = active_covering(region)) {
    out.push_back(*cov);
    return out;
  }
  collect_facing_descendants(region, axis, side, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FaceId> OctreeMesh::internal_faces(const CellSet& cells) const {
  std::vector<CellId> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<FaceId> faces;
  for (const auto& c : sorted) {
    const double h = cell_size(c.level);
    const Vec3 lo = cell_lower(c);
    for (int axis = 0; axis < 3; ++axis) {
      for (int side : {-1, 1}) {
        CellId region = c;
        region.anchor[axis] += side;
        if (!in_domain(region)) continue;
        auto cov = active_covering(region);
        if (!cov || !cells.contains(*cov)) continue;
        const bool same = cov->level == c.level;
        if (same && side < 0) continue;  // emitted from the minus cell
        FaceId f;
        f.axis = axis;
        f.minus_cell = side > 0 ? c : *cov;
        f.plus_cell = side > 0 ? *cov : c;
        f.lower = lo;
        f.upper = lo + Vec3::Constant(h);
        const double x = lo[axis] + (side > 0 ? h : 0.0);
        f.lower[axis] = x;
        f.upper[axis] = x;
        f.h_F = h;
        faces.push_back(f);
      }
    }
  }
  return faces;
}

std::vector<CellId> OctreeMesh::cells_touching(const CellId& id) const {
  // Integer boxes on the finest lattice; closed boxes touch when intervals meet.
  const int L = max_level_;
  auto box_of = [L](const CellId& c, std::array<std::int64_t, 3>& lo, std::array<std::int64_t, 3>& hi) {
    const std::int64_t s = std::int64_t{1} << (L - c.level);
    for (int d = 0; d < 3; ++d) {
      lo[d] = c.anchor[d] * s;
      hi[d] = lo[d] + s;
    }
  };
  std::array<std::int64_t, 3> qlo{}, qhi{};
  box_of(id, qlo, qhi);
  auto touches = [&](const CellId& c) {
    std::array<std::int64_t, 3> lo{}, hi{};
    box_of(c, lo, hi);
    for (int d = 0; d < 3; ++d)
      if (hi[d] < qlo[d] || lo[d] > qhi[d]) return false;
    return true;
  };
  CellSet found;
  std::vector<CellId> stack;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        CellId r{id.level, {id.anchor[0] + dx, id.anchor[1] + dy, id.anchor[2] + dz}};
        if (!in_domain(r)) continue;
        if (auto cov = active_covering(r)) {
          found.insert(*cov);
          continue;
        }
        stack.push_back(r);
      }
  while (!stack.empty()) {
    CellId r = stack.back();
    stack.pop_back();
    for (int i = 0; i < 8; ++i) {
      CellId ch = r.child(i);
      if (!touches(ch)) continue;
      if (active_.contains(ch))
        found.insert(ch);
      else if (ch.level < max_level_)
        stack.push_back(ch);
    }
  }
  std::vector<CellId> out(found.begin(), found.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool OctreeMesh::is_balanced() const {
  for (const auto& c : active_) {
    for (int axis = 0; axis < 3; ++axis)
      for (int side : {-1, 1}) {
        CellId region = c;
        region.anchor[axis] += side;
        if (!in_domain(region)) continue;
        auto cov = active_covering(region);
        if (cov && cov->level < c.level - 1) return false;
      }
  }
  return true;
}

void write_vtk(const std::string& path, const OctreeMesh& mesh,
               const std::vector<std::pair<std::string, std::unordered_map<CellId, double, CellIdHash>>>&
                   cell_fields) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_vtk: cannot open " + path);
  const auto cells = mesh.active_cells();
  os << "# vtk DataFile Version 3.0\ntracefem octree\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << 8 * cells.size() << " double\n";
  static constexpr int order[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                      {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  os.precision(12);
  for (const auto& c : cells) {
    const Vec3 lo = mesh.cell_lower(c);
    const double h = mesh.cell_size(c.level);
    for (const auto& o : order)
      os << lo[0] + h * o[0] << ' ' << lo[1] + h * o[1] << ' ' << lo[2] + h * o[2] << '\n';
  }
  os << "CELLS " << cells.size() << ' ' << 9 * cells.size() << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << 8;
    for (int v = 0; v < 8; ++v) os << ' ' << 8 * i + v;
    os << '\n';
  }
  os << "CELL_TYPES " << cells.size() << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) os << "12\n";
  os << "CELL_DATA " << cells.size() << '\n';
  os << "SCALARS level int 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) os << c.level << '\n';
  for (const auto& [name, values] : cell_fields) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const auto& c : cells) {
      auto it = values.find(c);
      os << (it == values.end() ? 0.0 : it->second) << '\n';
    }
  }
}

}  // namespace tracefem
