#pragma once

#include <Eigen/Core>

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace tracefem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Scalar field on the embedding space (level-set functions, data).
using ScalarField = std::function<double(const Vec3&)>;

/// Octree cell address: refinement level plus integer anchor on the lattice of
/// that level. Anchors range over [0, n0 * 2^level) per axis.
struct CellId {
  int level = 0;
  std::array<std::int32_t, 3> anchor{0, 0, 0};

  auto operator<=>(const CellId&) const = default;

  CellId parent() const {
    return {level - 1, {anchor[0] >> 1, anchor[1] >> 1, anchor[2] >> 1}};
  }
  /// Child `i` with bit 0/1/2 selecting the upper half along x/y/z.
  CellId child(int i) const {
    return {level + 1,
            {2 * anchor[0] + (i & 1), 2 * anchor[1] + ((i >> 1) & 1),
             2 * anchor[2] + ((i >> 2) & 1)}};
  }
  std::string str() const;
};

struct CellIdHash {
  std::size_t operator()(const CellId& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.level) * 0x9E3779B97F4A7C15ull;
    for (auto a : c.anchor) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) + 0x9E3779B97F4A7C15ull +
           (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of the discrete geometry (degenerate gradient, unresolvable cut).
class GeometryError : public std::runtime_error {
 public:
  GeometryError(const CellId& cell, const std::string& what)
      : std::runtime_error(what + " in cell " + cell.str()), cell_(cell) {}
  const CellId& cell() const { return cell_; }

 private:
  CellId cell_;
};

}  // namespace tracefem
