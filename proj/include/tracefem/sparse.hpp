#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

namespace tracefem {

/// Square compressed-row matrix with a fixed, sorted sparsity pattern.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t n, std::vector<int> row_ptr, std::vector<int> cols);
  static CsrMatrix from_triplets(std::size_t n, std::span<const std::tuple<int, int, double>> entries);

  std::size_t rows() const { return n_; }
  std::size_t nnz() const { return cols_.size(); }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Position of (r, c) in the value array, or -1 if outside the pattern.
  long find(int r, int c) const;
  /// Adds to an existing entry; throws std::out_of_range outside the pattern.
  void add(int r, int c, double v);
  double operator()(int r, int c) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  double max_abs() const;
  /// max |A_ij - A_ji| over the pattern.
  double symmetry_defect() const;
  double quadratic_form(std::span<const double> x) const;

 private:
  std::size_t n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Collects dense cliques of coupled indices and produces the CSR pattern.
class SparsityBuilder {
 public:
  explicit SparsityBuilder(std::size_t n) : rows_(n) {}
  /// `indices` must be sorted and unique.
  void add_clique(std::span<const int> indices);
  CsrMatrix build();

 private:
  void compact(std::size_t r);
  std::vector<std::vector<int>> rows_;
};

}  // namespace tracefem
