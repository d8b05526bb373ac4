#include "tracefem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tracefem {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<int> row_ptr, std::vector<int> cols)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(cols_.size(), 0.0) {
  if (row_ptr_.size() != n + 1 || static_cast<std::size_t>(row_ptr_.back()) != cols_.size())
    throw std::invalid_argument("CsrMatrix: inconsistent row pointer");
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::span<const std::tuple<int, int, double>> entries) {
  std::vector<std::vector<int>> rows(n);
  for (const auto& [r, c, v] : entries) {
    if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= n || static_cast<std::size_t>(c) >= n)
      throw std::out_of_range("CsrMatrix: triplet index out of range");
    rows[r].push_back(c);
  }
  std::vector<int> ptr{0}, cols;
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    cols.insert(cols.end(), row.begin(), row.end());
    ptr.push_back(static_cast<int>(cols.size()));
  }
  CsrMatrix m(n, std::move(ptr), std::move(cols));
  for (const auto& [r, c, v] : entries) m.add(r, c, v);
  return m;
}

long CsrMatrix::find(int r, int c) const {
  const auto first = cols_.begin() + row_ptr_[r], last = cols_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return -1;
  return it - cols_.begin();
}

void CsrMatrix::add(int r, int c, double v) {
  const long p = find(r, c);
  if (p < 0) throw std::out_of_range("CsrMatrix: entry (" + std::to_string(r) + "," + std::to_string(c) + ") not in pattern");
  values_[p] += v;
}

double CsrMatrix::operator()(int r, int c) const {
  const long p = find(r, c);
  return p < 0 ? 0.0 : values_[p];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < n_; ++r) {
    double s = 0.0;
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[cols_[p]];
    y[r] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) d[r] = (*this)(static_cast<int>(r), static_cast<int>(r));
  return d;
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::symmetry_defect() const {
  double m = 0.0;
  for (std::size_t r = 0; r < n_; ++r)
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      m = std::max(m, std::abs(values_[p] - (*this)(cols_[p], static_cast<int>(r))));
  return m;
}

double CsrMatrix::quadratic_form(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t r = 0; r < n_; ++r) {
    double row = 0.0;
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) row += values_[p] * x[cols_[p]];
    s += x[r] * row;
  }
  return s;
}

void SparsityBuilder::compact(std::size_t r) {
  auto& row = rows_[r];
  std::sort(row.begin(), row.end());
  row.erase(std::unique(row.begin(), row.end()), row.end());
}

void SparsityBuilder::add_clique(std::span<const int> indices) {
  for (int r : indices) {
    auto& row = rows_[r];
    const std::size_t before = row.size();
    row.insert(row.end(), indices.begin(), indices.end());
    if (row.size() > 4 * std::max<std::size_t>(before, 32)) compact(r);
  }
}

CsrMatrix SparsityBuilder::build() {
  std::vector<int> ptr{0};
  ptr.reserve(rows_.size() + 1);
  std::size_t total = 0;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    compact(r);
    total += rows_[r].size();
  }
  std::vector<int> cols;
  cols.reserve(total);
  for (auto& row : rows_) {
    cols.insert(cols.end(), row.begin(), row.end());
    ptr.push_back(static_cast<int>(cols.size()));
    std::vector<int>().swap(row);
  }
  return CsrMatrix(rows_.size(), std::move(ptr), std::move(cols));
}

}  // namespace tracefem
