#include "bb84/gf2.hpp"

#include <stdexcept>
#include <utility>

namespace bb84 {

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

BinaryMatrix BinaryMatrix::from_rows(const std::vector<BitString>& rows, std::size_t cols) {
  BinaryMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw std::invalid_argument("BinaryMatrix: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c]);
  }
  m.compute_rank();
  return m;
}

std::vector<BitString> BinaryMatrix::row_list() const {
  std::vector<BitString> out;
  out.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out.emplace_back(row(r).begin(), row(r).end());
  return out;
}

BitString BinaryMatrix::multiply(std::span<const std::uint8_t> v) const {
  if (v.size() != cols_) throw std::invalid_argument("BinaryMatrix::multiply: dimension mismatch");
  BitString out(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::uint8_t acc = 0;
    for (std::size_t c = 0; c < cols_; ++c) acc ^= at(r, c) & v[c];
    out[r] = acc & 1;
  }
  return out;
}

BitString BinaryMatrix::combine_rows(std::span<const std::uint8_t> v) const {
  if (v.size() != rows_) throw std::invalid_argument("BinaryMatrix::combine_rows: dimension mismatch");
  BitString out(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!(v[r] & 1)) continue;
    for (std::size_t c = 0; c < cols_; ++c) out[c] ^= at(r, c);
  }
  return out;
}

BinaryMatrix BinaryMatrix::transpose() const {
  BinaryMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, at(r, c));
  t.compute_rank();
  return t;
}

BinaryMatrix BinaryMatrix::operator*(const BinaryMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("BinaryMatrix product: dimension mismatch");
  BinaryMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k) {
      if (!at(r, k)) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out.bits_[r * rhs.cols_ + c] ^= rhs.at(k, c);
    }
  out.compute_rank();
  return out;
}

bool BinaryMatrix::is_zero() const {
  for (auto b : bits_)
    if (b) return false;
  return true;
}

std::vector<std::size_t> row_reduce(std::vector<BitString>& rows) {
  std::vector<std::size_t> pivots;
  if (rows.empty()) return pivots;
  const std::size_t cols = rows.front().size();
  std::size_t lead = 0;
  for (std::size_t c = 0; c < cols && lead < rows.size(); ++c) {
    std::size_t pivot = lead;
    while (pivot < rows.size() && !rows[pivot][c]) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[lead], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != lead && rows[r][c]) {
        for (std::size_t k = 0; k < cols; ++k) rows[r][k] ^= rows[lead][k];
      }
    }
    pivots.push_back(c);
    ++lead;
  }
  rows.resize(lead);
  return pivots;
}

void BinaryMatrix::compute_rank() {
  auto rows = row_list();
  rank_ = row_reduce(rows).size();
}

BinaryMatrix BinaryMatrix::nullspace() const {
  auto rref = row_list();
  const auto pivots = row_reduce(rref);
  std::vector<bool> is_pivot(cols_, false);
  for (auto p : pivots) is_pivot[p] = true;

  std::vector<BitString> basis;
  for (std::size_t free = 0; free < cols_; ++free) {
    if (is_pivot[free]) continue;
    BitString x(cols_, 0);
    x[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = rref[i][free];
    basis.push_back(std::move(x));
  }
  return from_rows(basis, cols_);
}

}  // namespace bb84
