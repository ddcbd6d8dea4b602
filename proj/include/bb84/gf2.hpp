#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bb84/bits.hpp"

namespace bb84 {

/// Dense row-major matrix over GF(2). Rank is computed once at construction.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols);
  static BinaryMatrix from_rows(const std::vector<BitString>& rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t rank() const { return rank_; }
  bool full_row_rank() const { return rank_ == rows_; }

  std::uint8_t at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }
  std::span<const std::uint8_t> row(std::size_t r) const { return {bits_.data() + r * cols_, cols_}; }
  std::vector<BitString> row_list() const;

  /// M v over GF(2); |v| must equal cols().
  BitString multiply(std::span<const std::uint8_t> v) const;
  /// vᵀ M, i.e. the combination of rows selected by v; |v| must equal rows().
  BitString combine_rows(std::span<const std::uint8_t> v) const;

  BinaryMatrix transpose() const;
  BinaryMatrix operator*(const BinaryMatrix& rhs) const;
  bool is_zero() const;

  /// Rows form a basis of { x : M x = 0 }.
  BinaryMatrix nullspace() const;

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  void set(std::size_t r, std::size_t c, std::uint8_t v) { bits_[r * cols_ + c] = v & 1; }
  void compute_rank();

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
  std::size_t rank_ = 0;
};

/// Reduced row echelon form of the given rows; returns pivot columns.
std::vector<std::size_t> row_reduce(std::vector<BitString>& rows);

}  // namespace bb84
