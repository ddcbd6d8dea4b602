#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bb84 {

/// One element per bit, each 0 or 1.
using BitString = std::vector<std::uint8_t>;
using Bytes = std::vector<std::uint8_t>;

BitString xor_bits(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::size_t weight(std::span<const std::uint8_t> bits);

/// Packs 8 bits per byte, most significant bit first; the last byte is
/// zero-padded.
Bytes pack_bits(std::span<const std::uint8_t> bits);
BitString unpack_bits(std::span<const std::uint8_t> bytes, std::size_t nbits);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

/// "0101..." rendering, mostly for diagnostics and code files.
std::string to_bit_chars(std::span<const std::uint8_t> bits);
BitString from_bit_chars(std::string_view chars);

/// SHA-256 of the packed bit string, prefixed by its 32-bit bit length.
Bytes key_digest(std::span<const std::uint8_t> key);
Bytes sha256(std::span<const std::uint8_t> data);

// Big-endian integer helpers for payload encoding.
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);

/// Sequential reader over a payload; throws std::runtime_error on underrun.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> take(std::size_t n);
  BitString bits(std::size_t nbits);

  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace bb84
