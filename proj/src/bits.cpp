#include "bb84/bits.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace bb84 {

BitString xor_bits(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("xor_bits: length mismatch");
  BitString out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] ^ b[i]) & 1;
  return out;
}

std::size_t weight(std::span<const std::uint8_t> bits) {
  std::size_t w = 0;
  for (auto b : bits) w += b & 1;
  return w;
}

Bytes pack_bits(std::span<const std::uint8_t> bits) {
  Bytes out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] & 1) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

BitString unpack_bits(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (bytes.size() * 8 < nbits) throw std::runtime_error("unpack_bits: not enough bytes");
  BitString out(nbits);
  for (std::size_t i = 0; i < nbits; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("from_hex: invalid digit");
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("from_hex: odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(hex_value(hex[2 * i]) << 4 | hex_value(hex[2 * i + 1]));
  }
  return out;
}

std::string to_bit_chars(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = (bits[i] & 1) ? '1' : '0';
  return s;
}

BitString from_bit_chars(std::string_view chars) {
  BitString out(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (chars[i] != '0' && chars[i] != '1') {
      throw std::invalid_argument("from_bit_chars: expected only '0' and '1'");
    }
    out[i] = chars[i] == '1';
  }
  return out;
}

Bytes sha256(std::span<const std::uint8_t> data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  Bytes digest(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("sha256: digest computation failed");
  }
  digest.resize(len);
  return digest;
}

Bytes key_digest(std::span<const std::uint8_t> key) {
  Bytes buf;
  put_u32(buf, static_cast<std::uint32_t>(key.size()));
  auto packed = pack_bits(key);
  buf.insert(buf.end(), packed.begin(), packed.end());
  return sha256(buf);
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (remaining() < n) throw std::runtime_error("payload truncated");
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (auto b : take(4)) v = v << 8 | b;
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (auto b : take(8)) v = v << 8 | b;
  return v;
}

BitString ByteReader::bits(std::size_t nbits) { return unpack_bits(take((nbits + 7) / 8), nbits); }

void ByteReader::expect_end() const {
  if (remaining() != 0) throw std::runtime_error("payload has trailing bytes");
}

}  // namespace bb84
