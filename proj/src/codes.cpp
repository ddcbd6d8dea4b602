#include "bb84/codes.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace bb84 {

namespace {

std::uint64_t to_mask(std::span<const std::uint8_t> bits) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1) m |= std::uint64_t{1} << i;
  return m;
}

BitString from_mask(std::uint64_t m, std::size_t n) {
  BitString b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (m >> i) & 1;
  return b;
}

std::uint64_t next_same_weight(std::uint64_t v) {
  // Gosper's hack: next larger integer with the same popcount.
  const std::uint64_t c = v & (~v + 1);
  const std::uint64_t r = v + c;
  return (((r ^ v) >> 2) / c) | r;
}

}  // namespace

/// Syndrome -> minimum-weight coset leader, for n <= kExhaustiveLimit.
/// Complete when n - k <= kFullTableBits, otherwise limited to weight <= t.
class SyndromeTable {
 public:
  static constexpr std::size_t kFullTableBits = 20;

  SyndromeTable(const BinaryMatrix& parity_check, std::size_t t) : n_(parity_check.cols()), t_(t) {
    for (std::size_t r = 0; r < parity_check.rows(); ++r) checks_.push_back(to_mask(parity_check.row(r)));
    const std::size_t r = checks_.size();
    full_ = r <= kFullTableBits;
    const std::uint64_t wanted = full_ ? (std::uint64_t{1} << r) : 0;
    if (full_) dense_.assign(std::size_t{1} << r, kEmpty);

    std::uint64_t filled = 0;
    for (std::size_t w = 0; w <= n_; ++w) {
      if (!full_ && w > t_) break;
      if (full_ && filled == wanted) break;
      if (w == 0) {
        filled += insert(0);
        continue;
      }
      const std::uint64_t last = (std::uint64_t{1} << n_) - 1;
      for (std::uint64_t e = (std::uint64_t{1} << w) - 1; e <= last; e = next_same_weight(e)) {
        filled += insert(e);
        if (full_ && filled == wanted) break;
        if (e == last) break;
      }
    }
  }

  std::uint64_t syndrome(std::uint64_t word) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < checks_.size(); ++i)
      s |= static_cast<std::uint64_t>(std::popcount(checks_[i] & word) & 1) << i;
    return s;
  }

  std::optional<std::uint64_t> leader(std::uint64_t syn) const {
    if (full_) {
      auto e = dense_[syn];
      if (e == kEmpty) return std::nullopt;
      return e;
    }
    auto it = sparse_.find(syn);
    if (it == sparse_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t n() const { return n_; }
  std::size_t t() const { return t_; }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

  int insert(std::uint64_t e) {
    const auto s = syndrome(e);
    if (full_) {
      if (dense_[s] != kEmpty) return 0;
      dense_[s] = e;
      return 1;
    }
    return sparse_.emplace(s, e).second ? 1 : 0;
  }

  std::size_t n_;
  std::size_t t_;
  bool full_ = false;
  std::vector<std::uint64_t> checks_;
  std::vector<std::uint64_t> dense_;
  std::unordered_map<std::uint64_t, std::uint64_t> sparse_;
};

std::size_t minimum_distance(const BinaryMatrix& generator) {
  const std::size_t k = generator.rows();
  if (k == 0) return 0;
  if (generator.cols() > 64 || k > 32) throw CodeError("minimum_distance: code too large to enumerate");
  std::vector<std::uint64_t> rows;
  for (std::size_t r = 0; r < k; ++r) rows.push_back(to_mask(generator.row(r)));
  std::size_t best = generator.cols() + 1;
  std::uint64_t word = 0;
  const std::uint64_t count = std::uint64_t{1} << k;
  for (std::uint64_t i = 1; i < count; ++i) {
    word ^= rows[std::countr_zero(i)];
    best = std::min<std::size_t>(best, std::popcount(word));
  }
  return best;
}

LinearCode LinearCode::from_generator(const BinaryMatrix& generator, std::optional<std::size_t> claimed_d) {
  if (!generator.full_row_rank()) throw CodeError("generator rows are linearly dependent");
  LinearCode code;
  code.generator_ = generator;
  code.parity_check_ = generator.nullspace();
  const std::size_t n = generator.cols();
  if (n <= kExhaustiveLimit) {
    code.d_ = minimum_distance(generator);
    code.distance_verified_ = true;
    if (claimed_d && *claimed_d != code.d_) {
      throw CodeError(fmt::format("claimed distance {} but enumeration gives {}", *claimed_d, code.d_));
    }
    const std::size_t t = code.d_ >= 1 ? (code.d_ - 1) / 2 : 0;
    code.table_ = std::make_shared<const SyndromeTable>(code.parity_check_, t);
  } else {
    code.d_ = claimed_d.value_or(0);
    code.distance_verified_ = false;
  }
  return code;
}

BitString LinearCode::encode(std::span<const std::uint8_t> message) const {
  return generator_.combine_rows(message);
}

BitString LinearCode::syndrome(std::span<const std::uint8_t> word) const { return parity_check_.multiply(word); }

bool LinearCode::contains(std::span<const std::uint8_t> word) const {
  if (word.size() != n()) return false;
  return weight(syndrome(word)) == 0;
}

std::vector<BitString> LinearCode::codewords() const {
  if (k_dim() > kExhaustiveLimit) throw CodeError("codewords: dimension too large to enumerate");
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << k_dim());
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << k_dim()); ++m) out.push_back(encode(from_mask(m, k_dim())));
  return out;
}

LinearCode LinearCode::dual() const { return from_generator(parity_check_); }

LinearCode LinearCode::with_decoder(DecoderHook hook) const {
  LinearCode copy = *this;
  copy.hook_ = std::move(hook);
  return copy;
}

std::optional<DecodeResult> syndrome_decode(const LinearCode& code, std::span<const std::uint8_t> word) {
  if (word.size() != code.n()) throw std::invalid_argument("syndrome_decode: word length differs from n");
  if (const auto* table = code.table()) {
    auto leader = table->leader(table->syndrome(to_mask(word)));
    if (!leader) return std::nullopt;
    DecodeResult r;
    r.codeword = xor_bits(word, from_mask(*leader, code.n()));
    r.corrected_weight = static_cast<std::size_t>(std::popcount(*leader));
    r.beyond_radius = r.corrected_weight > table->t();
    return r;
  }
  if (code.decoder_hook()) {
    auto cw = code.decoder_hook()(word);
    if (!cw) return std::nullopt;
    if (!code.contains(*cw)) throw CodeError("decoder hook returned a non-codeword");
    DecodeResult r;
    r.corrected_weight = weight(xor_bits(word, *cw));
    r.beyond_radius = code.d() == 0 || r.corrected_weight > (code.d() - 1) / 2;
    r.codeword = std::move(*cw);
    return r;
  }
  throw CodeError(fmt::format("no decoder available for block length {}", code.n()));
}

CssPair validate_css(const LinearCode& c1, const LinearCode& c2) {
  if (c1.n() != c2.n()) throw CodeError("C1 and C2 have different block lengths");
  for (std::size_t r = 0; r < c2.k_dim(); ++r) {
    if (!c1.contains(c2.generator().row(r))) {
      throw NestingViolation(fmt::format("generator row {} of C2 is not a codeword of C1", r));
    }
  }
  if (c1.k_dim() <= c2.k_dim()) throw DegenerateCode("dim(C1) - dim(C2) must be positive");

  const LinearCode c2_dual = c2.dual();
  if (c1.d() == 0 || c2_dual.d() == 0) throw DistanceTooSmall("minimum distance unknown");
  const std::size_t d = std::min(c1.d(), c2_dual.d());
  const std::size_t t = (d - 1) / 2;
  if (t < 1) {
    throw DistanceTooSmall(
        fmt::format("d(C1) = {}, d(C2 dual) = {}: both must be at least 3", c1.d(), c2_dual.d()));
  }

  // Greedily keep rows of H2 whose images on C1 are independent.
  const BinaryMatrix& h2 = c2.parity_check();
  const std::size_t k = c1.k_dim() - c2.k_dim();
  std::vector<BitString> selected;
  std::vector<BitString> basis;  // reduced images, each with a distinct pivot
  std::vector<std::size_t> pivots;
  for (std::size_t r = 0; r < h2.rows() && selected.size() < k; ++r) {
    BitString image = c1.generator().multiply(h2.row(r));
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (image[pivots[i]]) image = xor_bits(image, basis[i]);
    auto it = std::find(image.begin(), image.end(), 1);
    if (it == image.end()) continue;
    pivots.push_back(static_cast<std::size_t>(it - image.begin()));
    basis.push_back(std::move(image));
    selected.emplace_back(h2.row(r).begin(), h2.row(r).end());
  }
  if (selected.size() != k) throw CodeError("could not build a coset labeling matrix");

  return CssPair{c1, c2, t, k, BinaryMatrix::from_rows(selected, c1.n())};
}

LinearCode hamming_7_4() {
  const std::vector<BitString> rows = {
      from_bit_chars("1000110"),
      from_bit_chars("0100101"),
      from_bit_chars("0010011"),
      from_bit_chars("0001111"),
  };
  return LinearCode::from_generator(BinaryMatrix::from_rows(rows, 7), 3);
}

CssPair steane_pair() {
  const LinearCode c1 = hamming_7_4();
  return validate_css(c1, c1.dual());
}

BitString coset_label(const CssPair& css, std::span<const std::uint8_t> u) {
  if (!css.c1.contains(u)) throw NotACodeword("coset_label: input is not a codeword of C1");
  return css.g2.multiply(u);
}

AliceReconciliation reconcile_alice(const CssPair& css, std::span<const std::uint8_t> v, Rng& rng) {
  if (v.size() != css.n()) throw std::invalid_argument("reconcile_alice: block length differs from n");
  BitString message(css.c1.k_dim());
  for (auto& b : message) b = rng.bit();
  AliceReconciliation out;
  out.codeword = css.c1.encode(message);
  out.announcement = xor_bits(out.codeword, v);
  out.key = css.g2.multiply(out.codeword);
  return out;
}

std::optional<BitString> reconcile_bob(const CssPair& css, std::span<const std::uint8_t> received,
                                       std::span<const std::uint8_t> announcement) {
  if (received.size() != css.n() || announcement.size() != css.n()) {
    throw std::invalid_argument("reconcile_bob: block length differs from n");
  }
  auto decoded = syndrome_decode(css.c1, xor_bits(received, announcement));
  if (!decoded) return std::nullopt;
  return css.g2.multiply(decoded->codeword);
}

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.map_.resize(n);
  std::iota(p.map_.begin(), p.map_.end(), 0u);
  return p;
}

Permutation Permutation::random(std::size_t n, std::uint64_t seed) {
  Permutation p = identity(n);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(p.map_[i - 1], p.map_[rng.below(i)]);
  p.seed_ = seed;
  return p;
}

Permutation Permutation::from_mapping(std::vector<std::uint32_t> mapping) {
  std::vector<bool> seen(mapping.size(), false);
  for (auto m : mapping) {
    if (m >= mapping.size() || seen[m]) throw std::invalid_argument("Permutation: mapping is not a bijection");
    seen[m] = true;
  }
  Permutation p;
  p.map_ = std::move(mapping);
  return p;
}

Permutation Permutation::inverse() const {
  std::vector<std::uint32_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = static_cast<std::uint32_t>(i);
  return from_mapping(std::move(inv));
}

BitString permute(const Permutation& perm, std::span<const std::uint8_t> block) {
  if (block.size() != perm.size()) throw std::invalid_argument("permute: size mismatch");
  BitString out(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) out[i] = block[perm.mapping()[i]];
  return out;
}

BitString inverse_permute(const Permutation& perm, std::span<const std::uint8_t> block) {
  if (block.size() != perm.size()) throw std::invalid_argument("inverse_permute: size mismatch");
  BitString out(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) out[perm.mapping()[i]] = block[i];
  return out;
}

namespace {

struct CodeBlock {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<BitString> rows;
  std::optional<std::size_t> claimed_d;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<std::size_t> parse_distance_comment(const std::string& line) {
  // "# d = 3"
  std::string body = trim(std::string_view(line).substr(1));
  if (body.empty() || body[0] != 'd') return std::nullopt;
  body = trim(std::string_view(body).substr(1));
  if (body.empty() || body[0] != '=') return std::nullopt;
  body = trim(std::string_view(body).substr(1));
  std::size_t pos = 0;
  try {
    const auto d = std::stoul(body, &pos);
    if (pos != body.size()) return std::nullopt;
    return d;
  } catch (const std::exception&) {
    throw CodeError(fmt::format("malformed distance comment: '{}'", line));
  }
}

std::vector<CodeBlock> parse_blocks(std::string_view text) {
  std::vector<CodeBlock> blocks;
  std::optional<std::size_t> pending_d;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto d = parse_distance_comment(line)) {
        if (!blocks.empty() && blocks.back().rows.size() < blocks.back().k) {
          blocks.back().claimed_d = d;
        } else {
          pending_d = d;
        }
      }
      continue;
    }
    if (blocks.empty() || blocks.back().rows.size() == blocks.back().k) {
      std::istringstream header(line);
      CodeBlock b;
      if (!(header >> b.n >> b.k) || !(header >> std::ws).eof() || b.n == 0) {
        throw CodeError(fmt::format("line {}: expected header 'n k_dim'", lineno));
      }
      if (b.k > b.n) throw CodeError(fmt::format("line {}: k_dim exceeds n", lineno));
      b.claimed_d = pending_d;
      pending_d.reset();
      blocks.push_back(std::move(b));
      continue;
    }
    auto& b = blocks.back();
    if (line.size() != b.n) {
      throw CodeError(fmt::format("line {}: generator row has {} symbols, expected {}", lineno, line.size(), b.n));
    }
    try {
      b.rows.push_back(from_bit_chars(line));
    } catch (const std::invalid_argument&) {
      throw CodeError(fmt::format("line {}: generator row must contain only 0 and 1", lineno));
    }
  }
  if (!blocks.empty() && blocks.back().rows.size() != blocks.back().k) {
    throw CodeError("code file ends before all generator rows were read");
  }
  if (pending_d && !blocks.empty() && !blocks.back().claimed_d) blocks.back().claimed_d = pending_d;
  return blocks;
}

LinearCode build(const CodeBlock& b) {
  return LinearCode::from_generator(BinaryMatrix::from_rows(b.rows, b.n), b.claimed_d);
}

}  // namespace

LinearCode parse_code(std::string_view text) {
  auto blocks = parse_blocks(text);
  if (blocks.size() != 1) throw CodeError(fmt::format("expected one code, found {}", blocks.size()));
  return build(blocks[0]);
}

std::string format_code(const LinearCode& code) {
  std::string out = fmt::format("{} {}\n", code.n(), code.k_dim());
  if (code.distance_verified()) out += fmt::format("# d = {}\n", code.d());
  for (std::size_t r = 0; r < code.k_dim(); ++r) out += to_bit_chars(code.generator().row(r)) + "\n";
  return out;
}

CssPair parse_css_pair(std::string_view text) {
  auto blocks = parse_blocks(text);
  if (blocks.size() != 2) throw CodeError(fmt::format("expected two codes (C1, C2), found {}", blocks.size()));
  return validate_css(build(blocks[0]), build(blocks[1]));
}

std::string format_css_pair(const CssPair& css) {
  return "# C1\n" + format_code(css.c1) + "# C2\n" + format_code(css.c2);
}

CssPair load_css_pair(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CodeError(fmt::format("cannot open code file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_css_pair(ss.str());
}

}  // namespace bb84
