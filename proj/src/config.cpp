#include "bb84/config.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace bb84 {

namespace {

double parse_double(std::string_view s) {
  // strtod would honour the C locale's decimal separator.
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument(fmt::format("not a number: '{}'", s));
  return v;
}

}  // namespace

std::pair<double, double> parse_probability_pair(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw std::invalid_argument("expected two values separated by a comma");
  return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
}

AttackStrategy strategy_from_options(const std::optional<std::pair<double, double>>& eve,
                                     const std::optional<double>& depolarize) {
  if (eve && depolarize) throw InvalidStrategy("choose either an intercept-resend attack or depolarizing noise");
  AttackStrategy s = Passive{};
  if (eve) s = BiasedInterceptResend{eve->first, eve->second};
  if (depolarize) s = DepolarizingPauli::symmetric(*depolarize);
  validate(s);
  return s;
}

nlohmann::json to_json(const ProtocolParams& params) {
  return {{"N", params.N},
          {"p", params.p},
          {"m1", params.m1},
          {"m2", params.m2},
          {"e_max", params.e_max},
          {"delta_e", params.delta_e},
          {"delta_prime", params.effective_delta_prime()},
          {"max_blocks", params.max_blocks}};
}

nlohmann::json to_json(const AttackStrategy& strategy) {
  struct Visitor {
    nlohmann::json operator()(const Passive&) const { return {{"type", "passive"}}; }
    nlohmann::json operator()(const BiasedInterceptResend& s) const {
      return {{"type", "intercept_resend"}, {"p1", s.p1}, {"p2", s.p2}};
    }
    nlohmann::json operator()(const DepolarizingPauli& s) const {
      return {{"type", "pauli"}, {"q_i", s.q_i}, {"q_x", s.q_x}, {"q_y", s.q_y}, {"q_z", s.q_z}};
    }
    nlohmann::json operator()(const FixedPauliString& s) const {
      std::string letters;
      for (auto l : s.letters) letters.push_back("IXYZ"[static_cast<int>(l)]);
      return {{"type", "fixed_pauli"}, {"letters", letters}};
    }
  };
  return std::visit(Visitor{}, strategy);
}

nlohmann::json to_json(const PartyOutcome& outcome) {
  nlohmann::json j{{"status", std::string(to_string(outcome.status))},
                   {"key_bits", outcome.key.size()},
                   {"key", to_hex(pack_bits(outcome.key))},
                   {"blocks", outcome.blocks},
                   {"decode_failures", outcome.decode_failures},
                   {"own_digest", to_hex(outcome.own_digest)},
                   {"peer_digest", to_hex(outcome.peer_digest)}};
  if (const auto& e = outcome.estimate) {
    j["estimate"] = {{"r1", e->r1}, {"m1", e->m1}, {"r2", e->r2}, {"m2", e->m2}, {"e1", e->e1}, {"e2", e->e2}};
  }
  return j;
}

Bytes config_hash(const ProtocolParams& params, const AttackStrategy& strategy, const CssPair& css, RngSeed seed) {
  const nlohmann::json doc{{"version", 1},
                           {"params", to_json(params)},
                           {"strategy", to_json(strategy)},
                           {"code", format_css_pair(css)},
                           {"seed", seed.value}};
  const auto text = doc.dump();
  return sha256({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace bb84
