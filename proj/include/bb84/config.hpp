#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "bb84/bits.hpp"
#include "bb84/channel.hpp"
#include "bb84/codes.hpp"
#include "bb84/protocol.hpp"
#include "bb84/rng.hpp"
#include "bb84/session.hpp"

namespace bb84 {

/// "p1,p2" as given to --eve.
std::pair<double, double> parse_probability_pair(std::string_view text);

/// Passive unless one of the two attack options is set; both set is an error.
AttackStrategy strategy_from_options(const std::optional<std::pair<double, double>>& eve,
                                     const std::optional<double>& depolarize);

nlohmann::json to_json(const ProtocolParams& params);
nlohmann::json to_json(const AttackStrategy& strategy);

/// Status, estimate counts, key (hex of the packed bits) and digests.
nlohmann::json to_json(const PartyOutcome& outcome);

/// SHA-256 over the canonical JSON of everything both endpoints and the relay
/// must agree on.
Bytes config_hash(const ProtocolParams& params, const AttackStrategy& strategy, const CssPair& css, RngSeed seed);

}  // namespace bb84
