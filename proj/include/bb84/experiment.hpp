#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bb84/channel.hpp"
#include "bb84/codes.hpp"
#include "bb84/protocol.hpp"
#include "bb84/rng.hpp"
#include "bb84/session.hpp"

namespace bb84 {

struct ExperimentConfig {
  ProtocolParams params;
  AttackStrategy strategy = Passive{};
  CssPair css = steane_pair();
  std::uint64_t trials = 1;
  RngSeed seed{0};
  unsigned threads = 1;
  std::optional<std::filesystem::path> csv_path;
};

/// Throws InvalidParams / InvalidStrategy / std::invalid_argument.
void validate(const ExperimentConfig& config);

/// One CSV row. Rates are NaN when the session produced no estimate.
struct TrialRecord {
  std::uint64_t trial = 0;
  SessionStatus status = SessionStatus::Accepted;
  double e1 = 0.0;
  double e2 = 0.0;
  double ebar = 0.0;
  double retained_fraction = 0.0;
  std::uint64_t key_length = 0;
  bool key_match = false;
  std::uint64_t blocks = 0;
  std::uint64_t blocks_matched = 0;
};

TrialRecord make_record(std::uint64_t trial, const SessionOutcome& outcome);

struct ExperimentSummary {
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  std::uint64_t aborted_error_rate = 0;
  std::uint64_t aborted_insufficient = 0;
  double mean_e1 = 0.0;
  double mean_e2 = 0.0;
  double mean_ebar = 0.0;
  double mean_retained_fraction = 0.0;
  double mean_key_length = 0.0;
  /// Over accepted trials; NaN if none.
  double key_match_rate = 0.0;
  std::uint64_t blocks = 0;
  std::uint64_t blocks_matched = 0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
};

/// Trial i runs with seed derive_seed(config.seed, Trial, i), so results do not
/// depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentSummary summarize(const std::vector<TrialRecord>& records);

extern const char* const kCsvHeader;

void emit_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void emit_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_csv(std::istream& in);

struct AttackDemoReport {
  double p = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::uint64_t trials = 0;
  double predicted_ebar = 0.0;
  double predicted_e1 = 0.0;
  double predicted_e2 = 0.0;
  double measured_ebar = 0.0;
  double measured_e1 = 0.0;
  double measured_e2 = 0.0;
  double naive_pass_rate = 0.0;    // trials whose ebar stays below the acceptance threshold
  double refined_abort_rate = 0.0;
};

AttackDemoReport attack_demo(const ProtocolParams& params, double p1, double p2, std::uint64_t trials, RngSeed seed,
                             const CssPair& css = steane_pair());

std::string format_report(const AttackDemoReport& report);
std::string format_summary(const ExperimentSummary& summary);

}  // namespace bb84
