#include "bb84/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace bb84 {

const char* const kCsvHeader =
    "trial,status,e1,e2,ebar,retained_fraction,key_length,key_match,blocks,blocks_matched";

void validate(const ExperimentConfig& config) {
  validate(config.params);
  validate(config.strategy);
  if (config.trials < 1) throw std::invalid_argument("trials must be at least 1");
}

TrialRecord make_record(std::uint64_t trial, const SessionOutcome& outcome) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  TrialRecord r;
  r.trial = trial;
  r.status = outcome.status;
  r.e1 = outcome.estimate ? outcome.estimate->e1 : nan;
  r.e2 = outcome.estimate ? outcome.estimate->e2 : nan;
  r.ebar = outcome.diagnostics.naive_rate.value_or(nan);
  r.retained_fraction = outcome.diagnostics.retained_fraction;
  r.key_length = outcome.alice_key.size();
  r.key_match = outcome.keys_match();
  r.blocks = outcome.blocks;
  r.blocks_matched = outcome.blocks_matched();
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult result;
  result.records.resize(config.trials);
  const unsigned threads =
      static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(config.threads, config.trials)));

  auto work = [&](unsigned worker) {
    for (std::uint64_t i = worker; i < config.trials; i += threads) {
      const RngSeed seed{derive_seed(config.seed, Stream::Trial, i)};
      result.records[i] = make_record(i, run_session(config.params, config.strategy, config.css, seed));
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  result.summary = summarize(result.records);
  if (config.csv_path) emit_csv(*config.csv_path, result.records);
  return result;
}

ExperimentSummary summarize(const std::vector<TrialRecord>& records) {
  ExperimentSummary s;
  s.trials = records.size();
  std::uint64_t estimated = 0, naive = 0, matched = 0;
  for (const auto& r : records) {
    switch (r.status) {
      case SessionStatus::Accepted: ++s.accepted; break;
      case SessionStatus::AbortedErrorRate: ++s.aborted_error_rate; break;
      case SessionStatus::AbortedInsufficientSample: ++s.aborted_insufficient; break;
      case SessionStatus::AbortedConnectionLost: break;
    }
    if (!std::isnan(r.e1)) {
      ++estimated;
      s.mean_e1 += r.e1;
      s.mean_e2 += r.e2;
    }
    if (!std::isnan(r.ebar)) {
      ++naive;
      s.mean_ebar += r.ebar;
    }
    s.mean_retained_fraction += r.retained_fraction;
    s.mean_key_length += static_cast<double>(r.key_length);
    matched += r.status == SessionStatus::Accepted && r.key_match;
    s.blocks += r.blocks;
    s.blocks_matched += r.blocks_matched;
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  auto mean = [&](double sum, std::uint64_t n) { return n ? sum / static_cast<double>(n) : nan; };
  s.mean_e1 = mean(s.mean_e1, estimated);
  s.mean_e2 = mean(s.mean_e2, estimated);
  s.mean_ebar = mean(s.mean_ebar, naive);
  s.mean_retained_fraction = mean(s.mean_retained_fraction, s.trials);
  s.mean_key_length = mean(s.mean_key_length, s.trials);
  s.key_match_rate = mean(static_cast<double>(matched), s.accepted);
  return s;
}

namespace {

// fmt formats floating point without consulting the global locale.
std::string number(double v) { return std::isnan(v) ? "nan" : fmt::format("{}", v); }

double parse_number(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument(fmt::format("bad number '{}'", s));
  return v;
}

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument(fmt::format("bad count '{}'", s));
  return v;
}

SessionStatus parse_status(std::string_view s) {
  for (auto st : {SessionStatus::Accepted, SessionStatus::AbortedErrorRate, SessionStatus::AbortedInsufficientSample,
                  SessionStatus::AbortedConnectionLost}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument(fmt::format("unknown status '{}'", s));
}

}  // namespace

void emit_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.trial, to_string(r.status), number(r.e1), number(r.e2),
                       number(r.ebar), number(r.retained_fraction), r.key_length, r.key_match ? 1 : 0, r.blocks,
                       r.blocks_matched);
  }
}

void emit_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  emit_csv(out, records);
  if (!out) throw std::runtime_error(fmt::format("error writing {}", path.string()));
}

std::vector<TrialRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("CSV header does not match");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      f.push_back(rest.substr(0, pos));
    }
    f.push_back(rest);
    if (f.size() != 10) throw std::invalid_argument(fmt::format("expected 10 fields, got {}", f.size()));
    TrialRecord r;
    r.trial = parse_count(f[0]);
    r.status = parse_status(f[1]);
    r.e1 = parse_number(f[2]);
    r.e2 = parse_number(f[3]);
    r.ebar = parse_number(f[4]);
    r.retained_fraction = parse_number(f[5]);
    r.key_length = parse_count(f[6]);
    r.key_match = parse_count(f[7]) != 0;
    r.blocks = parse_count(f[8]);
    r.blocks_matched = parse_count(f[9]);
    out.push_back(r);
  }
  return out;
}

AttackDemoReport attack_demo(const ProtocolParams& params, double p1, double p2, std::uint64_t trials, RngSeed seed,
                             const CssPair& css) {
  ExperimentConfig config;
  config.params = params;
  config.strategy = BiasedInterceptResend{p1, p2};
  config.css = css;
  config.trials = trials;
  config.seed = seed;
  const auto result = run_experiment(config);

  AttackDemoReport r;
  r.p = params.p;
  r.p1 = p1;
  r.p2 = p2;
  r.trials = trials;
  r.predicted_ebar = predicted_naive_rate(params.p, p1, p2);
  r.predicted_e1 = p2 / 2.0;
  r.predicted_e2 = p1 / 2.0;
  r.measured_ebar = result.summary.mean_ebar;
  r.measured_e1 = result.summary.mean_e1;
  r.measured_e2 = result.summary.mean_e2;
  std::uint64_t naive_pass = 0;
  for (const auto& rec : result.records) naive_pass += rec.ebar < params.acceptance_threshold();
  r.naive_pass_rate = static_cast<double>(naive_pass) / static_cast<double>(trials);
  r.refined_abort_rate = static_cast<double>(result.summary.aborted_error_rate) / static_cast<double>(trials);
  return r;
}

std::string format_report(const AttackDemoReport& r) {
  std::ostringstream out;
  out << fmt::format("intercept-resend p1={} p2={} at bias p={} over {} trials\n", r.p1, r.p2, r.p, r.trials);
  out << fmt::format("{:<10}{:>12}{:>12}\n", "", "predicted", "measured");
  out << fmt::format("{:<10}{:>12.4f}{:>12.4f}\n", "naive e", r.predicted_ebar, r.measured_ebar);
  out << fmt::format("{:<10}{:>12.4f}{:>12.4f}\n", "e1", r.predicted_e1, r.measured_e1);
  out << fmt::format("{:<10}{:>12.4f}{:>12.4f}\n", "e2", r.predicted_e2, r.measured_e2);
  out << fmt::format("naive check passes in {:.1f}% of trials; refined check aborts in {:.1f}%\n",
                     100.0 * r.naive_pass_rate, 100.0 * r.refined_abort_rate);
  return out.str();
}

std::string format_summary(const ExperimentSummary& s) {
  return fmt::format(
      "trials={} accepted={} aborted_error_rate={} aborted_insufficient_sample={}\n"
      "mean e1={:.5f} e2={:.5f} ebar={:.5f} retained_fraction={:.5f} key_length={:.1f}\n"
      "key_match_rate={:.4f} blocks_matched={}/{}\n",
      s.trials, s.accepted, s.aborted_error_rate, s.aborted_insufficient, s.mean_e1, s.mean_e2, s.mean_ebar,
      s.mean_retained_fraction, s.mean_key_length, s.key_match_rate, s.blocks_matched, s.blocks);
}

}  // namespace bb84
