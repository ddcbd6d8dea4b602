#include <clocale>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "bb84/experiment.hpp"

namespace bb84 {
namespace {

ExperimentConfig small_config(std::uint64_t trials) {
  ExperimentConfig c;
  c.params = ProtocolParams::with_test_size(30000, 0.1, 200);
  c.trials = trials;
  c.seed = RngSeed{77};
  return c;
}

TEST(Csv, EmptyIsHeaderOnly) {
  std::stringstream out;
  emit_csv(out, {});
  EXPECT_EQ(out.str(), std::string(kCsvHeader) + "\n");
}

TEST(Csv, OneLinePerTrialAndRoundTrip) {
  auto config = small_config(3);
  config.strategy = DepolarizingPauli::symmetric(0.01);
  const auto result = run_experiment(config);
  std::stringstream out;
  emit_csv(out, result.records);
  const auto text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  const auto back = parse_csv(out);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].trial, result.records[i].trial);
    EXPECT_EQ(back[i].status, result.records[i].status);
    EXPECT_EQ(back[i].e1, result.records[i].e1);
    EXPECT_EQ(back[i].e2, result.records[i].e2);
    EXPECT_EQ(back[i].ebar, result.records[i].ebar);
    EXPECT_EQ(back[i].retained_fraction, result.records[i].retained_fraction);
    EXPECT_EQ(back[i].key_length, result.records[i].key_length);
    EXPECT_EQ(back[i].key_match, result.records[i].key_match);
    EXPECT_EQ(back[i].blocks_matched, result.records[i].blocks_matched);
  }
}

TEST(Csv, NanAndLocale) {
  TrialRecord r;
  r.status = SessionStatus::AbortedInsufficientSample;
  r.e1 = r.e2 = r.ebar = std::nan("");
  r.retained_fraction = 0.5;
  const char* previous = std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  std::stringstream out;
  emit_csv(out, {r});
  if (previous) std::setlocale(LC_NUMERIC, "C");
  EXPECT_NE(out.str().find(",0.5,"), std::string::npos);
  const auto back = parse_csv(out);
  EXPECT_TRUE(std::isnan(back[0].e1));
  EXPECT_EQ(back[0].status, SessionStatus::AbortedInsufficientSample);
  std::stringstream bad("trial,status\n");
  EXPECT_THROW(parse_csv(bad), std::invalid_argument);
}

TEST(Experiment, PassiveAllAcceptedAndMatching) {
  const auto result = run_experiment(small_config(20));
  EXPECT_EQ(result.summary.accepted, 20u);
  EXPECT_DOUBLE_EQ(result.summary.key_match_rate, 1.0);
  EXPECT_EQ(result.summary.blocks, result.summary.blocks_matched);
  const double q = 0.01 + 0.81;
  EXPECT_NEAR(result.summary.mean_retained_fraction, q, 3 * std::sqrt(q * (1 - q) / (20 * 30000.0)));
}

TEST(Experiment, IndependentOfThreadCount) {
  auto config = small_config(6);
  config.strategy = DepolarizingPauli::symmetric(0.02);
  const auto serial = run_experiment(config);
  config.threads = 3;
  const auto parallel = run_experiment(config);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(serial.records[i].key_length, parallel.records[i].key_length);
    EXPECT_EQ(serial.records[i].e1, parallel.records[i].e1);
    EXPECT_EQ(serial.records[i].blocks_matched, parallel.records[i].blocks_matched);
  }
}

TEST(Experiment, RejectsZeroTrials) { EXPECT_THROW(run_experiment(small_config(0)), std::invalid_argument); }

TEST(AttackDemo, PassiveHasNoErrors) {
  const auto r = attack_demo(ProtocolParams::with_test_size(30000, 0.1, 200), 0, 0, 5, RngSeed{1});
  EXPECT_EQ(r.predicted_ebar, 0.0);
  EXPECT_EQ(r.measured_ebar, 0.0);
  EXPECT_EQ(r.measured_e1, 0.0);
  EXPECT_EQ(r.refined_abort_rate, 0.0);
}

TEST(AttackDemo, BalancedBasesFullDiagonalAttack) {
  const auto r = attack_demo(ProtocolParams::with_test_size(20000, 0.5, 500), 0, 1, 20, RngSeed{2});
  EXPECT_DOUBLE_EQ(r.predicted_ebar, 0.25);
  EXPECT_NEAR(r.measured_ebar, 0.25, 0.03);
  EXPECT_NEAR(r.measured_e1, 0.5, 0.03);
  EXPECT_EQ(r.measured_e2, 0.0);
  EXPECT_EQ(r.refined_abort_rate, 1.0);
  EXPECT_FALSE(format_report(r).empty());
}

}  // namespace
}  // namespace bb84
