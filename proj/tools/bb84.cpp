// Command-line front end: simulation runs, the attack comparison, parameter
// planning, bound evaluation, code validation and the networked endpoints.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bb84/bounds.hpp"
#include "bb84/config.hpp"
#include "bb84/experiment.hpp"
#include "bb84/net.hpp"
#include "bb84/transcript_io.hpp"

namespace {

using namespace bb84;

struct SessionOptions {
  std::uint64_t n = 100000;
  double bias_p = 0.1;
  std::uint64_t m1 = 200;
  std::uint64_t m2 = 200;
  double e_max = 0.11;
  double delta_e = 0.01;
  std::optional<std::string> eve;
  std::optional<double> depolarize;
  std::optional<std::string> code;
  std::uint64_t seed = 1;

  ProtocolParams params() const {
    ProtocolParams p;
    p.N = n;
    p.p = bias_p;
    p.m1 = m1;
    p.m2 = m2;
    p.e_max = e_max;
    p.delta_e = delta_e;
    return p;
  }
  AttackStrategy strategy() const {
    std::optional<std::pair<double, double>> pair;
    if (eve) pair = parse_probability_pair(*eve);
    return strategy_from_options(pair, depolarize);
  }
  CssPair css() const { return code ? load_css_pair(*code) : steane_pair(); }
};

void add_session_options(CLI::App* cmd, SessionOptions& o, bool with_attack = true) {
  cmd->add_option("--n", o.n, "Qubits transmitted per session")->capture_default_str();
  cmd->add_option("--bias-p", o.bias_p, "Probability of the rectilinear basis")->capture_default_str();
  cmd->add_option("--m1", o.m1, "Rectilinear test sample size")->capture_default_str();
  cmd->add_option("--m2", o.m2, "Diagonal test sample size")->capture_default_str();
  cmd->add_option("--e-max", o.e_max, "Tolerated error rate")->capture_default_str();
  cmd->add_option("--delta-e", o.delta_e, "Estimation margin")->capture_default_str();
  if (with_attack) {
    auto* eve = cmd->add_option("--eve", o.eve, "Intercept-resend attack as p1,p2");
    cmd->add_option("--depolarize", o.depolarize, "Symmetric Pauli noise weight w (flip rate 2w)")->excludes(eve);
  }
  cmd->add_option("--code", o.code, "CSS code pair file (default: Steane)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
}

int cmd_run(const SessionOptions& o, std::uint64_t trials, unsigned threads, const std::optional<std::string>& csv,
            const std::optional<std::string>& transcript) {
  ExperimentConfig config;
  config.params = o.params();
  config.strategy = o.strategy();
  config.css = o.css();
  config.trials = trials;
  config.seed = RngSeed{o.seed};
  config.threads = threads;
  if (csv) config.csv_path = *csv;
  const auto result = run_experiment(config);
  std::cout << "strategy: " << describe(config.strategy) << '\n' << format_summary(result.summary);
  if (transcript) {
    const auto first = run_session(config.params, config.strategy, config.css,
                                   RngSeed{derive_seed(config.seed, Stream::Trial, 0)});
    save_transcript(*transcript, first.transcript);
  }
  return 0;
}

int cmd_attack_demo(const SessionOptions& o, std::uint64_t trials) {
  const auto [p1, p2] = o.eve ? parse_probability_pair(*o.eve) : std::pair{0.0, 1.0};
  const auto report = attack_demo(o.params(), p1, p2, trials, RngSeed{o.seed}, o.css());
  std::cout << format_report(report);
  return 0;
}

struct PlanOptions {
  std::uint64_t k = 256;
  double u = 20;
  double s = 20;
  std::uint64_t n = 1000000;
  double e_max = 0.11;
  double delta_e = 0.01;
  std::optional<double> p_bad;
  std::optional<double> delta_prime;
};

int cmd_plan(const PlanOptions& o) {
  const double lambda = o.e_max - o.delta_e;
  const double p_bad = o.p_bad.value_or(o.e_max);
  bounds::PlannerOptions options;
  options.delta_prime = o.delta_prime;
  const auto plan = bounds::plan_parameters({o.u, o.s, o.k, o.n}, lambda, p_bad, options);
  fmt::print("inputs: k={} u={} s={} N={} lambda={} p_bad={}\n", o.k, o.u, o.s, o.n, lambda, p_bad);
  if (!plan.feasible) {
    fmt::print("infeasible: {}\n", plan.reason);
    return 1;
  }
  fmt::print("n_test={} p={:.6f} delta'={:.3g}\n", plan.n_test, plan.p, plan.delta_prime);
  fmt::print("alpha={:.6f} (A={:.6f}, finite-population correction applied)\n", plan.alpha, plan.alpha_raw);
  fmt::print("log2 eps1={:.3f} log2 eps={:.3f} I_eve bound={:.3e}\n", plan.log2_eps1, plan.log2_eps, plan.i_eve_bound);
  fmt::print("scaling condition k 2^(-n_test alpha) <= 2^-(u+s), with the unit constant: margin {:.3f} bits\n",
             -plan.log2_scaling_ratio);
  if (plan.information_bound_binding) fmt::print("the information bound, not the scaling condition, set n_test\n");
  return 0;
}

struct BoundsOptions {
  std::optional<std::uint64_t> n_total;
  std::optional<std::uint64_t> n_test;
  double p_bad = 0.5;
  double lambda = 0.1;
  std::optional<double> delta;
  std::uint64_t k = 1;
  std::optional<double> error_rate;
};

int cmd_bounds(const BoundsOptions& o) {
  using namespace bounds;
  fmt::print("rate thresholds: shannon={:.6f} gilbert-varshamov={:.6f} mayers={:.6f}\n",
             rate_threshold(RateVariant::CssShannon), rate_threshold(RateVariant::CssGilbertVarshamov),
             rate_threshold(RateVariant::Mayers));
  if (o.n_total && o.n_test) {
    const auto inst = SamplingInstance::from_fraction(*o.n_total, *o.n_test, o.p_bad, o.lambda);
    const auto bound = lemma1_bound(inst);
    const auto tail = exact_lower_tail(inst);
    fmt::print("sampling n_total={} n_test={} whites={} lambda={}\n", inst.n_total, inst.n_test, inst.whites,
               inst.lambda);
    fmt::print("  A={:.6f} bound={:.6g} exact tail={:.6g}\n", exponent_A(o.lambda, inst.p_bad()), bound.value,
               static_cast<double>(tail));
  }
  if (o.delta) {
    fmt::print("information bound delta={} k={}: exact={:.6g} asymptotic={:.6g}\n", *o.delta, o.k,
               theorem2_bound(*o.delta, o.k), theorem2_asymptotic(*o.delta, o.k));
  }
  if (o.error_rate) {
    for (auto v : {RateVariant::CssShannon, RateVariant::CssGilbertVarshamov, RateVariant::Mayers}) {
      try {
        const auto r = key_rate(*o.error_rate, v);
        fmt::print("rate[{}] at e={}: {:.6f}{}\n", to_string(v), *o.error_rate, r.raw, r.feasible ? "" : " (no key)");
      } catch (const DomainError& e) {
        fmt::print("rate[{}] at e={}: undefined ({})\n", to_string(v), *o.error_rate, e.what());
      }
    }
  }
  return 0;
}

int cmd_codes_validate(const std::string& path) {
  const auto css = load_css_pair(path);
  fmt::print("n={} k={} t={}\n", css.n(), css.k, css.t);
  fmt::print("C1: dim={} d={}{}\n", css.c1.k_dim(), css.c1.d(), css.c1.distance_verified() ? "" : " (claimed)");
  const auto dual = css.c2.dual();
  fmt::print("C2: dim={}; dual distance={}{}\n", css.c2.k_dim(), dual.d(), dual.distance_verified() ? "" : " (claimed)");
  return 0;
}

struct ServeOptions {
  std::string role;
  std::optional<std::string> listen;
  std::optional<std::string> connect;
  std::optional<std::string> transcript;
  std::optional<std::string> outcome;
  double timeout_s = 60;
};

int cmd_serve(const SessionOptions& o, const ServeOptions& s) {
  const auto params = o.params();
  const auto strategy = o.strategy();
  const auto css = o.css();
  const RngSeed seed{o.seed};
  const auto hash = config_hash(params, strategy, css, seed);
  const net::Timeout timeout{static_cast<long>(s.timeout_s * 1000)};
  auto need = [&](const std::optional<std::string>& v, const char* flag) {
    if (!v) throw CLI::ValidationError(fmt::format("--role {} requires {}", s.role, flag));
    return net::parse_address(*v);
  };

  SessionTranscript transcript;
  std::string error;
  std::optional<PartyOutcome> outcome;
  if (s.role == "relay") {
    auto listener = net::Listener::open(need(s.listen, "--listen"));
    net::Connection to_bob(net::connect(need(s.connect, "--connect"), timeout));
    net::Connection from_alice(listener.accept(timeout));
    auto r = net::run_relay(strategy, seed, hash, from_alice, to_bob, timeout);
    transcript = std::move(r.transcript);
    error = std::move(r.error);
  } else {
    const SessionConfig config{params, css};
    net::EndpointResult r;
    if (s.role == "bob") {
      auto listener = net::Listener::open(need(s.listen, "--listen"));
      net::Connection peer(listener.accept(timeout));
      r = net::run_bob(config, seed, hash, peer, timeout);
    } else {
      net::Connection peer(net::connect(need(s.connect, "--connect"), timeout));
      r = net::run_alice(config, seed, hash, peer, timeout);
    }
    transcript = std::move(r.transcript);
    error = std::move(r.error);
    outcome = std::move(r.outcome);
  }

  if (s.transcript) save_transcript(*s.transcript, transcript);
  if (outcome) {
    const auto j = to_json(*outcome);
    if (s.outcome) std::ofstream(*s.outcome) << j.dump(2) << '\n';
    fmt::print("{}: {}\n", s.role, to_string(outcome->status));
    if (outcome->status == SessionStatus::Accepted) {
      fmt::print("key bits: {}, digests {}\n", outcome->key.size(),
                 outcome->own_digest == outcome->peer_digest ? "match" : "differ");
    }
  }
  if (!error.empty()) {
    fmt::print(stderr, "{}: {}\n", s.role, error);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biased-basis BB84 simulator and analysis toolkit"};
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
  app.require_subcommand(1);

  SessionOptions run_opts;
  std::uint64_t trials = 100;
  unsigned threads = 1;
  std::optional<std::string> csv, transcript;
  auto* run = app.add_subcommand("run", "Run seeded sessions and summarize them");
  add_session_options(run, run_opts);
  run->add_option("--trials", trials, "Number of sessions")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--out", csv, "Per-trial CSV output");
  run->add_option("--transcript", transcript, "Write the transcript of the first trial");

  SessionOptions demo_opts;
  std::uint64_t demo_trials = 200;
  auto* demo = app.add_subcommand("attack-demo", "Compare naive and per-basis error estimates under attack");
  add_session_options(demo, demo_opts);
  demo->add_option("--trials", demo_trials, "Number of sessions")->capture_default_str()->check(CLI::PositiveNumber);

  PlanOptions plan_opts;
  auto* plan = app.add_subcommand("plan", "Choose test size and basis bias for a security target");
  plan->add_option("--k", plan_opts.k, "Final key length")->capture_default_str();
  plan->add_option("--u", plan_opts.u, "Sampling confidence exponent")->capture_default_str();
  plan->add_option("--s", plan_opts.s, "Eve information exponent")->capture_default_str();
  plan->add_option("--n", plan_opts.n, "Qubits transmitted")->capture_default_str();
  plan->add_option("--e-max", plan_opts.e_max)->capture_default_str();
  plan->add_option("--delta-e", plan_opts.delta_e)->capture_default_str();
  plan->add_option("--p-bad", plan_opts.p_bad, "Bad fraction the test must catch (default: e-max)");
  plan->add_option("--delta-prime", plan_opts.delta_prime, "Absolute slack (default: p^2/10)");

  BoundsOptions bounds_opts;
  auto* bnd = app.add_subcommand("bounds", "Evaluate sampling, information and rate bounds");
  bnd->add_option("--n-total", bounds_opts.n_total);
  bnd->add_option("--n-test", bounds_opts.n_test);
  bnd->add_option("--p-bad", bounds_opts.p_bad)->capture_default_str();
  bnd->add_option("--lambda", bounds_opts.lambda)->capture_default_str();
  bnd->add_option("--delta", bounds_opts.delta);
  bnd->add_option("--k", bounds_opts.k)->capture_default_str();
  bnd->add_option("--error-rate", bounds_opts.error_rate);

  std::string code_path;
  auto* codes = app.add_subcommand("codes", "Code utilities");
  codes->require_subcommand(1);
  auto* validate_cmd = codes->add_subcommand("validate", "Check a CSS code pair file");
  validate_cmd->add_option("--code,code", code_path, "Pair file")->required()->check(CLI::ExistingFile);

  SessionOptions serve_opts;
  ServeOptions serve;
  auto* srv = app.add_subcommand("serve", "Run one endpoint of a networked session");
  add_session_options(srv, serve_opts);
  srv->add_option("--role", serve.role)->required()->check(CLI::IsMember({"alice", "bob", "relay"}));
  srv->add_option("--listen", serve.listen, "host:port to accept on (bob, relay)");
  srv->add_option("--connect", serve.connect, "host:port to dial (alice, relay)");
  srv->add_option("--transcript", serve.transcript, "Transcript output");
  srv->add_option("--outcome", serve.outcome, "Outcome JSON output");
  srv->add_option("--timeout", serve.timeout_s, "Seconds to wait on the network")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, trials, threads, csv, transcript);
    if (*demo) return cmd_attack_demo(demo_opts, demo_trials);
    if (*plan) return cmd_plan(plan_opts);
    if (*bnd) return cmd_bounds(bounds_opts);
    if (*validate_cmd) return cmd_codes_validate(code_path);
    if (*srv) return cmd_serve(serve_opts, serve);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
