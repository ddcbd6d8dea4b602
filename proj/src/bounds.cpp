#include "bb84/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace bb84::bounds {

namespace {

using boost::multiprecision::cpp_int;

constexpr double kLn2 = std::numbers::ln2;

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

double xlog2x(double x) { return x <= 0.0 ? 0.0 : x * std::log2(x); }

double log_binomial(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

cpp_int binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  cpp_int r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

void check_instance(const SamplingInstance& inst) {
  if (inst.n_total == 0 || inst.n_test > inst.n_total || inst.whites > inst.n_total) {
    throw DomainError("sampling instance needs n_test <= n_total and whites <= n_total");
  }
}

}  // namespace

double binary_entropy(double x) {
  if (!in_unit_interval(x)) throw DomainError(fmt::format("binary_entropy: {} outside [0, 1]", x));
  return -xlog2x(x) - xlog2x(1.0 - x);
}

std::uint64_t SamplingInstance::threshold_count() const {
  return static_cast<std::uint64_t>(std::floor(lambda * static_cast<double>(n_test)));
}

SamplingInstance SamplingInstance::from_fraction(std::uint64_t n_total, std::uint64_t n_test, double p_bad,
                                                 double lambda) {
  if (!in_unit_interval(p_bad)) throw DomainError("p_bad must lie in [0, 1]");
  const double whites = p_bad * static_cast<double>(n_total);
  if (std::abs(whites - std::round(whites)) > 1e-9) {
    throw DomainError(fmt::format("p_bad * n_total = {} is not an integer", whites));
  }
  return {n_total, n_test, static_cast<std::uint64_t>(std::llround(whites)), lambda};
}

double hypergeometric_pmf(const SamplingInstance& inst, std::uint64_t j) {
  check_instance(inst);
  const std::uint64_t blacks = inst.n_total - inst.whites;
  if (j > inst.n_test || j > inst.whites || inst.n_test - j > blacks) return 0.0;
  return std::exp(log_binomial(inst.whites, j) + log_binomial(blacks, inst.n_test - j) -
                  log_binomial(inst.n_total, inst.n_test));
}

Rational exact_lower_tail(const SamplingInstance& inst) {
  check_instance(inst);
  const std::uint64_t blacks = inst.n_total - inst.whites;
  const std::uint64_t jmax = std::min(inst.threshold_count(), inst.n_test);
  cpp_int favourable = 0;
  for (std::uint64_t j = 0; j <= jmax; ++j) {
    if (inst.n_test - j > blacks) continue;
    favourable += binomial(inst.whites, j) * binomial(blacks, inst.n_test - j);
  }
  return Rational(favourable, binomial(inst.n_total, inst.n_test));
}

double exponent_A(double lambda, double p_bad) {
  if (!(lambda >= 0.0 && lambda <= p_bad && p_bad < 1.0) || !std::isfinite(lambda)) {
    throw DomainError(fmt::format("exponent_A needs 0 <= lambda <= p < 1 (lambda = {}, p = {})", lambda, p_bad));
  }
  if (lambda == p_bad) return 0.0;
  // lambda * log2(lambda / p) + (1 - lambda) * log2((1 - lambda) / (1 - p)), the
  // same quantity with the H(lambda) term folded in.
  double a = (1.0 - lambda) * (std::log1p(-lambda) - std::log1p(-p_bad)) / kLn2;
  if (lambda > 0.0) a += lambda * std::log2(lambda / p_bad);
  return std::max(a, 0.0);
}

Lemma1Bound lemma1_bound(const SamplingInstance& inst) {
  check_instance(inst);
  const double p = inst.p_bad();
  if (inst.n_test <= 1 || inst.n_test >= inst.n_total) {
    throw DomainError("lemma1_bound needs 1 < n_test < n_total");
  }
  if (!(inst.lambda >= 0.0 && inst.lambda < p)) {
    throw DomainError(fmt::format("lemma1_bound needs 0 <= lambda < p_bad (lambda = {}, p_bad = {})", inst.lambda, p));
  }
  const double n = static_cast<double>(inst.n_test);
  const double correction = n / ((static_cast<double>(inst.n_total) - n) * kLn2);
  Lemma1Bound b;
  b.exponent_bits = n * (exponent_A(inst.lambda, p) - correction);
  b.unclamped = std::exp2(-b.exponent_bits);
  b.value = std::min(1.0, b.unclamped);
  return b;
}

double theorem2_bound(double delta, std::uint64_t k) {
  if (!(delta >= 0.0 && delta < 1.0) || k < 1) {
    throw DomainError("theorem2_bound needs 0 <= delta < 1 and k >= 1");
  }
  if (delta == 0.0) return 0.0;
  // log2(2^{2k} - 1) = 2k + log2(1 - 2^{-2k})
  const double two_k = 2.0 * static_cast<double>(k);
  const double log2_states = two_k + std::log1p(-std::exp2(-two_k)) / kLn2;
  return -(1.0 - delta) * std::log1p(-delta) / kLn2 - delta * std::log2(delta) + delta * log2_states;
}

double theorem2_asymptotic(double delta, std::uint64_t k) {
  if (!(delta >= 0.0 && delta < 1.0) || k < 1) {
    throw DomainError("theorem2_asymptotic needs 0 <= delta < 1 and k >= 1");
  }
  if (delta == 0.0) return 0.0;
  return delta * (1.0 / kLn2 + 2.0 * static_cast<double>(k) - std::log2(delta));
}

FidelityBound theorem3_fidelity(double eps1, double eps2) {
  if (!(eps2 > 0.0 && eps2 <= 1.0)) throw DomainError("theorem3_fidelity needs 0 < eps2 <= 1");
  if (!(eps1 >= 0.0) || !std::isfinite(eps1)) throw DomainError("theorem3_fidelity needs eps1 >= 0");
  const double ratio = eps1 / eps2;
  if (ratio >= 1.0) return {0.0, true};
  return {1.0 - ratio, false};
}

FidelityBudget fidelity_budget(double eps1, double eps2) {
  const auto f = theorem3_fidelity(eps1, eps2);
  FidelityBudget b{eps1, eps2, eps1 / eps2, 1.0 - f.fidelity, false};
  if (f.vacuous || b.eps > 0.1) {
    throw DomainError(fmt::format("eps1/eps2 = {} is not small (must be at most 0.1)", b.eps));
  }
  b.delta = b.eps;
  b.warning = b.eps > 0.01;
  return b;
}

std::string_view to_string(RateVariant v) {
  switch (v) {
    case RateVariant::CssShannon: return "css_shannon";
    case RateVariant::CssGilbertVarshamov: return "css_gv";
    case RateVariant::Mayers: return "mayers";
  }
  return "?";
}

std::optional<RateVariant> parse_rate_variant(std::string_view s) {
  if (s == "css_shannon") return RateVariant::CssShannon;
  if (s == "css_gv") return RateVariant::CssGilbertVarshamov;
  if (s == "mayers") return RateVariant::Mayers;
  return std::nullopt;
}

KeyRate key_rate(double e, RateVariant variant) {
  const double limit = variant == RateVariant::CssShannon ? 0.5 : 0.25;
  if (!(e >= 0.0 && e < limit)) {
    throw DomainError(fmt::format("{} rate needs 0 <= e < {}", to_string(variant), limit));
  }
  double raw = 0.0;
  switch (variant) {
    case RateVariant::CssShannon: raw = 1.0 - 2.0 * binary_entropy(e); break;
    case RateVariant::CssGilbertVarshamov: raw = 1.0 - 2.0 * binary_entropy(2.0 * e); break;
    case RateVariant::Mayers: raw = 1.0 - binary_entropy(e) - binary_entropy(2.0 * e); break;
  }
  return {raw, std::max(raw, 0.0), raw > 0.0};
}

double rate_threshold(RateVariant variant, double tolerance) {
  double lo = 0.0;
  double hi = variant == RateVariant::CssShannon ? 0.5 : 0.25;
  hi = std::nextafter(hi, 0.0);
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (key_rate(mid, variant).raw > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

SecurityParams SecurityParams::with_scaled_s(double u, double c, double a_prime, std::uint64_t k,
                                             std::uint64_t N) {
  if (!(a_prime >= 0.0 && a_prime <= 1.0) || !(c > 0.0)) throw DomainError("need c > 0 and 0 <= a' <= 1");
  return {u, c * std::pow(static_cast<double>(N), a_prime), k, N};
}

ParameterPlan plan_parameters(const SecurityParams& sec, double lambda_test, double p_bad_assumed,
                              const PlannerOptions& options) {
  if (!(sec.u > 0.0) || !(sec.s > 0.0) || sec.k < 1 || sec.N < 4) {
    throw DomainError("planner needs u > 0, s > 0, k >= 1 and N >= 4");
  }
  if (!(lambda_test >= 0.0 && lambda_test < p_bad_assumed && p_bad_assumed < 1.0)) {
    throw DomainError("planner needs 0 <= lambda_test < p_bad < 1");
  }
  if (options.delta_prime && !(*options.delta_prime > 0.0)) throw DomainError("delta' must be positive");
  if (!options.delta_prime && !(options.delta_prime_fraction > 0.0 && options.delta_prime_fraction < 1.0)) {
    throw DomainError("relative delta' must lie in (0, 1)");
  }

  ParameterPlan plan;
  plan.alpha_raw = exponent_A(lambda_test, p_bad_assumed);
  const double N = static_cast<double>(sec.N);
  const double log2k = std::log2(static_cast<double>(sec.k));
  const double target = -(sec.u + sec.s);

  auto geometry = [&](std::uint64_t n_test) {
    const double n = static_cast<double>(n_test);
    double p2 = 0.0;
    double dp = 0.0;
    if (options.delta_prime) {
      dp = *options.delta_prime;
      p2 = n / N + dp;
    } else {
      p2 = n / (N * (1.0 - options.delta_prime_fraction));
      dp = options.delta_prime_fraction * p2;
    }
    double p = std::sqrt(p2);
    // Round p up until N(p² - δ') >= n_test holds in floating point too.
    while (N * (p * p - dp) < n) {
      p = std::nextafter(p, INFINITY);
      p2 = p * p;
      if (!options.delta_prime) dp = options.delta_prime_fraction * p2;
    }
    const double key_block = N * ((1.0 - p) * (1.0 - p) - p2 - dp);
    return std::tuple{p, dp, key_block};
  };

  // alpha <= A, so no n_test below this can satisfy the scaling condition.
  const double start = std::ceil((log2k - target) / plan.alpha_raw);
  std::uint64_t n_test = static_cast<std::uint64_t>(std::max(2.0, start));
  double previous_margin = -INFINITY;
  for (;; ++n_test) {
    auto [p, dp, key_block] = geometry(n_test);
    if (p > 0.5 || key_block <= 0.0) {
      plan.reason = fmt::format("n_test = {} needs p = {:.4f}; the biased geometry allows at most p = 1/2", n_test, p);
      return plan;
    }
    const double n = static_cast<double>(n_test);
    const double alpha = plan.alpha_raw - n / (key_block * kLn2);
    const double log2_eps1 = -n * alpha;
    const double log2_eps = sec.u + log2_eps1;
    const double ratio = log2k + log2_eps1 - target;
    const double margin = n * alpha;
    if (margin <= previous_margin) {
      plan.reason = "finite-population correction outweighs the sampling exponent; increase N";
      return plan;
    }
    previous_margin = margin;
    if (ratio > 0.0 || log2_eps >= 0.0) continue;

    const double eps = std::exp2(log2_eps);
    const double i_eve = eps < 1.0 ? theorem2_bound(eps, sec.k) : INFINITY;
    if (i_eve > std::exp2(-sec.s)) {
      plan.information_bound_binding = true;
      continue;
    }
    plan.feasible = true;
    plan.n_test = n_test;
    plan.p = p;
    plan.delta_prime = dp;
    plan.n_total = n + key_block;
    plan.alpha = alpha;
    plan.log2_eps1 = log2_eps1;
    plan.log2_eps = log2_eps;
    plan.i_eve_bound = i_eve;
    plan.log2_scaling_ratio = ratio;
    plan.reason = plan.information_bound_binding ? "Eve-information bound was binding" : "scaling condition was binding";
    return plan;
  }
}

}  // namespace bb84::bounds
