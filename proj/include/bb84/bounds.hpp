#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace bb84::bounds {

using Rational = boost::multiprecision::cpp_rational;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// H(x) in bits, with H(0) = H(1) = 0.
double binary_entropy(double x);

/// Drawing n_test balls without replacement from n_total, of which `whites`
/// are white (bad). lambda is the observed-fraction threshold.
struct SamplingInstance {
  std::uint64_t n_total = 0;
  std::uint64_t n_test = 0;
  std::uint64_t whites = 0;
  double lambda = 0.0;

  double p_bad() const { return static_cast<double>(whites) / static_cast<double>(n_total); }
  /// floor(lambda * n_test)
  std::uint64_t threshold_count() const;

  /// p_bad * n_total must be integral (within 1e-9).
  static SamplingInstance from_fraction(std::uint64_t n_total, std::uint64_t n_test, double p_bad, double lambda);
};

/// P(exactly j whites), evaluated in log space.
double hypergeometric_pmf(const SamplingInstance& inst, std::uint64_t j);

/// Exact P(X <= floor(lambda n_test)) as a rational number.
Rational exact_lower_tail(const SamplingInstance& inst);

/// A(lambda, p) = -H(lambda) - lambda log2 p - (1 - lambda) log2(1 - p),
/// for 0 <= lambda <= p < 1.
double exponent_A(double lambda, double p_bad);

struct Lemma1Bound {
  /// n_test * (A - n_test / ((n_total - n_test) ln 2)); the bound is 2^-exponent.
  double exponent_bits = 0.0;
  double unclamped = 0.0;
  /// min(1, unclamped)
  double value = 0.0;
};

/// Upper bound on P(X <= floor(lambda n_test)) for n_test > 1 and
/// 0 <= lambda < p_bad; DomainError otherwise.
Lemma1Bound lemma1_bound(const SamplingInstance& inst);

/// -(1-δ)log2(1-δ) - δ log2(δ / (2^{2k} - 1)), evaluated without forming 2^{2k}.
double theorem2_bound(double delta, std::uint64_t k);
/// δ (1/ln 2 + 2k + log2(1/δ)), the first-order form.
double theorem2_asymptotic(double delta, std::uint64_t k);

struct FidelityBound {
  double fidelity = 1.0;
  bool vacuous = false;  // eps1 >= eps2
};

/// 1 - eps1/eps2, floored at 0.
FidelityBound theorem3_fidelity(double eps1, double eps2);

struct FidelityBudget {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  bool warning = false;  // eps above 0.01
};

/// Requires eps = eps1/eps2 <= 0.1.
FidelityBudget fidelity_budget(double eps1, double eps2);

enum class RateVariant { CssShannon, CssGilbertVarshamov, Mayers };

std::string_view to_string(RateVariant v);
std::optional<RateVariant> parse_rate_variant(std::string_view s);

struct KeyRate {
  double raw = 0.0;   // may be negative
  double rate = 0.0;  // max(raw, 0)
  bool feasible = false;
};

/// CssShannon: 1 - 2H(e); CssGilbertVarshamov: 1 - 2H(2e) (e < 1/4);
/// Mayers: 1 - H(e) - H(2e) (e < 1/4).
KeyRate key_rate(double e, RateVariant variant);

/// Smallest error rate at which the variant's rate reaches zero (bisection).
double rate_threshold(RateVariant variant, double tolerance = 1e-12);

struct SecurityParams {
  double u = 0.0;         // eps2 = 2^-u
  double s = 0.0;         // I_eve bound = 2^-s
  std::uint64_t k = 0;    // final key length
  std::uint64_t N = 0;    // transmitted qubits

  /// s = c N^{a'} with 0 <= a' <= 1.
  static SecurityParams with_scaled_s(double u, double c, double a_prime, std::uint64_t k, std::uint64_t N);
};

struct PlannerOptions {
  /// Absolute planning slack δ'. When unset, δ' = delta_prime_fraction * p².
  std::optional<double> delta_prime;
  double delta_prime_fraction = 0.1;
};

struct ParameterPlan {
  bool feasible = false;
  std::string reason;

  std::uint64_t n_test = 0;
  double p = 0.0;
  double delta_prime = 0.0;
  /// Population used for the finite-size correction: n_test plus the
  /// key-block length N[(1-p)² - p² - δ'].
  double n_total = 0.0;
  double alpha_raw = 0.0;  // A(lambda_test, p_bad)
  double alpha = 0.0;      // A minus the finite-population correction at n_test
  double log2_eps1 = 0.0;
  double log2_eps = 0.0;  // log2(eps1 / eps2)
  double i_eve_bound = 0.0;
  /// log2 of k 2^{-n_test alpha} / 2^{-(u+s)}; nonpositive when satisfied.
  double log2_scaling_ratio = 0.0;
  bool information_bound_binding = false;
};

/// Minimal n_test with k 2^{-n_test alpha} <= 2^{-(u+s)} and with the Eve
/// information bound at eps = 2^{u - n_test alpha} at most 2^{-s}; then p from
/// N(p² - δ') = n_test. Infeasible when p would exceed 1/2 or no n_test works.
ParameterPlan plan_parameters(const SecurityParams& sec, double lambda_test, double p_bad_assumed,
                              const PlannerOptions& options = {});

}  // namespace bb84::bounds
