#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "raresplit/rational.hpp"
#include "raresplit/simulation.hpp"

namespace raresplit {

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool upper_infinite = false;
  double sigma2 = 0.0;
  double z = 0.0;
};

/// Two-sided normal quantile z with P(|Z| <= z) = 1 - alpha.
double normal_quantile(double alpha);

/// Interval for a product of level probabilities: sigma^2 = sum (1 - g_i) / g_i with
/// plug-in g_i, h = z sigma / sqrt(n), [g / (1 + h), g / (1 - h)], upper bound infinite
/// when h >= 1. Throws std::domain_error if some g_i is zero.
ConfidenceInterval confidence_interval(const std::vector<double>& gamma_i, std::uint64_t n, double alpha);

enum class RunStatus { Ok, Extinct, Stagnation, MemoryCap, IterationCap };

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);

struct Estimate {
  std::string estimator;
  RunStatus status = RunStatus::Ok;
  std::string diagnostic;
  int extinct_level = -1;

  double gamma_hat = 0.0;
  Rational gamma_exact{0};  // product of the level fractions
  std::vector<Score> levels;
  std::vector<double> gamma_i;
  std::vector<std::uint64_t> reached;  // n' per level, summed over clients

  std::uint64_t n = 0;  // per-level budget per client (N for Monte Carlo)
  std::uint64_t k = 1;
  double alpha = 0.05;
  bool has_ci = false;
  ConfidenceInterval ci;

  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t trace_length = 0;  // horizon + 1: length of one Monte Carlo trace
  double wall_seconds = 0.0;

  bool valid() const { return status == RunStatus::Ok; }
};

nlohmann::json to_json(const Estimate& e);
Estimate estimate_from_json(const nlohmann::json& j);

Estimate monte_carlo(const Problem& problem, std::uint64_t samples, std::uint64_t seed, double alpha = 0.05);

/// Fixed-level splitting with one client: levels must end at the problem's threshold.
Estimate fixed_level(const Problem& problem, const std::vector<Score>& levels, std::uint64_t n, std::uint64_t seed, double alpha = 0.05,
                     unsigned workers = 1);

struct AdaptiveOptions {
  double proportion = 0.9;
  std::uint64_t max_iterations = 10'000;
  std::uint64_t memory_cap = 2'000'000;  // stored product states over all traces
};

Estimate adaptive(const Problem& problem, const AdaptiveOptions& options, std::uint64_t n, std::uint64_t seed, double alpha = 0.05);

/// Fills gamma_hat, gamma_exact and the interval from reached counts out of `trials` per level.
void finish_levels(Estimate& e, std::uint64_t trials);

}  // namespace raresplit
