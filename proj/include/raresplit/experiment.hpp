#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "raresplit/splitting.hpp"

namespace raresplit {

struct ExperimentConfig {
  std::string name;
  std::string model;  // path, relative paths resolve against the config file directory
  std::string property;
  std::string score;
  std::optional<Score> threshold;  // defaults to the last fixed level
  std::string estimator = "fixed";  // mc | fixed | adaptive | distributed-fixed | instances
  std::string instance_estimator = "fixed";  // fixed | adaptive, for `instances`
  std::vector<Score> levels;
  std::optional<double> proportion;
  std::uint64_t budget = 1000;
  std::uint64_t clients = 1;  // k for distributed-fixed
  std::uint64_t workers = 1;  // j for instances
  std::uint64_t repeats = 1;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::uint64_t max_iterations = 10'000;
  std::uint64_t memory_cap = 2'000'000;
  unsigned threads = 1;
  std::string out;  // output directory; empty writes nothing

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Reads a config file; relative model and output paths are rewritten against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Throws std::invalid_argument describing the first problem.
void validate(const ExperimentConfig& c);

struct EcdfPoint {
  double estimate = 0.0;
  double cumprob = 0.0;
  friend bool operator==(const EcdfPoint&, const EcdfPoint&) = default;
};

struct Summary {
  std::string name;
  std::string estimator;
  std::uint64_t repeats = 0;
  std::uint64_t valid = 0;
  std::uint64_t extinct = 0;
  double mean = 0.0;
  std::optional<double> std_dev;  // absent with fewer than two valid estimates
  double levels = 0.0;            // mean number of levels per run
  std::string budget;             // "1000", "5x1000"
  double total_wall = 0.0;
  double mean_wall = 0.0;
  double mean_steps = 0.0;
  std::uint64_t trace_length = 0;
  std::optional<double> mc_seconds;  // projected Monte Carlo time for the same std dev
};

nlohmann::json to_json(const Summary& s);
Summary summary_from_json(const nlohmann::json& j);

struct EcdfTable {
  std::vector<EcdfPoint> points;  // valid estimates, ascending, cumprob i / R
  Summary summary;
};

/// Sorted ECDF and summary statistics of a list of estimates.
EcdfTable make_table(const std::string& name, const std::string& estimator, const std::string& budget, const std::vector<Estimate>& estimates);

std::string ecdf_csv(const std::vector<EcdfPoint>& points);
std::vector<EcdfPoint> parse_ecdf_csv(const std::string& text);

struct ExperimentResult {
  std::vector<Estimate> estimates;
  EcdfTable table;
};

/// Compiles everything first, then runs the repeats with seeds derive_seed(seed, r).
/// Writes ecdf.csv, summary.json and estimates.jsonl when `out` is set.
ExperimentResult run_experiment(const ExperimentConfig& c, const std::function<void(std::uint64_t, const Estimate&)>& progress = {});

/// One estimate for the given config and seed.
Estimate run_once(const ExperimentConfig& c, const Problem& problem, std::uint64_t seed);

Problem load_problem(const ExperimentConfig& c);

/// Fixed-width comparison table of summaries.
std::string summarize(const std::vector<Summary>& rows);

std::string format_duration(double seconds);

}  // namespace raresplit
