#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raresplit/formula.hpp"
#include "raresplit/model.hpp"
#include "raresplit/observer.hpp"
#include "raresplit/rng.hpp"
#include "raresplit/score.hpp"

namespace raresplit {

/// Source texts plus their compiled forms. `program` is null for formulas outside
/// the restricted logic; `score` is empty when no score expression was given.
struct Problem {
  std::string model_source;
  std::string formula_source;
  std::string score_source;
  Score threshold;

  ModelPtr model;
  FormulaPtr formula;
  ObserverProgramPtr program;
  std::optional<ScoreFn> score;

  bool restricted() const { return program != nullptr; }
};

/// Compiles all three texts. A non-empty score requires a restricted formula.
Problem make_problem(const std::string& model_source, const std::string& formula_source, const std::string& score_source = "",
                     Score threshold = Score(0));

/// Joint state of the model, the observer network and the running maximum score.
struct ProductState {
  ModelState model;
  ObserverNetwork observers;
  Score max_score;

  Tri verdict() const { return observers.verdict(); }
};

/// Stateless driver of product states for one problem; safe to share between threads.
class Simulator {
 public:
  explicit Simulator(const Problem& problem);

  const Problem& problem() const { return *problem_; }

  ProductState initial() const;
  /// One model transition followed by one observer step and score update.
  void advance(ProductState& s, Rng& rng) const;
  /// Advances until the running maximum reaches `level` or the verdict is decided.
  bool run_to_level(ProductState& s, Rng& rng, const Score& level, std::uint64_t& steps) const;
  /// Advances until decided; appends every state that raises the running maximum to `records`.
  Tri run_to_decision(ProductState& s, Rng& rng, std::uint64_t& steps, std::vector<ProductState>* records = nullptr) const;

  /// Variables (i64 each), observer snapshot, running max (i64 numerator, u64 denominator), step (u64).
  std::vector<std::uint8_t> encode(const ProductState& s) const;
  ProductState decode(const std::vector<std::uint8_t>& bytes) const;
  std::size_t encoded_size() const;

 private:
  void score(ProductState& s) const;
  const Problem* problem_;
};

/// Monte Carlo verdict of simulation `index` on its generation-0 stream. Restricted
/// formulas run the observers; others check the trace of horizon + 1 states.
Tri sample_verdict(const Problem& problem, std::uint64_t seed, std::uint64_t index, std::uint64_t& steps);

/// n simulations owned by one client, each with its own random stream
/// (seed, client, index, generation). Shared by local splitting and the distributed client.
class SimulationPool {
 public:
  SimulationPool(const Simulator& sim, std::uint64_t seed, std::uint64_t client, std::size_t n);

  std::size_t size() const { return sims_.size(); }
  std::uint64_t client() const { return client_; }

  /// Runs every simulation to `level` (or decision) using `workers` threads; returns how many reached it.
  std::size_t run_to_level(const Score& level, unsigned workers = 1);

  bool reached(std::size_t i, const Score& level) const { return !(sims_[i].state.max_score < level); }
  std::vector<std::size_t> successes(const Score& level) const;
  std::vector<std::size_t> failures(const Score& level) const;

  const ProductState& state(std::size_t i) const { return sims_[i].state; }
  std::uint64_t generation(std::size_t i) const { return sims_[i].generation; }

  /// Uniform choice among the given successful indices, drawn from the client's donor stream.
  std::size_t pick_donor(const std::vector<std::size_t>& successes);
  /// Overwrites simulation i and moves it to a fresh random stream.
  void replace(std::size_t i, ProductState state);

  std::uint64_t steps() const { return steps_; }

 private:
  struct Sim {
    ProductState state;
    Rng rng;
    std::uint64_t generation = 0;
  };
  const Simulator* sim_;
  std::uint64_t seed_;
  std::uint64_t client_;
  std::vector<Sim> sims_;
  Rng donor_;
  std::uint64_t steps_ = 0;
};

struct RequirementViolation {
  std::uint64_t trial = 0;
  StreamId stream;
  Score max_score;
  Tri verdict = Tri::Undecided;
};

struct RequirementReport {
  std::uint64_t trials = 0;
  std::uint64_t satisfied = 0;
  std::vector<RequirementViolation> violations;
};

/// Runs Monte Carlo traces to decision and lists every trace where
/// (max score >= threshold) disagrees with (verdict = True).
RequirementReport validate_minimum_requirement(const Problem& problem, std::uint64_t trials, std::uint64_t seed);

}  // namespace raresplit
