#pragma once

#include <optional>
#include <string>
#include <vector>

#include "raresplit/expr.hpp"
#include "raresplit/model.hpp"
#include "raresplit/observer.hpp"
#include "raresplit/rational.hpp"

namespace raresplit {

/// Integer-valued expression over model variables, `step` and observer fields
/// (`obs.root.w`, `obs.root.0.o`, ...), plus the satisfaction threshold s_phi.
struct ScoreFn {
  std::string source;
  ExprPtr expr;
  Score threshold;
};

ScoreFn compile_score(const std::string& source, const Model& model, const ObserverProgram& program, Score threshold);

inline Score evaluate_score(const ScoreFn& sf, const ModelState& state, const std::vector<std::int64_t>& observers) {
  const EvalEnv env{state.values.data(), static_cast<std::int64_t>(state.step), observers.data()};
  return Score(evaluate(*sf.expr, env));
}

/// Strictly increasing levels; the last one must equal the threshold.
void validate_levels(const std::vector<Score>& levels, const Score& threshold);

std::vector<Score> parse_levels(const std::string& csv);
std::string format_levels(const std::vector<Score>& levels);

struct QuantileLevel {
  std::optional<Score> level;
  bool stagnation = false;
};

/// Largest L such that at least ceil(p * |scores|) scores are >= L. Signals
/// stagnation when every score is equal (and below `threshold`, if given).
QuantileLevel levels_from_quantiles(const std::vector<Score>& scores, double p, std::optional<Score> threshold = std::nullopt);

}  // namespace raresplit
