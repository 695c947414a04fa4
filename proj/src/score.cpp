#include "raresplit/score.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace raresplit {

ScoreFn compile_score(const std::string& source, const Model& model, const ObserverProgram& program, Score threshold) {
  Scope scope = model.scope();
  scope.allow_step = true;
  scope.observer_slot = [&program](const std::string& path) { return program.slot(path); };
  ScoreFn sf;
  sf.source = source;
  sf.expr = resolve(parse_expr_text(source), scope);
  if (sf.expr->type != ValueType::Int) throw ParseError(sf.expr->loc, "score expression must be integer-valued");
  sf.threshold = threshold;
  return sf;
}

void validate_levels(const std::vector<Score>& levels, const Score& threshold) {
  if (levels.empty()) throw std::invalid_argument("level schedule is empty");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i - 1] < levels[i])) throw std::invalid_argument("levels must be strictly increasing");
  }
  if (levels.back() != threshold) {
    throw std::invalid_argument("last level " + levels.back().to_string() + " differs from the threshold " + threshold.to_string());
  }
}

std::vector<Score> parse_levels(const std::string& csv) {
  std::vector<Score> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(Score::parse(item));
  }
  return out;
}

std::string format_levels(const std::vector<Score>& levels) {
  std::string out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) out += ",";
    out += levels[i].to_string();
  }
  return out;
}

QuantileLevel levels_from_quantiles(const std::vector<Score>& scores, double p, std::optional<Score> threshold) {
  if (scores.empty()) throw std::invalid_argument("levels_from_quantiles on empty score list");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("retain proportion must lie in (0, 1)");
  std::vector<Score> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), [](const Score& a, const Score& b) { return b < a; });
  QuantileLevel out;
  if (sorted.front() == sorted.back() && (!threshold || sorted.front() < *threshold)) {
    out.stagnation = true;
    return out;
  }
  auto count = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size()) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, sorted.size());
  out.level = sorted[count - 1];
  return out;
}

}  // namespace raresplit
