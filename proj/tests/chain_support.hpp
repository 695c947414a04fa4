#pragma once

// Rare-event test chain: three forward moves in a row within five steps.

#include <fstream>
#include <sstream>
#include <string>

#include "raresplit/simulation.hpp"

namespace chain {

inline const char* kProperty = "F<=5 \"goal\"";
inline const char* kScore = "s";
inline constexpr std::int64_t kThreshold = 3;

inline std::string model_source() {
  std::ifstream in(std::string(RARESPLIT_SOURCE_DIR) + "/models/chain.model");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline raresplit::Problem problem() { return raresplit::make_problem(model_source(), kProperty, kScore, raresplit::Score(kThreshold)); }

inline std::vector<raresplit::Score> levels() { return {raresplit::Score(2), raresplit::Score(3)}; }

inline constexpr double kGamma = 7.0 / 2500.0;

}  // namespace chain
