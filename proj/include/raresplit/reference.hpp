#pragma once

#include <cstddef>
#include <vector>

#include "raresplit/formula.hpp"
#include "raresplit/model.hpp"
#include "raresplit/observer.hpp"
#include "raresplit/rational.hpp"

namespace raresplit {

using Trace = std::vector<ModelState>;

/// Three-valued verdict of the formula at position 0 of a finite trace. Positions
/// past the end are unknown and combine by Kleene's strong logic, so a decided
/// answer holds for every extension of the trace.
Tri check_trace(const Formula& f, const Trace& trace);

/// Verdict at an arbitrary position.
Tri check_trace_at(const Formula& f, const Trace& trace, std::size_t position);

inline constexpr std::size_t kDefaultExactCap = 1'000'000;

/// Exact satisfaction probability from the initial state, by forward enumeration
/// of (model state, residual formula) pairs. Throws StateSpaceCapExceeded past `cap` pairs.
Rational exact_probability(const Model& model, const Formula& f, std::size_t cap = kDefaultExactCap);

/// Residual obligation after observing one state: f holds at i iff the result holds at i+1.
FormulaPtr progress(const FormulaPtr& f, const ModelState& state);

}  // namespace raresplit
