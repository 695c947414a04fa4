#pragma once

// Shared harness for comparing observer networks with the reference trace checker.

#include <cstdint>
#include <string>
#include <vector>

#include "raresplit/formula.hpp"
#include "raresplit/model.hpp"
#include "raresplit/observer.hpp"
#include "raresplit/reference.hpp"

namespace oracle {

inline const char* kTwoBoolModel = R"(
a : bool init false;
b : bool init false;
[] true -> 0.25:(a'=false)&(b'=false) + 0.25:(a'=true)&(b'=false) + 0.25:(a'=false)&(b'=true) + 0.25:(a'=true)&(b'=true);
)";

// Restricted formulas over two booleans covering every observer variant.
inline const std::vector<std::string> kBattery = {
    "a & F<=3 b",
    "F<=2 a | G<=3 b",
    "F<=2 a => G<=2 b",
    "!F<=3 a",
    "X<=3 a",
    "X<=2 X<=2 b",
    "F<=4 a",
    "G<=4 (a | b)",
    "F<=3 G<=2 a",
    "G<=3 F<=2 a",
    "F<=2 F<=3 b",
    "G<=2 G<=2 a",
    "F<=2 X<=2 a",
    "G<=3 X<=1 (a & !b)",
    "X<=2 F<=3 a",
    "X<=1 G<=3 b",
    "a U<=4 b",
    "F<=2 a U<=3 G<=2 b",
    "X<=2 (a U<=3 b)",
    "X<=1 X<=2 (G<=1 a U<=2 F<=1 b)",
    "!(a U<=3 b)",
    "(a U<=2 b) & G<=3 !a",
    "F<=2 G<=2 F<=2 a",
    "G<=2 F<=2 X<=1 b",
    "(F<=3 a & G<=2 b) | X<=2 a",
    "!F<=2 a => F<=3 b",
    "a U<=0 b",
    "F<=2 X<=0 a & G<=0 b",
    "!G<=3 F<=1 a & (b U<=2 a)",
    "X<=1 (G<=2 !a U<=2 X<=1 b)",
};

inline raresplit::ModelState bool_state(int v, std::uint64_t step) {
  raresplit::ModelState s;
  s.values = {v & 1, (v >> 1) & 1};
  s.step = step;
  return s;
}

struct ExhaustiveResult {
  std::uint64_t cases = 0;
  std::uint64_t mismatches = 0;
  std::string first_failure;
};

namespace detail {

inline bool all_extensions_agree(const raresplit::Formula& f, raresplit::Trace& trace, std::size_t length, raresplit::Tri expected) {
  if (trace.size() == length) return raresplit::check_trace(f, trace) == expected;
  for (int v = 0; v < 4; ++v) {
    trace.push_back(bool_state(v, trace.size()));
    const bool ok = all_extensions_agree(f, trace, length, expected);
    trace.pop_back();
    if (!ok) return false;
  }
  return true;
}

inline std::string trace_text(const raresplit::Trace& t) {
  std::string s;
  for (const auto& st : t) s += std::string(st.values[0] ? "a" : "-") + (st.values[1] ? "b" : "-") + " ";
  return s;
}

inline void dfs(const raresplit::Formula& f, const raresplit::ObserverNetwork& net, raresplit::Trace& trace, std::size_t max_len,
                ExhaustiveResult& r) {
  for (int v = 0; v < 4; ++v) {
    raresplit::ObserverNetwork copy = net;
    trace.push_back(bool_state(v, trace.size()));
    const raresplit::Tri verdict = copy.observe(trace.back());
    if (verdict != raresplit::Tri::Undecided) {
      ++r.cases;
      raresplit::Tri ref = raresplit::check_trace(f, trace);
      bool ok = ref == verdict;
      if (!ok && ref == raresplit::Tri::Undecided) ok = all_extensions_agree(f, trace, max_len, verdict);
      if (!ok) {
        if (r.mismatches++ == 0) {
          r.first_failure = "trace " + trace_text(trace) + "observer " + std::string(raresplit::to_string(verdict)) + " reference " +
                            std::string(raresplit::to_string(ref));
        }
      }
    } else if (trace.size() >= max_len) {
      ++r.cases;
      if (r.mismatches++ == 0) r.first_failure = "undecided after " + std::to_string(trace.size()) + " states: " + trace_text(trace);
    } else {
      dfs(f, copy, trace, max_len, r);
    }
    trace.pop_back();
  }
}

}  // namespace detail

/// Runs every trace over {a,b} until the observer decides, up to horizon+1 states.
inline ExhaustiveResult exhaustive_check(const raresplit::Formula& f, std::size_t max_len) {
  ExhaustiveResult r;
  raresplit::ObserverNetwork net(raresplit::compile_observers(f));
  raresplit::Trace trace;
  detail::dfs(f, net, trace, max_len, r);
  return r;
}

}  // namespace oracle
