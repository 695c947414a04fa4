#include "raresplit/reference.hpp"

#include <map>
#include <unordered_map>

namespace raresplit {

namespace {

Tri k_not(Tri a) { return a == Tri::True ? Tri::False : a == Tri::False ? Tri::True : Tri::Undecided; }

Tri k_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Undecided;
}

Tri k_or(Tri a, Tri b) { return k_not(k_and(k_not(a), k_not(b))); }

class TraceChecker {
 public:
  explicit TraceChecker(const Trace& trace) : trace_(trace) {}

  Tri at(const Formula& f, std::size_t i) {
    const auto key = std::make_pair(&f, i);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const Tri v = compute(f, i);
    memo_.emplace(key, v);
    return v;
  }

 private:
  Tri compute(const Formula& f, std::size_t i) {
    switch (f.kind) {
      case FormulaKind::True: return Tri::True;
      case FormulaKind::False: return Tri::False;
      case FormulaKind::Atom: {
        if (i >= trace_.size()) return Tri::Undecided;
        const ModelState& s = trace_[i];
        const EvalEnv env{s.values.data(), static_cast<std::int64_t>(s.step), nullptr};
        return evaluate_bool(*f.atom, env) ? Tri::True : Tri::False;
      }
      case FormulaKind::Not: return k_not(at(*f.args[0], i));
      case FormulaKind::Or: return k_or(at(*f.args[0], i), at(*f.args[1], i));
      // a & b == !(!a | !b)
      case FormulaKind::And: return k_not(k_or(k_not(at(*f.args[0], i)), k_not(at(*f.args[1], i))));
      case FormulaKind::Implies: return k_or(k_not(at(*f.args[0], i)), at(*f.args[1], i));
      case FormulaKind::Next: return at(*f.args[0], i + f.bound);
      case FormulaKind::Until: return until(*f.args[1], f.bound, i, f.args[0].get());
      // F^k a == true U^k a
      case FormulaKind::Finally: return until(*f.args[0], f.bound, i, nullptr);
      // G^k a == !(true U^k !a)
      case FormulaKind::Globally: return k_not(until(*f.args[0], f.bound, i, nullptr, true));
    }
    return Tri::Undecided;
  }

  // exists j in [i, i+k]: rhs@j and forall l in [i, j): lhs@l. A null lhs means `true`;
  // with `negate_rhs` the right operand is !rhs.
  Tri until(const Formula& rhs, std::uint64_t k, std::size_t i, const Formula* lhs, bool negate_rhs = false) {
    Tri result = Tri::False;
    Tri prefix = Tri::True;
    for (std::uint64_t off = 0; off <= k; ++off) {
      const std::size_t j = i + off;
      Tri r = at(rhs, j);
      if (negate_rhs) r = k_not(r);
      result = k_or(result, k_and(prefix, r));
      if (result == Tri::True) return result;
      if (lhs) prefix = k_and(prefix, at(*lhs, j));
      if (prefix == Tri::False) break;
    }
    return result;
  }

  struct KeyHash {
    std::size_t operator()(const std::pair<const Formula*, std::size_t>& k) const {
      return std::hash<const void*>()(k.first) * 31 + std::hash<std::size_t>()(k.second);
    }
  };

  const Trace& trace_;
  std::unordered_map<std::pair<const Formula*, std::size_t>, Tri, KeyHash> memo_;
};

}  // namespace

Tri check_trace_at(const Formula& f, const Trace& trace, std::size_t position) { return TraceChecker(trace).at(f, position); }

Tri check_trace(const Formula& f, const Trace& trace) { return check_trace_at(f, trace, 0); }

// ---------------------------------------------------------------------------
// Progression

namespace {

bool is_const(const FormulaPtr& f, bool value) {
  return f->kind == (value ? FormulaKind::True : FormulaKind::False);
}

FormulaPtr s_not(FormulaPtr a) {
  if (is_const(a, true)) return fm::truth(false);
  if (is_const(a, false)) return fm::truth(true);
  if (a->kind == FormulaKind::Not) return a->args[0];
  return fm::negate(std::move(a));
}

FormulaPtr s_and(FormulaPtr a, FormulaPtr b) {
  if (is_const(a, false) || is_const(b, false)) return fm::truth(false);
  if (is_const(a, true)) return b;
  if (is_const(b, true)) return a;
  return fm::conj(std::move(a), std::move(b));
}

FormulaPtr s_or(FormulaPtr a, FormulaPtr b) {
  if (is_const(a, true) || is_const(b, true)) return fm::truth(true);
  if (is_const(a, false)) return b;
  if (is_const(b, false)) return a;
  return fm::disj(std::move(a), std::move(b));
}

}  // namespace

FormulaPtr progress(const FormulaPtr& f, const ModelState& state) {
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Atom: {
      const EvalEnv env{state.values.data(), static_cast<std::int64_t>(state.step), nullptr};
      return fm::truth(evaluate_bool(*f->atom, env));
    }
    case FormulaKind::Not: return s_not(progress(f->args[0], state));
    case FormulaKind::And: return s_and(progress(f->args[0], state), progress(f->args[1], state));
    case FormulaKind::Or: return s_or(progress(f->args[0], state), progress(f->args[1], state));
    case FormulaKind::Implies: return s_or(s_not(progress(f->args[0], state)), progress(f->args[1], state));
    case FormulaKind::Next:
      if (f->bound == 0) return progress(f->args[0], state);
      return f->bound == 1 ? f->args[0] : fm::next(f->bound - 1, f->args[0]);
    case FormulaKind::Finally:
      return s_or(progress(f->args[0], state), f->bound > 0 ? fm::finally(f->bound - 1, f->args[0]) : fm::truth(false));
    case FormulaKind::Globally:
      return s_and(progress(f->args[0], state), f->bound > 0 ? fm::globally(f->bound - 1, f->args[0]) : fm::truth(true));
    case FormulaKind::Until:
      return s_or(progress(f->args[1], state),
                  s_and(progress(f->args[0], state), f->bound > 0 ? fm::until(f->bound - 1, f->args[0], f->args[1]) : fm::truth(false)));
  }
  return f;
}

Rational exact_probability(const Model& model, const Formula& f, std::size_t cap) {
  struct Entry {
    ModelState state;
    FormulaPtr residual;
    Rational probability;
  };
  Rational satisfied = 0;
  std::map<std::pair<std::vector<std::int64_t>, std::string>, Entry> frontier;
  const FormulaPtr start = std::make_shared<Formula>(f);
  ModelState s0 = initial_state(model);
  frontier.emplace(std::make_pair(s0.values, print_formula(*start)), Entry{s0, start, Rational(1)});
  std::size_t visited = 0;
  while (!frontier.empty()) {
    std::map<std::pair<std::vector<std::int64_t>, std::string>, Entry> next;
    for (auto& [key, e] : frontier) {
      if (++visited > cap) throw StateSpaceCapExceeded("exact probability enumeration exceeds " + std::to_string(cap) + " pairs");
      const FormulaPtr r = progress(e.residual, e.state);
      if (is_const(r, true)) {
        satisfied += e.probability;
        continue;
      }
      if (is_const(r, false)) continue;
      const std::string text = print_formula(*r);
      for (auto& succ : exact_distribution(model, e.state)) {
        auto k = std::make_pair(succ.state.values, text);
        auto it = next.find(k);
        if (it == next.end()) {
          next.emplace(std::move(k), Entry{std::move(succ.state), r, e.probability * succ.probability});
        } else {
          it->second.probability += e.probability * succ.probability;
        }
      }
    }
    frontier = std::move(next);
  }
  return satisfied;
}

}  // namespace raresplit
