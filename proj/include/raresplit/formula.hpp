#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "raresplit/expr.hpp"
#include "raresplit/model.hpp"

namespace raresplit {

enum class FormulaKind { True, False, Atom, Not, And, Or, Implies, Next, Finally, Globally, Until };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Bounded LTL formula. `Until` stores the left operand in args[0] and the right in args[1].
struct Formula {
  FormulaKind kind = FormulaKind::True;
  std::uint64_t bound = 0;
  ExprPtr atom;
  std::vector<FormulaPtr> args;
  SourceLoc loc;

  bool temporal() const {
    return kind == FormulaKind::Next || kind == FormulaKind::Finally || kind == FormulaKind::Globally || kind == FormulaKind::Until;
  }
  bool connective() const {
    return kind == FormulaKind::Not || kind == FormulaKind::And || kind == FormulaKind::Or || kind == FormulaKind::Implies;
  }

  friend bool operator==(const Formula& a, const Formula& b);
};

namespace fm {
FormulaPtr truth(bool value);
FormulaPtr atom(ExprPtr expr);
FormulaPtr negate(FormulaPtr f);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr next(std::uint64_t k, FormulaPtr f);
FormulaPtr finally(std::uint64_t k, FormulaPtr f);
FormulaPtr globally(std::uint64_t k, FormulaPtr f);
FormulaPtr until(std::uint64_t k, FormulaPtr lhs, FormulaPtr rhs);
}  // namespace fm

/// Parses `X<=k`, `F<=k`, `G<=k`, infix `U<=k`, `!`, `&`, `|`, `=>`, `true`, `false`,
/// quoted labels and comparison atoms. Atoms are resolved against the model.
FormulaPtr parse_formula(std::string_view text, const Model& model);

std::string print_formula(const Formula& f);

/// True for true/false/atoms and boolean connectives over them only.
bool is_atomic_combination(const Formula& f);

/// Number of steps after position 0 the formula may need to look at.
std::uint64_t horizon(const Formula& f);

struct RestrictionViolation {
  std::string path;  // "root", "root.0", "root.0.1", ...
  std::string rule;
};

struct RestrictionReport {
  bool accepted = true;
  std::vector<RestrictionViolation> violations;
};

/// Checks membership in the restricted logic whose observers need constant memory.
RestrictionReport check_restriction(const Formula& f);

struct MemoryClass {
  enum Kind { BoundedCounters, WindowBuffer } kind = BoundedCounters;
  std::uint64_t size = 0;

  friend bool operator==(const MemoryClass&, const MemoryClass&) = default;
};

std::string to_string(const MemoryClass& m);

MemoryClass classify_memory(const Formula& f);

}  // namespace raresplit
