#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "raresplit/expr.hpp"
#include "raresplit/rational.hpp"
#include "raresplit/rng.hpp"

namespace raresplit {

struct ConstDecl {
  std::string name;
  ValueType type = ValueType::Int;
  ExprPtr expr;
  Rational value;
  SourceLoc loc;
};

struct VarDecl {
  std::string name;
  ValueType type = ValueType::Int;  // Int or Bool
  ExprPtr lo_expr, hi_expr, init_expr;  // null when implied (bool range, default init)
  std::int64_t lo = 0;
  std::int64_t hi = 1;
  std::int64_t init = 0;
  SourceLoc loc;
};

struct Assignment {
  int var = -1;
  ExprPtr value;
};

struct Branch {
  ExprPtr weight_expr;  // null when the weight was omitted (single branch, weight 1)
  Rational weight{1};
  double probability = 1.0;
  std::vector<Assignment> updates;
};

struct Command {
  std::string action;
  ExprPtr guard;
  std::vector<Branch> branches;
  SourceLoc loc;
};

struct ModuleDef {
  std::string name;  // empty for top-level declarations outside any module block
  std::vector<int> vars;
  std::vector<Command> commands;
};

struct LabelDecl {
  std::string name;
  ExprPtr expr;
  SourceLoc loc;
};

struct ModelState {
  std::vector<std::int64_t> values;
  std::uint64_t step = 0;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

struct ModelStateHash {
  std::size_t operator()(const ModelState& s) const;
};

/// Parsed, resolved and validated model. Immutable after parse; safe to share between threads.
class Model {
 public:
  std::vector<ConstDecl> constants;
  std::vector<VarDecl> variables;
  std::vector<ModuleDef> modules;
  std::vector<LabelDecl> labels;

  int var_index(std::string_view name) const;
  const LabelDecl* label(std::string_view name) const;
  std::size_t command_count() const;

  /// Scope over variables, constants and labels for resolving expressions against this model.
  Scope scope() const;

  /// Product of the declared variable domain sizes.
  double state_space_bound() const;

  friend bool operator==(const Model& a, const Model& b);
};

using ModelPtr = std::shared_ptr<const Model>;

/// Parses model source. Errors are ParseError carrying line and column.
ModelPtr parse_model(std::string_view source);
ModelPtr load_model_file(const std::string& path);

std::string print_model(const Model& m);

ModelState initial_state(const Model& m);

/// Takes one transition: uniform choice among enabled commands, then a branch by weight.
/// With no enabled command the state self-loops and only the step index advances.
void step(const Model& m, ModelState& state, Rng& rng);

struct Successor {
  ModelState state;
  Rational probability;
};

/// Full successor distribution with exact probabilities; identical successors are merged.
std::vector<Successor> exact_distribution(const Model& m, const ModelState& state);

/// Error raised when an enumeration exceeds its configured cap.
class StateSpaceCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumerates the states reachable within `depth` steps (step index ignored); throws past `cap`.
std::size_t count_reachable(const Model& m, std::uint64_t depth, std::size_t cap);

std::string format_state(const Model& m, const ModelState& s);

}  // namespace raresplit
