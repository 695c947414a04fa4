#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "raresplit/rational.hpp"
#include "raresplit/syntax.hpp"

namespace raresplit {

enum class ValueType { Int, Bool, Real };

std::string_view type_name(ValueType t);

enum class ExprKind {
  IntLit,
  BoolLit,
  DecimalLit,  // only meaningful in constant context (weights, const double)
  Name,        // unresolved identifier
  Var,         // model variable, `index` into the valuation
  Const,       // named constant, `constant` holds the value
  Label,       // quoted label, args[0] is the resolved definition
  Step,        // simulation step index (score expressions)
  Obs,         // observer field, `index` into the observer state vector
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Div,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Implies,
  Ite,
  Min,
  Max,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  ValueType type = ValueType::Int;
  std::int64_t value = 0;  // literal value (IntLit/BoolLit) or folded constant
  Rational constant;       // exact value for DecimalLit and Const
  std::string name;        // identifier, label, decimal text or observer path
  int index = -1;
  std::vector<ExprPtr> args;
  SourceLoc loc;

  friend bool operator==(const Expr& a, const Expr& b);
};

bool same_expr(const ExprPtr& a, const ExprPtr& b);

ExprPtr make_int(std::int64_t v, SourceLoc loc = {});
ExprPtr make_bool(bool v, SourceLoc loc = {});
ExprPtr make_unary(ExprKind kind, ExprPtr a, SourceLoc loc = {});
ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b, SourceLoc loc = {});

/// Parses one expression from the stream; stops at the first token that cannot extend it.
ExprPtr parse_expr(TokenStream& ts);
/// Parses an arithmetic/comparison expression without boolean connectives; used for formula atoms.
ExprPtr parse_relational(TokenStream& ts);
/// Parses a complete standalone expression text.
ExprPtr parse_expr_text(std::string_view text);

std::string print_expr(const Expr& e);

/// Name environment used to resolve and type-check identifiers.
struct Scope {
  struct VarInfo {
    int index;
    ValueType type;
  };
  std::unordered_map<std::string, VarInfo> vars;
  std::unordered_map<std::string, std::pair<Rational, ValueType>> consts;
  std::unordered_map<std::string, ExprPtr> labels;
  bool allow_step = false;
  /// Maps an identifier such as `obs.root.0.w` to an observer slot; nullopt if unknown.
  std::function<std::optional<int>(const std::string&)> observer_slot;
};

/// Resolves names against the scope and type-checks. Throws ParseError with the node location.
ExprPtr resolve(const ExprPtr& e, const Scope& scope);

/// Exact evaluation of a constant expression (`/` is exact division).
Rational eval_constant(const Expr& e);

struct EvalEnv {
  const std::int64_t* vars = nullptr;
  std::int64_t step = 0;
  const std::int64_t* obs = nullptr;
};

/// Evaluates a resolved Int or Bool expression (`/` is integer division truncating toward zero).
std::int64_t evaluate(const Expr& e, const EvalEnv& env);
inline bool evaluate_bool(const Expr& e, const EvalEnv& env) { return evaluate(e, env) != 0; }

/// Collects the variable indices read by an expression (labels expanded).
void collect_vars(const Expr& e, std::vector<int>& out);

}  // namespace raresplit
