#include "raresplit/expr.hpp"

#include <algorithm>
#include <stdexcept>

namespace raresplit {

std::string_view type_name(ValueType t) {
  switch (t) {
    case ValueType::Int: return "int";
    case ValueType::Bool: return "bool";
    case ValueType::Real: return "double";
  }
  return "?";
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.index != b.index || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
      if (a.value != b.value) return false;
      break;
    case ExprKind::DecimalLit:
    case ExprKind::Const:
      if (a.constant != b.constant) return false;
      break;
    default:
      break;
  }
  // Label bodies are definitions, not part of the use site.
  if (a.kind == ExprKind::Label) return true;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_expr(a.args[i], b.args[i])) return false;
  }
  return true;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  return *a == *b;
}

ExprPtr make_int(std::int64_t v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntLit;
  e->type = ValueType::Int;
  e->value = v;
  e->loc = loc;
  return e;
}

ExprPtr make_bool(bool v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::BoolLit;
  e->type = ValueType::Bool;
  e->value = v ? 1 : 0;
  e->loc = loc;
  return e;
}

ExprPtr make_unary(ExprKind kind, ExprPtr a, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->type = kind == ExprKind::Not ? ValueType::Bool : a->type;
  e->args = {std::move(a)};
  e->loc = loc;
  return e;
}

ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  switch (kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Min:
    case ExprKind::Max:
      e->type = (a->type == ValueType::Real || b->type == ValueType::Real) ? ValueType::Real : ValueType::Int;
      break;
    default:
      e->type = ValueType::Bool;
  }
  e->args = {std::move(a), std::move(b)};
  e->loc = loc;
  return e;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

ExprPtr parse_ite(TokenStream& ts);

ExprPtr parse_primary(TokenStream& ts) {
  const Token& t = ts.peek();
  const SourceLoc loc = t.loc;
  switch (t.kind) {
    case Tok::Int: {
      std::int64_t v = 0;
      try {
        v = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw ParseError(loc, "integer literal out of range: " + t.text);
      }
      ts.next();
      return make_int(v, loc);
    }
    case Tok::Decimal: {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::DecimalLit;
      e->type = ValueType::Real;
      e->name = t.text;
      e->constant = parse_rational(t.text);
      e->loc = loc;
      ts.next();
      return e;
    }
    case Tok::String: {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Label;
      e->type = ValueType::Bool;
      e->name = t.text;
      e->loc = loc;
      ts.next();
      return e;
    }
    case Tok::LParen: {
      ts.next();
      ExprPtr inner = parse_ite(ts);
      ts.expect(Tok::RParen, "')'");
      return inner;
    }
    case Tok::Ident: {
      if (t.text == "true" || t.text == "false") {
        const bool v = t.text == "true";
        ts.next();
        return make_bool(v, loc);
      }
      if ((t.text == "min" || t.text == "max") && ts.peek(1).kind == Tok::LParen) {
        const ExprKind kind = t.text == "min" ? ExprKind::Min : ExprKind::Max;
        ts.next();
        ts.next();
        ExprPtr acc = parse_ite(ts);
        ts.expect(Tok::Comma, "',' (min/max take at least two arguments)");
        do {
          acc = make_binary(kind, acc, parse_ite(ts), loc);
        } while (ts.accept(Tok::Comma));
        ts.expect(Tok::RParen, "')'");
        return acc;
      }
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Name;
      e->name = t.text;
      e->loc = loc;
      ts.next();
      return e;
    }
    default:
      ts.fail("expected expression, found " + (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'"));
  }
}

ExprPtr parse_unary_minus(TokenStream& ts) {
  if (ts.at(Tok::Minus)) {
    const SourceLoc loc = ts.next().loc;
    return make_unary(ExprKind::Neg, parse_unary_minus(ts), loc);
  }
  return parse_primary(ts);
}

ExprPtr parse_mul(TokenStream& ts) {
  ExprPtr lhs = parse_unary_minus(ts);
  while (ts.at(Tok::Star) || ts.at(Tok::Slash)) {
    const Token op = ts.next();
    lhs = make_binary(op.kind == Tok::Star ? ExprKind::Mul : ExprKind::Div, lhs, parse_unary_minus(ts), op.loc);
  }
  return lhs;
}

ExprPtr parse_add(TokenStream& ts) {
  ExprPtr lhs = parse_mul(ts);
  while (ts.at(Tok::Plus) || ts.at(Tok::Minus)) {
    const Token op = ts.next();
    lhs = make_binary(op.kind == Tok::Plus ? ExprKind::Add : ExprKind::Sub, lhs, parse_mul(ts), op.loc);
  }
  return lhs;
}

std::optional<ExprKind> comparison_kind(Tok t) {
  switch (t) {
    case Tok::Eq: return ExprKind::Eq;
    case Tok::Ne: return ExprKind::Ne;
    case Tok::Lt: return ExprKind::Lt;
    case Tok::Le: return ExprKind::Le;
    case Tok::Gt: return ExprKind::Gt;
    case Tok::Ge: return ExprKind::Ge;
    default: return std::nullopt;
  }
}

ExprPtr parse_comparison(TokenStream& ts) {
  ExprPtr lhs = parse_add(ts);
  if (auto kind = comparison_kind(ts.peek().kind)) {
    const SourceLoc loc = ts.next().loc;
    lhs = make_binary(*kind, lhs, parse_add(ts), loc);
    if (comparison_kind(ts.peek().kind)) ts.fail("comparison operators do not chain; add parentheses");
  }
  return lhs;
}

ExprPtr parse_not(TokenStream& ts) {
  if (ts.at(Tok::Bang)) {
    const SourceLoc loc = ts.next().loc;
    return make_unary(ExprKind::Not, parse_not(ts), loc);
  }
  return parse_comparison(ts);
}

ExprPtr parse_and(TokenStream& ts) {
  ExprPtr lhs = parse_not(ts);
  while (ts.at(Tok::Amp)) {
    const SourceLoc loc = ts.next().loc;
    lhs = make_binary(ExprKind::And, lhs, parse_not(ts), loc);
  }
  return lhs;
}

ExprPtr parse_or(TokenStream& ts) {
  ExprPtr lhs = parse_and(ts);
  while (ts.at(Tok::Bar)) {
    const SourceLoc loc = ts.next().loc;
    lhs = make_binary(ExprKind::Or, lhs, parse_and(ts), loc);
  }
  return lhs;
}

ExprPtr parse_implies(TokenStream& ts) {
  ExprPtr lhs = parse_or(ts);
  if (ts.at(Tok::Implies)) {
    const SourceLoc loc = ts.next().loc;
    return make_binary(ExprKind::Implies, lhs, parse_implies(ts), loc);
  }
  return lhs;
}

ExprPtr parse_ite(TokenStream& ts) {
  ExprPtr cond = parse_implies(ts);
  if (!ts.at(Tok::Question)) return cond;
  const SourceLoc loc = ts.next().loc;
  ExprPtr then_e = parse_ite(ts);
  ts.expect(Tok::Colon, "':' in conditional expression");
  ExprPtr else_e = parse_ite(ts);
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ite;
  e->type = then_e->type;
  e->args = {cond, then_e, else_e};
  e->loc = loc;
  return e;
}

}  // namespace

ExprPtr parse_expr(TokenStream& ts) { return parse_ite(ts); }

ExprPtr parse_relational(TokenStream& ts) { return parse_comparison(ts); }

ExprPtr parse_expr_text(std::string_view text) {
  TokenStream ts(tokenize(text));
  ExprPtr e = parse_expr(ts);
  if (!ts.at(Tok::End)) ts.fail("unexpected '" + ts.peek().text + "' after expression");
  return e;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Ite: return 0;
    case ExprKind::Implies: return 1;
    case ExprKind::Or: return 2;
    case ExprKind::And: return 3;
    case ExprKind::Not: return 4;
    case ExprKind::Eq:
    case ExprKind::Ne:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge: return 5;
    case ExprKind::Add:
    case ExprKind::Sub: return 6;
    case ExprKind::Mul:
    case ExprKind::Div: return 7;
    case ExprKind::Neg: return 8;
    case ExprKind::IntLit: return e.value < 0 ? 8 : 9;
    default: return 9;
  }
}

const char* binary_symbol(ExprKind k) {
  switch (k) {
    case ExprKind::Add: return " + ";
    case ExprKind::Sub: return " - ";
    case ExprKind::Mul: return " * ";
    case ExprKind::Div: return " / ";
    case ExprKind::Eq: return " = ";
    case ExprKind::Ne: return " != ";
    case ExprKind::Lt: return " < ";
    case ExprKind::Le: return " <= ";
    case ExprKind::Gt: return " > ";
    case ExprKind::Ge: return " >= ";
    case ExprKind::And: return " & ";
    case ExprKind::Or: return " | ";
    case ExprKind::Implies: return " => ";
    default: return " ? ";
  }
}

void print_into(const Expr& e, int min_prec, std::string& out) {
  const int p = precedence(e);
  const bool paren = p < min_prec;
  if (paren) out += '(';
  switch (e.kind) {
    case ExprKind::IntLit: out += std::to_string(e.value); break;
    case ExprKind::BoolLit: out += e.value ? "true" : "false"; break;
    case ExprKind::DecimalLit: out += e.name; break;
    case ExprKind::Label: out += '"' + e.name + '"'; break;
    case ExprKind::Name:
    case ExprKind::Var:
    case ExprKind::Const:
    case ExprKind::Obs: out += e.name; break;
    case ExprKind::Step: out += "step"; break;
    case ExprKind::Neg:
      out += '-';
      print_into(*e.args[0], 8, out);
      break;
    case ExprKind::Not:
      out += '!';
      print_into(*e.args[0], 4, out);
      break;
    case ExprKind::Min:
    case ExprKind::Max:
      out += e.kind == ExprKind::Min ? "min(" : "max(";
      print_into(*e.args[0], 0, out);
      out += ", ";
      print_into(*e.args[1], 0, out);
      out += ')';
      break;
    case ExprKind::Ite:
      print_into(*e.args[0], 1, out);
      out += " ? ";
      print_into(*e.args[1], 0, out);
      out += " : ";
      print_into(*e.args[2], 0, out);
      break;
    case ExprKind::Implies:
      print_into(*e.args[0], p + 1, out);
      out += binary_symbol(e.kind);
      print_into(*e.args[1], p, out);
      break;
    case ExprKind::Eq:
    case ExprKind::Ne:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge:
      print_into(*e.args[0], p + 1, out);
      out += binary_symbol(e.kind);
      print_into(*e.args[1], p + 1, out);
      break;
    default:
      print_into(*e.args[0], p, out);
      out += binary_symbol(e.kind);
      print_into(*e.args[1], p + 1, out);
  }
  if (paren) out += ')';
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(e, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Resolution and type checking

namespace {

[[noreturn]] void type_error(const Expr& e, const std::string& msg) { throw ParseError(e.loc, msg); }

bool numeric(ValueType t) { return t == ValueType::Int || t == ValueType::Real; }

}  // namespace

ExprPtr resolve(const ExprPtr& in, const Scope& scope) {
  const Expr& e = *in;
  auto out = std::make_shared<Expr>(e);
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::DecimalLit:
    case ExprKind::BoolLit:
    case ExprKind::Var:
    case ExprKind::Const:
    case ExprKind::Step:
    case ExprKind::Obs:
      return in;
    case ExprKind::Label: {
      if (!e.args.empty()) return in;
      auto it = scope.labels.find(e.name);
      if (it == scope.labels.end()) type_error(e, "unknown label \"" + e.name + "\"");
      out->args = {it->second};
      out->type = ValueType::Bool;
      return out;
    }
    case ExprKind::Name: {
      if (auto it = scope.vars.find(e.name); it != scope.vars.end()) {
        out->kind = ExprKind::Var;
        out->index = it->second.index;
        out->type = it->second.type;
        return out;
      }
      if (auto it = scope.consts.find(e.name); it != scope.consts.end()) {
        out->kind = ExprKind::Const;
        out->constant = it->second.first;
        out->type = it->second.second;
        if (out->type != ValueType::Real) out->value = boost::multiprecision::numerator(it->second.first).convert_to<std::int64_t>();
        return out;
      }
      if (scope.allow_step && e.name == "step") {
        out->kind = ExprKind::Step;
        out->type = ValueType::Int;
        return out;
      }
      if (scope.observer_slot && e.name.rfind("obs.", 0) == 0) {
        auto slot = scope.observer_slot(e.name);
        if (!slot) type_error(e, "unknown observer path '" + e.name + "'");
        out->kind = ExprKind::Obs;
        out->index = *slot;
        const bool flag = e.name.size() > 2 && (e.name.ends_with(".o") || e.name.ends_with(".d"));
        out->type = flag ? ValueType::Bool : ValueType::Int;
        return out;
      }
      type_error(e, "undeclared identifier '" + e.name + "'");
    }
    default:
      break;
  }
  for (auto& a : out->args) a = resolve(a, scope);
  const auto& a = out->args;
  switch (e.kind) {
    case ExprKind::Neg:
      if (!numeric(a[0]->type)) type_error(e, "unary '-' needs a number");
      out->type = a[0]->type;
      break;
    case ExprKind::Not:
      if (a[0]->type != ValueType::Bool) type_error(e, "'!' needs a boolean operand");
      out->type = ValueType::Bool;
      break;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Min:
    case ExprKind::Max:
      if (!numeric(a[0]->type) || !numeric(a[1]->type)) type_error(e, "arithmetic needs numeric operands");
      out->type = (a[0]->type == ValueType::Real || a[1]->type == ValueType::Real) ? ValueType::Real : ValueType::Int;
      break;
    case ExprKind::Eq:
    case ExprKind::Ne:
      if ((a[0]->type == ValueType::Bool) != (a[1]->type == ValueType::Bool)) type_error(e, "cannot compare boolean with number");
      out->type = ValueType::Bool;
      break;
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge:
      if (!numeric(a[0]->type) || !numeric(a[1]->type)) type_error(e, "ordering needs numeric operands");
      out->type = ValueType::Bool;
      break;
    case ExprKind::And:
    case ExprKind::Or:
    case ExprKind::Implies:
      if (a[0]->type != ValueType::Bool || a[1]->type != ValueType::Bool) type_error(e, "boolean connective needs boolean operands");
      out->type = ValueType::Bool;
      break;
    case ExprKind::Ite:
      if (a[0]->type != ValueType::Bool) type_error(e, "condition of '?' must be boolean");
      if ((a[1]->type == ValueType::Bool) != (a[2]->type == ValueType::Bool)) type_error(e, "branches of '?' have different types");
      out->type = a[1]->type == ValueType::Real || a[2]->type == ValueType::Real ? ValueType::Real : a[1]->type;
      break;
    default:
      break;
  }
  return out;
}

Rational eval_constant(const Expr& e) {
  auto arg = [&](int i) { return eval_constant(*e.args[i]); };
  auto truth = [](bool b) { return Rational(b ? 1 : 0); };
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit: return Rational(e.value);
    case ExprKind::DecimalLit:
    case ExprKind::Const: return e.constant;
    case ExprKind::Label: return eval_constant(*e.args.at(0));
    case ExprKind::Neg: return -arg(0);
    case ExprKind::Not: return truth(arg(0) == 0);
    case ExprKind::Add: return arg(0) + arg(1);
    case ExprKind::Sub: return arg(0) - arg(1);
    case ExprKind::Mul: return arg(0) * arg(1);
    case ExprKind::Div: {
      Rational d = arg(1);
      if (d == 0) throw ParseError(e.loc, "division by zero in constant expression");
      return arg(0) / d;
    }
    case ExprKind::Min: return std::min(arg(0), arg(1));
    case ExprKind::Max: return std::max(arg(0), arg(1));
    case ExprKind::Eq: return truth(arg(0) == arg(1));
    case ExprKind::Ne: return truth(arg(0) != arg(1));
    case ExprKind::Lt: return truth(arg(0) < arg(1));
    case ExprKind::Le: return truth(arg(0) <= arg(1));
    case ExprKind::Gt: return truth(arg(0) > arg(1));
    case ExprKind::Ge: return truth(arg(0) >= arg(1));
    case ExprKind::And: return truth(arg(0) != 0 && arg(1) != 0);
    case ExprKind::Or: return truth(arg(0) != 0 || arg(1) != 0);
    case ExprKind::Implies: return truth(arg(0) == 0 || arg(1) != 0);
    case ExprKind::Ite: return arg(0) != 0 ? arg(1) : arg(2);
    default: throw ParseError(e.loc, "expression '" + print_expr(e) + "' is not constant");
  }
}

std::int64_t evaluate(const Expr& e, const EvalEnv& env) {
  const auto& a = e.args;
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
    case ExprKind::Const: return e.value;
    case ExprKind::Var: return env.vars[e.index];
    case ExprKind::Step: return env.step;
    case ExprKind::Obs: return env.obs[e.index];
    case ExprKind::Label: return evaluate(*a[0], env);
    case ExprKind::Neg: return -evaluate(*a[0], env);
    case ExprKind::Not: return evaluate(*a[0], env) == 0;
    case ExprKind::Add: return evaluate(*a[0], env) + evaluate(*a[1], env);
    case ExprKind::Sub: return evaluate(*a[0], env) - evaluate(*a[1], env);
    case ExprKind::Mul: return evaluate(*a[0], env) * evaluate(*a[1], env);
    case ExprKind::Div: {
      const std::int64_t d = evaluate(*a[1], env);
      if (d == 0) throw std::runtime_error(e.loc.to_string() + ": division by zero");
      return evaluate(*a[0], env) / d;
    }
    case ExprKind::Min: return std::min(evaluate(*a[0], env), evaluate(*a[1], env));
    case ExprKind::Max: return std::max(evaluate(*a[0], env), evaluate(*a[1], env));
    case ExprKind::Eq: return evaluate(*a[0], env) == evaluate(*a[1], env);
    case ExprKind::Ne: return evaluate(*a[0], env) != evaluate(*a[1], env);
    case ExprKind::Lt: return evaluate(*a[0], env) < evaluate(*a[1], env);
    case ExprKind::Le: return evaluate(*a[0], env) <= evaluate(*a[1], env);
    case ExprKind::Gt: return evaluate(*a[0], env) > evaluate(*a[1], env);
    case ExprKind::Ge: return evaluate(*a[0], env) >= evaluate(*a[1], env);
    case ExprKind::And: return evaluate(*a[0], env) && evaluate(*a[1], env);
    case ExprKind::Or: return evaluate(*a[0], env) || evaluate(*a[1], env);
    case ExprKind::Implies: return !evaluate(*a[0], env) || evaluate(*a[1], env);
    case ExprKind::Ite: return evaluate(*a[0], env) ? evaluate(*a[1], env) : evaluate(*a[2], env);
    default: throw std::logic_error("cannot evaluate '" + print_expr(e) + "' at run time");
  }
}

void collect_vars(const Expr& e, std::vector<int>& out) {
  if (e.kind == ExprKind::Var) out.push_back(e.index);
  for (const auto& a : e.args) collect_vars(*a, out);
}

}  // namespace raresplit
