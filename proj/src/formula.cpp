#include "raresplit/formula.hpp"

#include <algorithm>
#include <limits>

namespace raresplit {

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.bound != b.bound || a.args.size() != b.args.size()) return false;
  if (a.kind == FormulaKind::Atom && !same_expr(a.atom, b.atom)) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!(*a.args[i] == *b.args[i])) return false;
  }
  return true;
}

namespace fm {

namespace {
FormulaPtr node(FormulaKind kind, std::uint64_t bound, std::vector<FormulaPtr> args) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->bound = bound;
  f->args = std::move(args);
  return f;
}
}  // namespace

FormulaPtr truth(bool value) { return node(value ? FormulaKind::True : FormulaKind::False, 0, {}); }
FormulaPtr atom(ExprPtr expr) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Atom;
  f->atom = std::move(expr);
  return f;
}
FormulaPtr negate(FormulaPtr f) { return node(FormulaKind::Not, 0, {std::move(f)}); }
FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::And, 0, {std::move(a), std::move(b)}); }
FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::Or, 0, {std::move(a), std::move(b)}); }
FormulaPtr implies(FormulaPtr a, FormulaPtr b) { return node(FormulaKind::Implies, 0, {std::move(a), std::move(b)}); }
FormulaPtr next(std::uint64_t k, FormulaPtr f) { return node(FormulaKind::Next, k, {std::move(f)}); }
FormulaPtr finally(std::uint64_t k, FormulaPtr f) { return node(FormulaKind::Finally, k, {std::move(f)}); }
FormulaPtr globally(std::uint64_t k, FormulaPtr f) { return node(FormulaKind::Globally, k, {std::move(f)}); }
FormulaPtr until(std::uint64_t k, FormulaPtr lhs, FormulaPtr rhs) { return node(FormulaKind::Until, k, {std::move(lhs), std::move(rhs)}); }

}  // namespace fm

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_temporal_word(std::string_view w) { return w == "X" || w == "F" || w == "G" || w == "U"; }

bool continues_expression(Tok t) {
  switch (t) {
    case Tok::Plus:
    case Tok::Minus:
    case Tok::Star:
    case Tok::Slash:
    case Tok::Eq:
    case Tok::Ne:
    case Tok::Lt:
    case Tok::Le:
    case Tok::Gt:
    case Tok::Ge:
      return true;
    default:
      return false;
  }
}

class FormulaParser {
 public:
  FormulaParser(std::string_view text, const Model& model) : ts_(tokenize(text)), scope_(model.scope()) {
    for (const auto& v : model.variables) var_names_.push_back(v.name);
  }

  FormulaPtr parse() {
    FormulaPtr f = parse_implies();
    if (!ts_.at(Tok::End)) ts_.fail("unexpected '" + ts_.peek().text + "' in formula");
    return f;
  }

 private:
  bool is_variable(const std::string& name) const {
    return std::find(var_names_.begin(), var_names_.end(), name) != var_names_.end();
  }

  bool at_temporal(std::string_view word) const {
    if (!ts_.at_ident(word)) return false;
    if (ts_.peek(1).kind == Tok::Le) return true;
    if (!is_variable(std::string(word))) ts_.fail("missing bound: write " + std::string(word) + "<=k");
    return false;
  }

  std::uint64_t parse_bound() {
    ts_.expect(Tok::Le, "'<='");
    if (ts_.at(Tok::Minus)) ts_.fail("time bound must be a non-negative integer");
    const Token t = ts_.expect(Tok::Int, "time bound");
    try {
      return std::stoull(t.text);
    } catch (const std::out_of_range&) {
      throw ParseError(t.loc, "time bound out of range: " + t.text);
    }
  }

  FormulaPtr with_loc(FormulaPtr f, SourceLoc loc) {
    auto copy = std::make_shared<Formula>(*f);
    copy->loc = loc;
    return copy;
  }

  FormulaPtr parse_implies() {
    const SourceLoc loc = ts_.peek().loc;
    FormulaPtr lhs = parse_or();
    if (ts_.accept(Tok::Implies)) return with_loc(fm::implies(lhs, parse_implies()), loc);
    return lhs;
  }

  FormulaPtr parse_or() {
    const SourceLoc loc = ts_.peek().loc;
    FormulaPtr lhs = parse_and();
    while (ts_.accept(Tok::Bar)) lhs = with_loc(fm::disj(lhs, parse_and()), loc);
    return lhs;
  }

  FormulaPtr parse_and() {
    const SourceLoc loc = ts_.peek().loc;
    FormulaPtr lhs = parse_until();
    while (ts_.accept(Tok::Amp)) lhs = with_loc(fm::conj(lhs, parse_until()), loc);
    return lhs;
  }

  FormulaPtr parse_until() {
    const SourceLoc loc = ts_.peek().loc;
    FormulaPtr lhs = parse_prefix();
    if (at_temporal("U")) {
      ts_.next();
      const std::uint64_t k = parse_bound();
      FormulaPtr rhs = parse_prefix();
      if (ts_.at_ident("U") && ts_.peek(1).kind == Tok::Le) ts_.fail("'U' does not chain; add parentheses");
      return with_loc(fm::until(k, lhs, rhs), loc);
    }
    return lhs;
  }

  FormulaPtr parse_prefix() {
    const SourceLoc loc = ts_.peek().loc;
    if (ts_.accept(Tok::Bang)) return with_loc(fm::negate(parse_prefix()), loc);
    for (std::string_view w : {"X", "F", "G"}) {
      if (at_temporal(w)) {
        ts_.next();
        const std::uint64_t k = parse_bound();
        FormulaPtr body = parse_prefix();
        if (w == "X") return with_loc(fm::next(k, body), loc);
        if (w == "F") return with_loc(fm::finally(k, body), loc);
        return with_loc(fm::globally(k, body), loc);
      }
    }
    if (ts_.at_ident("U") && ts_.peek(1).kind == Tok::Le) ts_.fail("'U' needs a left operand");
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    const SourceLoc loc = ts_.peek().loc;
    if (ts_.at_ident("true") && !continues_expression(ts_.peek(1).kind)) {
      ts_.next();
      return with_loc(fm::truth(true), loc);
    }
    if (ts_.at_ident("false") && !continues_expression(ts_.peek(1).kind)) {
      ts_.next();
      return with_loc(fm::truth(false), loc);
    }
    if (ts_.at(Tok::LParen)) {
      const std::size_t start = ts_.position();
      try {
        ts_.next();
        FormulaPtr inner = parse_implies();
        ts_.expect(Tok::RParen, "')'");
        if (!continues_expression(ts_.peek().kind)) return inner;
      } catch (const ParseError& first) {
        ts_.rewind(start);
        try {
          return parse_atom();
        } catch (const ParseError&) {
          throw first;
        }
      }
      ts_.rewind(start);
    }
    return parse_atom();
  }

  FormulaPtr parse_atom() {
    const SourceLoc loc = ts_.peek().loc;
    if (ts_.at(Tok::Ident) && is_temporal_word(ts_.peek().text) && !is_variable(ts_.peek().text)) {
      ts_.fail("missing bound: write " + ts_.peek().text + "<=k");
    }
    ExprPtr e = resolve(parse_relational(ts_), scope_);
    if (e->type != ValueType::Bool) throw ParseError(loc, "atom '" + print_expr(*e) + "' is not boolean");
    return with_loc(fm::atom(e), loc);
  }

  TokenStream ts_;
  Scope scope_;
  std::vector<std::string> var_names_;
};

int formula_precedence(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Implies: return 1;
    case FormulaKind::Or: return 2;
    case FormulaKind::And: return 3;
    case FormulaKind::Until: return 4;
    case FormulaKind::Not:
    case FormulaKind::Next:
    case FormulaKind::Finally:
    case FormulaKind::Globally: return 5;
    default: return 6;
  }
}

void print_into(const Formula& f, int min_prec, std::string& out) {
  const int p = formula_precedence(f);
  const bool paren = p < min_prec;
  if (paren) out += '(';
  switch (f.kind) {
    case FormulaKind::True: out += "true"; break;
    case FormulaKind::False: out += "false"; break;
    case FormulaKind::Atom: {
      const ExprKind k = f.atom->kind;
      const bool wrap = k == ExprKind::And || k == ExprKind::Or || k == ExprKind::Implies || k == ExprKind::Not || k == ExprKind::Ite;
      out += wrap ? "(" + print_expr(*f.atom) + ")" : print_expr(*f.atom);
      break;
    }
    case FormulaKind::Not:
      out += '!';
      print_into(*f.args[0], 5, out);
      break;
    case FormulaKind::Next:
    case FormulaKind::Finally:
    case FormulaKind::Globally:
      out += f.kind == FormulaKind::Next ? "X<=" : f.kind == FormulaKind::Finally ? "F<=" : "G<=";
      out += std::to_string(f.bound) + " ";
      print_into(*f.args[0], 5, out);
      break;
    case FormulaKind::Until:
      print_into(*f.args[0], 5, out);
      out += " U<=" + std::to_string(f.bound) + " ";
      print_into(*f.args[1], 5, out);
      break;
    case FormulaKind::Implies:
      print_into(*f.args[0], 2, out);
      out += " => ";
      print_into(*f.args[1], 1, out);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
      print_into(*f.args[0], p, out);
      out += f.kind == FormulaKind::And ? " & " : " | ";
      print_into(*f.args[1], p + 1, out);
      break;
  }
  if (paren) out += ')';
}

}  // namespace

FormulaPtr parse_formula(std::string_view text, const Model& model) { return FormulaParser(text, model).parse(); }

std::string print_formula(const Formula& f) {
  std::string out;
  print_into(f, 0, out);
  return out;
}

bool is_atomic_combination(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Atom: return true;
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return std::all_of(f.args.begin(), f.args.end(), [](const FormulaPtr& a) { return is_atomic_combination(*a); });
    default: return false;
  }
}

std::uint64_t horizon(const Formula& f) {
  std::uint64_t sub = 0;
  for (const auto& a : f.args) sub = std::max(sub, horizon(*a));
  return f.temporal() ? f.bound + sub : sub;
}

// ---------------------------------------------------------------------------
// Restriction check
//
//   phi   := atoms | !phi | phi (&,|,=>) phi | psi U psi | X xchain | F psi | G psi
//   xchain:= X xchain | psi U psi | psi
//   psi   := atoms | X psi | F psi | G psi

namespace {

class RestrictionChecker {
 public:
  RestrictionReport run(const Formula& f) {
    phi(f, "root");
    report_.accepted = report_.violations.empty();
    return report_;
  }

 private:
  void violate(const std::string& path, std::string rule) { report_.violations.push_back({path, std::move(rule)}); }

  static std::string child(const std::string& path, std::size_t i) { return path + "." + std::to_string(i); }

  void phi(const Formula& f, const std::string& path) {
    if (is_atomic_combination(f)) return;
    switch (f.kind) {
      case FormulaKind::Not:
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
        for (std::size_t i = 0; i < f.args.size(); ++i) phi(*f.args[i], child(path, i));
        return;
      case FormulaKind::Until:
        psi(*f.args[0], child(path, 0), "until");
        psi(*f.args[1], child(path, 1), "until");
        return;
      case FormulaKind::Next:
        xchain(*f.args[0], child(path, 0));
        return;
      default:
        psi(*f.args[0], child(path, 0), f.kind == FormulaKind::Finally ? "F" : "G");
    }
  }

  void xchain(const Formula& f, const std::string& path) {
    if (f.kind == FormulaKind::Next) return xchain(*f.args[0], child(path, 0));
    if (f.kind == FormulaKind::Until) {
      psi(*f.args[0], child(path, 0), "until");
      psi(*f.args[1], child(path, 1), "until");
      return;
    }
    psi(f, path, "X");
  }

  void psi(const Formula& f, const std::string& path, const char* parent) {
    if (is_atomic_combination(f)) return;
    switch (f.kind) {
      case FormulaKind::Next:
      case FormulaKind::Finally:
      case FormulaKind::Globally:
        psi(*f.args[0], child(path, 0), f.kind == FormulaKind::Next ? "X" : f.kind == FormulaKind::Finally ? "F" : "G");
        return;
      case FormulaKind::Until:
        violate(path, std::string("until under temporal operator ") + parent + " (only X may enclose U)");
        return;
      case FormulaKind::Not:
        violate(path, std::string("negation of a temporal formula under temporal operator ") + parent);
        return;
      default:
        violate(path, std::string("boolean connective over temporal formulas under temporal operator ") + parent);
    }
  }

  RestrictionReport report_;
};

std::uint64_t counter_count(const Formula& f, bool inner) {
  if (is_atomic_combination(f)) return 0;
  std::uint64_t sub = 0;
  switch (f.kind) {
    case FormulaKind::Until:
      return 4 + counter_count(*f.args[0], true) + counter_count(*f.args[1], true);
    case FormulaKind::Next: {
      if (!inner) {
        const Formula* g = f.args[0].get();
        while (g->kind == FormulaKind::Next) g = g->args[0].get();
        if (g->kind == FormulaKind::Until) return counter_count(*g, false);
      }
      return 1 + counter_count(*f.args[0], true);
    }
    case FormulaKind::Finally:
    case FormulaKind::Globally:
      return (inner ? 2 : 1) + counter_count(*f.args[0], true);
    default:
      for (const auto& a : f.args) sub += counter_count(*a, inner);
      return sub;
  }
}

}  // namespace

RestrictionReport check_restriction(const Formula& f) { return RestrictionChecker{}.run(f); }

std::string to_string(const MemoryClass& m) {
  return (m.kind == MemoryClass::BoundedCounters ? "BoundedCounters(" : "WindowBuffer(") + std::to_string(m.size) + ")";
}

MemoryClass classify_memory(const Formula& f) {
  if (check_restriction(f).accepted) return {MemoryClass::BoundedCounters, counter_count(f, false)};
  return {MemoryClass::WindowBuffer, horizon(f)};
}

}  // namespace raresplit
