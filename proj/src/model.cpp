#include "raresplit/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace raresplit {

std::size_t ModelStateHash::operator()(const ModelState& s) const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int64_t v : s.values) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

int Model::var_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const LabelDecl* Model::label(std::string_view name) const {
  for (const auto& l : labels) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

std::size_t Model::command_count() const {
  std::size_t n = 0;
  for (const auto& m : modules) n += m.commands.size();
  return n;
}

Scope Model::scope() const {
  Scope s;
  for (std::size_t i = 0; i < variables.size(); ++i) s.vars[variables[i].name] = {static_cast<int>(i), variables[i].type};
  for (const auto& c : constants) s.consts[c.name] = {c.value, c.type};
  for (const auto& l : labels) s.labels[l.name] = l.expr;
  return s;
}

double Model::state_space_bound() const {
  double bound = 1.0;
  for (const auto& v : variables) bound *= static_cast<double>(v.hi - v.lo + 1);
  return bound;
}

namespace {

bool same_ptr_expr(const ExprPtr& a, const ExprPtr& b) { return same_expr(a, b); }

bool same_branch(const Branch& a, const Branch& b) {
  if (!same_ptr_expr(a.weight_expr, b.weight_expr) || a.weight != b.weight || a.updates.size() != b.updates.size()) return false;
  for (std::size_t i = 0; i < a.updates.size(); ++i) {
    if (a.updates[i].var != b.updates[i].var || !same_expr(a.updates[i].value, b.updates[i].value)) return false;
  }
  return true;
}

bool same_command(const Command& a, const Command& b) {
  if (a.action != b.action || !same_expr(a.guard, b.guard) || a.branches.size() != b.branches.size()) return false;
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    if (!same_branch(a.branches[i], b.branches[i])) return false;
  }
  return true;
}

}  // namespace

bool operator==(const Model& a, const Model& b) {
  if (a.constants.size() != b.constants.size() || a.variables.size() != b.variables.size() ||
      a.modules.size() != b.modules.size() || a.labels.size() != b.labels.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.constants.size(); ++i) {
    const auto &x = a.constants[i], &y = b.constants[i];
    if (x.name != y.name || x.type != y.type || x.value != y.value || !same_expr(x.expr, y.expr)) return false;
  }
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    const auto &x = a.variables[i], &y = b.variables[i];
    if (x.name != y.name || x.type != y.type || x.lo != y.lo || x.hi != y.hi || x.init != y.init ||
        !same_expr(x.lo_expr, y.lo_expr) || !same_expr(x.hi_expr, y.hi_expr) || !same_expr(x.init_expr, y.init_expr)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.modules.size(); ++i) {
    const auto &x = a.modules[i], &y = b.modules[i];
    if (x.name != y.name || x.vars != y.vars || x.commands.size() != y.commands.size()) return false;
    for (std::size_t j = 0; j < x.commands.size(); ++j) {
      if (!same_command(x.commands[j], y.commands[j])) return false;
    }
  }
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    if (a.labels[i].name != b.labels[i].name || !same_expr(a.labels[i].expr, b.labels[i].expr)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct RawAssignment {
  std::string name;
  SourceLoc loc;
  ExprPtr value;
};

struct RawBranch {
  ExprPtr weight;
  SourceLoc loc;
  std::vector<RawAssignment> updates;
};

struct RawCommand {
  std::string action;
  ExprPtr guard;
  std::vector<RawBranch> branches;
  SourceLoc loc;
};

struct RawModule {
  std::string name;
  std::vector<std::string> vars;
  std::vector<RawCommand> commands;
};

class ModelParser {
 public:
  explicit ModelParser(std::string_view source) : ts_(tokenize(source)) {}

  ModelPtr parse() {
    auto model = std::make_shared<Model>();
    model_ = model.get();
    ts_.accept_ident("dtmc");
    RawModule top;
    while (!ts_.at(Tok::End)) {
      if (ts_.at_ident("const")) {
        parse_const();
      } else if (ts_.at_ident("label")) {
        parse_label();
      } else if (ts_.at_ident("module")) {
        ts_.next();
        RawModule mod;
        mod.name = ts_.expect(Tok::Ident, "module name").text;
        while (!ts_.accept_ident("endmodule")) {
          if (ts_.at(Tok::End)) ts_.fail("missing 'endmodule' for module '" + mod.name + "'");
          parse_member(mod);
        }
        raw_modules_.push_back(std::move(mod));
      } else {
        if (raw_modules_.empty() || !raw_modules_.back().name.empty()) raw_modules_.push_back(RawModule{});
        parse_member(raw_modules_.back());
      }
    }
    finish();
    return model;
  }

 private:
  void parse_const() {
    ts_.next();
    ConstDecl c;
    c.type = ValueType::Int;
    if (ts_.accept_ident("int")) {
      c.type = ValueType::Int;
    } else if (ts_.accept_ident("bool")) {
      c.type = ValueType::Bool;
    } else if (ts_.accept_ident("double")) {
      c.type = ValueType::Real;
    }
    const Token name = ts_.expect(Tok::Ident, "constant name");
    c.name = name.text;
    c.loc = name.loc;
    declare(c.name, c.loc);
    ts_.expect(Tok::Eq, "'='");
    c.expr = resolve(parse_expr(ts_), const_scope_);
    ts_.expect(Tok::Semi, "';'");
    const bool is_bool = c.expr->type == ValueType::Bool;
    if (is_bool != (c.type == ValueType::Bool)) {
      throw ParseError(c.loc, "constant '" + c.name + "' declared " + std::string(type_name(c.type)) + " but has type " +
                                  std::string(type_name(c.expr->type)));
    }
    c.value = eval_constant(*c.expr);
    if (c.type == ValueType::Int && denominator(c.value) != 1) {
      throw ParseError(c.loc, "integer constant '" + c.name + "' has non-integer value " + to_string(c.value));
    }
    const_scope_.consts[c.name] = {c.value, c.type};
    model_->constants.push_back(std::move(c));
  }

  void parse_label() {
    ts_.next();
    const Token name = ts_.expect(Tok::String, "quoted label name");
    declare("\"" + name.text + "\"", name.loc);
    ts_.expect(Tok::Eq, "'='");
    LabelDecl l;
    l.name = name.text;
    l.loc = name.loc;
    l.expr = parse_expr(ts_);
    ts_.expect(Tok::Semi, "';'");
    model_->labels.push_back(std::move(l));
  }

  void parse_member(RawModule& mod) {
    if (ts_.at(Tok::LBracket)) {
      mod.commands.push_back(parse_command());
      return;
    }
    if (ts_.at(Tok::Ident) && ts_.peek(1).kind == Tok::Colon) {
      mod.vars.push_back(parse_var());
      return;
    }
    ts_.fail("expected variable declaration, command, constant, label or module; found '" + ts_.peek().text + "'");
  }

  std::string parse_var() {
    const Token name = ts_.next();
    declare(name.text, name.loc);
    ts_.expect(Tok::Colon, "':'");
    VarDecl v;
    v.name = name.text;
    v.loc = name.loc;
    if (ts_.accept_ident("bool")) {
      v.type = ValueType::Bool;
      v.lo = 0;
      v.hi = 1;
    } else {
      ts_.expect(Tok::LBracket, "'[' or 'bool'");
      v.type = ValueType::Int;
      v.lo_expr = resolve(parse_expr(ts_), const_scope_);
      ts_.expect(Tok::DotDot, "'..'");
      v.hi_expr = resolve(parse_expr(ts_), const_scope_);
      ts_.expect(Tok::RBracket, "']'");
      v.lo = const_int(*v.lo_expr, "lower bound");
      v.hi = const_int(*v.hi_expr, "upper bound");
      if (v.lo > v.hi) throw ParseError(v.loc, "empty range for variable '" + v.name + "'");
    }
    v.init = v.lo;
    if (ts_.accept_ident("init")) {
      v.init_expr = resolve(parse_expr(ts_), const_scope_);
      if ((v.init_expr->type == ValueType::Bool) != (v.type == ValueType::Bool)) {
        throw ParseError(v.init_expr->loc, "initial value of '" + v.name + "' has the wrong type");
      }
      v.init = v.type == ValueType::Bool ? (eval_constant(*v.init_expr) != 0 ? 1 : 0) : const_int(*v.init_expr, "initial value");
      if (v.init < v.lo || v.init > v.hi) {
        throw ParseError(v.init_expr->loc, "initial value " + std::to_string(v.init) + " of '" + v.name + "' is outside [" +
                                               std::to_string(v.lo) + ".." + std::to_string(v.hi) + "]");
      }
    }
    ts_.expect(Tok::Semi, "';'");
    model_->variables.push_back(std::move(v));
    return name.text;
  }

  RawCommand parse_command() {
    RawCommand c;
    c.loc = ts_.expect(Tok::LBracket, "'['").loc;
    if (ts_.at(Tok::Ident)) c.action = ts_.next().text;
    ts_.expect(Tok::RBracket, "']'");
    c.guard = parse_expr(ts_);
    ts_.expect(Tok::Arrow, "'->'");
    do {
      c.branches.push_back(parse_branch());
    } while (ts_.accept(Tok::Plus));
    ts_.expect(Tok::Semi, "';' after command");
    return c;
  }

  bool at_update() const {
    if (ts_.at_ident("true")) return ts_.peek(1).kind == Tok::Semi || ts_.peek(1).kind == Tok::Plus;
    return ts_.at(Tok::LParen) && ts_.peek(1).kind == Tok::Ident && ts_.peek(2).kind == Tok::Prime;
  }

  RawBranch parse_branch() {
    RawBranch b;
    b.loc = ts_.peek().loc;
    if (!at_update()) {
      b.weight = parse_expr(ts_);
      ts_.expect(Tok::Colon, "':' after branch weight");
    }
    if (ts_.accept_ident("true")) return b;
    do {
      ts_.expect(Tok::LParen, "'(' starting an update");
      RawAssignment a;
      const Token name = ts_.expect(Tok::Ident, "variable name");
      a.name = name.text;
      a.loc = name.loc;
      ts_.expect(Tok::Prime, "''' after updated variable");
      ts_.expect(Tok::Eq, "'='");
      a.value = parse_expr(ts_);
      ts_.expect(Tok::RParen, "')'");
      b.updates.push_back(std::move(a));
    } while (ts_.accept(Tok::Amp));
    return b;
  }

  std::int64_t const_int(const Expr& e, const char* what) {
    if (e.type != ValueType::Int) throw ParseError(e.loc, std::string(what) + " must be an integer");
    const Rational v = eval_constant(e);
    if (denominator(v) != 1) throw ParseError(e.loc, std::string(what) + " must be an integer");
    return numerator(v).convert_to<std::int64_t>();
  }

  void declare(const std::string& name, SourceLoc loc) {
    if (!names_.insert(name).second) throw ParseError(loc, "'" + name + "' is declared more than once");
  }

  static void runtime_type(const Expr& e, const char* what) {
    if (e.type == ValueType::Real) throw ParseError(e.loc, std::string(what) + " cannot use double-valued expressions");
  }

  void finish() {
    Scope scope = model_->scope();
    scope.labels.clear();
    for (auto& l : model_->labels) {
      l.expr = resolve(l.expr, scope);
      if (l.expr->type != ValueType::Bool) throw ParseError(l.loc, "label \"" + l.name + "\" must be boolean");
      scope.labels[l.name] = l.expr;
    }
    for (auto& raw : raw_modules_) {
      ModuleDef mod;
      mod.name = raw.name;
      for (const auto& v : raw.vars) mod.vars.push_back(model_->var_index(v));
      for (auto& rc : raw.commands) mod.commands.push_back(finish_command(rc, scope));
      model_->modules.push_back(std::move(mod));
    }
  }

  Command finish_command(const RawCommand& rc, const Scope& scope) {
    Command c;
    c.action = rc.action;
    c.loc = rc.loc;
    c.guard = resolve(rc.guard, scope);
    if (c.guard->type != ValueType::Bool) throw ParseError(c.guard->loc, "guard must be boolean");
    Rational total = 0;
    for (const auto& rb : rc.branches) {
      Branch b;
      if (rb.weight) {
        b.weight_expr = resolve(rb.weight, scope);
        if (b.weight_expr->type == ValueType::Bool) throw ParseError(rb.weight->loc, "branch weight must be numeric");
        b.weight = eval_constant(*b.weight_expr);
        if (b.weight <= 0) throw ParseError(rb.weight->loc, "branch weight " + to_string(b.weight) + " is not positive");
      }
      b.probability = to_double(b.weight);
      total += b.weight;
      std::unordered_set<int> assigned;
      for (const auto& ra : rb.updates) {
        Assignment a;
        a.var = model_->var_index(ra.name);
        if (a.var < 0) throw ParseError(ra.loc, "update of undeclared variable '" + ra.name + "'");
        if (!assigned.insert(a.var).second) throw ParseError(ra.loc, "variable '" + ra.name + "' is updated twice in one branch");
        a.value = resolve(ra.value, scope);
        runtime_type(*a.value, "updates");
        if ((a.value->type == ValueType::Bool) != (model_->variables[a.var].type == ValueType::Bool)) {
          throw ParseError(ra.loc, "update of '" + ra.name + "' has the wrong type");
        }
        b.updates.push_back(std::move(a));
      }
      c.branches.push_back(std::move(b));
    }
    if (total != 1) throw ParseError(rc.loc, "branch weights sum to " + to_string(total) + ", not 1");
    runtime_type(*c.guard, "guards");
    return c;
  }

  TokenStream ts_;
  Model* model_ = nullptr;
  Scope const_scope_;
  std::unordered_set<std::string> names_;
  std::vector<RawModule> raw_modules_;
};

}  // namespace

ModelPtr parse_model(std::string_view source) { return ModelParser(source).parse(); }

ModelPtr load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_var(const Model& m, const VarDecl& v, std::string& out) {
  out += v.name + " : ";
  if (v.type == ValueType::Bool) {
    out += "bool";
  } else {
    out += "[" + print_expr(*v.lo_expr) + ".." + print_expr(*v.hi_expr) + "]";
  }
  if (v.init_expr) out += " init " + print_expr(*v.init_expr);
  out += ";\n";
  (void)m;
}

void print_command(const Model& m, const Command& c, std::string& out) {
  out += "[" + c.action + "] " + print_expr(*c.guard) + " -> ";
  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const Branch& b = c.branches[i];
    if (i) out += " + ";
    if (b.weight_expr) out += print_expr(*b.weight_expr) + ":";
    if (b.updates.empty()) {
      out += "true";
      continue;
    }
    for (std::size_t j = 0; j < b.updates.size(); ++j) {
      if (j) out += " & ";
      out += "(" + m.variables[b.updates[j].var].name + "'=" + print_expr(*b.updates[j].value) + ")";
    }
  }
  out += ";\n";
}

}  // namespace

std::string print_model(const Model& m) {
  std::string out = "dtmc\n\n";
  for (const auto& c : m.constants) {
    out += "const " + std::string(type_name(c.type)) + " " + c.name + " = " + print_expr(*c.expr) + ";\n";
  }
  for (const auto& mod : m.modules) {
    out += "\n";
    const std::string indent = mod.name.empty() ? "" : "  ";
    if (!mod.name.empty()) out += "module " + mod.name + "\n";
    for (int v : mod.vars) {
      out += indent;
      print_var(m, m.variables[v], out);
    }
    for (const auto& c : mod.commands) {
      out += indent;
      print_command(m, c, out);
    }
    if (!mod.name.empty()) out += "endmodule\n";
  }
  if (!m.labels.empty()) out += "\n";
  for (const auto& l : m.labels) out += "label \"" + l.name + "\" = " + print_expr(*l.expr) + ";\n";
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

ModelState initial_state(const Model& m) {
  ModelState s;
  s.values.reserve(m.variables.size());
  for (const auto& v : m.variables) s.values.push_back(v.init);
  return s;
}

namespace {

void apply_branch(const Model& m, const Branch& b, const ModelState& pre, ModelState& post) {
  const EvalEnv env{pre.values.data(), static_cast<std::int64_t>(pre.step), nullptr};
  for (const auto& a : b.updates) {
    const std::int64_t v = evaluate(*a.value, env);
    const VarDecl& decl = m.variables[a.var];
    if (v < decl.lo || v > decl.hi) {
      throw std::runtime_error("update sets '" + decl.name + "' to " + std::to_string(v) + ", outside [" + std::to_string(decl.lo) +
                               ".." + std::to_string(decl.hi) + "]");
    }
    post.values[a.var] = v;
  }
}

template <typename Fn>
void for_each_enabled(const Model& m, const ModelState& s, Fn&& fn) {
  const EvalEnv env{s.values.data(), static_cast<std::int64_t>(s.step), nullptr};
  for (const auto& mod : m.modules) {
    for (const auto& c : mod.commands) {
      if (evaluate_bool(*c.guard, env)) fn(c);
    }
  }
}

}  // namespace

void step(const Model& m, ModelState& state, Rng& rng) {
  thread_local std::vector<const Command*> enabled;
  enabled.clear();
  for_each_enabled(m, state, [&](const Command& c) { enabled.push_back(&c); });
  if (enabled.empty()) {
    ++state.step;
    return;
  }
  const Command& cmd = enabled.size() == 1 ? *enabled[0] : *enabled[rng.index(enabled.size())];
  std::size_t choice = 0;
  if (cmd.branches.size() > 1) {
    double u = rng.uniform();
    choice = cmd.branches.size() - 1;
    for (std::size_t i = 0; i < cmd.branches.size(); ++i) {
      if (u < cmd.branches[i].probability) {
        choice = i;
        break;
      }
      u -= cmd.branches[i].probability;
    }
  }
  const Branch& b = cmd.branches[choice];
  if (!b.updates.empty()) {
    ModelState next = state;
    apply_branch(m, b, state, next);
    state.values.swap(next.values);
  }
  ++state.step;
}

std::vector<Successor> exact_distribution(const Model& m, const ModelState& state) {
  std::vector<const Command*> enabled;
  for_each_enabled(m, state, [&](const Command& c) { enabled.push_back(&c); });
  std::vector<Successor> out;
  ModelState next = state;
  ++next.step;
  if (enabled.empty()) {
    out.push_back({next, Rational(1)});
    return out;
  }
  const Rational pick(1, static_cast<long long>(enabled.size()));
  for (const Command* c : enabled) {
    for (const auto& b : c->branches) {
      ModelState succ = next;
      apply_branch(m, b, state, succ);
      const Rational p = pick * b.weight;
      bool merged = false;
      for (auto& existing : out) {
        if (existing.state == succ) {
          existing.probability += p;
          merged = true;
          break;
        }
      }
      if (!merged) out.push_back({std::move(succ), p});
    }
  }
  return out;
}

std::size_t count_reachable(const Model& m, std::uint64_t depth, std::size_t cap) {
  std::unordered_set<ModelState, ModelStateHash> seen;
  std::vector<ModelState> frontier{initial_state(m)};
  seen.insert(frontier[0]);
  for (std::uint64_t d = 0; d < depth && !frontier.empty(); ++d) {
    std::vector<ModelState> next;
    for (const auto& s : frontier) {
      for (auto& succ : exact_distribution(m, s)) {
        succ.state.step = 0;
        if (seen.insert(succ.state).second) {
          if (seen.size() > cap) throw StateSpaceCapExceeded("reachable state count exceeds cap of " + std::to_string(cap));
          next.push_back(std::move(succ.state));
        }
      }
    }
    frontier = std::move(next);
  }
  return seen.size();
}

std::string format_state(const Model& m, const ModelState& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    if (i) out += ", ";
    out += m.variables[i].name + "=";
    if (m.variables[i].type == ValueType::Bool) {
      out += s.values[i] ? "true" : "false";
    } else {
      out += std::to_string(s.values[i]);
    }
  }
  out += "} @" + std::to_string(s.step);
  return out;
}

}  // namespace raresplit
