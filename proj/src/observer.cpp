#include "raresplit/observer.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <functional>
#include <sstream>

namespace raresplit {

std::string_view to_string(Tri t) {
  switch (t) {
    case Tri::Undecided: return "?";
    case Tri::True: return "true";
    case Tri::False: return "false";
  }
  return "?";
}

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Atom: return "atom";
    case NodeKind::Conj: return "and";
    case NodeKind::Disj: return "or";
    case NodeKind::Impl: return "implies";
    case NodeKind::InnerX: return "inner-X";
    case NodeKind::InnerF: return "inner-F";
    case NodeKind::InnerG: return "inner-G";
    case NodeKind::OuterX: return "outer-X";
    case NodeKind::OuterF: return "outer-F";
    case NodeKind::OuterG: return "outer-G";
    case NodeKind::Until: return "until";
  }
  return "?";
}

namespace obs_ir {

namespace {

using Op = Term::Op;

TermPtr make(Op op, std::vector<TermPtr> args = {}, std::int64_t value = 0, Ref ref = Ref::O) {
  auto t = std::make_shared<Term>();
  t->op = op;
  t->args = std::move(args);
  t->value = value;
  t->ref = ref;
  return t;
}

TermPtr lit(std::int64_t v) { return make(Op::Lit, {}, v); }
TermPtr ref(Ref r) { return make(Op::Ref, {}, 0, r); }
TermPtr tru() { return lit(1); }
TermPtr fls() { return lit(0); }

TermPtr not_(TermPtr a) {
  if (a->op == Op::Lit) return lit(a->value ? 0 : 1);
  if (a->op == Op::Not) return a->args[0];
  return make(Op::Not, {std::move(a)});
}

TermPtr all(std::vector<TermPtr> args) {
  std::vector<TermPtr> kept;
  for (auto& a : args) {
    if (a->op == Op::Lit && a->value) continue;
    kept.push_back(std::move(a));
  }
  if (kept.empty()) return tru();
  if (kept.size() == 1) return kept[0];
  return make(Op::And, std::move(kept));
}

TermPtr any(std::vector<TermPtr> args) { return make(Op::Or, std::move(args)); }
TermPtr add(TermPtr a, std::int64_t c) { return make(Op::Add, {std::move(a), lit(c)}); }
TermPtr lt(TermPtr a, TermPtr b) { return make(Op::Lt, {std::move(a), std::move(b)}); }
TermPtr le(TermPtr a, TermPtr b) { return make(Op::Le, {std::move(a), std::move(b)}); }
TermPtr eq(TermPtr a, TermPtr b) { return make(Op::Eq, {std::move(a), std::move(b)}); }
TermPtr gt(TermPtr a, TermPtr b) { return lt(std::move(b), std::move(a)); }
TermPtr ge(TermPtr a, TermPtr b) { return le(std::move(b), std::move(a)); }

const TermPtr o = ref(Ref::O), d = ref(Ref::D);
const TermPtr o1 = ref(Ref::O1), d1 = ref(Ref::D1), o2 = ref(Ref::O2), d2 = ref(Ref::D2);

Update set(Ref target, TermPtr value) { return {target, std::move(value)}; }

using Rewrite = std::function<TermPtr(const TermPtr&)>;

// Bottom-up rewrite; `fn` returns nullptr to keep a node unchanged.
TermPtr rewrite(const TermPtr& t, const Rewrite& fn) {
  if (TermPtr r = fn(t)) return r;
  if (t->args.empty()) return t;
  std::vector<TermPtr> args;
  bool changed = false;
  for (const auto& a : t->args) {
    args.push_back(rewrite(a, fn));
    changed |= args.back() != a;
  }
  if (!changed) return t;
  if (t->op == Op::And) return all(std::move(args));
  if (t->op == Op::Not) return not_(args[0]);
  return make(t->op, std::move(args), t->value, t->ref);
}

Table rewrite_table(Table t, const Rewrite& fn) {
  for (auto& c : t) {
    c.guard = rewrite(c.guard, fn);
    for (auto& u : c.updates) u.value = rewrite(u.value, fn);
  }
  return t;
}

bool mentions(const Term& t, Ref r) {
  if (t.op == Op::Ref && t.ref == r) return true;
  return std::any_of(t.args.begin(), t.args.end(), [&](const TermPtr& a) { return mentions(*a, r); });
}

const char* ref_name(Ref r) {
  switch (r) {
    case Ref::O: return "o";
    case Ref::D: return "d";
    case Ref::C0: return "c0";
    case Ref::C1: return "c1";
    case Ref::C2: return "c2";
    case Ref::C3: return "c3";
    case Ref::O1: return "o'";
    case Ref::D1: return "d'";
    case Ref::O2: return "o''";
    case Ref::D2: return "d''";
  }
  return "?";
}

void print_term(const Term& t, std::string& out) {
  switch (t.op) {
    case Op::Lit: out += std::to_string(t.value); return;
    case Op::Ref: out += ref_name(t.ref); return;
    case Op::Not:
      out += "!";
      print_term(*t.args[0], out);
      return;
    default: break;
  }
  const char* sym = t.op == Op::And ? " & " : t.op == Op::Or ? " | " : t.op == Op::Add ? " + " : t.op == Op::Lt ? " < " : t.op == Op::Le ? " <= " : " = ";
  out += "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += sym;
    print_term(*t.args[i], out);
  }
  out += ")";
}

}  // namespace

std::string print_table(const Table& table) {
  std::string out;
  for (const auto& c : table) {
    out += std::to_string(c.id) + ". ";
    print_term(*c.guard, out);
    out += " :";
    for (const auto& u : c.updates) {
      out += std::string(" ") + ref_name(u.target) + "<-";
      print_term(*u.value, out);
    }
    out += "\n";
  }
  return out;
}

std::int64_t eval(const Term& t, const std::int64_t* self, const std::int64_t* inputs) {
  switch (t.op) {
    case Op::Lit: return t.value;
    case Op::Ref: {
      const int r = static_cast<int>(t.ref);
      return r < static_cast<int>(Ref::O1) ? self[r] : inputs[r - static_cast<int>(Ref::O1)];
    }
    case Op::Not: return eval(*t.args[0], self, inputs) == 0;
    case Op::And:
      for (const auto& a : t.args) {
        if (!eval(*a, self, inputs)) return 0;
      }
      return 1;
    case Op::Or:
      for (const auto& a : t.args) {
        if (eval(*a, self, inputs)) return 1;
      }
      return 0;
    case Op::Add: return eval(*t.args[0], self, inputs) + eval(*t.args[1], self, inputs);
    case Op::Lt: return eval(*t.args[0], self, inputs) < eval(*t.args[1], self, inputs);
    case Op::Le: return eval(*t.args[0], self, inputs) <= eval(*t.args[1], self, inputs);
    case Op::Eq: return eval(*t.args[0], self, inputs) == eval(*t.args[1], self, inputs);
  }
  return 0;
}

Table swap_output(Table t) {
  for (auto& c : t) {
    for (auto& u : c.updates) {
      if (u.target == Ref::O) u.value = not_(u.value);
    }
  }
  return t;
}

Table negate_input(Table t, Ref input) {
  return rewrite_table(std::move(t), [input](const TermPtr& x) -> TermPtr {
    if (x->op == Op::Ref && x->ref == input) return not_(x);
    return nullptr;
  });
}

Table strengthen_undecided(Table t) {
  for (auto& c : t) {
    const Term& g = *c.guard;
    const bool has = (g.op == Op::Not && g.args[0]->op == Op::Ref && g.args[0]->ref == Ref::D) ||
                     (g.op == Op::And && g.args[0]->op == Op::Not && g.args[0]->args[0]->op == Op::Ref && g.args[0]->args[0]->ref == Ref::D);
    if (!has) {
      std::vector<TermPtr> parts{not_(d)};
      if (g.op == Op::And) {
        parts.insert(parts.end(), g.args.begin(), g.args.end());
      } else {
        parts.push_back(c.guard);
      }
      c.guard = all(std::move(parts));
    }
  }
  return t;
}

Table drop_commands(Table t, std::vector<int> ids) {
  t.erase(std::remove_if(t.begin(), t.end(), [&](const Command& c) { return std::find(ids.begin(), ids.end(), c.id) != ids.end(); }),
          t.end());
  return t;
}

Table erase_counter(Table t, Ref counter) {
  t = rewrite_table(std::move(t), [counter](const TermPtr& x) -> TermPtr {
    if ((x->op == Op::Lt || x->op == Op::Le || x->op == Op::Eq) && mentions(*x, counter)) return tru();
    return nullptr;
  });
  for (auto& c : t) {
    c.updates.erase(std::remove_if(c.updates.begin(), c.updates.end(), [&](const Update& u) { return u.target == counter; }), c.updates.end());
  }
  return t;
}

Table erase_nonnegative_checks(Table t) {
  return rewrite_table(std::move(t), [](const TermPtr& x) -> TermPtr {
    if (x->op == Op::Le && x->args[0]->op == Op::Lit && x->args[0]->value == 0 && x->args[1]->op == Op::Ref &&
        (x->args[1]->ref == Ref::C0 || x->args[1]->ref == Ref::C1)) {
      return tru();
    }
    return nullptr;
  });
}

// Connectives. Inputs: o' = left operand, o'' = right operand.

Table conjunction_table() {
  return {
      {1, all({not_(d), any({not_(d1), not_(d2)}), not_(any({all({not_(o1), d1}), all({not_(o2), d2})}))}), {}},
      {2, all({not_(d), d1, o1, d2, o2}), {set(Ref::D, tru()), set(Ref::O, tru())}},
      {3, all({not_(d), any({all({not_(o1), d1}), all({not_(o2), d2})})}), {set(Ref::D, tru()), set(Ref::O, fls())}},
  };
}

Table disjunction_table() { return swap_output(negate_input(negate_input(conjunction_table(), Ref::O1), Ref::O2)); }

Table implication_table() {
  return {
      {1, all({not_(d), any({all({not_(d1), not_(all({d2, o2}))}), all({d1, o1, not_(d2)})})}), {}},
      {2, all({not_(d), any({all({not_(o1), d1}), all({o2, d2})})}), {set(Ref::D, tru()), set(Ref::O, tru())}},
      {3, all({not_(d), d1, o1, d2, not_(o2)}), {set(Ref::D, tru()), set(Ref::O, fls())}},
  };
}

// Unary temporal observers. Counters: c0 = w, c1 = t.

Table inner_x_table(std::int64_t k) {
  const TermPtr w = ref(Ref::C0);
  return {
      {1, all({not_(d), d1, lt(w, lit(k))}), {set(Ref::C0, add(w, 1))}},
      {2, all({d1, eq(w, lit(k))}), {set(Ref::D, tru()), set(Ref::O, o1)}},
      {3, all({d, not_(d1)}), {set(Ref::D, fls())}},
  };
}

// Inner F over a stream of decided inputs. The output stays true for t further
// positions after a true input seen with w pending positions.
Table inner_f_table(std::int64_t k) {
  const TermPtr w = ref(Ref::C0), t = ref(Ref::C1);
  return {
      {1, all({d1, not_(o1), eq(t, lit(0)), lt(w, lit(k))}), {set(Ref::C0, add(w, 1))}},
      {2, all({d1, o1}), {set(Ref::O, tru()), set(Ref::D, tru()), set(Ref::C1, w)}},
      {3, all({d1, not_(o1), eq(t, lit(0)), eq(w, lit(k))}), {set(Ref::D, tru()), set(Ref::O, fls())}},
      {4, all({d, d1, not_(o1), eq(t, lit(0)), lt(w, lit(k))}), {set(Ref::D, fls())}},
      {5, all({d1, not_(o1), gt(t, lit(0))}), {set(Ref::C1, add(t, -1)), set(Ref::D, tru())}},
      {6, all({d, not_(d1)}), {set(Ref::D, fls())}},
  };
}

Table inner_g_table(std::int64_t k) { return swap_output(negate_input(inner_f_table(k), Ref::O1)); }

Table outer_x_table(std::int64_t k) { return strengthen_undecided(drop_commands(inner_x_table(k), {3})); }

Table outer_f_table(std::int64_t k) {
  return strengthen_undecided(erase_counter(drop_commands(inner_f_table(k), {4, 5, 6}), Ref::C1));
}

Table outer_g_table(std::int64_t k) { return swap_output(negate_input(outer_f_table(k), Ref::O1)); }

// Until: o <- X^delay (o'' U^k o'), so o' is the right operand and o'' the left.
// Counters: c0 = w', c1 = w'', c2 = t', c3 = t''.
Table until_table(std::int64_t k, std::int64_t delay) {
  const TermPtr w1 = ref(Ref::C0), w2 = ref(Ref::C1), t1 = ref(Ref::C2), t2 = ref(Ref::C3);
  const TermPtr zero = lit(0), kk = lit(k);
  Table t = {
      {1, all({d1, lt(w1, zero)}), {set(Ref::C0, add(w1, 1))}},
      {2, all({d2, lt(w2, zero)}), {set(Ref::C1, add(w2, 1))}},
      {3, all({not_(d), d1, not_(o1), ge(w1, zero), le(w1, kk)}), {set(Ref::C0, add(w1, 1))}},
      {4, all({not_(d), d1, o1, ge(w1, zero), le(w1, kk)}), {set(Ref::C2, w1), set(Ref::C0, lit(k + 1))}},
      {5, all({not_(d), d2, o2, ge(w2, zero), lt(w2, kk)}), {set(Ref::C1, add(w2, 1)), set(Ref::C3, w2)}},
      {6, all({not_(d), d2, not_(o2), ge(w2, zero), lt(w2, kk)}), {set(Ref::C1, kk)}},
      {7, all({not_(d), ge(t1, zero), ge(t2, t1)}), {set(Ref::D, tru()), set(Ref::O, tru())}, true},
      {8,
       all({not_(d), any({all({lt(t1, zero), eq(w1, lit(k + 1))}),
                          all({eq(w2, kk), any({lt(t2, t1), all({lt(t1, zero), le(t2, add(w1, -1))})})})})}),
       {set(Ref::D, tru()), set(Ref::O, fls())},
       true},
  };
  if (delay == 0) t = erase_nonnegative_checks(drop_commands(std::move(t), {1, 2}));
  return t;
}

}  // namespace obs_ir

// ---------------------------------------------------------------------------
// Compilation

namespace {

constexpr std::uint64_t kMaxBound = std::uint64_t{1} << 62;

ExprPtr fold_atoms(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::True: return make_bool(true, f.loc);
    case FormulaKind::False: return make_bool(false, f.loc);
    case FormulaKind::Atom: return f.atom;
    case FormulaKind::Not: return make_unary(ExprKind::Not, fold_atoms(*f.args[0]), f.loc);
    case FormulaKind::And: return make_binary(ExprKind::And, fold_atoms(*f.args[0]), fold_atoms(*f.args[1]), f.loc);
    case FormulaKind::Or: return make_binary(ExprKind::Or, fold_atoms(*f.args[0]), fold_atoms(*f.args[1]), f.loc);
    case FormulaKind::Implies: return make_binary(ExprKind::Implies, fold_atoms(*f.args[0]), fold_atoms(*f.args[1]), f.loc);
    default: throw std::logic_error("fold_atoms on temporal formula");
  }
}

int counters_of(NodeKind k) {
  switch (k) {
    case NodeKind::InnerX:
    case NodeKind::OuterX:
    case NodeKind::OuterF:
    case NodeKind::OuterG: return 1;
    case NodeKind::InnerF:
    case NodeKind::InnerG: return 2;
    case NodeKind::Until: return 4;
    default: return 0;
  }
}

std::vector<std::string> field_names(NodeKind k) {
  switch (counters_of(k)) {
    case 1: return {"o", "d", "w"};
    case 2: return {"o", "d", "w", "t"};
    case 4: return {"o", "d", "w1", "w2", "t1", "t2"};
    default: return {"o", "d"};
  }
}

class Compiler {
 public:
  std::vector<ObserverNode> nodes;
  std::vector<std::string> paths;

  int build(const Formula& f, bool inner, const std::string& path) {
    if (f.temporal() && f.bound > kMaxBound) throw std::invalid_argument("time bound " + std::to_string(f.bound) + " exceeds 2^62");
    if (is_atomic_combination(f)) {
      ObserverNode n;
      n.kind = NodeKind::Atom;
      n.atom = fold_atoms(f);
      n.latched = !inner;
      return push(std::move(n), path);
    }
    switch (f.kind) {
      case FormulaKind::Not: {
        const int idx = build(*f.args[0], inner, path);
        nodes[idx].negated = !nodes[idx].negated;
        return idx;
      }
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies: {
        const int a = build(*f.args[0], false, path + ".0");
        const int b = build(*f.args[1], false, path + ".1");
        ObserverNode n;
        n.kind = f.kind == FormulaKind::And ? NodeKind::Conj : f.kind == FormulaKind::Or ? NodeKind::Disj : NodeKind::Impl;
        n.input1 = a;
        n.input2 = b;
        n.children = {a, b};
        return push(std::move(n), path);
      }
      case FormulaKind::Until:
        return until(f, 0, path);
      case FormulaKind::Next: {
        if (!inner) {
          std::uint64_t delay = f.bound;
          const Formula* g = f.args[0].get();
          while (g->kind == FormulaKind::Next) {
            delay += g->bound;
            g = g->args[0].get();
          }
          if (g->kind == FormulaKind::Until) {
            if (delay > kMaxBound) throw std::invalid_argument("accumulated X delay exceeds 2^62");
            return until(*g, delay, path);
          }
        }
        return unary(f, inner ? NodeKind::InnerX : NodeKind::OuterX, path);
      }
      case FormulaKind::Finally:
        return unary(f, inner ? NodeKind::InnerF : NodeKind::OuterF, path);
      case FormulaKind::Globally:
        return unary(f, inner ? NodeKind::InnerG : NodeKind::OuterG, path);
      default:
        throw std::logic_error("unexpected formula node");
    }
  }

 private:
  int push(ObserverNode n, const std::string& path) {
    nodes.push_back(std::move(n));
    paths.push_back(path);
    return static_cast<int>(nodes.size()) - 1;
  }

  int unary(const Formula& f, NodeKind kind, const std::string& path) {
    const int c = build(*f.args[0], true, path + ".0");
    ObserverNode n;
    n.kind = kind;
    n.bound = f.bound;
    n.input1 = c;
    n.children = {c};
    return push(std::move(n), path);
  }

  int until(const Formula& f, std::uint64_t delay, const std::string& path) {
    const int left = build(*f.args[0], true, path + ".0");
    const int right = build(*f.args[1], true, path + ".1");
    ObserverNode n;
    n.kind = NodeKind::Until;
    n.bound = f.bound;
    n.delay = delay;
    n.input1 = right;
    n.input2 = left;
    n.children = {left, right};
    return push(std::move(n), path);
  }
};

obs_ir::Table table_for(const ObserverNode& n) {
  const auto k = static_cast<std::int64_t>(n.bound);
  obs_ir::Table t;
  switch (n.kind) {
    case NodeKind::Atom: return {};
    case NodeKind::Conj: t = obs_ir::conjunction_table(); break;
    case NodeKind::Disj: t = obs_ir::disjunction_table(); break;
    case NodeKind::Impl: t = obs_ir::implication_table(); break;
    case NodeKind::InnerX: t = obs_ir::inner_x_table(k); break;
    case NodeKind::InnerF: t = obs_ir::inner_f_table(k); break;
    case NodeKind::InnerG: t = obs_ir::inner_g_table(k); break;
    case NodeKind::OuterX: t = obs_ir::outer_x_table(k); break;
    case NodeKind::OuterF: t = obs_ir::outer_f_table(k); break;
    case NodeKind::OuterG: t = obs_ir::outer_g_table(k); break;
    case NodeKind::Until: t = obs_ir::until_table(k, static_cast<std::int64_t>(n.delay)); break;
  }
  return n.negated ? obs_ir::swap_output(std::move(t)) : t;
}

std::atomic<std::uint64_t> g_exclusivity_checks{0};

}  // namespace

ObserverProgramPtr compile_observers(const Formula& f) {
  RestrictionReport report = check_restriction(f);
  if (!report.accepted) {
    std::string msg = "formula is outside the restricted logic:";
    for (const auto& v : report.violations) msg += " [" + v.path + ": " + v.rule + "]";
    throw RestrictionError(msg, std::move(report));
  }
  Compiler c;
  const int root = c.build(f, false, "root");
  auto program = std::make_shared<ObserverProgram>();
  std::size_t offset = 0;
  for (auto& n : c.nodes) {
    n.counters = counters_of(n.kind);
    n.offset = offset;
    offset += 2 + static_cast<std::size_t>(n.counters);
    n.table = table_for(n);
  }
  program->nodes_ = std::move(c.nodes);
  program->paths_ = std::move(c.paths);
  program->root_ = root;
  program->state_size_ = offset;
  return program;
}

std::size_t ObserverProgram::snapshot_bytes() const {
  std::size_t bytes = 0;
  for (const auto& n : nodes_) bytes += 2 + 8 * static_cast<std::size_t>(n.counters);
  return bytes;
}

std::size_t ObserverProgram::counter_count() const {
  std::size_t c = 0;
  for (const auto& n : nodes_) c += static_cast<std::size_t>(n.counters);
  return c;
}

std::optional<int> ObserverProgram::slot(const std::string& path) const {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) return std::nullopt;
  std::string node_path = path.substr(0, dot);
  std::string field = path.substr(dot + 1);
  if (node_path.rfind("obs.", 0) == 0) node_path = node_path.substr(4);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (paths_[i] != node_path) continue;
    const ObserverNode& n = nodes_[i];
    if (n.kind == NodeKind::Until) {
      if (field == "w") field = "w1";
      if (field == "t") field = "t1";
    }
    const auto names = field_names(n.kind);
    for (std::size_t f = 0; f < names.size(); ++f) {
      if (names[f] == field) return static_cast<int>(n.offset + f);
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::string ObserverProgram::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ObserverNode& n = nodes_[i];
    out << "obs." << paths_[i] << "  " << to_string(n.kind);
    if (n.negated) out << " (negated)";
    if (n.kind == NodeKind::Atom) out << "  " << print_expr(*n.atom);
    if (n.kind != NodeKind::Atom && n.kind != NodeKind::Conj && n.kind != NodeKind::Disj && n.kind != NodeKind::Impl) out << "  k=" << n.bound;
    if (n.kind == NodeKind::Until) out << " delay=" << n.delay;
    out << "  fields:";
    for (const auto& name : field_names(n.kind)) out << ' ' << name;
    out << '\n';
  }
  return out.str();
}

std::vector<std::int64_t> ObserverProgram::initial_state() const {
  std::vector<std::int64_t> s(state_size_, 0);
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Until) {
      const auto delay = static_cast<std::int64_t>(n.delay);
      s[n.offset + 2] = -delay;
      s[n.offset + 3] = -delay;
      s[n.offset + 4] = -1;
      s[n.offset + 5] = 0;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Execution

ObserverNetwork::ObserverNetwork(ObserverProgramPtr program) : program_(std::move(program)) { reset(); }

void ObserverNetwork::reset() { state_ = program_->initial_state(); }

void ObserverNetwork::step_node(const ObserverNode& node, const ModelState& ms) {
  std::int64_t* self = state_.data() + node.offset;
  if (node.kind == NodeKind::Atom) {
    if (node.latched && self[1]) return;
    const EvalEnv env{ms.values.data(), static_cast<std::int64_t>(ms.step), nullptr};
    self[0] = evaluate_bool(*node.atom, env) != node.negated;
    self[1] = 1;
    return;
  }
  std::int64_t inputs[4] = {0, 0, 0, 0};
  if (node.input1 >= 0) {
    const std::int64_t* c = state_.data() + program_->nodes()[node.input1].offset;
    inputs[0] = c[0];
    inputs[1] = c[1];
  }
  if (node.input2 >= 0) {
    const std::int64_t* c = state_.data() + program_->nodes()[node.input2].offset;
    inputs[2] = c[0];
    inputs[3] = c[1];
  }
  std::int64_t pre[6];
  const std::size_t width = 2 + static_cast<std::size_t>(node.counters);
  std::copy(self, self + width, pre);
  std::uint32_t enabled = 0;
  for (std::size_t i = 0; i < node.table.size(); ++i) {
    if (!node.table[i].settle && obs_ir::eval(*node.table[i].guard, pre, inputs)) enabled |= 1u << i;
  }
  for (std::size_t i = 0; i < node.table.size(); ++i) {
    if (!(enabled & (1u << i))) continue;
    for (const auto& u : node.table[i].updates) self[static_cast<int>(u.target)] = obs_ir::eval(*u.value, self, inputs);
  }
  // Decision commands see the counters of this step, then fire together.
  std::copy(self, self + width, pre);
  std::uint32_t settled = 0;
  int fired = 0;
  for (std::size_t i = 0; i < node.table.size(); ++i) {
    if (node.table[i].settle && obs_ir::eval(*node.table[i].guard, pre, inputs)) {
      settled |= 1u << i;
      ++fired;
    }
  }
  if (node.kind == NodeKind::Until) {
    g_exclusivity_checks.fetch_add(1, std::memory_order_relaxed);
    if (fired > 1) throw std::logic_error("until observer: commands 7 and 8 enabled together");
  }
  for (std::size_t i = 0; i < node.table.size(); ++i) {
    if (!(settled & (1u << i))) continue;
    for (const auto& u : node.table[i].updates) self[static_cast<int>(u.target)] = obs_ir::eval(*u.value, self, inputs);
  }
}

Tri ObserverNetwork::observe(const ModelState& state) {
  for (const auto& node : program_->nodes()) step_node(node, state);
  return verdict();
}

Tri ObserverNetwork::node_output(int node) const {
  const std::int64_t* s = state_.data() + program_->nodes()[node].offset;
  if (!s[1]) return Tri::Undecided;
  return s[0] ? Tri::True : Tri::False;
}

Tri ObserverNetwork::verdict() const { return node_output(program_->root()); }

void ObserverNetwork::restore(const std::vector<std::int64_t>& values) {
  if (values.size() != program_->state_size()) throw std::invalid_argument("observer snapshot does not match the network shape");
  state_ = values;
}

std::vector<std::uint8_t> ObserverNetwork::snapshot() const {
  std::vector<std::uint8_t> out;
  out.reserve(program_->snapshot_bytes());
  for (const auto& n : program_->nodes()) {
    const std::int64_t* s = state_.data() + n.offset;
    out.push_back(static_cast<std::uint8_t>(s[0] != 0));
    out.push_back(static_cast<std::uint8_t>(s[1] != 0));
    for (int c = 0; c < n.counters; ++c) {
      const auto v = static_cast<std::uint64_t>(s[2 + c]);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
  }
  return out;
}

void ObserverNetwork::restore(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() != program_->snapshot_bytes()) throw std::invalid_argument("observer snapshot does not match the network shape");
  std::size_t p = 0;
  for (const auto& n : program_->nodes()) {
    std::int64_t* s = state_.data() + n.offset;
    if (bytes[p] > 1 || bytes[p + 1] > 1) throw std::invalid_argument("observer snapshot has a non-boolean flag");
    s[0] = bytes[p++];
    s[1] = bytes[p++];
    for (int c = 0; c < n.counters; ++c) {
      std::uint64_t v = 0;
      for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[p++]) << (8 * b);
      s[2 + c] = static_cast<std::int64_t>(v);
    }
  }
}

std::uint64_t until_exclusivity_checks() { return g_exclusivity_checks.load(); }

}  // namespace raresplit
