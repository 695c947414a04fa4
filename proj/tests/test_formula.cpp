#include "doctest.h"
#include "oracle_support.hpp"

using namespace raresplit;

namespace {

const char* kLabels = R"(
a : bool init false;
b : bool init false;
n : [0..3] init 0;
[] true -> 0.5:(a'=!a) + 0.5:(b'=!b);
label "elected" = a;
label "init" = n = 0;
label "complete" = b;
)";

}  // namespace

TEST_CASE("property texts parse and print") {
  auto m = parse_model(kLabels);
  auto g = parse_formula("G<=420 !\"elected\"", *m);
  CHECK(g->kind == FormulaKind::Globally);
  CHECK(g->bound == 420);
  auto u = parse_formula("X<=1 (!\"init\" U<=1000 \"complete\")", *m);
  CHECK(u->kind == FormulaKind::Next);
  CHECK(u->args[0]->kind == FormulaKind::Until);
  CHECK(u->args[0]->bound == 1000);
  CHECK(horizon(*u) == 1001);
  auto again = parse_formula(print_formula(*u), *m);
  CHECK(*again == *u);
}

TEST_CASE("restriction examples") {
  auto m = parse_model(kLabels);
  auto rejected = check_restriction(*parse_formula("F<=10 (a | G<=5 b)", *m));
  CHECK_FALSE(rejected.accepted);
  CHECK_FALSE(rejected.violations.empty());
  CHECK(check_restriction(*parse_formula("X<=1 (!\"init\" U<=1000 \"complete\")", *m)).accepted);
  CHECK(check_restriction(*parse_formula("G<=5 F<=3 a", *m)).accepted);
}

TEST_CASE("memory classes") {
  auto m = parse_model(kLabels);
  CHECK(classify_memory(*parse_formula("G<=420 !\"elected\"", *m)) == MemoryClass{MemoryClass::BoundedCounters, 1});
  CHECK(classify_memory(*parse_formula("F<=7 (a | G<=5 b)", *m)) == MemoryClass{MemoryClass::WindowBuffer, 12});
  CHECK(classify_memory(*parse_formula("a", *m)) == MemoryClass{MemoryClass::BoundedCounters, 0});
}

TEST_CASE("observer network shapes") {
  auto m = parse_model(kLabels);
  auto g = compile_observers(*parse_formula("G<=420 !\"elected\"", *m));
  REQUIRE(g->nodes().size() == 2);
  CHECK(g->nodes()[g->root()].kind == NodeKind::OuterG);
  CHECK(g->nodes()[0].kind == NodeKind::Atom);

  auto u = compile_observers(*parse_formula("X<=1 (!\"init\" U<=1000 \"complete\")", *m));
  const auto& root = u->nodes()[u->root()];
  CHECK(root.kind == NodeKind::Until);
  CHECK(root.bound == 1000);
  CHECK(root.delay == 1);
  auto init = u->initial_state();
  CHECK(init[*u->slot("obs.root.w1")] == -1);
  CHECK(init[*u->slot("obs.root.w2")] == -1);

  auto c = compile_observers(*parse_formula("F<=5 a & G<=7 b", *m));
  CHECK(c->nodes()[c->root()].kind == NodeKind::Conj);
}

TEST_CASE("observer step examples") {
  auto model = parse_model(oracle::kTwoBoolModel);
  ObserverNetwork f(compile_observers(*parse_formula("F<=5 a", *model)));
  CHECK(f.observe(oracle::bool_state(1, 0)) == Tri::True);

  ObserverNetwork u(compile_observers(*parse_formula("a U<=3 b", *model)));
  CHECK(u.observe(oracle::bool_state(2, 0)) == Tri::True);

  ObserverNetwork g(compile_observers(*parse_formula("G<=2 a", *model)));
  CHECK(g.observe(oracle::bool_state(1, 0)) == Tri::Undecided);
  CHECK(g.observe(oracle::bool_state(1, 1)) == Tri::Undecided);
  CHECK(g.observe(oracle::bool_state(1, 2)) == Tri::True);
}

TEST_CASE("snapshots") {
  auto model = parse_model(kLabels);
  ObserverNetwork g(compile_observers(*parse_formula("G<=420 !\"elected\"", *model)));
  auto snap = g.snapshot();
  for (auto byte : snap) CHECK(byte == 0);
  g.observe(ModelState{{0, 1, 0}, 0});
  auto mid = g.snapshot();
  ObserverNetwork h(g.program_ptr());
  h.restore(mid);
  CHECK(h.snapshot() == mid);
  auto big = compile_observers(*parse_formula("G<=42000 !\"elected\"", *model));
  CHECK(big->snapshot_bytes() == g.program().snapshot_bytes());
}
