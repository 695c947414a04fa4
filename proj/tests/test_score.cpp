#include "chain_support.hpp"
#include "doctest.h"
#include "raresplit/syntax.hpp"

using namespace raresplit;

namespace {

std::vector<Score> ints(std::initializer_list<std::int64_t> v) { return {v.begin(), v.end()}; }

std::string model_file(const std::string& name) {
  std::ifstream in(std::string(RARESPLIT_SOURCE_DIR) + "/models/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("quantile levels") {
  auto q = levels_from_quantiles(ints({1, 2, 3, 4}), 0.5);
  REQUIRE(q.level);
  CHECK(*q.level == Score(3));
  CHECK(levels_from_quantiles(ints({5, 5, 5, 5}), 0.5).stagnation);
  CHECK_FALSE(levels_from_quantiles(ints({5, 5, 5, 5}), 0.5, Score(5)).stagnation);

  std::vector<Score> grid;
  for (std::int64_t i = 1; i <= 100; ++i) grid.push_back(Score(i));
  auto p25 = levels_from_quantiles(grid, 0.25);
  // brute force: the largest L with at least 25 scores >= L
  std::int64_t brute = 0;
  for (std::int64_t l = 1; l <= 100; ++l) {
    if (std::count_if(grid.begin(), grid.end(), [&](Score s) { return s >= Score(l); }) >= 25) brute = l;
  }
  REQUIRE(p25.level);
  CHECK(*p25.level == Score(brute));
  CHECK(brute == 76);
}

TEST_CASE("level schedules") {
  CHECK_NOTHROW(validate_levels(ints({70, 140, 420}), Score(420)));
  CHECK_THROWS(validate_levels(ints({70, 70, 420}), Score(420)));
  CHECK_THROWS(validate_levels(ints({70, 140}), Score(420)));
  CHECK(parse_levels("70,140,210") == ints({70, 140, 210}));
  CHECK(format_levels(parse_levels("1/2, 3")) == "1/2,3");
}

TEST_CASE("score expressions must be integer valued") {
  auto p = chain::problem();
  CHECK_THROWS_AS(compile_score("s = 3", *p.model, *p.program, Score(3)), ParseError);
  CHECK_THROWS_AS(compile_score("nosuch + 1", *p.model, *p.program, Score(3)), ParseError);
  auto sf = compile_score("min(step, 420)", *p.model, *p.program, Score(420));
  CHECK(evaluate_score(sf, ModelState{{0}, 500}, p.program->initial_state()) == Score(420));
}

TEST_CASE("shipped leader score meets the requirement") {
  auto p = make_problem(model_file("leader.model"), "G<=420 !\"elected\"", "obs.root.d & !obs.root.o ? step - 1 : min(step, 420)",
                        Score(420));
  auto r = validate_minimum_requirement(p, 1000, 1);
  CHECK(r.trials == 1000);
  CHECK(r.violations.empty());
}

TEST_CASE("broken and constant scores are caught") {
  const auto src = chain::model_source();
  auto broken = make_problem(src, chain::kProperty, "obs.root.d & obs.root.o ? 2 : s", Score(3));
  auto r = validate_minimum_requirement(broken, 20000, 2);
  REQUIRE_FALSE(r.violations.empty());
  CHECK(r.violations.size() == r.satisfied);
  CHECK(r.violations.front().verdict == Tri::True);

  auto constant = make_problem(src, chain::kProperty, "3", Score(3));
  auto c = validate_minimum_requirement(constant, 2000, 3);
  CHECK(c.violations.size() == c.trials - c.satisfied);
  for (const auto& v : c.violations) CHECK(v.verdict == Tri::False);
}
