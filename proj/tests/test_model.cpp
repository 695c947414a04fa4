#include <fstream>
#include <sstream>

#include "doctest.h"
#include "raresplit/model.hpp"
#include "raresplit/syntax.hpp"

using namespace raresplit;

namespace {

const char* kCoin = "x:[0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=0);";

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(RARESPLIT_SOURCE_DIR) + "/" + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("coin model structure") {
  auto m = parse_model(kCoin);
  CHECK(m->variables.size() == 1);
  CHECK(m->command_count() == 1);
  CHECK(m->modules.at(0).commands.at(0).branches.size() == 2);
  auto s = initial_state(*m);
  CHECK(s.values == std::vector<std::int64_t>{0});
  CHECK(s.step == 0);
}

TEST_CASE("print then parse is the identity") {
  for (const char* file : {"models/leader.model", "models/philosophers.model", "models/counters.model", "models/chain.model"}) {
    CAPTURE(file);
    auto m = parse_model(slurp(file));
    auto again = parse_model(print_model(*m));
    CHECK(*m == *again);
  }
}

TEST_CASE("weights must sum to one") {
  CHECK_THROWS_AS(parse_model("x:[0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.4:(x'=0);"), ParseError);
}

TEST_CASE("parse errors carry a location") {
  try {
    parse_model("x:[0..1] init 0;\n[] x=0 -> (y'=1);");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.loc().line == 2);
  }
}

TEST_CASE("deadlocked state self-loops") {
  auto m = parse_model(kCoin);
  ModelState s{{1}, 4};
  Rng rng({1, 0, 0, 0});
  step(*m, s, rng);
  CHECK(s.values == std::vector<std::int64_t>{1});
  CHECK(s.step == 5);
  auto d = exact_distribution(*m, ModelState{{1}, 0});
  REQUIRE(d.size() == 1);
  CHECK(d[0].probability == Rational(1));
  CHECK(d[0].state.values == std::vector<std::int64_t>{1});
}

TEST_CASE("coin exact distribution and sampling") {
  auto m = parse_model(kCoin);
  auto d = exact_distribution(*m, initial_state(*m));
  REQUIRE(d.size() == 2);
  for (const auto& s : d) CHECK(s.probability == Rational(1, 2));
  Rng rng({7, 0, 0, 0});
  int ones = 0;
  for (int i = 0; i < 10000; ++i) {
    auto s = initial_state(*m);
    step(*m, s, rng);
    ones += static_cast<int>(s.values[0]);
  }
  CHECK(ones / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("bundled model facts") {
  auto leader = parse_model(slurp("models/leader.model"));
  CHECK(leader->state_space_bound() == doctest::Approx(1382027890343804928.0));
  auto counters = parse_model(slurp("models/counters.model"));
  auto s = initial_state(*counters);
  CHECK(s.values.size() == 10);
  for (auto v : s.values) CHECK(v == 0);
  auto li = initial_state(*leader);
  CHECK(li.values[leader->var_index("c")] == 0);
  CHECK(li.values[leader->var_index("u")] == 0);
}

TEST_CASE("distributions sum to one on the small counters model") {
  auto m = parse_model(slurp("models/counters_small.model"));
  for (std::int64_t a = 0; a <= 2; ++a) {
    for (std::int64_t b = 0; b <= 2; ++b) {
      Rational sum = 0;
      for (const auto& s : exact_distribution(*m, ModelState{{a, b}, 0})) sum += s.probability;
      CHECK(sum == Rational(1));
    }
  }
}

TEST_CASE("reachable states are capped") {
  auto m = parse_model(slurp("models/counters.model"));
  CHECK_THROWS_AS(count_reachable(*m, 50, 100), StateSpaceCapExceeded);
  auto coin = parse_model(kCoin);
  CHECK(count_reachable(*coin, 3, 100) == 2);
}
