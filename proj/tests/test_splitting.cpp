#include <cmath>

#include "chain_support.hpp"
#include "doctest.h"
#include "raresplit/splitting.hpp"

using namespace raresplit;

TEST_CASE("interval arithmetic") {
  auto ci = confidence_interval({0.5}, 100, 0.05);
  CHECK(ci.sigma2 == doctest::Approx(1.0));
  CHECK(ci.z == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(ci.lo == doctest::Approx(0.5 / (1 + ci.z / 10)));
  CHECK(ci.hi == doctest::Approx(0.5 / (1 - ci.z / 10)));
  CHECK(ci.lo == doctest::Approx(0.5 / 1.196).epsilon(1e-4));
  CHECK(ci.hi == doctest::Approx(0.5 / 0.804).epsilon(1e-4));

  auto one = confidence_interval({1.0, 1.0}, 10, 0.05);
  CHECK(one.lo == 1.0);
  CHECK(one.hi == 1.0);
  CHECK(confidence_interval({0.01}, 4, 0.05).upper_infinite);
  CHECK_THROWS_AS(confidence_interval({0.5, 0.0}, 10, 0.05), std::domain_error);
}

TEST_CASE("monte carlo examples") {
  auto coin = make_problem("x:[0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=0);", "F<=1 x=1");
  CHECK(monte_carlo(coin, 100000, 1).gamma_hat == doctest::Approx(0.5).epsilon(0.02));
  auto t = make_problem("x:[0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=0);", "true");
  CHECK(monte_carlo(t, 100, 1).gamma_hat == 1.0);
  auto c = chain::problem();
  auto e = monte_carlo(c, 100000, 5);
  const double se = std::sqrt(chain::kGamma * (1 - chain::kGamma) / 1e5);
  CHECK(std::abs(e.gamma_hat - chain::kGamma) < 3 * se);
}

TEST_CASE("one level reproduces monte carlo verdicts") {
  auto c = chain::problem();
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    auto f = fixed_level(c, {Score(3)}, 2000, seed);
    auto m = monte_carlo(c, 2000, seed);
    CHECK(f.reached.at(0) == static_cast<std::uint64_t>(std::llround(m.gamma_hat * 2000)));
  }
}

TEST_CASE("estimates are the product of their level fractions") {
  auto c = chain::problem();
  auto e = fixed_level(c, chain::levels(), 2000, 11);
  REQUIRE(e.valid());
  double product = 1.0;
  for (double g : e.gamma_i) product *= g;
  CHECK(std::abs(e.gamma_hat - product) <= 1e-12 * product);
  CHECK(to_double(e.gamma_exact) == doctest::Approx(e.gamma_hat).epsilon(1e-12));

  auto a = adaptive(c, AdaptiveOptions{0.8}, 2000, 11);
  REQUIRE(a.valid());
  double ap = 1.0;
  for (double g : a.gamma_i) ap *= g;
  CHECK(std::abs(a.gamma_hat - ap) <= 1e-12 * ap);
}

TEST_CASE("adaptive with a quantile already at the threshold is monte carlo") {
  auto p = make_problem("x:[0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=0);", "F<=1 x=1", "x", Score(1));
  auto a = adaptive(p, AdaptiveOptions{0.3}, 1000, 9);
  REQUIRE(a.valid());
  CHECK(a.levels.size() == 1);
  CHECK(a.gamma_hat == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("fixed levels are deterministic per seed and threads do not change results") {
  auto c = chain::problem();
  auto a = fixed_level(c, chain::levels(), 500, 42, 0.05, 1);
  auto b = fixed_level(c, chain::levels(), 500, 42, 0.05, 3);
  CHECK(a.reached == b.reached);
  CHECK(a.steps == b.steps);
}

TEST_CASE("extinction is reported") {
  auto c = chain::problem();
  auto e = fixed_level(c, {Score(3)}, 2, 1);
  CHECK(e.status == RunStatus::Extinct);
  CHECK_FALSE(e.valid());
  CHECK(e.extinct_level == 0);
}

TEST_CASE("estimate json round trip") {
  auto c = chain::problem();
  auto e = fixed_level(c, chain::levels(), 300, 3);
  auto back = estimate_from_json(to_json(e));
  CHECK(back.gamma_exact == e.gamma_exact);
  CHECK(back.reached == e.reached);
  CHECK(back.levels == e.levels);
  CHECK(back.status == e.status);
  CHECK(to_json(back) == to_json(e));
}
