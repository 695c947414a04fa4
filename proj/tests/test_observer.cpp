#include "doctest.h"
#include "oracle_support.hpp"

using namespace raresplit;

TEST_CASE("observer battery agrees with the reference checker on all short traces") {
  auto model = parse_model(oracle::kTwoBoolModel);
  for (const auto& text : oracle::kBattery) {
    CAPTURE(text);
    auto f = parse_formula(text, *model);
    REQUIRE(check_restriction(*f).accepted);
    const std::size_t len = horizon(*f) + 1;
    REQUIRE(len <= 12);
    auto r = oracle::exhaustive_check(*f, len);
    CAPTURE(r.first_failure);
    CHECK(r.mismatches == 0);
    CHECK(r.cases > 0);
  }
}
