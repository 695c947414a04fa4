#include <filesystem>

#include "doctest.h"
#include "raresplit/experiment.hpp"

using namespace raresplit;

namespace {

ExperimentConfig chain_config() {
  ExperimentConfig c;
  c.name = "chain";
  c.model = std::string(RARESPLIT_SOURCE_DIR) + "/models/chain.model";
  c.property = "F<=5 \"goal\"";
  c.score = "s";
  c.levels = {Score(2), Score(3)};
  c.budget = 200;
  c.repeats = 4;
  return c;
}

}  // namespace

TEST_CASE("config round trip") {
  auto c = chain_config();
  c.threshold = Score(3);
  c.proportion = 0.8;
  c.out = "x";
  CHECK(config_from_json(to_json(c)) == c);
  auto j = to_json(c);
  j["bogus"] = 1;
  CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}

TEST_CASE("config validation") {
  auto c = chain_config();
  CHECK_NOTHROW(validate(c));
  c.levels.clear();
  CHECK_THROWS(validate(c));
  c = chain_config();
  c.estimator = "adaptive";
  CHECK_THROWS(validate(c));
  c.proportion = 0.8;
  c.threshold = Score(3);
  CHECK_NOTHROW(validate(c));
  c.estimator = "nope";
  CHECK_THROWS(validate(c));
}

TEST_CASE("shipped configs load") {
  for (const auto& entry : std::filesystem::directory_iterator(std::string(RARESPLIT_SOURCE_DIR) + "/experiments")) {
    CAPTURE(entry.path().string());
    auto c = load_config(entry.path());
    CHECK_NOTHROW(validate(c));
    CHECK(std::filesystem::exists(c.model));
    CHECK_NOTHROW(load_problem(c));
  }
}

TEST_CASE("ecdf csv re-parses to the same table") {
  auto c = chain_config();
  auto r = run_experiment(c);
  CHECK(r.estimates.size() == 4);
  const auto& pts = r.table.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].cumprob == doctest::Approx(static_cast<double>(i + 1) / 4));
    if (i > 0) CHECK(pts[i - 1].estimate <= pts[i].estimate);
  }
  CHECK(parse_ecdf_csv(ecdf_csv(pts)) == pts);
  CHECK(summary_from_json(to_json(r.table.summary)).mean == r.table.summary.mean);
}

TEST_CASE("repeated runs are reproducible") {
  auto c = chain_config();
  auto a = run_experiment(c);
  auto b = run_experiment(c);
  CHECK(ecdf_csv(a.table.points) == ecdf_csv(b.table.points));
}

TEST_CASE("monte carlo on a tautology") {
  auto c = chain_config();
  c.estimator = "mc";
  c.property = "true";
  c.budget = 100;
  auto r = run_experiment(c);
  for (const auto& e : r.estimates) CHECK(e.gamma_hat == 1.0);
  REQUIRE(r.table.summary.std_dev);
  CHECK(*r.table.summary.std_dev == 0.0);
}

TEST_CASE("summary table") {
  auto c = chain_config();
  c.repeats = 1;
  auto r = run_experiment(c);
  auto text = summarize({r.table.summary});
  CHECK(text.find("n/a") != std::string::npos);
  CHECK(text.find("chain") != std::string::npos);
  CHECK(r.table.summary.levels == 2.0);
  CHECK(r.table.summary.budget == "200");
}
