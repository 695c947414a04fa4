#include "doctest.h"
#include "oracle_support.hpp"

using namespace raresplit;

namespace {

Trace bools(const std::vector<int>& values) {
  Trace t;
  for (std::size_t i = 0; i < values.size(); ++i) t.push_back(oracle::bool_state(values[i], i));
  return t;
}

}  // namespace

TEST_CASE("next and zero-bound until") {
  auto m = parse_model(oracle::kTwoBoolModel);
  CHECK(check_trace(*parse_formula("X<=2 a", *m), bools({0, 0, 1})) == Tri::True);
  CHECK(check_trace(*parse_formula("X<=2 a", *m), bools({1, 1, 0})) == Tri::False);
  CHECK(check_trace(*parse_formula("X<=2 a", *m), bools({1, 1})) == Tri::Undecided);
  for (int v = 0; v < 4; ++v) {
    const Tri expected = (v & 2) ? Tri::True : Tri::False;
    CHECK(check_trace(*parse_formula("a U<=0 b", *m), bools({v})) == expected);
  }
}

TEST_CASE("G over a long trace fails at the first violation") {
  auto m = parse_model("e : bool init false; [] true -> 0.5:(e'=true) + 0.5:(e'=false); label \"elected\" = e;");
  auto f = parse_formula("G<=420 !\"elected\"", *m);
  Trace t;
  for (std::uint64_t i = 0; i <= 100; ++i) t.push_back(ModelState{{i == 100 ? 1 : 0}, i});
  CHECK(check_trace(*f, t) == Tri::False);
  t.pop_back();
  CHECK(check_trace(*f, t) == Tri::Undecided);
}

TEST_CASE("decided verdicts are stable under extension") {
  auto m = parse_model(oracle::kTwoBoolModel);
  Rng rng({3, 0, 0, 0});
  for (const auto& text : oracle::kBattery) {
    auto f = parse_formula(text, *m);
    for (int rep = 0; rep < 20; ++rep) {
      Trace t;
      Tri first = Tri::Undecided;
      for (std::size_t i = 0; i < horizon(*f) + 3; ++i) {
        t.push_back(oracle::bool_state(static_cast<int>(rng.index(4)), i));
        const Tri v = check_trace(*f, t);
        if (first == Tri::Undecided) first = v;
        else CHECK(v == first);
      }
    }
  }
}

TEST_CASE("exact probabilities") {
  auto coin = parse_model("x:[0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=0);");
  CHECK(exact_probability(*coin, *parse_formula("F<=1 x=1", *coin)) == Rational(1, 2));
  CHECK(exact_probability(*coin, *parse_formula("false", *coin)) == Rational(0));
  auto chain = load_model_file(std::string(RARESPLIT_SOURCE_DIR) + "/models/chain.model");
  CHECK(exact_probability(*chain, *parse_formula("F<=5 \"goal\"", *chain)) == Rational(7, 2500));
}

TEST_CASE("a formula and its negation sum to one") {
  auto m = parse_model(oracle::kTwoBoolModel);
  for (const auto& text : oracle::kBattery) {
    CAPTURE(text);
    auto f = parse_formula(text, *m);
    CHECK(exact_probability(*m, *f) + exact_probability(*m, *fm::negate(f)) == Rational(1));
  }
}
