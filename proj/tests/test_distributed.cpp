#include <map>
#include <thread>

#include "chain_support.hpp"
#include "doctest.h"
#include "raresplit/distributed.hpp"

using namespace raresplit;

TEST_CASE("level factor and donor choice arithmetic") {
  CHECK(level_factor({3, 2}, 5) == Rational(1, 2));
  CHECK(level_factor({0, 0, 4}, 4) == Rational(1, 3));
  Rng rng({1, 0, kServerStream, 0});
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += pick_client({3, 2}, rng) == 0;
  CHECK(first / 10000.0 == doctest::Approx(0.6).epsilon(0.05));
  for (int i = 0; i < 100; ++i) CHECK(pick_client({0, 5, 0}, rng) == 1);
}

TEST_CASE("one client matches local fixed levels") {
  auto c = chain::problem();
  for (std::uint64_t seed : {1, 7, 13}) {
    auto local = fixed_level(c, chain::levels(), 300, seed);
    auto dist = distributed_fixed(c, chain::levels(), 300, 1, seed);
    CHECK(dist.status == local.status);
    CHECK(dist.reached == local.reached);
    CHECK(dist.gamma_exact == local.gamma_exact);
    CHECK(dist.steps == local.steps);
  }
}

TEST_CASE("several clients give a valid estimate and move states") {
  auto c = chain::problem();
  ServerStats stats;
  auto e = distributed_fixed(c, chain::levels(), 200, 4, 5, 0.05, &stats);
  CHECK(e.k == 4);
  CHECK(e.reached.size() == 2);
  CHECK(stats.transfers.at(0) > 0);
  CHECK(stats.bytes_sent > 0);
}

TEST_CASE("client answers a tautology and refuses impossible requests") {
  auto [server, client] = loopback_pair();
  std::thread t([&, ch = client.get()] { client_loop(*ch); });
  wire::Init init{"x:[0..1] init 0; [] true -> (x'=1-x);", "true", "1", Score(1), {Score(1)}, 6, 0, 3, 1};
  server->send(init);
  server->send(wire::RunToLevel{0, Score(1)});
  auto report = std::get<wire::LevelReport>(server->receive());
  CHECK(report.reached == 6);

  server->send(wire::StateRequest{1});
  CHECK(std::holds_alternative<wire::StateTransfer>(server->receive()));

  server->send(wire::Final{0, 1.0});
  t.join();

  auto [s2, c2] = loopback_pair();
  std::thread t2([&, ch = c2.get()] { client_loop(*ch); });
  wire::Init never{"x:[0..1] init 0; [] true -> (x'=x);", "F<=3 x=1", "x", Score(1), {Score(1)}, 4, 0, 3, 1};
  s2->send(never);
  s2->send(wire::RunToLevel{0, Score(1)});
  CHECK(std::get<wire::LevelReport>(s2->receive()).reached == 0);
  s2->send(wire::StateRequest{1});
  auto err = std::get<wire::Error>(s2->receive());
  CHECK(err.code == wire::kPrecondition);
  s2->close();
  t2.join();
}

TEST_CASE("transferred states continue exactly like the donor") {
  auto c = chain::problem();
  auto other = chain::problem();
  Simulator donor(c), fresh(other);
  auto s = donor.initial();
  Rng warm({9, 0, 0, 0});
  std::uint64_t steps = 0;
  donor.run_to_level(s, warm, Score(1), steps);
  auto copy = fresh.decode(donor.encode(s));
  CHECK(fresh.encode(copy) == donor.encode(s));
  Rng r1({9, 2, 5, 1}), r2({9, 2, 5, 1});
  std::uint64_t a = 0, b = 0;
  CHECK(donor.run_to_decision(s, r1, a) == fresh.run_to_decision(copy, r2, b));
  CHECK(a == b);
  CHECK(donor.encode(s) == fresh.encode(copy));
}

TEST_CASE("instances average their members") {
  auto c = chain::problem();
  auto one = distribute_instances([&](std::uint64_t s) { return fixed_level(c, chain::levels(), 300, s); }, 1, 4);
  auto direct = fixed_level(c, chain::levels(), 300, derive_seed(4, 0));
  CHECK(one.combined.gamma_hat == direct.gamma_hat);

  auto five = distribute_instances([&](std::uint64_t s) { return fixed_level(c, chain::levels(), 1000, s); }, 5, 4, 2);
  CHECK(five.instances.size() == 5);
  double sum = 0;
  std::size_t valid = 0;
  for (const auto& e : five.instances) {
    if (e.valid()) sum += e.gamma_hat, ++valid;
  }
  CHECK(five.combined.gamma_hat == doctest::Approx(sum / valid));
  CHECK(std::abs(five.combined.gamma_hat - chain::kGamma) < 3 * five.standard_error + 1e-12);
}
