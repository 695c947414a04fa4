#include "raresplit/distributed.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace raresplit {

std::size_t pick_client(const std::vector<std::uint64_t>& counts, Rng& rng) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw std::logic_error("no client holds a successful simulation");
  std::uint64_t r = rng.index(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (r < counts[i]) return i;
    r -= counts[i];
  }
  return counts.size() - 1;
}

Rational level_factor(const std::vector<std::uint64_t>& counts, std::uint64_t n) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  return Rational(total) / (Rational(counts.size()) * Rational(n));
}

namespace {

template <typename T>
T expect(Channel& ch, std::size_t client) {
  wire::Message m = ch.receive();
  if (auto* err = std::get_if<wire::Error>(&m)) {
    throw std::runtime_error("client " + std::to_string(client) + " reported error " + std::to_string(err->code) + ": " + err->message);
  }
  if (auto* v = std::get_if<T>(&m)) return std::move(*v);
  throw wire::ProtocolError(wire::kUnexpected, "client " + std::to_string(client) + " sent unexpected " + std::string(wire::to_string(wire::tag_of(m))));
}

}  // namespace

Estimate serve(const Problem& problem, const std::vector<Score>& levels, std::uint64_t n, const std::vector<Channel*>& clients,
               std::uint64_t seed, double alpha, unsigned client_workers, ServerStats* stats) {
  if (clients.empty()) throw std::invalid_argument("distributed splitting needs at least one client");
  if (n < 1) throw std::invalid_argument("distributed splitting needs a positive budget");
  validate_levels(levels, problem.threshold);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k = clients.size();
  Estimate e;
  e.estimator = "distributed-fixed";
  e.n = n;
  e.k = k;
  e.alpha = alpha;
  e.seed = seed;
  e.levels = levels;
  e.trace_length = horizon(*problem.formula) + 1;

  for (std::size_t c = 0; c < k; ++c) {
    clients[c]->send(wire::Init{problem.model_source, problem.formula_source, problem.score_source, problem.threshold, levels, n, c, seed,
                                client_workers});
  }
  Rng rng(StreamId{seed, 0, kServerStream, 0});
  std::vector<std::uint64_t> steps(k, 0);
  try {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      for (auto* ch : clients) ch->send(wire::RunToLevel{static_cast<std::uint32_t>(i), levels[i]});
      std::vector<std::uint64_t> counts(k);
      for (std::size_t c = 0; c < k; ++c) {
        const auto report = expect<wire::LevelReport>(*clients[c], c);
        if (report.index != i || report.live != n || report.reached > n) {
          throw wire::ProtocolError(wire::kUnexpected, "client " + std::to_string(c) + " sent an inconsistent level report");
        }
        counts[c] = report.reached;
        steps[c] = report.steps;
      }
      const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
      e.reached.push_back(total);
      if (total == 0) {
        e.status = RunStatus::Extinct;
        e.extinct_level = static_cast<int>(i);
        e.diagnostic = "extinct at level " + std::to_string(i + 1) + " (score " + levels[i].to_string() + ")";
        break;
      }
      if (i + 1 == levels.size()) break;

      // Donor client of every failed simulation, in client order then failure order.
      std::vector<std::size_t> donor_of;
      std::vector<std::uint64_t> requested(k, 0);
      for (std::size_t c = 0; c < k; ++c) {
        for (std::uint64_t f = counts[c]; f < n; ++f) {
          const std::size_t d = pick_client(counts, rng);
          donor_of.push_back(d);
          ++requested[d];
        }
      }
      if (stats) stats->transfers.push_back(donor_of.size());
      std::vector<std::vector<std::vector<std::uint8_t>>> pools(k);
      for (std::size_t d = 0; d < k; ++d)
        if (requested[d]) clients[d]->send(wire::StateRequest{requested[d]});
      for (std::size_t d = 0; d < k; ++d) {
        if (!requested[d]) continue;
        pools[d] = expect<wire::StateTransfer>(*clients[d], d).states;
        if (pools[d].size() != requested[d]) throw wire::ProtocolError(wire::kUnexpected, "client sent the wrong number of states");
      }
      std::vector<std::size_t> taken(k, 0);
      std::size_t next = 0;
      for (std::size_t c = 0; c < k; ++c) {
        wire::ReplaceSimulation msg;
        for (std::uint64_t f = 0; f < n - counts[c]; ++f) {
          const std::size_t d = donor_of[next++];
          msg.entries.push_back({f, std::move(pools[d][taken[d]++])});
        }
        if (!msg.entries.empty()) clients[c]->send(msg);
      }
    }
  } catch (...) {
    for (auto* ch : clients) {
      try {
        ch->send(wire::Final{2, 0.0});
      } catch (...) {
      }
    }
    throw;
  }
  finish_levels(e, k * n);
  e.steps = std::accumulate(steps.begin(), steps.end(), std::uint64_t{0});
  const std::uint8_t status = e.valid() ? 0 : 1;
  for (auto* ch : clients) ch->send(wire::Final{status, e.gamma_hat});
  if (stats)
    for (auto* ch : clients) stats->bytes_sent += ch->bytes_sent();
  e.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

namespace {

void client_session(Channel& channel) {
  auto fail = [&](std::uint16_t code, const std::string& msg) {
    try {
      channel.send(wire::Error{code, msg});
    } catch (...) {
    }
    channel.close();
  };
  wire::Message first;
  try {
    first = channel.receive();
  } catch (const wire::ProtocolError& e) {
    fail(e.code(), e.what());
    return;
  }
  auto* init = std::get_if<wire::Init>(&first);
  if (!init) {
    fail(wire::kUnexpected, "expected Init");
    return;
  }
  Problem problem;
  try {
    problem = make_problem(init->model, init->formula, init->score, init->threshold);
    validate_levels(init->levels, problem.threshold);
    if (!problem.score) throw std::invalid_argument("no score function");
  } catch (const std::exception& e) {
    fail(wire::kCompile, e.what());
    return;
  }
  const Simulator sim(problem);
  SimulationPool pool(sim, init->seed, init->client, init->n);
  std::vector<std::size_t> successes, failures;
  for (;;) {
    wire::Message m;
    try {
      m = channel.receive();
    } catch (const wire::ProtocolError& e) {
      fail(e.code(), e.what());
      return;
    } catch (const ChannelClosed&) {
      return;
    }
    if (auto* run = std::get_if<wire::RunToLevel>(&m)) {
      const std::size_t reached = pool.run_to_level(run->level, init->workers);
      successes = pool.successes(run->level);
      failures = pool.failures(run->level);
      channel.send(wire::LevelReport{run->index, reached, pool.size(), pool.steps()});
    } else if (auto* req = std::get_if<wire::StateRequest>(&m)) {
      if (successes.empty()) {
        fail(wire::kPrecondition, "state requested from a client without successful simulations");
        return;
      }
      wire::StateTransfer out;
      out.states.reserve(req->count);
      for (std::uint64_t i = 0; i < req->count; ++i) out.states.push_back(sim.encode(pool.state(pool.pick_donor(successes))));
      channel.send(out);
    } else if (auto* rep = std::get_if<wire::ReplaceSimulation>(&m)) {
      try {
        for (auto& entry : rep->entries) {
          if (entry.simulation >= failures.size()) throw DecodeError("replacement for a simulation that did not fail");
          pool.replace(failures[entry.simulation], sim.decode(entry.state));
        }
      } catch (const DecodeError& e) {
        fail(wire::kMalformed, e.what());
        return;
      }
    } else if (std::holds_alternative<wire::Final>(m) || std::holds_alternative<wire::Error>(m)) {
      return;
    } else {
      fail(wire::kUnexpected, "unexpected " + std::string(wire::to_string(wire::tag_of(m))));
      return;
    }
  }
}

}  // namespace

void client_loop(Channel& channel) {
  try {
    client_session(channel);
  } catch (const ChannelClosed&) {
  } catch (const std::exception& e) {
    try {
      channel.send(wire::Error{wire::kInternal, e.what()});
    } catch (...) {
    }
    channel.close();
  }
}

Estimate distributed_fixed(const Problem& problem, const std::vector<Score>& levels, std::uint64_t n, std::uint64_t k, std::uint64_t seed,
                           double alpha, ServerStats* stats) {
  if (k < 1) throw std::invalid_argument("distributed splitting needs at least one client");
  std::vector<std::unique_ptr<Channel>> server_ends;
  std::vector<std::thread> threads;
  for (std::uint64_t c = 0; c < k; ++c) {
    auto [server_end, client_end] = loopback_pair();
    server_ends.push_back(std::move(server_end));
    threads.emplace_back([ch = std::move(client_end)]() mutable { client_loop(*ch); });
  }
  std::vector<Channel*> raw;
  for (auto& ch : server_ends) raw.push_back(ch.get());
  Estimate e;
  try {
    e = serve(problem, levels, n, raw, seed, alpha, 1, stats);
  } catch (...) {
    for (auto& ch : server_ends) ch->close();
    for (auto& t : threads) t.join();
    throw;
  }
  for (auto& t : threads) t.join();
  return e;
}

InstancesResult distribute_instances(const std::function<Estimate(std::uint64_t seed)>& instance, std::uint64_t j, std::uint64_t seed,
                                     unsigned threads) {
  if (j < 1) throw std::invalid_argument("need at least one instance");
  const auto start = std::chrono::steady_clock::now();
  InstancesResult out;
  out.instances.resize(j);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::uint64_t i; (i = next++) < j;) {
      try {
        out.instances[i] = instance(derive_seed(seed, i));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(j)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<double> values;
  Estimate& c = out.combined;
  c.estimator = "instances";
  c.k = j;
  c.seed = seed;
  for (const auto& e : out.instances) {
    c.steps += e.steps;
    if (e.valid()) {
      values.push_back(e.gamma_hat);
    } else {
      ++out.excluded;
    }
  }
  const Estimate& first = out.instances.front();
  c.n = first.n;
  c.alpha = first.alpha;
  c.levels = first.levels;
  c.trace_length = first.trace_length;
  if (values.empty()) throw std::runtime_error("all " + std::to_string(j) + " instances went extinct");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  c.gamma_hat = mean;
  c.gamma_exact = Rational(0);
  for (const auto& e : out.instances)
    if (e.valid()) c.gamma_exact += e.gamma_exact;
  c.gamma_exact /= Rational(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
    c.has_ci = true;
    c.ci.z = normal_quantile(c.alpha);
    c.ci.sigma2 = out.standard_error * out.standard_error;
    c.ci.lo = std::max(0.0, mean - c.ci.z * out.standard_error);
    c.ci.hi = mean + c.ci.z * out.standard_error;
  }
  if (out.excluded) c.diagnostic = std::to_string(out.excluded) + " of " + std::to_string(j) + " instances extinct and excluded";
  c.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace raresplit
