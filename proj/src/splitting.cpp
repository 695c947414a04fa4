#include "raresplit/splitting.hpp"

#include <boost/math/distributions/normal.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace raresplit {

double normal_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("confidence parameter alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
}

ConfidenceInterval confidence_interval(const std::vector<double>& gamma_i, std::uint64_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("confidence interval with zero budget");
  ConfidenceInterval ci;
  double gamma = 1.0;
  for (double g : gamma_i) {
    if (!(g > 0.0)) throw std::domain_error("confidence interval undefined: a level probability is zero");
    ci.sigma2 += (1.0 - g) / g;
    gamma *= g;
  }
  ci.z = normal_quantile(alpha);
  const double h = ci.z * std::sqrt(ci.sigma2) / std::sqrt(static_cast<double>(n));
  ci.lo = gamma / (1.0 + h);
  if (h >= 1.0) {
    ci.upper_infinite = true;
    ci.hi = std::numeric_limits<double>::infinity();
  } else {
    ci.hi = gamma / (1.0 - h);
  }
  return ci;
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Extinct: return "extinct";
    case RunStatus::Stagnation: return "stagnation";
    case RunStatus::MemoryCap: return "memory-cap";
    case RunStatus::IterationCap: return "iteration-cap";
  }
  return "?";
}

RunStatus parse_run_status(std::string_view s) {
  for (RunStatus r : {RunStatus::Ok, RunStatus::Extinct, RunStatus::Stagnation, RunStatus::MemoryCap, RunStatus::IterationCap})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown run status: " + std::string(s));
}

nlohmann::json to_json(const Estimate& e) {
  nlohmann::json j;
  j["estimator"] = e.estimator;
  j["status"] = std::string(to_string(e.status));
  if (!e.diagnostic.empty()) j["diagnostic"] = e.diagnostic;
  if (e.extinct_level >= 0) j["extinct_level"] = e.extinct_level;
  j["gamma_hat"] = e.gamma_hat;
  j["gamma_exact"] = to_string(e.gamma_exact);
  auto levels = nlohmann::json::array();
  for (const auto& l : e.levels) levels.push_back(l.to_string());
  j["levels"] = levels;
  j["gamma_i"] = e.gamma_i;
  j["reached"] = e.reached;
  j["n"] = e.n;
  j["k"] = e.k;
  j["alpha"] = e.alpha;
  if (e.has_ci) {
    j["sigma2"] = e.ci.sigma2;
    j["z"] = e.ci.z;
    j["ci"] = {{"lo", e.ci.lo}, {"hi", e.ci.upper_infinite ? nlohmann::json(nullptr) : nlohmann::json(e.ci.hi)}, {"upper_infinite", e.ci.upper_infinite}};
  }
  j["seed"] = e.seed;
  j["steps"] = e.steps;
  j["trace_length"] = e.trace_length;
  j["wall_seconds"] = e.wall_seconds;
  return j;
}

Estimate estimate_from_json(const nlohmann::json& j) {
  Estimate e;
  e.estimator = j.at("estimator").get<std::string>();
  e.status = parse_run_status(j.at("status").get<std::string>());
  e.diagnostic = j.value("diagnostic", "");
  e.extinct_level = j.value("extinct_level", -1);
  e.gamma_hat = j.at("gamma_hat").get<double>();
  e.gamma_exact = parse_rational(j.at("gamma_exact").get<std::string>());
  for (const auto& l : j.at("levels")) e.levels.push_back(Score::parse(l.get<std::string>()));
  e.gamma_i = j.at("gamma_i").get<std::vector<double>>();
  e.reached = j.at("reached").get<std::vector<std::uint64_t>>();
  e.n = j.at("n").get<std::uint64_t>();
  e.k = j.at("k").get<std::uint64_t>();
  e.alpha = j.at("alpha").get<double>();
  if (j.contains("ci")) {
    e.has_ci = true;
    e.ci.sigma2 = j.at("sigma2").get<double>();
    e.ci.z = j.at("z").get<double>();
    const auto& ci = j.at("ci");
    e.ci.lo = ci.at("lo").get<double>();
    e.ci.upper_infinite = ci.at("upper_infinite").get<bool>();
    e.ci.hi = e.ci.upper_infinite ? std::numeric_limits<double>::infinity() : ci.at("hi").get<double>();
  }
  e.seed = j.at("seed").get<std::uint64_t>();
  e.steps = j.at("steps").get<std::uint64_t>();
  e.trace_length = j.value("trace_length", std::uint64_t{0});
  e.wall_seconds = j.at("wall_seconds").get<double>();
  return e;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void finish_levels(Estimate& e, std::uint64_t trials) {
  e.gamma_i.clear();
  e.gamma_exact = 1;
  for (auto r : e.reached) {
    e.gamma_i.push_back(static_cast<double>(r) / static_cast<double>(trials));
    e.gamma_exact *= Rational(r) / Rational(trials);
  }
  if (e.status != RunStatus::Ok) {
    e.gamma_exact = 0;
    e.gamma_hat = 0.0;
    e.has_ci = false;
    return;
  }
  e.gamma_hat = to_double(e.gamma_exact);
  e.ci = confidence_interval(e.gamma_i, trials, e.alpha);
  e.has_ci = true;
}

Estimate monte_carlo(const Problem& problem, std::uint64_t samples, std::uint64_t seed, double alpha) {
  if (samples == 0) throw std::invalid_argument("Monte Carlo needs at least one sample");
  const auto start = std::chrono::steady_clock::now();
  Estimate e;
  e.estimator = "mc";
  e.n = samples;
  e.alpha = alpha;
  e.seed = seed;
  e.trace_length = horizon(*problem.formula) + 1;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) hits += sample_verdict(problem, seed, i, e.steps) == Tri::True;
  e.reached = {hits};
  e.gamma_exact = Rational(hits) / Rational(samples);
  e.gamma_hat = to_double(e.gamma_exact);
  e.gamma_i = {e.gamma_hat};
  const double p = e.gamma_hat;
  e.ci.z = normal_quantile(alpha);
  e.ci.sigma2 = p * (1.0 - p);
  const double h = e.ci.z * std::sqrt(e.ci.sigma2 / static_cast<double>(samples));
  e.ci.lo = std::max(0.0, p - h);
  e.ci.hi = std::min(1.0, p + h);
  e.has_ci = true;
  e.wall_seconds = seconds_since(start);
  return e;
}

Estimate fixed_level(const Problem& problem, const std::vector<Score>& levels, std::uint64_t n, std::uint64_t seed, double alpha,
                     unsigned workers) {
  if (n < 1) throw std::invalid_argument("fixed-level splitting needs a positive budget");
  validate_levels(levels, problem.threshold);
  const auto start = std::chrono::steady_clock::now();
  const Simulator sim(problem);
  SimulationPool pool(sim, seed, 0, n);
  Estimate e;
  e.estimator = "fixed";
  e.n = n;
  e.alpha = alpha;
  e.seed = seed;
  e.levels = levels;
  e.trace_length = horizon(*problem.formula) + 1;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::size_t hit = pool.run_to_level(levels[i], workers);
    e.reached.push_back(hit);
    if (hit == 0) {
      e.status = RunStatus::Extinct;
      e.extinct_level = static_cast<int>(i);
      e.diagnostic = "extinct at level " + std::to_string(i + 1) + " (score " + levels[i].to_string() + ")";
      break;
    }
    if (i + 1 == levels.size()) break;
    const auto successes = pool.successes(levels[i]);
    for (std::size_t f : pool.failures(levels[i])) pool.replace(f, pool.state(pool.pick_donor(successes)));
  }
  finish_levels(e, n);
  e.steps = pool.steps();
  e.wall_seconds = seconds_since(start);
  return e;
}

Estimate adaptive(const Problem& problem, const AdaptiveOptions& options, std::uint64_t n, std::uint64_t seed, double alpha) {
  if (n < 1) throw std::invalid_argument("adaptive splitting needs a positive budget");
  if (!(options.proportion > 0.0 && options.proportion < 1.0)) throw std::invalid_argument("retain proportion must lie in (0, 1)");
  if (!problem.score) throw std::invalid_argument("adaptive splitting needs a score function");
  const auto start = std::chrono::steady_clock::now();
  const Simulator sim(problem);
  Estimate e;
  e.estimator = "adaptive";
  e.n = n;
  e.alpha = alpha;
  e.seed = seed;
  e.trace_length = horizon(*problem.formula) + 1;

  struct Run {
    ProductState state;
    std::vector<ProductState> records;  // states where the running maximum rose
    std::uint64_t generation = 0;
  };
  std::vector<Run> runs(n);
  std::size_t stored = 0;
  const ProductState init = sim.initial();
  for (std::uint64_t i = 0; i < n; ++i) {
    Run& r = runs[i];
    r.state = init;
    r.records.push_back(init);
    Rng rng(StreamId{seed, 0, i, 0});
    sim.run_to_decision(r.state, rng, e.steps, &r.records);
    stored += r.records.size();
  }

  Rng split(StreamId{seed, 0, kSplitStream, 0});
  std::optional<Score> current;
  auto stop = [&](RunStatus s, std::string why) {
    e.status = s;
    e.diagnostic = std::move(why);
  };
  for (std::uint64_t iter = 0;; ++iter) {
    if (stored > options.memory_cap) {
      stop(RunStatus::MemoryCap, "stored " + std::to_string(stored) + " states, above the cap of " + std::to_string(options.memory_cap));
      break;
    }
    if (iter >= options.max_iterations) {
      stop(RunStatus::IterationCap, "no satisfying population after " + std::to_string(iter) + " iterations");
      break;
    }
    std::vector<Score> maxima;
    maxima.reserve(n);
    for (const auto& r : runs) maxima.push_back(r.state.max_score);
    const QuantileLevel q = levels_from_quantiles(maxima, options.proportion, problem.threshold);
    if (q.stagnation) {
      stop(RunStatus::Stagnation, "all traces stuck at score " + maxima.front().to_string() + " in iteration " + std::to_string(iter + 1));
      break;
    }
    Score level = *q.level;
    if (current && !(*current < level)) {
      std::optional<Score> above;
      for (const auto& m : maxima)
        if (*current < m && (!above || m < *above)) above = m;
      if (!above) {
        stop(RunStatus::Stagnation, "no trace exceeds score " + current->to_string());
        break;
      }
      level = *above;
    }
    if (!(level < problem.threshold)) {
      std::uint64_t sat = 0;
      for (const auto& r : runs) sat += r.state.verdict() == Tri::True;
      e.levels.push_back(problem.threshold);
      e.reached.push_back(sat);
      if (sat == 0) {
        e.extinct_level = static_cast<int>(e.levels.size() - 1);
        stop(RunStatus::Extinct, "no satisfying trace at the final level");
      }
      break;
    }
    std::vector<std::size_t> survivors, discarded;
    for (std::size_t i = 0; i < n; ++i) (runs[i].state.max_score < level ? discarded : survivors).push_back(i);
    e.levels.push_back(level);
    e.reached.push_back(survivors.size());
    for (std::size_t i : discarded) {
      const Run& donor = runs[survivors[split.index(survivors.size())]];
      const auto& recs = donor.records;
      auto it = std::find_if(recs.begin(), recs.end(), [&](const ProductState& s) { return !(s.max_score < level); });
      if (it == recs.end()) throw std::logic_error("surviving trace has no record at the level");
      Run& r = runs[i];
      r.state = *it;
      r.records.assign(1, *it);
      ++r.generation;
      Rng rng(StreamId{seed, 0, i, r.generation});
      sim.run_to_decision(r.state, rng, e.steps, &r.records);
    }
    stored = 0;
    for (auto& r : runs) {
      std::erase_if(r.records, [&](const ProductState& s) { return s.max_score < level; });
      stored += r.records.size();
    }
    current = level;
  }
  finish_levels(e, n);
  e.wall_seconds = seconds_since(start);
  return e;
}

}  // namespace raresplit
