#include "raresplit/simulation.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "raresplit/bytes.hpp"
#include "raresplit/reference.hpp"

namespace raresplit {

Problem make_problem(const std::string& model_source, const std::string& formula_source, const std::string& score_source, Score threshold) {
  Problem p;
  p.model_source = model_source;
  p.formula_source = formula_source;
  p.score_source = score_source;
  p.threshold = threshold;
  p.model = parse_model(model_source);
  p.formula = parse_formula(formula_source, *p.model);
  if (check_restriction(*p.formula).accepted) p.program = compile_observers(*p.formula);
  if (!score_source.empty()) {
    if (!p.program) throw std::invalid_argument("splitting needs a formula in the restricted logic: " + formula_source);
    p.score = compile_score(score_source, *p.model, *p.program, threshold);
  }
  return p;
}

Simulator::Simulator(const Problem& problem) : problem_(&problem) {
  if (!problem.program) throw std::invalid_argument("formula is outside the restricted logic; no observers available");
}

void Simulator::score(ProductState& s) const {
  if (!problem_->score) return;
  const Score v = evaluate_score(*problem_->score, s.model, s.observers.values());
  if (s.max_score < v) s.max_score = v;
}

ProductState Simulator::initial() const {
  ProductState s{initial_state(*problem_->model), ObserverNetwork(problem_->program), Score(0)};
  s.observers.observe(s.model);
  if (problem_->score) s.max_score = evaluate_score(*problem_->score, s.model, s.observers.values());
  return s;
}

void Simulator::advance(ProductState& s, Rng& rng) const {
  step(*problem_->model, s.model, rng);
  s.observers.observe(s.model);
  score(s);
}

bool Simulator::run_to_level(ProductState& s, Rng& rng, const Score& level, std::uint64_t& steps) const {
  while (s.max_score < level && s.verdict() == Tri::Undecided) {
    advance(s, rng);
    ++steps;
  }
  return !(s.max_score < level);
}

Tri Simulator::run_to_decision(ProductState& s, Rng& rng, std::uint64_t& steps, std::vector<ProductState>* records) const {
  while (s.verdict() == Tri::Undecided) {
    const Score before = s.max_score;
    advance(s, rng);
    ++steps;
    if (records && before < s.max_score) records->push_back(s);
  }
  return s.verdict();
}

std::size_t Simulator::encoded_size() const {
  return 8 * problem_->model->variables.size() + problem_->program->snapshot_bytes() + 16 + 8;
}

std::vector<std::uint8_t> Simulator::encode(const ProductState& s) const {
  ByteWriter w;
  w.bytes().reserve(encoded_size());
  for (std::int64_t v : s.model.values) w.i64(v);
  w.raw(s.observers.snapshot());
  w.i64(s.max_score.numerator());
  w.u64(s.max_score.denominator());
  w.u64(s.model.step);
  return w.take();
}

ProductState Simulator::decode(const std::vector<std::uint8_t>& bytes) const {
  if (bytes.size() != encoded_size()) throw DecodeError("product state has the wrong size for this problem");
  ByteReader r(bytes);
  ProductState s{ModelState{}, ObserverNetwork(problem_->program), Score(0)};
  const auto& vars = problem_->model->variables;
  s.model.values.resize(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::int64_t v = r.i64();
    if (v < vars[i].lo || v > vars[i].hi) throw DecodeError("variable " + vars[i].name + " out of range in product state");
    s.model.values[i] = v;
  }
  try {
    s.observers.restore(r.raw(problem_->program->snapshot_bytes()));
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
  const std::int64_t num = r.i64();
  const std::uint64_t den = r.u64();
  if (den == 0) throw DecodeError("zero score denominator");
  s.max_score = Score(num, den);
  s.model.step = r.u64();
  r.expect_end();
  return s;
}

Tri sample_verdict(const Problem& problem, std::uint64_t seed, std::uint64_t index, std::uint64_t& steps) {
  Rng rng(StreamId{seed, 0, index, 0});
  if (problem.program) {
    const Simulator sim(problem);
    ProductState s = sim.initial();
    return sim.run_to_decision(s, rng, steps);
  }
  const std::uint64_t length = horizon(*problem.formula) + 1;
  Trace trace;
  trace.reserve(length);
  trace.push_back(initial_state(*problem.model));
  while (trace.size() < length) {
    ModelState next = trace.back();
    step(*problem.model, next, rng);
    ++steps;
    trace.push_back(std::move(next));
  }
  return check_trace(*problem.formula, trace);
}

SimulationPool::SimulationPool(const Simulator& sim, std::uint64_t seed, std::uint64_t client, std::size_t n)
    : sim_(&sim), seed_(seed), client_(client), donor_(StreamId{seed, client, kDonorStream, 0}) {
  sims_.reserve(n);
  const ProductState init = sim.initial();
  for (std::size_t i = 0; i < n; ++i) sims_.push_back(Sim{init, Rng(StreamId{seed, client, i, 0}), 0});
}

std::size_t SimulationPool::run_to_level(const Score& level, unsigned workers) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(sims_.size())));
  std::vector<std::uint64_t> steps(workers, 0);
  auto run = [&](unsigned w) {
    for (std::size_t i = w; i < sims_.size(); i += workers) sim_->run_to_level(sims_[i].state, sims_[i].rng, level, steps[w]);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  for (auto s : steps) steps_ += s;
  std::size_t reached_count = 0;
  for (std::size_t i = 0; i < sims_.size(); ++i) reached_count += reached(i, level);
  return reached_count;
}

std::vector<std::size_t> SimulationPool::successes(const Score& level) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sims_.size(); ++i)
    if (reached(i, level)) out.push_back(i);
  return out;
}

std::vector<std::size_t> SimulationPool::failures(const Score& level) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sims_.size(); ++i)
    if (!reached(i, level)) out.push_back(i);
  return out;
}

std::size_t SimulationPool::pick_donor(const std::vector<std::size_t>& successes) {
  if (successes.empty()) throw std::logic_error("no successful simulation to copy");
  return successes[donor_.index(successes.size())];
}

void SimulationPool::replace(std::size_t i, ProductState state) {
  Sim& s = sims_.at(i);
  s.state = std::move(state);
  ++s.generation;
  s.rng = Rng(StreamId{seed_, client_, i, s.generation});
}

RequirementReport validate_minimum_requirement(const Problem& problem, std::uint64_t trials, std::uint64_t seed) {
  if (!problem.score) throw std::invalid_argument("no score function to validate");
  const Simulator sim(problem);
  RequirementReport report;
  report.trials = trials;
  std::uint64_t steps = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const StreamId id{seed, 0, t, 0};
    Rng rng(id);
    ProductState s = sim.initial();
    const Tri v = sim.run_to_decision(s, rng, steps);
    const bool high = !(s.max_score < problem.threshold);
    report.satisfied += v == Tri::True;
    if (high != (v == Tri::True)) report.violations.push_back({t, id, s.max_score, v});
  }
  return report;
}

}  // namespace raresplit
