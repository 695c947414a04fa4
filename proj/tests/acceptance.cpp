// Acceptance checks AC1-AC9. Prints one PASS/FAIL line per criterion; exits 1 if any fails.
// Arguments select criteria by number (default: all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "chain_support.hpp"
#include "oracle_support.hpp"
#include "raresplit/distributed.hpp"
#include "raresplit/experiment.hpp"
#include "raresplit/splitting.hpp"
#include "raresplit/wire.hpp"

using namespace raresplit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(ss / (v.size() - 1));
  return m;
}

// --- AC1 -------------------------------------------------------------------

Outcome ac1() {
  auto model = parse_model(oracle::kTwoBoolModel);
  std::uint64_t cases = 0, mismatches = 0;
  std::string first;
  for (const auto& text : oracle::kBattery) {
    auto f = parse_formula(text, *model);
    const std::size_t len = std::min<std::size_t>(horizon(*f) + 1, 12);
    auto r = oracle::exhaustive_check(*f, len);
    cases += r.cases;
    mismatches += r.mismatches;
    if (r.mismatches && first.empty()) first = text + ": " + r.first_failure;
  }
  return {mismatches == 0 && oracle::kBattery.size() == 30,
          fmt("%zu formulas, %llu decided traces, %llu mismatches%s", oracle::kBattery.size(), (unsigned long long)cases,
              (unsigned long long)mismatches, first.empty() ? "" : (" first " + first).c_str())};
}

// --- AC2 -------------------------------------------------------------------

std::string random_formula(Rng& rng, int depth) {
  static const std::vector<std::string> atoms = {"a", "b", "!a", "!b", "(a & b)", "(a | !b)", "(!a => b)"};
  if (depth == 0 || rng.index(4) == 0) return atoms[rng.index(atoms.size())];
  const std::string k = std::to_string(rng.index(7));
  switch (rng.index(8)) {
    case 0: return "X<=" + k + " " + random_formula(rng, depth - 1);
    case 1: return "F<=" + k + " " + random_formula(rng, depth - 1);
    case 2: return "G<=" + k + " " + random_formula(rng, depth - 1);
    case 3: return "(" + random_formula(rng, depth - 1) + " U<=" + k + " " + random_formula(rng, depth - 1) + ")";
    case 4: return "!" + random_formula(rng, depth - 1);
    case 5: return "(" + random_formula(rng, depth - 1) + " & " + random_formula(rng, depth - 1) + ")";
    case 6: return "(" + random_formula(rng, depth - 1) + " | " + random_formula(rng, depth - 1) + ")";
    default: return "(" + random_formula(rng, depth - 1) + " => " + random_formula(rng, depth - 1) + ")";
  }
}

Outcome ac2() {
  auto model = parse_model(oracle::kTwoBoolModel);
  Rng rng({2, 0, 0, 0});
  std::uint64_t pairs = 0, disagreements = 0, drawn = 0;
  std::set<NodeKind> kinds;
  std::string first;
  while (pairs < 10000) {
    ++drawn;
    const std::string text = random_formula(rng, 3);
    auto f = parse_formula(text, *model);
    if (!check_restriction(*f).accepted || horizon(*f) + 1 > 25) continue;
    auto program = compile_observers(*f);
    for (const auto& n : program->nodes()) kinds.insert(n.kind);
    ObserverNetwork net(program);
    const std::size_t len = horizon(*f) + 1 + rng.index(25 - horizon(*f));
    Trace trace;
    Tri verdict = Tri::Undecided;
    for (std::size_t i = 0; i < len; ++i) {
      trace.push_back(oracle::bool_state(static_cast<int>(rng.index(4)), i));
      const Tri v = net.observe(trace.back());
      if (verdict == Tri::Undecided) verdict = v;
    }
    ++pairs;
    if (verdict != check_trace(*f, trace)) {
      if (disagreements++ == 0) first = text;
    }
  }
  return {disagreements == 0, fmt("%llu pairs (%llu drawn), %zu node kinds, %llu disagreements%s", (unsigned long long)pairs,
                                  (unsigned long long)drawn, kinds.size(), (unsigned long long)disagreements,
                                  first.empty() ? "" : (" first " + first).c_str())};
}

// --- AC3 -------------------------------------------------------------------

Outcome ac3() {
  auto model = parse_model(oracle::kTwoBoolModel);
  const std::regex bound("<=([0-9]+)");
  std::size_t changed = 0;
  for (const auto& text : oracle::kBattery) {
    std::string scaled;
    auto it = std::sregex_iterator(text.begin(), text.end(), bound);
    std::size_t last = 0;
    for (; it != std::sregex_iterator(); ++it) {
      scaled += text.substr(last, it->position() - last) + "<=" + std::to_string(std::stoull((*it)[1]) * 100);
      last = it->position() + it->length();
    }
    scaled += text.substr(last);
    auto a = compile_observers(*parse_formula(text, *model));
    auto b = compile_observers(*parse_formula(scaled, *model));
    ObserverNetwork na(a), nb(b);
    if (na.snapshot().size() != nb.snapshot().size() || a->snapshot_bytes() != nb.snapshot().size()) ++changed;
  }
  return {changed == 0, fmt("%zu formulas, %zu snapshot sizes changed with bounds x100", oracle::kBattery.size(), changed)};
}

// --- AC4 / AC5 ---------------------------------------------------------------

struct ChainRuns {
  std::vector<double> fixed, adaptive, distributed;
  std::size_t fixed_invalid = 0, adaptive_invalid = 0, distributed_invalid = 0;
  std::size_t covered = 0;
  double seconds = 0.0;
};

const ChainRuns& chain_runs() {
  static const ChainRuns runs = [] {
    ChainRuns r;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = chain::problem();
    const double gamma = chain::kGamma;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      // Extinct or stagnated runs contribute zero, which keeps the estimator unbiased.
      auto f = fixed_level(p, chain::levels(), 100, derive_seed(401, i));
      r.fixed.push_back(f.valid() ? f.gamma_hat : 0.0);
      r.fixed_invalid += !f.valid();
      if (f.valid() && f.has_ci && f.ci.lo <= gamma && (f.ci.upper_infinite || gamma <= f.ci.hi)) ++r.covered;
      auto a = adaptive(p, AdaptiveOptions{0.8}, 100, derive_seed(402, i));
      r.adaptive.push_back(a.valid() ? a.gamma_hat : 0.0);
      r.adaptive_invalid += !a.valid();
      auto d = distributed_fixed(p, chain::levels(), 25, 4, derive_seed(403, i));
      r.distributed.push_back(d.valid() ? d.gamma_hat : 0.0);
      r.distributed_invalid += !d.valid();
    }
    r.seconds = seconds_since(t0);
    return r;
  }();
  return runs;
}

Outcome ac4() {
  const auto& r = chain_runs();
  bool pass = true;
  std::string detail = fmt("gamma %.6g;", chain::kGamma);
  auto one = [&](const char* name, const std::vector<double>& v, std::size_t invalid) {
    const auto m = moments(v);
    const double se = m.sd / std::sqrt(static_cast<double>(v.size()));
    const double z = std::abs(m.mean - chain::kGamma) / se;
    pass = pass && z <= 3.0;
    detail += fmt(" %s mean %.4g (%.2f SE, %zu zero)", name, m.mean, z, invalid);
  };
  one("fixed", r.fixed, r.fixed_invalid);
  one("adaptive", r.adaptive, r.adaptive_invalid);
  one("distributed", r.distributed, r.distributed_invalid);
  detail += fmt("; %.0fs", r.seconds);
  return {pass, detail};
}

Outcome ac5() {
  const auto& r = chain_runs();
  // Extinct runs yield no interval; they are reported but not counted.
  const std::size_t intervals = r.fixed.size() - r.fixed_invalid;
  const double coverage = static_cast<double>(r.covered) / intervals;
  return {coverage >= 0.90, fmt("%zu/%zu intervals contain gamma (%.1f%%), %zu extinct runs without interval (%.1f%% of all runs covered)",
                                r.covered, intervals, 100 * coverage, r.fixed_invalid, 100.0 * r.covered / r.fixed.size())};
}

// --- AC6 -------------------------------------------------------------------

struct ChiSquare {
  double stat = 0.0;
  double critical = 0.0;
};

ChiSquare chi_square(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected_p, std::uint64_t draws) {
  ChiSquare c;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_p[i] * draws;
    c.stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  c.critical = boost::math::quantile(dist, 0.99);
  return c;
}

Outcome ac6() {
  bool pass = level_factor({3, 2}, 5) == Rational(1, 2) && level_factor({5, 1, 7, 0, 2}, 10) == Rational(3, 10) &&
              level_factor({0, 0}, 10) == Rational(0);
  std::string detail = fmt("factors %s", pass ? "exact" : "WRONG");

  const std::vector<std::uint64_t> counts{5, 1, 7, 0, 2};
  Rng rng({6, 0, kServerStream, 0});
  std::vector<std::uint64_t> hits(counts.size(), 0);
  for (int i = 0; i < 10000; ++i) ++hits[pick_client(counts, rng)];
  pass = pass && hits[3] == 0;
  std::vector<std::uint64_t> obs;
  std::vector<double> p;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    obs.push_back(hits[i]);
    p.push_back(counts[i] / 15.0);
  }
  auto c = chi_square(obs, p, 10000);
  pass = pass && c.stat < c.critical;
  detail += fmt("; clients chi2 %.2f < %.2f", c.stat, c.critical);

  // Within one client: uniform over its successes.
  const auto prob = chain::problem();
  Simulator sim(prob);
  SimulationPool pool(sim, 6, 0, 400);
  pool.run_to_level(Score(1));
  const auto succ = pool.successes(Score(1));
  std::map<std::size_t, std::uint64_t> picks;
  for (int i = 0; i < 10000; ++i) ++picks[pool.pick_donor(succ)];
  std::vector<std::uint64_t> donor_obs;
  for (auto s : succ) donor_obs.push_back(picks[s]);
  auto d = chi_square(donor_obs, std::vector<double>(succ.size(), 1.0 / succ.size()), 10000);
  pass = pass && d.stat < d.critical && picks.size() == succ.size();
  detail += fmt("; donors (%zu successes) chi2 %.2f < %.2f", succ.size(), d.stat, d.critical);
  return {pass, detail};
}

// --- AC7 -------------------------------------------------------------------

struct ScaleRun {
  Summary summary;
  double max_wall = 0.0;
};

ScaleRun scale_run(const std::string& config, std::uint64_t repeats) {
  auto c = load_config(std::string(RARESPLIT_SOURCE_DIR) + "/experiments/" + config);
  c.repeats = repeats;
  c.out.clear();
  auto r = run_experiment(c);
  ScaleRun s{r.table.summary, 0.0};
  for (const auto& e : r.estimates) s.max_wall = std::max(s.max_wall, e.wall_seconds);
  return s;
}

Outcome ac7() {
  bool pass = true;
  std::string detail;
  auto fixed = scale_run("leader-fixed.json", 25);
  const double sd = fixed.summary.std_dev.value_or(0.0);
  const bool fixed_ok = fixed.summary.valid == 25 && fixed.summary.mean >= 2e-7 && fixed.summary.mean <= 5e-6 && sd >= 1.3e-7 / 3 &&
                        sd <= 1.3e-7 * 3 && fixed.max_wall <= 250.0;
  pass = pass && fixed_ok;
  detail += fmt("leader fixed mean %.3g sd %.3g (ref 1.3e-7) max wall %.2fs;", fixed.summary.mean, sd, fixed.max_wall);

  auto par = scale_run("leader-parallel.json", 25);
  const double psd = par.summary.std_dev.value_or(0.0);
  const bool par_ok = par.summary.valid == 25 && psd >= 5.2e-8 / 3 && psd <= 5.2e-8 * 3 && par.max_wall <= 250.0;
  pass = pass && par_ok;
  detail += fmt(" parallel mean %.3g sd %.3g (ref 5.2e-8) max wall %.2fs;", par.summary.mean, psd, par.max_wall);

  for (const char* smoke : {"philosophers-fixed.json", "counters-fixed.json"}) {
    auto s = scale_run(smoke, 1);
    const bool ok = s.summary.valid == 1 && s.summary.mean >= 1e-7 && s.summary.mean <= 1e-5;
    pass = pass && ok;
    detail += fmt(" %s %.3g (%.1fs)%s;", s.summary.name.c_str(), s.summary.mean, s.max_wall, ok ? "" : " FAILED");
  }
  return {pass, detail};
}

// --- AC8 -------------------------------------------------------------------

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value (Stephens' small-sample correction).
std::pair<double, double> ks_test(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
  return {d, std::clamp(p, 0.0, 1.0)};
}

Outcome ac8() {
  const auto p = chain::problem();
  std::vector<double> dist, local;
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto d = distributed_fixed(p, chain::levels(), 200, 5, derive_seed(801, i));
    dist.push_back(d.valid() ? d.gamma_hat : 0.0);
    auto l = fixed_level(p, chain::levels(), 1000, derive_seed(802, i));
    local.push_back(l.valid() ? l.gamma_hat : 0.0);
  }
  auto [d, pv] = ks_test(dist, local);
  return {pv >= 0.01, fmt("D %.4f p %.3f; means %.4g (k=5) %.4g (k=1)", d, pv, moments(dist).mean, moments(local).mean)};
}

// --- AC9 -------------------------------------------------------------------

std::string random_text(Rng& rng) {
  std::string s(rng.index(40), '\0');
  for (auto& c : s) c = static_cast<char>(rng.index(256));
  return s;
}

std::vector<std::uint8_t> random_bytes(Rng& rng) {
  std::vector<std::uint8_t> v(rng.index(64));
  for (auto& c : v) c = static_cast<std::uint8_t>(rng.index(256));
  return v;
}

Score random_score(Rng& rng) {
  const auto den = rng.next() >> rng.index(64);
  return Score(static_cast<std::int64_t>(rng.next()) >> rng.index(64), den == 0 ? 1 : den);
}

wire::Message random_message(Rng& rng) {
  switch (rng.index(8)) {
    case 0: {
      wire::Init m{random_text(rng), random_text(rng), random_text(rng), random_score(rng), {}, rng.next(), rng.next(), rng.next(),
                   static_cast<std::uint32_t>(rng.next())};
      for (std::size_t i = rng.index(8); i > 0; --i) m.levels.push_back(random_score(rng));
      return m;
    }
    case 1: return wire::RunToLevel{static_cast<std::uint32_t>(rng.next()), random_score(rng)};
    case 2: return wire::LevelReport{static_cast<std::uint32_t>(rng.next()), rng.next(), rng.next(), rng.next()};
    case 3: return wire::StateRequest{rng.next()};
    case 4: {
      wire::StateTransfer m;
      for (std::size_t i = rng.index(6); i > 0; --i) m.states.push_back(random_bytes(rng));
      return m;
    }
    case 5: {
      wire::ReplaceSimulation m;
      for (std::size_t i = rng.index(6); i > 0; --i) m.entries.push_back({rng.next(), random_bytes(rng)});
      return m;
    }
    case 6: return wire::Final{static_cast<std::uint8_t>(rng.index(3)), std::bit_cast<double>(rng.next())};
    default: return wire::Error{static_cast<std::uint16_t>(rng.next()), random_text(rng)};
  }
}

// Donor continues a success under stream s; a fresh client decodes the transferred bytes and does the same.
bool replay_once(std::uint64_t seed, std::size_t& compared) {
  const auto donor_problem = chain::problem();
  Simulator donor(donor_problem);
  SimulationPool pool(donor, seed, 0, 200);
  pool.run_to_level(Score(2));
  const auto succ = pool.successes(Score(2));
  wire::StateTransfer transfer;
  for (auto i : succ) transfer.states.push_back(donor.encode(pool.state(i)));
  const auto received = std::get<wire::StateTransfer>(wire::decode(wire::encode(transfer)));

  const wire::Init init{donor_problem.model_source, chain::kProperty, chain::kScore, Score(chain::kThreshold), chain::levels(), 200, 1, seed, 1};
  const auto init_back = std::get<wire::Init>(wire::decode(wire::encode(init)));
  const auto fresh_problem = make_problem(init_back.model, init_back.formula, init_back.score, init_back.threshold);
  Simulator fresh(fresh_problem);
  for (std::size_t k = 0; k < succ.size(); ++k) {
    ProductState a = pool.state(succ[k]);
    ProductState b = fresh.decode(received.states[k]);
    Rng ra({seed, 1, k, 1}), rb({seed, 1, k, 1});
    std::uint64_t sa = 0, sb = 0;
    if (donor.run_to_decision(a, ra, sa) != fresh.run_to_decision(b, rb, sb)) return false;
    if (sa != sb || donor.encode(a) != fresh.encode(b)) return false;
    ++compared;
  }
  return !succ.empty();
}

Outcome ac9() {
  Rng rng({9, 0, 0, 0});
  std::uint64_t ok = 0;
  std::vector<std::uint64_t> per_tag(9, 0);
  constexpr std::uint64_t kMessages = 100000;
  for (std::uint64_t i = 0; i < kMessages; ++i) {
    const auto m = random_message(rng);
    ++per_tag[static_cast<int>(wire::tag_of(m))];
    try {
      if (wire::decode(wire::encode(m)) == m) ++ok;
    } catch (const std::exception&) {
    }
  }
  std::size_t compared = 0, again = 0;
  bool replay = true;
  for (std::uint64_t seed : {1, 2, 3}) replay = replay && replay_once(seed, compared);
  for (std::uint64_t seed : {1, 2, 3}) replay = replay && replay_once(seed, again);
  replay = replay && compared == again;
  return {ok == kMessages && replay, fmt("%llu/%llu round trips, min per tag %llu; replay %s over %zu transferred states (twice)",
                                         (unsigned long long)ok, (unsigned long long)kMessages,
                                         (unsigned long long)*std::min_element(per_tag.begin() + 1, per_tag.end()),
                                         replay ? "identical" : "DIVERGED", compared)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> all = {{1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5},
                                                                      {6, ac6}, {7, ac7}, {8, ac8}, {9, ac9}};
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  bool all_pass = true;
  for (const auto& [id, fn] : all) {
    if (!chosen.empty() && !chosen.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("AC%d %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
