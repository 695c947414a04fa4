#include "raresplit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "raresplit/distributed.hpp"

namespace raresplit {

namespace {

const std::vector<std::string> kEstimators = {"mc", "fixed", "adaptive", "distributed-fixed", "instances"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["model"] = c.model;
  j["property"] = c.property;
  if (!c.score.empty()) j["score"] = c.score;
  if (c.threshold) j["threshold"] = c.threshold->to_string();
  j["estimator"] = c.estimator;
  if (c.estimator == "instances") j["instance_estimator"] = c.instance_estimator;
  if (!c.levels.empty()) j["levels"] = format_levels(c.levels);
  if (c.proportion) j["proportion"] = *c.proportion;
  j["budget"] = c.budget;
  j["clients"] = c.clients;
  j["workers"] = c.workers;
  j["repeats"] = c.repeats;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["max_iterations"] = c.max_iterations;
  j["memory_cap"] = c.memory_cap;
  j["threads"] = c.threads;
  if (!c.out.empty()) j["out"] = c.out;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"name",    "model",   "property", "score",   "threshold",      "estimator",
                                                 "instance_estimator", "levels", "proportion", "budget", "clients", "workers",
                                                 "repeats", "seed",    "alpha",    "max_iterations", "memory_cap", "threads", "out"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  c.name = j.value("name", "");
  c.model = j.at("model").get<std::string>();
  c.property = j.at("property").get<std::string>();
  c.score = j.value("score", "");
  if (j.contains("threshold")) {
    const auto& t = j.at("threshold");
    c.threshold = t.is_string() ? Score::parse(t.get<std::string>()) : Score(t.get<std::int64_t>());
  }
  c.estimator = j.value("estimator", "fixed");
  c.instance_estimator = j.value("instance_estimator", "fixed");
  if (j.contains("levels")) {
    const auto& l = j.at("levels");
    if (l.is_string()) {
      c.levels = parse_levels(l.get<std::string>());
    } else {
      for (const auto& v : l) c.levels.push_back(v.is_string() ? Score::parse(v.get<std::string>()) : Score(v.get<std::int64_t>()));
    }
  }
  if (j.contains("proportion")) c.proportion = j.at("proportion").get<double>();
  c.budget = j.value("budget", c.budget);
  c.clients = j.value("clients", c.clients);
  c.workers = j.value("workers", c.workers);
  c.repeats = j.value("repeats", c.repeats);
  c.seed = j.value("seed", c.seed);
  c.alpha = j.value("alpha", c.alpha);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.memory_cap = j.value("memory_cap", c.memory_cap);
  c.threads = j.value("threads", c.threads);
  c.out = j.value("out", "");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig c = config_from_json(nlohmann::json::parse(read_file(path)));
  const std::filesystem::path model(c.model);
  if (model.is_relative()) c.model = (path.parent_path() / model).lexically_normal().string();
  if (!c.out.empty() && std::filesystem::path(c.out).is_relative()) c.out = (path.parent_path() / c.out).lexically_normal().string();
  return c;
}

void validate(const ExperimentConfig& c) {
  if (std::find(kEstimators.begin(), kEstimators.end(), c.estimator) == kEstimators.end()) {
    throw std::invalid_argument("unknown estimator '" + c.estimator + "'");
  }
  const std::string inner = c.estimator == "instances" ? c.instance_estimator : c.estimator;
  if (inner != "fixed" && inner != "adaptive" && c.estimator == "instances") {
    throw std::invalid_argument("instances run fixed or adaptive, not '" + inner + "'");
  }
  if (c.model.empty()) throw std::invalid_argument("no model given");
  if (c.property.empty()) throw std::invalid_argument("no property given");
  if (c.budget < 1) throw std::invalid_argument("budget must be positive");
  if (c.repeats < 1) throw std::invalid_argument("repeats must be positive");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (inner == "fixed" || inner == "distributed-fixed") {
    if (c.levels.empty()) throw std::invalid_argument(c.estimator + " needs levels");
    if (c.budget < 2) throw std::invalid_argument("splitting needs a budget of at least 2");
  }
  if (inner == "adaptive") {
    if (!c.proportion) throw std::invalid_argument("adaptive needs a retain proportion");
    if (!(*c.proportion > 0.0 && *c.proportion < 1.0)) throw std::invalid_argument("proportion must lie in (0, 1)");
    if (!c.threshold) throw std::invalid_argument("adaptive needs a threshold");
    if (c.budget < 2) throw std::invalid_argument("splitting needs a budget of at least 2");
  }
  if (inner != "mc" && c.score.empty()) throw std::invalid_argument(c.estimator + " needs a score function");
  if (c.estimator == "distributed-fixed" && c.clients < 1) throw std::invalid_argument("clients must be positive");
  if (c.estimator == "instances" && c.workers < 1) throw std::invalid_argument("workers must be positive");
}

Problem load_problem(const ExperimentConfig& c) {
  std::optional<Score> threshold = c.threshold;
  if (!threshold && !c.levels.empty()) threshold = c.levels.back();
  return make_problem(read_file(c.model), c.property, c.estimator == "mc" ? "" : c.score, threshold.value_or(Score(0)));
}

Estimate run_once(const ExperimentConfig& c, const Problem& problem, std::uint64_t seed) {
  auto single = [&](const std::string& kind, std::uint64_t s) {
    if (kind == "fixed") return fixed_level(problem, c.levels, c.budget, s, c.alpha, c.threads);
    return adaptive(problem, AdaptiveOptions{*c.proportion, c.max_iterations, c.memory_cap}, c.budget, s, c.alpha);
  };
  if (c.estimator == "mc") return monte_carlo(problem, c.budget, seed, c.alpha);
  if (c.estimator == "fixed" || c.estimator == "adaptive") return single(c.estimator, seed);
  if (c.estimator == "distributed-fixed") return distributed_fixed(problem, c.levels, c.budget, c.clients, seed, c.alpha);
  try {
    return distribute_instances([&](std::uint64_t s) { return single(c.instance_estimator, s); }, c.workers, seed, c.threads).combined;
  } catch (const std::runtime_error& e) {
    Estimate failed;
    failed.estimator = "instances";
    failed.status = RunStatus::Extinct;
    failed.diagnostic = e.what();
    failed.k = c.workers;
    failed.n = c.budget;
    failed.seed = seed;
    return failed;
  }
}

nlohmann::json to_json(const Summary& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["estimator"] = s.estimator;
  j["repeats"] = s.repeats;
  j["valid"] = s.valid;
  j["extinct"] = s.extinct;
  j["mean"] = s.mean;
  j["std_dev"] = s.std_dev ? nlohmann::json(*s.std_dev) : nlohmann::json(nullptr);
  j["levels"] = s.levels;
  j["budget"] = s.budget;
  j["total_wall_seconds"] = s.total_wall;
  j["mean_wall_seconds"] = s.mean_wall;
  j["mean_steps"] = s.mean_steps;
  j["trace_length"] = s.trace_length;
  j["mc_seconds"] = s.mc_seconds ? nlohmann::json(*s.mc_seconds) : nlohmann::json(nullptr);
  return j;
}

Summary summary_from_json(const nlohmann::json& j) {
  Summary s;
  s.name = j.value("name", "");
  s.estimator = j.at("estimator").get<std::string>();
  s.repeats = j.at("repeats").get<std::uint64_t>();
  s.valid = j.at("valid").get<std::uint64_t>();
  s.extinct = j.at("extinct").get<std::uint64_t>();
  s.mean = j.at("mean").get<double>();
  if (!j.at("std_dev").is_null()) s.std_dev = j.at("std_dev").get<double>();
  s.levels = j.at("levels").get<double>();
  s.budget = j.at("budget").get<std::string>();
  s.total_wall = j.at("total_wall_seconds").get<double>();
  s.mean_wall = j.at("mean_wall_seconds").get<double>();
  s.mean_steps = j.at("mean_steps").get<double>();
  s.trace_length = j.at("trace_length").get<std::uint64_t>();
  if (!j.at("mc_seconds").is_null()) s.mc_seconds = j.at("mc_seconds").get<double>();
  return s;
}

EcdfTable make_table(const std::string& name, const std::string& estimator, const std::string& budget, const std::vector<Estimate>& estimates) {
  EcdfTable t;
  Summary& s = t.summary;
  s.name = name;
  s.estimator = estimator;
  s.budget = budget;
  s.repeats = estimates.size();
  std::vector<double> values;
  double steps = 0.0;
  double levels = 0.0;
  for (const auto& e : estimates) {
    s.total_wall += e.wall_seconds;
    steps += static_cast<double>(e.steps);
    s.trace_length = std::max(s.trace_length, e.trace_length);
    if (e.valid()) {
      values.push_back(e.gamma_hat);
      levels += static_cast<double>(e.levels.size());
    } else {
      ++s.extinct;
    }
  }
  s.valid = values.size();
  std::sort(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.points.push_back({values[i], static_cast<double>(i + 1) / static_cast<double>(values.size())});
  }
  if (!estimates.empty()) {
    s.mean_wall = s.total_wall / static_cast<double>(estimates.size());
    s.mean_steps = steps / static_cast<double>(estimates.size());
  }
  if (values.empty()) return t;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.levels = levels / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  if (s.std_dev && *s.std_dev > 0.0 && steps > 0.0 && s.trace_length > 0) {
    const double per_trace = s.total_wall / steps * static_cast<double>(s.trace_length);
    s.mc_seconds = per_trace * s.mean * (1.0 - s.mean) / (*s.std_dev * *s.std_dev);
  }
  return t;
}

std::string ecdf_csv(const std::vector<EcdfPoint>& points) {
  std::string out = "estimate,cumprob\n";
  for (const auto& p : points) out += fmt(p.estimate) + "," + fmt(p.cumprob) + "\n";
  return out;
}

std::vector<EcdfPoint> parse_ecdf_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "estimate,cumprob") throw std::invalid_argument("ECDF CSV must start with 'estimate,cumprob'");
  std::vector<EcdfPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed ECDF row: " + line);
    out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& c, const std::function<void(std::uint64_t, const Estimate&)>& progress) {
  validate(c);
  const Problem problem = load_problem(c);
  if (!problem.restricted() && c.estimator != "mc") {
    throw std::invalid_argument("property is outside the restricted logic; only the mc estimator applies");
  }
  if (c.estimator == "fixed" || c.estimator == "distributed-fixed" || (c.estimator == "instances" && c.instance_estimator == "fixed")) {
    validate_levels(c.levels, problem.threshold);
  }
  ExperimentResult result;
  for (std::uint64_t r = 0; r < c.repeats; ++r) {
    result.estimates.push_back(run_once(c, problem, derive_seed(c.seed, r)));
    if (progress) progress(r, result.estimates.back());
  }
  std::string budget = std::to_string(c.budget);
  if (c.estimator == "distributed-fixed") budget = std::to_string(c.clients) + "x" + budget;
  if (c.estimator == "instances") budget = std::to_string(c.workers) + "x" + budget;
  std::string estimator = c.estimator == "instances" ? "instances-" + c.instance_estimator : c.estimator;
  result.table = make_table(c.name, estimator, budget, result.estimates);
  if (!c.out.empty()) {
    const std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    write_file(dir / "ecdf.csv", ecdf_csv(result.table.points));
    nlohmann::json summary = to_json(result.table.summary);
    summary["config"] = to_json(c);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    std::string lines;
    for (const auto& e : result.estimates) lines += to_json(e).dump() + "\n";
    write_file(dir / "estimates.jsonl", lines);
  }
  return result;
}

std::string format_duration(double seconds) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(1);
  if (seconds < 60.0) {
    ss << seconds << "s";
  } else if (seconds < 3600.0) {
    ss << std::setprecision(0) << seconds / 60.0 << "m";
  } else if (seconds < 86400.0 * 10) {
    ss << seconds / 3600.0 << "h";
  } else {
    ss << seconds / 86400.0 << "d";
  }
  return ss.str();
}

std::string summarize(const std::vector<Summary>& rows) {
  std::ostringstream out;
  auto sci = [](double v) {
    std::ostringstream ss;
    ss << std::scientific << std::setprecision(2) << v;
    return ss.str();
  };
  out << std::left << std::setw(22) << "experiment" << std::setw(20) << "estimator" << std::setw(11) << "mean" << std::setw(11) << "std dev"
      << std::setw(8) << "levels" << std::setw(10) << "budget" << std::setw(8) << "valid" << "time (MC)\n";
  for (const auto& r : rows) {
    std::ostringstream levels;
    levels << std::setprecision(4) << r.levels;
    out << std::setw(22) << (r.name.empty() ? "-" : r.name) << std::setw(20) << r.estimator << std::setw(11) << sci(r.mean) << std::setw(11)
        << (r.std_dev ? sci(*r.std_dev) : "n/a") << std::setw(8) << levels.str() << std::setw(10) << r.budget << std::setw(8)
        << (std::to_string(r.valid) + "/" + std::to_string(r.repeats)) << format_duration(r.mean_wall) << " ("
        << (r.mc_seconds ? format_duration(*r.mc_seconds) : "n/a") << ")\n";
  }
  return out.str();
}

}  // namespace raresplit
