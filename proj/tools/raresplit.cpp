// raresplit: rare-event statistical model checking with importance splitting.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "raresplit/distributed.hpp"
#include "raresplit/experiment.hpp"
#include "raresplit/reference.hpp"

using namespace raresplit;

namespace {

struct ProblemFlags {
  std::string model, prop, score, threshold, levels;
  std::optional<double> proportion;
  std::uint64_t budget = 1000;
  std::uint64_t seed = 1;
  double alpha = 0.05;

  void add(CLI::App* app, bool with_levels) {
    app->add_option("--model", model, "model file");
    app->add_option("--prop", prop, "bounded LTL property");
    app->add_option("--score", score, "score expression");
    app->add_option("--threshold", threshold, "score needed to satisfy the property (default: last level)");
    if (with_levels) app->add_option("--levels", levels, "comma-separated fixed levels, e.g. 70,140,210");
    app->add_option("--budget", budget, "simulations per level (per client)");
    app->add_option("--seed", seed, "experiment seed");
    app->add_option("--alpha", alpha, "confidence parameter of the interval");
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<Score> threshold_of(const ProblemFlags& f, const std::vector<Score>& levels) {
  if (!f.threshold.empty()) return Score::parse(f.threshold);
  if (!levels.empty()) return levels.back();
  return std::nullopt;
}

int cmd_run(const ExperimentConfig& cfg, bool quiet, bool print_json) {
  auto progress = [&](std::uint64_t r, const Estimate& e) {
    if (quiet) return;
    std::cerr << "run " << (r + 1) << "/" << cfg.repeats << ": " << to_string(e.status) << " gamma=" << std::setprecision(4) << e.gamma_hat
              << " (" << std::fixed << std::setprecision(2) << e.wall_seconds << "s)" << std::defaultfloat;
    if (!e.diagnostic.empty()) std::cerr << " " << e.diagnostic;
    std::cerr << "\n";
  };
  const ExperimentResult result = run_experiment(cfg, progress);
  if (print_json) {
    nlohmann::json out = to_json(result.table.summary);
    if (cfg.repeats == 1) out["estimate"] = to_json(result.estimates.front());
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << summarize({result.table.summary});
    if (cfg.repeats == 1) {
      const Estimate& e = result.estimates.front();
      std::cout << "gamma_hat " << std::setprecision(6) << e.gamma_hat;
      if (e.has_ci) {
        std::cout << "  ci [" << e.ci.lo << ", " << (e.ci.upper_infinite ? std::string("inf") : std::to_string(e.ci.hi)) << "]";
      }
      if (!e.levels.empty()) std::cout << "  levels " << format_levels(e.levels);
      std::cout << "\n";
    }
  }
  return result.table.summary.valid == 0 ? 2 : 0;
}

int cmd_check(const std::string& model_path, const std::string& prop, const std::string& score, const std::string& threshold, bool exact,
              std::uint64_t validate_trials, std::uint64_t seed, std::size_t cap) {
  const std::string source = read_file(model_path);
  const ModelPtr model = parse_model(source);
  std::size_t commands = model->command_count();
  std::cout << "model " << model_path << ": " << model->variables.size() << " variables, " << commands << " commands, "
            << model->modules.size() << " modules\n";
  std::cout << "state-space bound " << std::setprecision(3) << model->state_space_bound() << "\n";
  if (prop.empty()) return 0;
  const FormulaPtr f = parse_formula(prop, *model);
  std::cout << "property " << print_formula(*f) << "\n";
  std::cout << "horizon " << horizon(*f) << "\n";
  const RestrictionReport report = check_restriction(*f);
  std::cout << "restricted " << (report.accepted ? "yes" : "no") << "\n";
  for (const auto& v : report.violations) std::cout << "  at " << v.path << ": " << v.rule << "\n";
  std::cout << "memory " << to_string(classify_memory(*f)) << "\n";
  if (report.accepted) {
    const ObserverProgramPtr program = compile_observers(*f);
    std::cout << "observers (" << program->snapshot_bytes() << " snapshot bytes)\n" << program->describe();
  }
  if (exact) std::cout << "exact probability " << to_string(exact_probability(*model, *f, cap)) << "\n";
  if (!score.empty()) {
    if (threshold.empty()) throw std::invalid_argument("--threshold is needed with --score");
    const Problem p = make_problem(source, prop, score, Score::parse(threshold));
    std::cout << "score " << print_expr(*p.score->expr) << " threshold " << p.threshold.to_string() << "\n";
    if (validate_trials) {
      const RequirementReport r = validate_minimum_requirement(p, validate_trials, seed);
      std::cout << "requirement check: " << r.trials << " traces, " << r.satisfied << " satisfying, " << r.violations.size() << " violations\n";
      for (std::size_t i = 0; i < std::min<std::size_t>(r.violations.size(), 10); ++i) {
        const auto& v = r.violations[i];
        std::cout << "  trace " << v.trial << " (seed " << v.stream.seed << ", simulation " << v.stream.simulation << "): max score "
                  << v.max_score.to_string() << ", verdict " << to_string(v.verdict) << "\n";
      }
      if (!r.violations.empty()) return 3;
    }
  }
  return 0;
}

int cmd_serve(const ProblemFlags& f, std::uint16_t port, std::uint64_t clients, unsigned workers) {
  const auto levels = parse_levels(f.levels);
  const auto threshold = threshold_of(f, levels);
  if (!threshold) throw std::invalid_argument("serve needs --levels");
  const Problem problem = make_problem(read_file(f.model), f.prop, f.score, *threshold);
  validate_levels(levels, problem.threshold);
  TcpListener listener(port);
  std::cerr << "listening on port " << listener.port() << " for " << clients << " clients\n";
  std::vector<std::unique_ptr<Channel>> channels;
  for (std::uint64_t c = 0; c < clients; ++c) {
    channels.push_back(listener.accept());
    std::cerr << "client " << c << " connected\n";
  }
  std::vector<Channel*> raw;
  for (auto& ch : channels) raw.push_back(ch.get());
  const Estimate e = serve(problem, levels, f.budget, raw, f.seed, f.alpha, workers);
  std::cout << to_json(e).dump(2) << "\n";
  return e.valid() ? 0 : 2;
}

int cmd_client(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("--connect expects HOST:PORT");
  const std::string host = endpoint.substr(0, colon);
  const auto port = static_cast<std::uint16_t>(std::stoul(endpoint.substr(colon + 1)));
  auto channel = tcp_connect(host, port);
  client_loop(*channel);
  return 0;
}

int cmd_summarize(const std::vector<std::string>& files, bool as_json) {
  std::vector<Summary> rows;
  for (const auto& path : files) {
    const auto j = nlohmann::json::parse(read_file(path));
    rows.push_back(summary_from_json(j));
  }
  if (as_json) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    std::cout << arr.dump(2) << "\n";
  } else {
    std::cout << summarize(rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rare-event statistical model checking with importance splitting"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment (repeated estimates, ECDF and summary)");
  ProblemFlags rf;
  rf.add(run, true);
  std::string config_path, estimator = "fixed", instance_estimator = "fixed", out, name;
  std::uint64_t clients = 1, workers = 1, repeats = 1, max_iterations = 10'000, memory_cap = 2'000'000;
  unsigned threads = 1;
  bool quiet = false, print_json = false, print_config = false;
  run->add_option("--config", config_path, "experiment config (JSON); flags given explicitly override it");
  run->add_option("--estimator", estimator, "mc | fixed | adaptive | distributed-fixed | instances");
  run->add_option("--instance-estimator", instance_estimator, "estimator of each instance: fixed | adaptive");
  run->add_option("--proportion", rf.proportion, "adaptive retain proportion p");
  run->add_option("--clients", clients, "clients k for distributed-fixed");
  run->add_option("--workers", workers, "instances j for instances");
  run->add_option("--repeats", repeats, "independent estimates");
  run->add_option("--max-iterations", max_iterations, "adaptive iteration cap");
  run->add_option("--memory-cap", memory_cap, "adaptive cap on stored states");
  run->add_option("--threads", threads, "worker threads");
  run->add_option("--out", out, "output directory for ecdf.csv, summary.json, estimates.jsonl");
  run->add_option("--name", name, "experiment name");
  run->add_flag("--quiet", quiet, "no per-run progress");
  run->add_flag("--json", print_json, "print the summary as JSON");
  run->add_flag("--print-config", print_config, "print the effective config and exit");

  auto* check = app.add_subcommand("check", "parse a model and property, show observers, optionally validate a score");
  std::string c_model, c_prop, c_score, c_threshold;
  bool c_exact = false;
  std::uint64_t c_validate = 0, c_seed = 1;
  std::size_t c_cap = kDefaultExactCap;
  check->add_option("--model", c_model, "model file")->required();
  check->add_option("--prop", c_prop, "bounded LTL property");
  check->add_option("--score", c_score, "score expression");
  check->add_option("--threshold", c_threshold, "satisfaction threshold of the score");
  check->add_flag("--exact", c_exact, "compute the exact probability (small models)");
  check->add_option("--cap", c_cap, "state cap of the exact computation");
  check->add_option("--validate", c_validate, "Monte Carlo traces for the score requirement check");
  check->add_option("--seed", c_seed, "seed of the requirement check");

  auto* serve_cmd = app.add_subcommand("serve", "distributed fixed-level server over TCP");
  ProblemFlags sf;
  sf.add(serve_cmd, true);
  std::uint16_t port = 7070;
  std::uint64_t s_clients = 1;
  unsigned s_workers = 1;
  serve_cmd->add_option("--port", port, "listening port (0 picks one)");
  serve_cmd->add_option("--clients", s_clients, "number of clients to wait for");
  serve_cmd->add_option("--client-workers", s_workers, "simulation threads per client");

  auto* client_cmd = app.add_subcommand("client", "distributed fixed-level client");
  std::string endpoint;
  client_cmd->add_option("--connect", endpoint, "HOST:PORT of the server")->required();

  auto* sum = app.add_subcommand("summarize", "comparison table of summary.json files");
  std::vector<std::string> files;
  bool sum_json = false;
  sum->add_option("files", files, "summary.json files")->required();
  sum->add_flag("--json", sum_json, "emit JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = load_config(config_path);
      auto given = [&](const char* flag) { return run->count(flag) > 0; };
      if (given("--model")) cfg.model = rf.model;
      if (given("--prop")) cfg.property = rf.prop;
      if (given("--score")) cfg.score = rf.score;
      if (given("--levels")) cfg.levels = parse_levels(rf.levels);
      if (given("--threshold")) cfg.threshold = Score::parse(rf.threshold);
      if (given("--proportion")) cfg.proportion = rf.proportion;
      if (given("--budget") || config_path.empty()) cfg.budget = rf.budget;
      if (given("--seed") || config_path.empty()) cfg.seed = rf.seed;
      if (given("--alpha") || config_path.empty()) cfg.alpha = rf.alpha;
      if (given("--estimator") || config_path.empty()) cfg.estimator = estimator;
      if (given("--instance-estimator") || config_path.empty()) cfg.instance_estimator = instance_estimator;
      if (given("--clients") || config_path.empty()) cfg.clients = clients;
      if (given("--workers") || config_path.empty()) cfg.workers = workers;
      if (given("--repeats") || config_path.empty()) cfg.repeats = repeats;
      if (given("--max-iterations") || config_path.empty()) cfg.max_iterations = max_iterations;
      if (given("--memory-cap") || config_path.empty()) cfg.memory_cap = memory_cap;
      if (given("--threads") || config_path.empty()) cfg.threads = threads;
      if (given("--out")) cfg.out = out;
      if (given("--name")) cfg.name = name;
      if (print_config) {
        std::cout << to_json(cfg).dump(2) << "\n";
        return 0;
      }
      return cmd_run(cfg, quiet, print_json);
    }
    if (*check) return cmd_check(c_model, c_prop, c_score, c_threshold, c_exact, c_validate, c_seed, c_cap);
    if (*serve_cmd) return cmd_serve(sf, port, s_clients, s_workers);
    if (*client_cmd) return cmd_client(endpoint);
    if (*sum) return cmd_summarize(files, sum_json);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
