// Copyright 2026 The car2lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "car2/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "car2/estimator.hpp"
#include "car2/io.hpp"
#include "car2/limit_laws.hpp"
#include "car2/montecarlo.hpp"
#include "car2/regime.hpp"
#include "car2/simulator.hpp"

namespace car2 {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kGlobalKeys = {"command", "seed", "out"};

const std::map<std::string, std::set<std::string>> kCommandKeys = {
    {"roots", {"params", "tol"}},
    {"regime-info", {"params", "tol"}},
    {"simulate",
     {"params", "horizon", "n_steps", "scheme", "record_noise",
      "replication_index"}},
    {"estimate", {"path", "sigma"}},
    {"limit-sample", {"params", "n", "grid_n", "phase", "threads"}},
    {"experiment",
     {"params", "horizons", "n_steps_per_unit_time", "n_reps", "normalization",
      "comparison", "grid_n", "threads", "write_residuals"}},
    {"convergence",
     {"params", "horizons", "n_steps_per_unit_time", "n_reps", "grid_n",
      "threads"}},
};

// Flags collected from the command line; each one overrides the config.
struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::map<std::string, double> params;
  std::optional<double> tol, horizon, sigma, phase;
  std::optional<std::size_t> n_steps, replication_index, n, grid_n,
      steps_per_unit, n_reps;
  std::optional<unsigned> threads;
  std::optional<std::string> scheme, path, normalization, comparison;
  std::vector<double> horizons, normal_mean, normal_var;
  bool no_noise = false;
  bool residuals = false;
};

void add_param_flags(CLI::App* sub, Flags& f,
                     std::initializer_list<const char*> names) {
  for (const char* name : names) {
    const std::string key = name;
    sub->add_option_function<double>(
        "--" + key, [&f, key](double v) { f.params[key] = v; },
        "model parameter " + key);
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config key '" + key + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::string& command) {
  const auto it = kCommandKeys.find(command);
  if (it == kCommandKeys.end())
    throw InvalidArgument("unknown command '" + command + "'");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kGlobalKeys.count(key) && !it->second.count(key))
      throw InvalidArgument("unknown key '" + key + "' for command " + command);
  }
}

json overlay(json j, const Flags& f) {
  if (f.seed) j["seed"] = *f.seed;
  if (f.out) j["out"] = *f.out;
  if (!f.params.empty()) {
    if (!j.contains("params")) j["params"] = json::object();
    for (const auto& [k, v] : f.params) j["params"][k] = v;
  }
  if (f.tol) j["tol"] = *f.tol;
  if (f.horizon) j["horizon"] = *f.horizon;
  if (f.sigma) j["sigma"] = *f.sigma;
  if (f.phase) j["phase"] = *f.phase;
  if (f.n_steps) j["n_steps"] = *f.n_steps;
  if (f.replication_index) j["replication_index"] = *f.replication_index;
  if (f.n) j["n"] = *f.n;
  if (f.grid_n) j["grid_n"] = *f.grid_n;
  if (f.steps_per_unit) j["n_steps_per_unit_time"] = *f.steps_per_unit;
  if (f.n_reps) j["n_reps"] = *f.n_reps;
  if (f.threads) j["threads"] = *f.threads;
  if (f.scheme) j["scheme"] = *f.scheme;
  if (f.path) j["path"] = *f.path;
  if (f.normalization) j["normalization"] = *f.normalization;
  if (!f.horizons.empty()) j["horizons"] = f.horizons;
  if (f.no_noise) j["record_noise"] = false;
  if (f.residuals) j["write_residuals"] = true;
  if (f.comparison || !f.normal_mean.empty() || !f.normal_var.empty()) {
    json c = j.value("comparison", json::object());
    if (f.comparison) c["kind"] = *f.comparison;
    if (!f.normal_mean.empty()) c["mean"] = f.normal_mean;
    if (!f.normal_var.empty()) c["variance"] = f.normal_var;
    j["comparison"] = c;
  }
  return j;
}

ModelParams params_of(const json& j) {
  return params_from_json(j.value("params", json::object()));
}

fs::path out_dir(const json& j) {
  fs::path dir = get_or<std::string>(j, "out", ".");
  fs::create_directories(dir);
  return dir;
}

json regime_json(const ModelParams& p, std::optional<double> tol) {
  const RootPair roots = char_roots(p);
  const Regime regime =
      classify(roots, tol ? *tol : default_tolerance(p.theta1, p.theta2));
  const RateSpec rates = rate_functions(regime, roots);
  const json r = to_json(roots);
  return {{"p", r["p"]},
          {"q", r["q"]},
          {"regime", std::string(to_string(regime.tag))},
          {"tag", std::string(to_string(regime.tag))},
          {"classified_with_tol", regime.classified_with_tol},
          {"v1_expr", rates.v1_expr},
          {"v2_expr", rates.v2_expr},
          {"ld1", rates.ld1},
          {"ld2", rates.ld2},
          {"nlrr", std::string(to_string(rates.nlrr))},
          {"llr_label", rates.llr_label}};
}

int cmd_roots(const json& j, std::ostream& out) {
  std::optional<double> tol;
  if (j.contains("tol")) tol = get_or<double>(j, "tol", 0.0);
  out << dump(regime_json(params_of(j), tol));
  return kExitOk;
}

fs::path meta_path_for(const fs::path& csv) {
  fs::path m = csv;
  m.replace_extension(".meta.json");
  return m;
}

int cmd_simulate(const json& j, std::ostream& out) {
  const ModelParams p = params_of(j);
  SimConfig cfg;
  cfg.horizon = get_or<double>(j, "horizon", 1.0);
  cfg.n_steps = get_or<std::size_t>(j, "n_steps", 1000);
  const std::string scheme = get_or<std::string>(j, "scheme", "exact");
  if (scheme == "exact") cfg.scheme = Scheme::Exact;
  else if (scheme == "euler") cfg.scheme = Scheme::Euler;
  else throw InvalidArgument("scheme must be 'exact' or 'euler'");
  cfg.record_noise = get_or<bool>(j, "record_noise", true);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.replication_index = get_or<std::uint64_t>(j, "replication_index", 0);

  const SamplePath path = simulate(p, cfg);
  const fs::path dir = out_dir(j);
  const fs::path csv = dir / "path.csv";
  std::ostringstream os;
  write_path_csv(path, os);
  write_file_atomic(csv, os.str());
  const json meta = {{"params", to_json(p)},
                     {"horizon", cfg.horizon},
                     {"n_steps", cfg.n_steps},
                     {"scheme", scheme},
                     {"record_noise", cfg.record_noise},
                     {"seed", cfg.seed},
                     {"replication_index", cfg.replication_index}};
  write_file_atomic(meta_path_for(csv), dump(meta));
  out << "simulate: wrote " << csv.string() << " and "
      << meta_path_for(csv).string() << "\n";
  return kExitOk;
}

int cmd_estimate(const json& j, std::ostream& out) {
  if (!j.contains("path")) throw InvalidArgument("estimate: --path is required");
  const fs::path csv = get_or<std::string>(j, "path", "");
  std::istringstream is(read_file(csv));
  SamplePath path = read_path_csv(is);

  std::uint64_t seed = get_or<std::uint64_t>(j, "seed", 0);
  std::optional<double> sigma;
  if (j.contains("sigma")) sigma = get_or<double>(j, "sigma", 0.0);
  const fs::path meta_file = meta_path_for(csv);
  if (fs::exists(meta_file)) {
    const json meta = json::parse(read_file(meta_file));
    path.params = params_from_json(meta.at("params"));
    if (!sigma) sigma = path.params.sigma;
    if (!j.contains("seed")) seed = meta.value("seed", std::uint64_t{0});
  }
  if (!sigma)
    throw InvalidArgument("estimate: sigma unknown; pass --sigma or keep the .meta.json sidecar");
  if (!(*sigma >= 0)) throw InvalidArgument("estimate: sigma must be >= 0");
  path.sigma = *sigma;

  const double h = path.step();
  for (std::size_t i = 0; i < path.t.size(); ++i)
    if (std::abs(path.t[i] - static_cast<double>(i) * h) >
        1e-9 * std::max(1.0, path.horizon()))
      throw InvalidArgument("estimate: time grid is not uniform");

  const Estimate e = mle(sufficient_stats(path));
  json rec = to_json(e);
  rec["T"] = path.horizon();
  rec["n"] = path.n_steps();
  rec["seed"] = seed;
  const fs::path file = out_dir(j) / "estimate.json";
  write_file_atomic(file, dump(rec));
  out << "estimate: theta1_hat=" << format_double(e.theta1_hat)
      << " theta2_hat=" << format_double(e.theta2_hat) << " wrote "
      << file.string() << "\n";
  return kExitOk;
}

int cmd_limit_sample(const json& j, std::ostream& out) {
  const ModelParams p = params_of(j);
  const RootPair roots = char_roots(p);
  const Regime regime = classify(p);
  LimitOptions opts;
  opts.grid_n = get_or<std::size_t>(j, "grid_n", 10000);
  if (j.contains("phase")) opts.phase = get_or<double>(j, "phase", 0.0);
  const std::size_t n = get_or<std::size_t>(j, "n", 1000);
  const std::uint64_t seed = get_or<std::uint64_t>(j, "seed", 0);
  const auto draws = sample_limit(regime, roots, p, n, opts, seed,
                                  get_or<unsigned>(j, "threads", 0));
  const fs::path dir = out_dir(j);
  const fs::path csv = dir / "limit_samples.csv";
  write_file_atomic(csv, limit_samples_csv(draws));
  json meta = {{"regime", std::string(to_string(regime.tag))},
               {"roots", to_json(roots)},
               {"params", to_json(p)},
               {"grid_n", draws.front().grid_n},
               {"n", n},
               {"seed", seed}};
  if (opts.phase) meta["phase"] = *opts.phase;
  write_file_atomic(meta_path_for(csv), dump(meta));
  out << "limit-sample: wrote " << csv.string() << " and "
      << meta_path_for(csv).string() << "\n";
  return kExitOk;
}

ExperimentConfig experiment_config(const json& j) {
  ExperimentConfig cfg;
  cfg.params = params_of(j);
  cfg.horizons = get_or<std::vector<double>>(j, "horizons", {});
  cfg.n_steps_per_unit_time = get_or<std::size_t>(j, "n_steps_per_unit_time", 100);
  cfg.n_reps = get_or<std::size_t>(j, "n_reps", 2000);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.grid_n = get_or<std::size_t>(j, "grid_n", 10000);
  cfg.threads = get_or<unsigned>(j, "threads", 0);
  cfg.normalization = parse_normalization(
      get_or<std::string>(j, "normalization", "deterministic_rate"));
  if (j.contains("comparison")) {
    const json& c = j.at("comparison");
    if (!c.is_object()) throw InvalidArgument("comparison must be an object");
    for (const auto& [key, value] : c.items()) {
      (void)value;
      if (key != "kind" && key != "mean" && key != "variance")
        throw InvalidArgument("unknown key comparison." + key);
    }
    cfg.comparison.kind =
        parse_comparison(get_or<std::string>(c, "kind", "vs_limit_sampler"));
    if (c.contains("mean"))
      cfg.comparison.mean = get_or<std::array<double, 2>>(c, "mean", {});
    if (c.contains("variance"))
      cfg.comparison.variance = get_or<std::array<double, 2>>(c, "variance", {});
  }
  cfg.keep_residuals = get_or<bool>(j, "write_residuals", false);
  return cfg;
}

int cmd_experiment(const json& j, std::ostream& out) {
  const ExperimentConfig cfg = experiment_config(j);
  const ExperimentReport report = run_experiment(cfg);
  const fs::path dir = out_dir(j);
  const fs::path file = dir / "report.json";
  write_file_atomic(file, dump(to_json(report)));
  out << "experiment: " << to_string(report.regime) << ", "
      << report.horizons.size() << " horizon(s), wrote " << file.string();
  if (cfg.keep_residuals) {
    const fs::path res = dir / "residuals.csv";
    write_file_atomic(res, residuals_csv(report));
    out << " and " << res.string();
  }
  out << "\n";
  return kExitOk;
}

int cmd_convergence(const json& j, std::ostream& out) {
  const ExperimentConfig cfg = experiment_config(j);
  const ConvergenceTable table = convergence_study(cfg);
  const fs::path file = out_dir(j) / "convergence.json";
  write_file_atomic(file, dump(to_json(table)));
  out << "convergence: " << to_string(table.regime) << ", "
      << table.rows.size() << " horizons, wrote " << file.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"CAR(2) simulation and inference laboratory", "car2lab"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Flags f;
  app.add_option("--seed", f.seed, "master seed (u64)");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--config", f.config, "JSON config file");

  auto* roots = app.add_subcommand("roots", "characteristic roots and regime");
  auto* info = app.add_subcommand("regime-info", "rates and labels of a regime");
  for (auto* sub : {roots, info}) {
    add_param_flags(sub, f, {"theta1", "theta2"});
    sub->add_option("--tol", f.tol, "classification tolerance");
  }

  auto* sim = app.add_subcommand("simulate", "simulate one path to CSV");
  add_param_flags(sim, f, {"theta1", "theta2", "sigma", "x0", "dx0"});
  sim->add_option("--horizon", f.horizon, "horizon T");
  sim->add_option("--n-steps", f.n_steps, "number of steps");
  sim->add_option("--scheme", f.scheme, "exact or euler");
  sim->add_option("--replication-index", f.replication_index, "replication index");
  sim->add_flag("--no-noise", f.no_noise, "do not record dw");

  auto* est = app.add_subcommand("estimate", "MLE from a path CSV");
  est->add_option("--path", f.path, "path CSV written by simulate");
  est->add_option("--sigma", f.sigma, "noise scale (default: sidecar)");

  auto* lim = app.add_subcommand("limit-sample", "draws from the limit law");
  add_param_flags(lim, f, {"theta1", "theta2", "sigma", "x0", "dx0"});
  lim->add_option("--n", f.n, "number of draws");
  lim->add_option("--grid-n", f.grid_n, "Brownian grid size");
  lim->add_option("--phase", f.phase, "phase 2 nu T mod 2 pi");
  lim->add_option("--threads", f.threads, "worker threads (0 = all)");

  auto* exp = app.add_subcommand("experiment", "Monte Carlo experiment");
  auto* conv = app.add_subcommand("convergence", "convergence study");
  for (auto* sub : {exp, conv}) {
    add_param_flags(sub, f, {"theta1", "theta2", "sigma", "x0", "dx0"});
    sub->add_option("--horizons", f.horizons, "horizons T")->delimiter(',');
    sub->add_option("--steps-per-unit", f.steps_per_unit, "steps per unit time");
    sub->add_option("--reps", f.n_reps, "replications per horizon");
    sub->add_option("--grid-n", f.grid_n, "Brownian grid size");
    sub->add_option("--threads", f.threads, "worker threads (0 = all)");
  }
  exp->add_option("--normalization", f.normalization,
                  "deterministic_rate, nlrr or matrix_A_T");
  exp->add_option("--comparison", f.comparison, "vs_limit_sampler or vs_normal");
  exp->add_option("--normal-mean", f.normal_mean, "vs_normal means")->delimiter(',');
  exp->add_option("--normal-var", f.normal_var, "vs_normal variances")->delimiter(',');
  exp->add_flag("--residuals", f.residuals, "also write residuals.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    json j = json::object();
    if (f.config) {
      j = json::parse(read_file(*f.config));
      if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    }
    std::string command;
    if (!app.get_subcommands().empty())
      command = app.get_subcommands().front()->get_name();
    if (j.contains("command")) {
      const std::string from_file = get_or<std::string>(j, "command", "");
      if (!command.empty() && command != from_file)
        throw InvalidArgument("config command '" + from_file +
                              "' conflicts with subcommand '" + command + "'");
      command = from_file;
    }
    if (command.empty()) throw InvalidArgument("no command given");
    check_keys(j, command);
    j = overlay(std::move(j), f);
    j["command"] = command;

    if (command == "roots" || command == "regime-info") return cmd_roots(j, out);
    if (command == "simulate") return cmd_simulate(j, out);
    if (command == "estimate") return cmd_estimate(j, out);
    if (command == "limit-sample") return cmd_limit_sample(j, out);
    if (command == "experiment") return cmd_experiment(j, out);
    return cmd_convergence(j, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: bad JSON: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NoNlrr& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace car2
