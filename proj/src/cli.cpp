#include "jumpfcs/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "jumpfcs/liouville.hpp"
#include "jumpfcs/trajectories.hpp"

namespace jumpfcs::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string> kSGridKeys = {"s-min", "s-max", "s-steps"};
const std::set<std::string> kAlphaGridKeys = {"alpha-min", "alpha-max", "alpha-steps"};
const std::set<std::string> kConfigKeys = {
    "command", "gamma", "omega", "alpha", "s", "s-min", "s-max", "s-steps", "alpha-min",
    "alpha-max", "alpha-steps", "t", "dt", "ntraj", "kmax", "seed", "out", "init", "threads"};
const std::set<std::string> kCommands = {"scgf", "sweep", "traj", "pk"};

bool has_any(const json& obj, const std::set<std::string>& keys) {
  return std::any_of(keys.begin(), keys.end(), [&](const std::string& k) { return obj.contains(k); });
}

void erase_keys(json& obj, const std::set<std::string>& keys) {
  for (const auto& k : keys) obj.erase(k);
}

void check_conflicts(const json& obj, const std::string& source) {
  if (obj.contains("s") && has_any(obj, kSGridKeys))
    throw UsageError(source + ": --s conflicts with --s-min/--s-max/--s-steps");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("malformed JSON in '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (!kConfigKeys.contains(key)) throw UsageError("unknown config key '" + key + "'");
    if (value.is_object() || value.is_array())
      throw UsageError("config key '" + key + "' must be a scalar");
  }
  return cfg;
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

DensityMatrix initial_density(const RunConfig& cfg, const Unraveling& u) {
  if (cfg.init == "e") return DensityMatrix::excited();
  if (cfg.init == "ss") return stationary_state(u);
  return DensityMatrix::ground();
}

InitialState initial_state(const RunConfig& cfg, const Unraveling& u) {
  if (cfg.init == "e") return InitialState::excited();
  if (cfg.init == "ss") return InitialState::mixture(stationary_state(u));
  return InitialState::ground();
}

// Writes to output_path when set, otherwise to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

int run_scgf(const RunConfig& cfg, std::ostream& out) {
  const Unraveling u = shifted_unraveling(cfg.params);
  Sink sink(cfg.output_path, out);
  for (double s : cfg.s_grid.values()) {
    const CountingStatistics st = activity_mandel(u, s);
    ordered_json row;
    row["s"] = st.s;
    row["theta"] = st.theta;
    row["k"] = st.activity;
    row["Q"] = st.mandel_q;
    row["imag_residual"] = st.imag_residual;
    sink.stream() << row.dump() << '\n';
  }
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<SweepRow> rows =
      sweep(cfg.params, cfg.s_grid, cfg.alpha_grid, SweepOptions{kDefaultFdStep, cfg.threads});
  Sink sink(cfg.output_path, out);
  std::ostream& os = sink.stream();
  os << "s,alpha,theta,k,Q,imag_residual\n";
  int failures = 0;
  for (const SweepRow& row : rows) {
    const CountingStatistics& st = row.stats;
    os << fmt17(st.s) << ',' << fmt17(row.alpha) << ',' << fmt17(st.theta) << ','
       << fmt17(st.activity) << ',' << fmt17(st.mandel_q) << ',' << fmt17(st.imag_residual) << '\n';
    if (!row.diagnostic.empty()) {
      ++failures;
      err << "sweep: s=" << fmt17(st.s) << " alpha=" << fmt17(row.alpha) << ": " << row.diagnostic
          << '\n';
    }
  }
  os.flush();
  return failures == 0 ? kExitOk : kExitNumerical;
}

int run_traj(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Unraveling u = shifted_unraveling(cfg.params);
  EnsembleOptions options;
  options.init = initial_state(cfg, u);
  options.threads = cfg.threads;
  const EnsembleResult res = ensemble_statistics(u, cfg.t, cfg.dt, cfg.n_traj, cfg.master_seed, options);

  ordered_json summary;
  summary["n_traj"] = cfg.n_traj;
  summary["t"] = cfg.t;
  summary["dt"] = cfg.dt;
  summary["seed"] = cfg.master_seed;
  summary["k_hat"] = res.k_hat;
  summary["q_hat"] = res.q_hat ? json(*res.q_hat) : json(nullptr);
  summary["se_k"] = res.se_k;
  summary["se_q"] = res.se_q ? json(*res.se_q) : json(nullptr);
  ordered_json biased = ordered_json::array();
  int failures = 0;
  for (double s : cfg.s_grid.values()) {
    ordered_json entry;
    entry["s"] = s;
    try {
      const BiasedStatistics b = biased_statistics(res.histogram, s);
      entry["k_s"] = b.k_s;
      entry["q_s"] = b.q_s;
      entry["se_k_s"] = b.se_k_s;
      entry["ess"] = b.effective_sample_size;
    } catch (const NumericalError& e) {
      entry["error"] = e.what();
      err << e.what() << '\n';
      ++failures;
    }
    biased.push_back(entry);
  }
  summary["biased"] = biased;

  if (!cfg.output_path.empty() && cfg.output_path != "-") {
    Sink sink(cfg.output_path, out);
    res.histogram.write_csv(sink.stream());
  } else {
    ordered_json hist = ordered_json::array();
    for (const auto& [k, c] : res.histogram.counts) hist.push_back({k, c});
    summary["histogram"] = hist;
  }
  out << summary.dump() << '\n';
  return failures == 0 ? kExitOk : kExitNumerical;
}

int run_pk(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Unraveling u = shifted_unraveling(cfg.params);
  const int k_max = cfg.k_max >= 0 ? cfg.k_max : recommended_k_max(u, cfg.t);
  const CountDistribution dist = counting_resolved_pk(u, cfg.t, k_max, initial_density(cfg, u));
  if (dist.truncation_tail > kTailWarnThreshold)
    err << "pk: truncation tail " << fmt17(dist.truncation_tail) << " exceeds "
        << kTailWarnThreshold << "; consider raising --kmax\n";
  Sink sink(cfg.output_path, out);
  std::ostream& os = sink.stream();
  os << "K,P\n";
  for (std::size_t k = 0; k < dist.probabilities.size(); ++k)
    os << k << ',' << fmt17(dist.probabilities[k]) << '\n';
  return kExitOk;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Photon-counting statistics of quantum-jump unravelings", "jumpfcs"};
  std::string command;
  double gamma = 0, omega = 0, alpha = 0, s = 0, s_min = 0, s_max = 0, alpha_min = 0, alpha_max = 0;
  double t = 0, dt = 0;
  int s_steps = 0, alpha_steps = 0, k_max = 0;
  long long ntraj = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string config_path, out, init;
  bool dump = false;

  app.add_option("command", command, "scgf | sweep | traj | pk");
  std::map<std::string, CLI::Option*> opts;
  opts["gamma"] = app.add_option("--gamma", gamma, "decay rate (default 1)");
  opts["omega"] = app.add_option("--omega", omega, "Rabi frequency (default 0.25)");
  opts["alpha"] = app.add_option("--alpha", alpha, "jump-operator shift (default 0)");
  opts["s"] = app.add_option("--s", s, "single counting field s");
  opts["s-min"] = app.add_option("--s-min", s_min);
  opts["s-max"] = app.add_option("--s-max", s_max);
  opts["s-steps"] = app.add_option("--s-steps", s_steps);
  opts["alpha-min"] = app.add_option("--alpha-min", alpha_min);
  opts["alpha-max"] = app.add_option("--alpha-max", alpha_max);
  opts["alpha-steps"] = app.add_option("--alpha-steps", alpha_steps);
  opts["t"] = app.add_option("--t", t, "counting time");
  opts["dt"] = app.add_option("--dt", dt, "trajectory time step");
  opts["ntraj"] = app.add_option("--ntraj", ntraj, "number of trajectories");
  opts["kmax"] = app.add_option("--kmax", k_max, "largest count K for pk (-1: automatic)");
  opts["seed"] = app.add_option("--seed", seed, "master RNG seed (default 42)");
  opts["out"] = app.add_option("--out", out, "output path (default: standard output)");
  opts["init"] = app.add_option("--init", init, "initial state: g, e or ss");
  opts["threads"] = app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--config", config_path, "flat JSON file keyed by flag names");
  app.add_flag("--dump-config", dump, "print the effective configuration as JSON and exit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  json cli_values = json::object();
  auto capture = [&](const std::string& key, const json& value) {
    if (opts.at(key)->count() > 0) cli_values[key] = value;
  };
  capture("gamma", gamma);
  capture("omega", omega);
  capture("alpha", alpha);
  capture("s", s);
  capture("s-min", s_min);
  capture("s-max", s_max);
  capture("s-steps", s_steps);
  capture("alpha-min", alpha_min);
  capture("alpha-max", alpha_max);
  capture("alpha-steps", alpha_steps);
  capture("t", t);
  capture("dt", dt);
  capture("ntraj", ntraj);
  capture("kmax", k_max);
  capture("seed", seed);
  capture("out", out);
  capture("init", init);
  capture("threads", threads);
  check_conflicts(cli_values, "command line");

  json merged = config_path.empty() ? json::object() : load_config(config_path);
  check_conflicts(merged, "config file");
  if (!command.empty()) merged["command"] = command;
  const std::string cmd = get_or<std::string>(merged, "command", "");
  if (cmd.empty()) throw UsageError("missing command (scgf, sweep, traj or pk)");
  if (!kCommands.contains(cmd)) throw UsageError("unknown command '" + cmd + "'");

  // Explicit flags replace the corresponding config entries, including the
  // alternative spelling of the same grid.
  if (cli_values.contains("s")) erase_keys(merged, kSGridKeys);
  if (has_any(cli_values, kSGridKeys)) merged.erase("s");
  if (cmd == "sweep") {
    if (cli_values.contains("alpha")) erase_keys(merged, kAlphaGridKeys);
    if (has_any(cli_values, kAlphaGridKeys)) merged.erase("alpha");
  }
  merged.update(cli_values);

  RunConfig cfg;
  cfg.command = cmd;
  cfg.params.gamma = get_or(merged, "gamma", 1.0);
  cfg.params.omega = get_or(merged, "omega", 0.25);
  cfg.params.alpha = get_or(merged, "alpha", 0.0);
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  if (merged.contains("s")) {
    const double s0 = get_or(merged, "s", 0.0);
    cfg.s_grid = {s0, s0, 1};
  } else {
    cfg.s_grid = cmd == "sweep" ? GridSpec{-1.5, 1.5, 301} : GridSpec{0.0, 0.0, 1};
    cfg.s_grid.min = get_or(merged, "s-min", cfg.s_grid.min);
    cfg.s_grid.max = get_or(merged, "s-max", cfg.s_grid.max);
    cfg.s_grid.steps = get_or(merged, "s-steps", cfg.s_grid.steps);
  }
  const double root_gamma = std::sqrt(cfg.params.gamma);
  if (cmd == "sweep" && merged.contains("alpha") && !has_any(merged, kAlphaGridKeys)) {
    const double a0 = cfg.params.alpha.real();
    cfg.alpha_grid = {a0, a0, 1};
  } else {
    cfg.alpha_grid = {-2.0 * root_gamma, 2.0 * root_gamma, 201};
    cfg.alpha_grid.min = get_or(merged, "alpha-min", cfg.alpha_grid.min);
    cfg.alpha_grid.max = get_or(merged, "alpha-max", cfg.alpha_grid.max);
    cfg.alpha_grid.steps = get_or(merged, "alpha-steps", cfg.alpha_grid.steps);
  }
  try {
    cfg.s_grid.validate("s grid");
    cfg.alpha_grid.validate("alpha grid");
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  cfg.t = get_or(merged, "t", cfg.t);
  if (!(cfg.t >= 0.0) || !std::isfinite(cfg.t)) throw UsageError("--t must be >= 0");
  cfg.dt = get_or(merged, "dt", 0.0);
  if (cfg.dt == 0.0) cfg.dt = default_time_step(cfg.params);
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw UsageError("--dt must be > 0");
  cfg.n_traj = get_or(merged, "ntraj", cfg.n_traj);
  if (cfg.n_traj < 1) throw UsageError("--ntraj must be >= 1");
  cfg.k_max = get_or(merged, "kmax", cfg.k_max);
  if (cfg.k_max < -1) throw UsageError("--kmax must be >= 0 (or -1 for automatic)");
  cfg.master_seed = get_or(merged, "seed", cfg.master_seed);
  cfg.output_path = get_or(merged, "out", cfg.output_path);
  cfg.init = get_or(merged, "init", cfg.init);
  if (cfg.init != "g" && cfg.init != "e" && cfg.init != "ss")
    throw UsageError("--init must be g, e or ss");
  cfg.threads = get_or(merged, "threads", cfg.threads);
  cfg.dump_config = dump;
  return cfg;
}

std::string dump_config(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["gamma"] = c.params.gamma;
  j["omega"] = c.params.omega;
  j["alpha"] = c.params.alpha.real();
  j["s-min"] = c.s_grid.min;
  j["s-max"] = c.s_grid.max;
  j["s-steps"] = c.s_grid.steps;
  j["alpha-min"] = c.alpha_grid.min;
  j["alpha-max"] = c.alpha_grid.max;
  j["alpha-steps"] = c.alpha_grid.steps;
  j["t"] = c.t;
  j["dt"] = c.dt;
  j["ntraj"] = c.n_traj;
  j["kmax"] = c.k_max;
  j["seed"] = c.master_seed;
  j["out"] = c.output_path;
  j["init"] = c.init;
  j["threads"] = c.threads;
  return j.dump(2);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.dump_config) {
      out << dump_config(config) << '\n';
      return kExitOk;
    }
    if (config.command == "scgf") return run_scgf(config, out);
    if (config.command == "sweep") return run_sweep(config, out, err);
    if (config.command == "traj") return run_traj(config, out, err);
    if (config.command == "pk") return run_pk(config, out, err);
    throw UsageError("unknown command '" + config.command + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(args);
  } catch (const HelpRequested& help) {
    out << help.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return run(config, out, err);
}

}  // namespace jumpfcs::cli
