// rwrange: command-line experiment runner.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "rwrange/experiment.hpp"

using rwrange::experiment::Command;
using rwrange::experiment::ConfigError;
using rwrange::experiment::ExperimentConfig;
using nlohmann::json;

namespace {

struct Flags {
  std::string config_file;
  std::optional<int> d;
  std::optional<std::string> kind;
  std::optional<std::size_t> n;
  std::optional<std::string> n_grid;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output_dir;
  std::optional<double> tolerance;
  std::optional<std::size_t> max_iterations;
  std::optional<double> window_lo, window_hi;
  std::optional<int> levels;
  std::optional<std::vector<double>> radius_factors;
  std::optional<std::uint32_t> trials;
  std::optional<std::size_t> sources, walks, max_n, instances, checkpoint_every;
  bool no_far_field = false;
  bool dump_paths = false;
  std::size_t stop_after = 0;
};

template <typename T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json overrides(const Flags& f, Command command) {
  json j = json::object();
  j["command"] = rwrange::experiment::to_string(command);
  put(j, "d", f.d);
  put(j, "kind", f.kind);
  put(j, "n", f.n);
  if (f.n_grid) j["n_grid"] = rwrange::experiment::parse_n_grid(*f.n_grid);
  put(j, "samples", f.samples);
  put(j, "seed", f.seed);
  put(j, "threads", f.threads);
  put(j, "output_dir", f.output_dir);
  if (f.tolerance) j["solver"]["rel_tolerance"] = *f.tolerance;
  if (f.max_iterations) j["solver"]["max_iterations"] = *f.max_iterations;
  put(j, "window_lo_exponent", f.window_lo);
  put(j, "window_hi_exponent", f.window_hi);
  put(j, "levels", f.levels);
  put(j, "radius_factors", f.radius_factors);
  put(j, "trials", f.trials);
  put(j, "sources", f.sources);
  put(j, "walks", f.walks);
  put(j, "max_n", f.max_n);
  put(j, "instances", f.instances);
  put(j, "checkpoint_every", f.checkpoint_every);
  if (f.no_far_field) j["far_field"] = false;
  if (f.dump_paths) j["dump_paths"] = true;
  return j;
}

ExperimentConfig load_config(const Flags& f, Command command) {
  ExperimentConfig base;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw ConfigError("cannot read config file " + f.config_file);
    json file;
    try {
      in >> file;
    } catch (const json::parse_error& e) {
      throw ConfigError(f.config_file + ": " + e.what());
    }
    base = rwrange::experiment::config_from_json(file, base);
  }
  // Flags override the file; solver keys merge rather than replace.
  json over = overrides(f, command);
  if (over.contains("solver")) {
    json solver = rwrange::experiment::to_json(base)["solver"];
    solver.update(over["solver"]);
    over["solver"] = solver;
  }
  ExperimentConfig cfg = rwrange::experiment::config_from_json(over, base);
  if (cfg.output_dir.empty()) cfg.output_dir = rwrange::experiment::default_output_dir();
  return cfg;
}

void add_run_flags(CLI::App* sub, Flags& f, Command command) {
  sub->add_option("--config", f.config_file, "JSON config file; flags override it");
  sub->add_option("--d", f.d, "lattice dimension (4..8)");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_option("--output-dir,-o", f.output_dir, "output directory");
  sub->add_option("--checkpoint-every", f.checkpoint_every, "streams per checkpoint");
  sub->add_option("--stop-after", f.stop_after)->group("");
  const bool observable = command != Command::Simulate && command != Command::Capacity &&
                          command != Command::OracleCheck;
  if (observable) {
    sub->add_option("--kind", f.kind, "distance | cut | resistance");
    sub->add_option("--tolerance", f.tolerance, "CG relative residual tolerance");
    sub->add_option("--max-iterations", f.max_iterations, "CG iteration cap (0 = auto)");
  }
  if (command == Command::OracleCheck) {
    sub->add_option("--tolerance", f.tolerance, "CG relative residual tolerance");
    sub->add_option("--max-n", f.max_n, "largest walk length");
    sub->add_option("--instances", f.instances, "paths per dimension");
    return;
  }
  if (command == Command::Variance) {
    sub->add_option("--n-grid", f.n_grid, "e.g. 256..8192 or 256,512,1024");
  } else {
    sub->add_option("--n", f.n, "walk length");
  }
  if (command != Command::Capacity) sub->add_option("--samples", f.samples, "independent walks");
  switch (command) {
    case Command::Simulate:
      sub->add_flag("--dump-paths", f.dump_paths, "write binary path dumps");
      break;
    case Command::Tails:
      sub->add_option("--window-lo", f.window_lo, "fit window lower exponent");
      sub->add_option("--window-hi", f.window_hi, "fit window upper exponent");
      break;
    case Command::Decompose:
      sub->add_option("--levels,-K", f.levels, "dyadic depth");
      break;
    case Command::Capacity:
      sub->add_option("--radius-factors", f.radius_factors, "escape radius multiples")
          ->delimiter(',');
      sub->add_option("--trials", f.trials, "escape walks per source point");
      sub->add_option("--sources", f.sources, "sampled source points (0 = all)");
      sub->add_option("--walks", f.walks, "independent ranges");
      sub->add_flag("--no-far-field", f.no_far_field, "lattice steps only");
      break;
    default:
      break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for random walk range observables"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<Command> chosen;
  bool show_only = false;

  for (Command c : {Command::Simulate, Command::Tails, Command::Variance, Command::Clt,
                    Command::Decompose, Command::Capacity, Command::OracleCheck}) {
    auto* sub = app.add_subcommand(rwrange::experiment::to_string(c));
    add_run_flags(sub, flags, c);
    sub->add_flag("--show-config", show_only, "print the resolved config and exit");
    sub->callback([&chosen, c] { chosen = c; });
  }
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "re-check manifest checksums");
  verify->add_option("dir", verify_dir)->required();

  CLI11_PARSE(app, argc, argv);

  if (verify->parsed()) {
    const auto problems = rwrange::experiment::verify_manifest(verify_dir);
    for (const auto& p : problems) std::cerr << p << '\n';
    std::cout << (problems.empty() ? "ok" : "FAILED") << '\n';
    return problems.empty() ? 0 : 1;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(flags, *chosen);
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(rwrange::experiment::RunStatus::InvalidConfig);
  }
  if (show_only) {
    std::cout << rwrange::experiment::to_json(cfg).dump(2) << '\n';
    return 0;
  }
  const auto result = rwrange::experiment::run(cfg, std::cerr, {flags.stop_after});
  if (result.status == rwrange::experiment::RunStatus::Complete) {
    std::cout << "wrote " << result.files.size() << " files to " << result.output_dir.string()
              << '\n';
  }
  return static_cast<int>(result.status);
}
