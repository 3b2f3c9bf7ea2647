#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rwrange/observables.hpp"

namespace rwrange::experiment {

enum class Command { Simulate, Tails, Variance, Clt, Decompose, Capacity, OracleCheck };

std::string to_string(Command command);
Command parse_command(const std::string& text);

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  Command command = Command::Tails;
  int d = 7;
  ObservableKind kind = ObservableKind::CutPoints;
  std::size_t n = 2048;
  std::vector<std::size_t> n_grid;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output_dir;
  ResistanceSolveConfig solver;

  // tails: fit window [n^lo, n^hi]
  double window_lo_exponent = 0.3;
  double window_hi_exponent = 0.8;
  // decompose
  int levels = 4;
  // capacity
  std::vector<double> radius_factors{4.0, 16.0, 64.0};
  std::uint32_t trials = 1;
  std::size_t sources = 0;
  std::size_t walks = 1;
  bool far_field = true;
  // oracle-check
  std::size_t max_n = 256;
  std::size_t instances = 500;
  // simulate
  bool dump_paths = false;
  // streams per checkpoint
  std::size_t checkpoint_every = 1000;

  /// Throws ConfigError for any out-of-range field of the selected command.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Rejects unknown keys and wrongly typed values. Missing keys keep defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base);

/// "256..8192" (powers of two inclusive) or "256,512,1024".
std::vector<std::size_t> parse_n_grid(const std::string& text);

/// Output directory used when none is configured: $RWRANGE_OUTPUT_DIR or "rwrange-out".
std::string default_output_dir();

struct RunControl {
  /// Stop (manifest left incomplete) once this many streams were computed in
  /// this invocation; 0 disables. Used to exercise resume.
  std::size_t stop_after = 0;
};

enum class RunStatus { Complete = 0, Failed = 1, InvalidConfig = 2, Interrupted = 3, Mismatch = 4 };

struct RunResult {
  RunStatus status = RunStatus::Complete;
  std::filesystem::path output_dir;
  std::vector<std::string> files;
  std::string message;
};

/// Executes one experiment, writes its CSV/JSON outputs and manifest.json.
/// Resumes from completed stream ranges when the directory holds an
/// unfinished run of the same configuration.
RunResult run(const ExperimentConfig& config, std::ostream& log, const RunControl& control = {});

std::string sha256_file(const std::filesystem::path& file);

/// Problems found when re-hashing the files listed in dir/manifest.json;
/// empty when everything matches.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace rwrange::experiment
