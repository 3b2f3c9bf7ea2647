#include "rwrange/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rwrange/capacity.hpp"
#include "rwrange/csv.hpp"
#include "rwrange/decomposition.hpp"
#include "rwrange/parallel.hpp"
#include "rwrange/rng.hpp"
#include "rwrange/stats.hpp"

namespace rwrange::experiment {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::pair<Command, const char*> kCommandNames[] = {
    {Command::Simulate, "simulate"}, {Command::Tails, "tails"},
    {Command::Variance, "variance"}, {Command::Clt, "clt"},
    {Command::Decompose, "decompose"}, {Command::Capacity, "capacity"},
    {Command::OracleCheck, "oracle-check"}};

}  // namespace

std::string to_string(Command command) {
  for (const auto& [c, name] : kCommandNames) {
    if (c == command) return name;
  }
  return "unknown";
}

Command parse_command(const std::string& text) {
  for (const auto& [c, name] : kCommandNames) {
    if (text == name) return c;
  }
  throw ConfigError("config.command: unknown command '" + text + "'");
}

std::string default_output_dir() {
  const char* env = std::getenv("RWRANGE_OUTPUT_DIR");
  return env && *env ? env : "rwrange-out";
}

std::vector<std::size_t> parse_n_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  auto number = [&](const std::string& s) -> std::size_t {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("config.n_grid: cannot parse '" + s + "'");
    }
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::size_t lo = number(text.substr(0, dots)), hi = number(text.substr(dots + 2));
    if (lo == 0 || (lo & (lo - 1)) != 0 || lo > hi) {
      throw ConfigError("config.n_grid: range must start at a power of two <= its end");
    }
    for (std::size_t v = lo; v <= hi; v *= 2) grid.push_back(v);
    return grid;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) grid.push_back(number(item));
  return grid;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config." + field + ": " + why);
  };
  if (d < kMinDim || d > kMaxDim) fail("d", "must lie in [4, 8]");
  if (threads > 1024) fail("threads", "must be <= 1024");
  if (checkpoint_every == 0) fail("checkpoint_every", "must be >= 1");
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    fail("solver", e.what());
  }
  switch (command) {
    case Command::Simulate:
      if (n == 0) fail("n", "must be >= 1");
      if (samples == 0) fail("samples", "must be >= 1");
      break;
    case Command::Tails:
      if (n == 0) fail("n", "must be >= 1");
      if (samples < kMinTailSamples) fail("samples", "tails needs >= 1000 samples");
      if (!(window_lo_exponent >= 0.0 && window_lo_exponent < window_hi_exponent &&
            window_hi_exponent <= 1.5)) {
        fail("window_lo_exponent", "need 0 <= window_lo_exponent < window_hi_exponent <= 1.5");
      }
      break;
    case Command::Variance:
      if (n_grid.size() < 2) fail("n_grid", "needs at least two grid points");
      for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const std::size_t v = n_grid[i];
        if (v == 0 || (v & (v - 1)) != 0) fail("n_grid", "entries must be powers of two");
        if (i > 0 && v <= n_grid[i - 1]) fail("n_grid", "must be strictly increasing");
      }
      if (samples < kMinVarianceSamples) fail("samples", "variance needs >= 500 samples per n");
      break;
    case Command::Clt:
      if (n == 0) fail("n", "must be >= 1");
      if (samples < kMinCltSamples) fail("samples", "clt needs >= 1000 samples");
      break;
    case Command::Decompose:
      if (levels < 1 || levels > 30) fail("levels", "must lie in [1, 30]");
      if (n == 0 || n % (std::size_t{1} << levels) != 0) {
        fail("n", "must be divisible by 2^levels");
      }
      if (samples == 0) fail("samples", "must be >= 1");
      break;
    case Command::Capacity:
      if (n == 0) fail("n", "must be >= 1");
      if (radius_factors.empty()) fail("radius_factors", "needs at least one factor");
      for (double f : radius_factors) {
        if (!(f >= 4.0)) fail("radius_factors", "factors must be >= 4");
      }
      if (trials == 0) fail("trials", "must be >= 1");
      if (walks == 0) fail("walks", "must be >= 1");
      break;
    case Command::OracleCheck:
      if (max_n == 0) fail("max_n", "must be >= 1");
      if (instances == 0) fail("instances", "must be >= 1");
      break;
  }
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"command", to_string(c.command)},
      {"d", c.d},
      {"kind", std::string(rwrange::to_string(c.kind))},
      {"n", c.n},
      {"n_grid", c.n_grid},
      {"samples", c.samples},
      {"seed", c.seed},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
      {"solver",
       {{"rel_tolerance", c.solver.rel_tolerance},
        {"max_iterations", c.solver.max_iterations},
        {"preconditioner",
         c.solver.preconditioner == Preconditioner::Diagonal ? "diagonal" : "none"},
        {"series_reduction", c.solver.series_reduction}}},
      {"window_lo_exponent", c.window_lo_exponent},
      {"window_hi_exponent", c.window_hi_exponent},
      {"levels", c.levels},
      {"radius_factors", c.radius_factors},
      {"trials", c.trials},
      {"sources", c.sources},
      {"walks", c.walks},
      {"far_field", c.far_field},
      {"max_n", c.max_n},
      {"instances", c.instances},
      {"dump_paths", c.dump_paths},
      {"checkpoint_every", c.checkpoint_every},
  };
}

namespace {

template <typename T>
T read_field(const json& v, const std::string& key) {
  auto wrong = [&](const char* expected) {
    throw ConfigError("config." + key + ": expected " + expected);
  };
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) wrong("a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) wrong("a string");
    return v.get<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) wrong("a number");
    return v.get<T>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      wrong("a nonnegative integer");
    }
    const auto u = v.get<std::uint64_t>();
    if (u > std::numeric_limits<T>::max()) wrong("a smaller integer");
    return static_cast<T>(u);
  } else {
    if (!v.is_number_integer()) wrong("an integer");
    return v.get<T>();
  }
}

template <typename T>
std::vector<T> read_array(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config." + key + ": expected an array");
  std::vector<T> out;
  for (const auto& item : v) out.push_back(read_field<T>(item, key));
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) { return config_from_json(j, {}); }

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c = base;
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = parse_command(read_field<std::string>(v, key));
    else if (key == "d") c.d = read_field<int>(v, key);
    else if (key == "kind") {
      try {
        c.kind = parse_observable_kind(read_field<std::string>(v, key));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.kind: ") + e.what());
      }
    } else if (key == "n") c.n = read_field<std::size_t>(v, key);
    else if (key == "n_grid") c.n_grid = read_array<std::size_t>(v, key);
    else if (key == "samples") c.samples = read_field<std::size_t>(v, key);
    else if (key == "seed") c.seed = read_field<std::uint64_t>(v, key);
    else if (key == "threads") c.threads = read_field<unsigned>(v, key);
    else if (key == "output_dir") c.output_dir = read_field<std::string>(v, key);
    else if (key == "solver") {
      if (!v.is_object()) throw ConfigError("config.solver: expected an object");
      for (const auto& [sk, sv] : v.items()) {
        const std::string name = "solver." + sk;
        if (sk == "rel_tolerance") c.solver.rel_tolerance = read_field<double>(sv, name);
        else if (sk == "max_iterations") c.solver.max_iterations = read_field<std::size_t>(sv, name);
        else if (sk == "series_reduction") c.solver.series_reduction = read_field<bool>(sv, name);
        else if (sk == "preconditioner") {
          const auto p = read_field<std::string>(sv, name);
          if (p == "diagonal") c.solver.preconditioner = Preconditioner::Diagonal;
          else if (p == "none") c.solver.preconditioner = Preconditioner::None;
          else throw ConfigError("config.solver.preconditioner: expected 'diagonal' or 'none'");
        } else {
          throw ConfigError("config.solver: unknown key '" + sk + "'");
        }
      }
    } else if (key == "window_lo_exponent") c.window_lo_exponent = read_field<double>(v, key);
    else if (key == "window_hi_exponent") c.window_hi_exponent = read_field<double>(v, key);
    else if (key == "levels") c.levels = read_field<int>(v, key);
    else if (key == "radius_factors") c.radius_factors = read_array<double>(v, key);
    else if (key == "trials") c.trials = read_field<std::uint32_t>(v, key);
    else if (key == "sources") c.sources = read_field<std::size_t>(v, key);
    else if (key == "walks") c.walks = read_field<std::size_t>(v, key);
    else if (key == "far_field") c.far_field = read_field<bool>(v, key);
    else if (key == "max_n") c.max_n = read_field<std::size_t>(v, key);
    else if (key == "instances") c.instances = read_field<std::size_t>(v, key);
    else if (key == "dump_paths") c.dump_paths = read_field<bool>(v, key);
    else if (key == "checkpoint_every") c.checkpoint_every = read_field<std::size_t>(v, key);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return c;
}

std::string sha256_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
  std::vector<std::string> problems;
  std::ifstream in(dir / "manifest.json");
  if (!in) return {"manifest.json missing"};
  json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    return {std::string("manifest.json unreadable: ") + e.what()};
  }
  if (!manifest.value("complete", false)) problems.push_back("run is incomplete");
  const json files = manifest.value("files", json::object());
  for (const auto& [name, digest] : files.items()) {
    const fs::path file = dir / name;
    if (!fs::exists(file)) {
      problems.push_back(name + ": missing");
    } else if (sha256_file(file) != digest.get<std::string>()) {
      problems.push_back(name + ": checksum mismatch");
    }
  }
  return problems;
}

namespace {

struct Interrupted {};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json comparable(json config) {
  config.erase("threads");
  config.erase("output_dir");
  config.erase("checkpoint_every");
  return config;
}

class Context {
 public:
  Context(const ExperimentConfig& cfg, fs::path dir, std::ostream& log, const RunControl& control)
      : cfg(cfg), dir(std::move(dir)), log(log), control(control) {}

  void open() {
    fs::create_directories(dir);
    const json config = to_json(cfg);
    std::ifstream in(dir / "manifest.json");
    if (in) {
      json old;
      try {
        in >> old;
      } catch (const std::exception&) {
        old = json::object();
      }
      if (old.is_object() && !old.value("complete", true) && old.contains("config") &&
          comparable(old["config"]) == comparable(config)) {
        manifest_ = old;
        manifest_["config"] = config;
        log << "resuming unfinished run in " << dir.string() << '\n';
        return;
      }
    }
    manifest_ = json{{"tool", "rwrange-lab"},
                     {"version", kVersion},
                     {"config", config},
                     {"started", utc_now()},
                     {"finished", nullptr},
                     {"complete", false},
                     {"completed_streams", json::object()},
                     {"files", json::object()}};
    save();
  }

  std::size_t completed(const std::string& cell) const {
    const auto& cs = manifest_["completed_streams"];
    if (!cs.contains(cell)) return 0;
    const auto& ranges = cs[cell];
    // Contiguous from zero by construction: [[0, hi]].
    return ranges.empty() ? 0 : ranges[0][1].get<std::size_t>();
  }

  void set_completed(const std::string& cell, std::size_t hi) {
    manifest_["completed_streams"][cell] = json::array({json::array({0, hi})});
    save();
  }

  /// Throws Interrupted once the stop budget is used up.
  void charge(std::size_t streams) {
    if (control.stop_after > 0 && computed_ >= control.stop_after) throw Interrupted{};
    computed_ += streams;
  }

  void add_file(const std::string& name) {
    if (std::find(files.begin(), files.end(), name) == files.end()) files.push_back(name);
  }

  void finish() {
    json sums = json::object();
    for (const auto& f : files) sums[f] = sha256_file(dir / f);
    manifest_["files"] = sums;
    manifest_["complete"] = true;
    manifest_["finished"] = utc_now();
    save();
  }

  void mark_failed(const std::string& why) {
    manifest_["complete"] = false;
    manifest_["error"] = why;
    try {
      save();
    } catch (...) {
    }
  }

  std::ofstream create(const std::string& name, const std::string& schema) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    if (!schema.empty()) out << csv_schema_line(schema) << '\n';
    add_file(name);
    return out;
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    add_file(name);
  }

  const ExperimentConfig& cfg;
  fs::path dir;
  std::ostream& log;
  RunControl control;
  std::vector<std::string> files;

 private:
  void save() {
    const fs::path tmp = dir / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << manifest_.dump(2) << '\n';
      if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    }
    fs::rename(tmp, dir / "manifest.json");
  }

  json manifest_;
  std::size_t computed_ = 0;
};

struct SampleRow {
  int k = 0;
  std::size_t l = 0;
  double value = 0.0;
};
using StreamRows = std::vector<SampleRow>;

struct CellPlan {
  std::string cell;
  std::string file;
  std::size_t n;
  std::uint64_t row_seed;  // seed column: the key the walk was generated with
  std::size_t samples;
  unsigned threads;
};

void write_rows(std::ostream& out, const ExperimentConfig& cfg, const CellPlan& plan,
                std::uint64_t stream, const StreamRows& rows) {
  for (const auto& r : rows) {
    write_sample_csv_row(out, cfg.kind, cfg.d, plan.n, r.k, r.l, r.value, plan.row_seed, stream);
  }
}

// Runs streams [0, samples) of one (command, n) cell, appending rows to the
// cell's CSV in stream order and checkpointing the completed prefix.
std::vector<StreamRows> sample_cell(Context& ctx, const CellPlan& plan,
                                    const std::function<StreamRows(std::uint64_t)>& fn) {
  const fs::path path = ctx.dir / plan.file;
  std::size_t done = std::min(ctx.completed(plan.cell), plan.samples);
  std::vector<StreamRows> rows(plan.samples);
  if (done > 0) {
    std::ifstream in(path);
    std::vector<bool> seen(done, false);
    for (std::string line; in && std::getline(in, line);) {
      if (line.empty() || line[0] == '#' || line.rfind("kind,", 0) == 0) continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      if (cols.size() != 8) break;
      const std::size_t stream = std::stoull(cols[7]);
      if (stream >= done) continue;
      rows[stream].push_back({std::stoi(cols[3]), std::stoull(cols[4]), std::stod(cols[5])});
      seen[stream] = true;
    }
    const auto missing = std::find(seen.begin(), seen.end(), false) - seen.begin();
    if (static_cast<std::size_t>(missing) < done) {
      ctx.log << plan.cell << ": checkpoint truncated at stream " << missing << '\n';
      for (std::size_t s = missing; s < done; ++s) rows[s].clear();
      done = static_cast<std::size_t>(missing);
    }
    if (done > 0) ctx.log << plan.cell << ": resuming at stream " << done << '\n';
  }
  {
    std::ofstream out = ctx.create(plan.file, "sample-rows");
    write_sample_csv_header(out);
    for (std::size_t s = 0; s < done; ++s) write_rows(out, ctx.cfg, plan, s, rows[s]);
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  ctx.set_completed(plan.cell, done);

  for (std::size_t lo = done; lo < plan.samples;) {
    const std::size_t hi = std::min(plan.samples, lo + ctx.cfg.checkpoint_every);
    ctx.charge(hi - lo);
    auto chunk = parallel_map(lo, hi, plan.threads, fn);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    for (std::size_t s = lo; s < hi; ++s) {
      write_rows(out, ctx.cfg, plan, s, chunk[s - lo]);
      rows[s] = std::move(chunk[s - lo]);
    }
    out.flush();
    if (!out) throw std::runtime_error("cannot append to " + path.string());
    ctx.set_completed(plan.cell, hi);
    lo = hi;
  }
  return rows;
}

std::vector<double> first_values(const std::vector<StreamRows>& rows) {
  std::vector<double> xs;
  xs.reserve(rows.size());
  for (const auto& r : rows) xs.push_back(r.at(0).value);
  return xs;
}

std::string cell_file(std::size_t n) { return "samples_n" + std::to_string(n) + ".csv"; }

json tail_fit_json(const ExperimentConfig& cfg, const TailFit& fit) {
  return {{"d", cfg.d},
          {"kind", std::string(rwrange::to_string(cfg.kind))},
          {"n", cfg.n},
          {"samples", fit.sample_count},
          {"seed", cfg.seed},
          {"l_min", fit.l_min},
          {"l_max", fit.l_max},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"n_points", fit.n_points},
          {"reference_exponent", -cfg.d / 2.0 + 2.0}};
}

void run_tails(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const CellPlan plan{"tails:n=" + std::to_string(cfg.n), cell_file(cfg.n), cfg.n,
                      cfg.seed, cfg.samples, cfg.threads};
  const auto rows = sample_cell(ctx, plan, [&](std::uint64_t s) {
    const WalkPath path = simulate_walk(cfg.d, 2 * cfg.n, cfg.seed, s);
    return StreamRows{{0, 0, cross_term(path, cfg.kind, cfg.n, 2 * cfg.n, cfg.solver).value}};
  });
  std::vector<double> xs = first_values(rows);
  const double nn = static_cast<double>(cfg.n);
  const double l_min = std::max(1.0, std::pow(nn, cfg.window_lo_exponent));
  const double l_max = std::pow(nn, cfg.window_hi_exponent);
  const TailFit fit = fit_tail_exponent(xs, l_min, l_max);

  std::sort(xs.begin(), xs.end());
  {
    std::ofstream out = ctx.create("survival.csv", "survival");
    out << "l,survival\n";
    const double ratio = std::log(l_max / l_min) / static_cast<double>(kTailGridPoints - 1);
    for (std::size_t j = 0; j < kTailGridPoints; ++j) {
      const double l = l_min * std::exp(ratio * static_cast<double>(j));
      out << format_value(l) << ',' << format_value(empirical_survival(xs, l)) << '\n';
    }
  }
  {
    std::ofstream out = ctx.create("tail_fit.csv", "tail-fit");
    out << "d,kind,n,samples,l_min,l_max,slope,intercept,r_squared,n_points\n"
        << cfg.d << ',' << rwrange::to_string(cfg.kind) << ',' << cfg.n << ','
        << fit.sample_count << ',' << format_value(fit.l_min) << ',' << format_value(fit.l_max)
        << ',' << format_value(fit.slope) << ',' << format_value(fit.intercept) << ','
        << format_value(fit.r_squared) << ',' << fit.n_points << '\n';
  }
  ctx.write_json("tail_fit.json", tail_fit_json(cfg, fit));
  ctx.log << "tail slope " << fit.slope << " (reference " << -cfg.d / 2.0 + 2.0 << ")\n";
}

void run_variance(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<VariancePoint> grid;
  for (std::size_t n : cfg.n_grid) {
    const std::uint64_t cell_seed = derive_seed(cfg.seed, n);
    const CellPlan plan{"variance:n=" + std::to_string(n), cell_file(n), n, cell_seed,
                        cfg.samples, cfg.threads};
    const auto rows = sample_cell(ctx, plan, [&](std::uint64_t s) {
      const WalkPath path = simulate_walk(cfg.d, n, cell_seed, s);
      return StreamRows{{0, 0, observable(SegmentView(path), cfg.kind, cfg.solver)}};
    });
    grid.push_back(summarize_variance(n, first_values(rows)));
  }
  const VarianceScan scan = variance_scan_from_points(cfg.kind, cfg.d, grid);

  {
    std::ofstream out = ctx.create("variance_scan.csv", "variance-scan");
    out << "d,kind,n,samples,mean,variance,std_error,var_over_n,var_over_nlogn,var_over_n15\n";
    for (const auto& p : scan.grid) {
      const double nn = static_cast<double>(p.n);
      out << cfg.d << ',' << rwrange::to_string(cfg.kind) << ',' << p.n << ',' << p.sample_count
          << ',' << format_value(p.mean) << ',' << format_value(p.variance) << ','
          << format_value(p.std_error) << ',' << format_value(p.variance / nn) << ','
          << format_value(p.variance / (nn * std::log(nn))) << ','
          << format_value(p.variance / (nn * std::sqrt(nn))) << '\n';
    }
  }
  {
    std::ofstream out = ctx.create("variance_fit.csv", "variance-fit");
    out << "d,kind,slope,slope_std_error,intercept";
    for (const auto& s : scan.model_scores) out << ",score_" << to_string(s.law);
    out << ",best_law\n";
    out << cfg.d << ',' << rwrange::to_string(cfg.kind) << ',' << format_value(scan.slope) << ','
        << format_value(scan.slope_std_error) << ',' << format_value(scan.intercept);
    for (const auto& s : scan.model_scores) out << ',' << format_value(s.r_squared);
    out << ',' << to_string(scan.best_law()) << '\n';
  }
  json grid_json = json::array();
  for (const auto& p : scan.grid) {
    grid_json.push_back({{"n", p.n},
                         {"mean", p.mean},
                         {"variance", p.variance},
                         {"sample_count", p.sample_count},
                         {"std_error", p.std_error}});
  }
  json scores = json::object();
  for (const auto& s : scan.model_scores) {
    scores[std::string(to_string(s.law))] = {{"r_squared", s.r_squared}, {"log_alpha", s.log_alpha}};
  }
  ctx.write_json("variance_scan.json", {{"d", cfg.d},
                                        {"kind", std::string(rwrange::to_string(cfg.kind))},
                                        {"seed", cfg.seed},
                                        {"grid", grid_json},
                                        {"slope", scan.slope},
                                        {"slope_std_error", scan.slope_std_error},
                                        {"intercept", scan.intercept},
                                        {"model_scores", scores},
                                        {"best_law", std::string(to_string(scan.best_law()))}});
  ctx.log << "variance slope " << scan.slope << " +- " << scan.slope_std_error << '\n';
}

void run_clt(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::uint64_t cell_seed = derive_seed(cfg.seed, cfg.n);
  const CellPlan plan{"clt:n=" + std::to_string(cfg.n), cell_file(cfg.n), cfg.n, cell_seed,
                      cfg.samples, cfg.threads};
  const auto rows = sample_cell(ctx, plan, [&](std::uint64_t s) {
    const WalkPath path = simulate_walk(cfg.d, cfg.n, cell_seed, s);
    return StreamRows{{0, 0, observable(SegmentView(path), cfg.kind, cfg.solver)}};
  });
  CltReport r = clt_report(first_values(rows));
  r.n = cfg.n;
  r.d = cfg.d;
  r.kind = cfg.kind;
  {
    std::ofstream out = ctx.create("clt.csv", "clt");
    out << "d,kind,n,samples,mean,std_dev,skewness,excess_kurtosis,ks_distance,"
           "median_abs_standardized\n"
        << r.d << ',' << rwrange::to_string(r.kind) << ',' << r.n << ',' << r.sample_count << ','
        << format_value(r.mean) << ',' << format_value(r.std_dev) << ','
        << format_value(r.skewness) << ',' << format_value(r.excess_kurtosis) << ','
        << format_value(r.ks_distance) << ',' << format_value(r.median_abs_standardized) << '\n';
  }
  ctx.write_json("clt.json", {{"d", r.d},
                              {"kind", std::string(rwrange::to_string(r.kind))},
                              {"n", r.n},
                              {"samples", r.sample_count},
                              {"seed", cfg.seed},
                              {"mean", r.mean},
                              {"std_dev", r.std_dev},
                              {"skewness", r.skewness},
                              {"excess_kurtosis", r.excess_kurtosis},
                              {"ks_distance", r.ks_distance},
                              {"median_abs_standardized", r.median_abs_standardized}});
}

void run_decompose(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::uint64_t cell_seed = derive_seed(cfg.seed, cfg.n);
  const CellPlan plan{"decompose:n=" + std::to_string(cfg.n), cell_file(cfg.n), cfg.n,
                      cell_seed, cfg.samples, cfg.threads};
  // Rows: errors at k < K, leaves at k = K.
  const auto rows = sample_cell(ctx, plan, [&](std::uint64_t s) {
    const WalkPath path = simulate_walk(cfg.d, cfg.n, cell_seed, s);
    const auto dd = dyadic_decompose(path, cfg.kind, cfg.levels, cfg.solver);
    StreamRows out;
    for (int k = 0; k < cfg.levels; ++k) {
      for (std::size_t l = 0; l < dd.errors[k].size(); ++l) out.push_back({k, l, dd.errors[k][l]});
    }
    for (std::size_t l = 0; l < dd.leaves.size(); ++l) out.push_back({cfg.levels, l, dd.leaves[l]});
    return out;
  });

  const int K = cfg.levels;
  std::vector<double> mean(K, 0.0), second(K, 0.0);
  double leaf_mean = 0.0;
  const double count = static_cast<double>(rows.size());
  for (const auto& stream : rows) {
    std::vector<double> level(K + 1, 0.0);
    for (const auto& r : stream) level[r.k] += r.value;
    for (int k = 0; k < K; ++k) {
      mean[k] += level[k] / count;
      second[k] += level[k] * level[k] / count;
    }
    leaf_mean += level[K] / count;
  }
  std::ofstream out = ctx.create("decompose_summary.csv", "decompose-summary");
  out << "d,kind,n,levels,k,samples,mean_level_sum,second_moment_level_sum,second_moment_over_n\n";
  json levels = json::array();
  for (int k = 0; k < K; ++k) {
    out << cfg.d << ',' << rwrange::to_string(cfg.kind) << ',' << cfg.n << ',' << K << ',' << k
        << ',' << rows.size() << ',' << format_value(mean[k]) << ',' << format_value(second[k])
        << ',' << format_value(second[k] / static_cast<double>(cfg.n)) << '\n';
    levels.push_back({{"k", k}, {"mean_level_sum", mean[k]}, {"second_moment_level_sum", second[k]}});
  }
  out.close();
  ctx.write_json("decompose.json", {{"d", cfg.d},
                                    {"kind", std::string(rwrange::to_string(cfg.kind))},
                                    {"n", cfg.n},
                                    {"levels", K},
                                    {"samples", rows.size()},
                                    {"mean_leaf_sum", leaf_mean},
                                    {"per_level", levels}});
}

std::string factor_tag(double f) {
  std::string s = format_value(f);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

void run_capacity(Context& ctx) {
  const auto& cfg = ctx.cfg;
  struct WalkResult {
    double estimate, std_error, set_size, radius;
  };
  std::vector<std::vector<WalkResult>> results;
  for (double factor : cfg.radius_factors) {
    const std::string tag = factor_tag(factor);
    const CellPlan plan{"capacity:f=" + tag, "capacity_walks_f" + tag + ".csv", cfg.n,
                        cfg.seed, cfg.walks, 1};
    const auto rows = sample_cell(ctx, plan, [&](std::uint64_t w) {
      const WalkPath path = simulate_walk(cfg.d, cfg.n, cfg.seed, w);
      const PointIndex set = range_point_set(SegmentView(path));
      CapacityOptions opt;
      opt.escape_radius_factor = factor;
      opt.trials_per_point = cfg.trials;
      opt.source_points = cfg.sources;
      opt.seed = derive_seed(cfg.seed, w);
      opt.far_field = cfg.far_field;
      opt.threads = cfg.threads;
      const CapacityEstimate e = capacity_estimate(set, opt);
      return StreamRows{{0, 0, e.estimate},
                        {1, 0, e.std_error},
                        {2, 0, static_cast<double>(e.set_size)},
                        {3, 0, e.escape_radius}};
    });
    auto& per_walk = results.emplace_back();
    for (const auto& r : rows) per_walk.push_back({r.at(0).value, r.at(1).value, r.at(2).value, r.at(3).value});
  }

  const double nn = static_cast<double>(cfg.n);
  const double scale = cfg.n > 1 ? std::log(nn) / nn : 1.0;
  std::ofstream out = ctx.create("capacity.csv", "capacity");
  out << "d,set_size,radius_factor,trials,estimate,std_error\n";
  json factors = json::array();
  for (std::size_t i = 0; i < cfg.radius_factors.size(); ++i) {
    std::vector<double> scaled;
    for (const auto& w : results[i]) {
      out << cfg.d << ',' << format_value(w.set_size) << ',' << format_value(cfg.radius_factors[i])
          << ',' << cfg.trials << ',' << format_value(w.estimate) << ','
          << format_value(w.std_error) << '\n';
      scaled.push_back(w.estimate * scale);
    }
    const double mean = std::accumulate(scaled.begin(), scaled.end(), 0.0) / scaled.size();
    double ss = 0.0;
    for (double v : scaled) ss += (v - mean) * (v - mean);
    const double sem = scaled.size() > 1 ? std::sqrt(ss / (scaled.size() - 1) / scaled.size()) : 0.0;
    factors.push_back({{"radius_factor", cfg.radius_factors[i]},
                       {"mean_estimate_log_n_over_n", mean},
                       {"std_error_between_walks", sem}});
  }
  out.close();
  json summary{{"d", cfg.d}, {"n", cfg.n}, {"walks", cfg.walks}, {"trials", cfg.trials},
               {"sources", cfg.sources}, {"seed", cfg.seed}, {"far_field", cfg.far_field},
               {"per_factor", factors}};
  if (cfg.d == 4) summary["reference_pi2_over_8"] = std::numbers::pi * std::numbers::pi / 8.0;
  ctx.write_json("capacity_summary.json", summary);
}

void run_simulate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.dump_paths) fs::create_directories(ctx.dir / "paths");
  const auto rows = parallel_map(0, cfg.samples, cfg.threads, [&](std::size_t s) {
    const WalkPath path = simulate_walk(cfg.d, cfg.n, cfg.seed, s);
    if (cfg.dump_paths) {
      const std::string name = "paths/path_" + std::to_string(s) + ".bin";
      std::ofstream out(ctx.dir / name, std::ios::binary | std::ios::trunc);
      write_path_dump(out, path);
    }
    const std::size_t range = range_point_set(SegmentView(path)).size();
    return std::pair<std::int64_t, std::size_t>{path.point(cfg.n).squared_norm(), range};
  });
  if (cfg.dump_paths) {
    for (std::size_t s = 0; s < cfg.samples; ++s) ctx.add_file("paths/path_" + std::to_string(s) + ".bin");
  }
  std::ofstream out = ctx.create("walks.csv", "walk-summary");
  out << "stream,d,n,seed,end_squared_norm,range_size\n";
  for (std::size_t s = 0; s < rows.size(); ++s) {
    out << s << ',' << cfg.d << ',' << cfg.n << ',' << cfg.seed << ',' << rows[s].first << ','
        << rows[s].second << '\n';
  }
}

bool run_oracle_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  struct Outcome {
    bool cut_ok = true, distance_ok = true, resistance_checked = false, resistance_ok = true;
    double rel_error = 0.0;
  };
  std::ofstream out = ctx.create("oracle_check.csv", "oracle-check");
  out << "pair,d,instances,mismatches,max_rel_error\n";
  json pairs = json::array();
  std::size_t total_mismatches = 0;
  for (int d = kMinDim; d <= 7; ++d) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(d));
    const auto outcomes = parallel_map(0, cfg.instances, cfg.threads, [&](std::size_t s) {
      StreamRng pick(seed, s, 1);
      const std::size_t n = 1 + pick.uniform_below(static_cast<std::uint32_t>(cfg.max_n));
      const std::size_t a = pick.uniform_below(static_cast<std::uint32_t>(n));
      const WalkPath path = simulate_walk(d, n, seed, s);
      const SegmentView view(path, a, n);
      Outcome o;
      o.cut_ok = cut_point_count(view) == cut_point_count_naive(view);
      const RangeGraph g = RangeGraph::build(view);
      o.distance_ok = graph_distance(g) == graph_distance_dijkstra(view);
      if (g.vertex_count() <= 200) {
        o.resistance_checked = true;
        const double dense = effective_resistance_dense(g);
        const double cg = effective_resistance(g, cfg.solver);
        o.rel_error = dense > 0 ? std::abs(cg - dense) / dense : std::abs(cg);
        o.resistance_ok = o.rel_error <= 1e-8;
      }
      return o;
    });
    std::size_t cut_bad = 0, dist_bad = 0, res_bad = 0, res_count = 0;
    double worst = 0.0;
    for (const auto& o : outcomes) {
      cut_bad += !o.cut_ok;
      dist_bad += !o.distance_ok;
      if (o.resistance_checked) {
        ++res_count;
        res_bad += !o.resistance_ok;
        worst = std::max(worst, o.rel_error);
      }
    }
    auto emit = [&](const char* pair, std::size_t count, std::size_t bad, double err) {
      out << pair << ',' << d << ',' << count << ',' << bad << ',' << format_value(err) << '\n';
      pairs.push_back({{"pair", pair}, {"d", d}, {"instances", count}, {"mismatches", bad},
                       {"max_rel_error", err}});
      total_mismatches += bad;
    };
    emit("cut_sweep_vs_naive", cfg.instances, cut_bad, 0.0);
    emit("bfs_vs_dijkstra", cfg.instances, dist_bad, 0.0);
    emit("cg_vs_dense", res_count, res_bad, worst);
  }
  out.close();
  ctx.write_json("oracle_report.json", {{"max_n", cfg.max_n},
                                        {"instances_per_d", cfg.instances},
                                        {"seed", cfg.seed},
                                        {"total_mismatches", total_mismatches},
                                        {"pairs", pairs}});
  ctx.log << "oracle mismatches: " << total_mismatches << '\n';
  return total_mismatches == 0;
}

}  // namespace

RunResult run(const ExperimentConfig& config, std::ostream& log, const RunControl& control) {
  RunResult result;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    result.status = RunStatus::InvalidConfig;
    result.message = e.what();
    log << "error: " << e.what() << '\n';
    return result;
  }
  result.output_dir = config.output_dir.empty() ? fs::path(default_output_dir())
                                                : fs::path(config.output_dir);
  Context ctx(config, result.output_dir, log, control);
  try {
    ctx.open();
    bool clean = true;
    switch (config.command) {
      case Command::Simulate: run_simulate(ctx); break;
      case Command::Tails: run_tails(ctx); break;
      case Command::Variance: run_variance(ctx); break;
      case Command::Clt: run_clt(ctx); break;
      case Command::Decompose: run_decompose(ctx); break;
      case Command::Capacity: run_capacity(ctx); break;
      case Command::OracleCheck: clean = run_oracle_check(ctx); break;
    }
    ctx.finish();
    result.files = ctx.files;
    result.status = clean ? RunStatus::Complete : RunStatus::Mismatch;
  } catch (const Interrupted&) {
    result.status = RunStatus::Interrupted;
    result.files = ctx.files;
    result.message = "stopped after " + std::to_string(control.stop_after) + " streams";
    log << result.message << "; rerun to resume\n";
  } catch (const std::exception& e) {
    ctx.mark_failed(e.what());
    result.status = RunStatus::Failed;
    result.files = ctx.files;
    result.message = e.what();
    log << "error: " << e.what() << '\n';
  }
  return result;
}

}  // namespace rwrange::experiment
