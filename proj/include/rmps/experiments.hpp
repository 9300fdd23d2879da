#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rmps/ensemble.hpp"

// Named, configured experiment runs that write tables plus a manifest.
namespace rmps {

// Bad experiment name, unknown key, wrong type or violated precondition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Output directory or file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TableFormat { kCsv, kJsonLines };

struct RunConfig {
  std::string experiment;
  std::string source = "rmps";  // "rmps" or "cue"
  int n_sites = 4;
  int phys_dim = 2;
  int chi = 2;
  bool homogeneous = false;
  BoundaryCondition boundary = BoundaryCondition::kOpen;
  int subsystem_len = 1;
  int site = 0;
  int d_a = 4;
  int r = 500;
  Seed seed{1};
  TableFormat format = TableFormat::kCsv;
  std::string out = "out";
  DistanceNorm norm = DistanceNorm::kTrace;
  SubsystemReference reference = SubsystemReference::kEmpirical;
  int bins = 100;
  std::string observable = "z";  // one of x, y, z, i
  double chi_coefficient = 1.0;
  double chi_exponent = 1.0;
  std::vector<int> n_values;
  std::vector<int> chi_values;
  std::vector<int> bath_values;
  std::vector<int> moments;
  std::vector<int> dims;
  std::vector<int> copies;

  // Every key, including defaults, in a stable order.
  nlohmann::json to_json() const;
};

// Defaults of the experiment, then `file`, then `overrides` (later wins).
// Throws ConfigError on an unknown experiment, unknown key or bad type.
RunConfig make_config(const nlohmann::json& file, const nlohmann::json& overrides = nlohmann::json::object());
// Parses "key=value"; value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& overrides, const std::string& assignment);
// Reads a JSON config file (throws IoError / ConfigError).
nlohmann::json read_config_file(const std::string& path);

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Shortest decimal that reads back to the same double.
std::string format_double(double v);
std::string to_csv(const Table& t);
std::string to_json_lines(const Table& t);

struct Diagnostics {
  bool ok = true;
  // Every error is a dense-cap violation (exit code 3 rather than 2).
  bool resource_only = false;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
  double estimated_seconds = 0.0;
  double estimated_bytes = 0.0;
  // 2 × estimate + 5 s; the default parameters of every experiment finish
  // inside it on a laptop-class core.
  double time_bound_seconds() const { return 2.0 * estimated_seconds + 5.0; }
};

// Precondition check and cost estimate; never runs an ensemble and never
// throws for bad parameters.
Diagnostics validate(const RunConfig& config);

struct OutputFile {
  std::string path;
  std::string sha256;
  std::size_t rows = 0;
};

struct RunManifest {
  nlohmann::json config;
  std::string version;
  double wall_time = 0.0;
  std::vector<OutputFile> outputs;
  bool completed = false;
  std::string error;

  nlohmann::json to_json() const;
};

// Runs the experiment, writes its tables into config.out and always writes
// manifest.json there, also when the run fails (the error is then rethrown).
RunManifest run(const RunConfig& config, int workers = 1);

// The tables of a run, without touching the file system.
std::vector<Table> compute_tables(const RunConfig& config, int workers = 1);

struct ExperimentInfo {
  std::string id;
  std::string analog;
  std::string description;
};

std::vector<ExperimentInfo> list_experiments();

std::string sha256_hex(const std::string& bytes);
std::string version_string();

}  // namespace rmps
