#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entsim/dynamics.hpp"
#include "entsim/model.hpp"
#include "entsim/sweep.hpp"

namespace entsim {

/// Invalid or malformed run configuration. The message names the field (or
/// line and column for syntax errors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { steady, evolve, grid, line, timeseries, stirap, converge };

Experiment parse_experiment(std::string_view s);
std::string_view to_string(Experiment e);

/// One resolved experiment invocation. Fields that an experiment does not use
/// keep their defaults and are not serialized.
struct RunConfig {
  Experiment experiment = Experiment::steady;
  SystemParams params = steady_defaults();
  std::string output;  // CSV path; the sidecar is <stem>.meta.json
  IntegratorConfig integrator;
  int threads = 0;

  // grid, line
  Axis delta_axis;
  Axis g_axis;
  std::string variable = "delta";  // line: delta or gamma
  std::vector<double> gammas{1e-5};
  Axis gamma_axis{1e-5, 1e-1, 60, Spacing::log};

  // evolve, stirap
  NamedState initial = NamedState::G0;
  double t_final = 0.0;
  int samples = 101;

  // timeseries
  std::vector<std::string> labels;
  std::vector<SystemParams> sets;
  int samples_per_octave = 4;
  double t_first = 1e-2;
  double drift_tol = 1e-4;
  double t_cap = 1e7;

  // stirap
  std::string preset;  // "", fixed_coupling or dual_control
  Schedule delta_schedule;
  Schedule g_schedule;
  double t_start = 0.0;
  bool pump = false;

  // converge
  std::string observable = "concurrence";  // or n_mode
  int start_cutoff = 2;
  double tol = 1e-4;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates JSON text; unknown keys and keys that do not apply to
/// the chosen experiment are rejected.
RunConfig parse_config(std::string_view text);
RunConfig parse_config_json(const nlohmann::json& j);
nlohmann::json serialize(const RunConfig& c);

/// Runs the experiment and returns its table (no files written).
ResultTable execute(const RunConfig& c);

/// Comma-separated, header row, 17 significant digits.
void write_csv(const ResultTable& t, std::ostream& out);
/// Writes `csv_path` and its .meta.json sidecar.
void write_outputs(const ResultTable& t, const RunConfig& c, const std::string& csv_path);
std::string sidecar_path(const std::string& csv_path);

/// Executes `c`, writes outputs, reports to `log`. Returns 0 on success, 1 on a
/// failure, 2 when the run finished but some points or sets failed.
int run(const RunConfig& c, std::ostream& log);

}  // namespace entsim
