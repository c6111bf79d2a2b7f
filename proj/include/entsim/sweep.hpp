#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entsim/dynamics.hpp"
#include "entsim/hilbert.hpp"
#include "entsim/model.hpp"

namespace entsim {

inline constexpr std::string_view kVersion = "0.1.0";

/// Tabular experiment output with a JSON metadata record.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json metadata = nlohmann::json::object();

  void add_row(std::vector<double> row);
  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
  bool operator==(const ResultTable&) const = default;
};

enum class Spacing { linear, log };

struct Axis {
  double min = 1e-3;
  double max = 1e2;
  int count = 60;
  Spacing spacing = Spacing::log;

  /// Throws std::invalid_argument mentioning `name`.
  void validate(std::string_view name) const;
  std::vector<double> values() const;
  bool operator==(const Axis&) const = default;
};

/// Row status codes for per-point failures.
enum class PointStatus : int { ok = 0, solver_failure = 1, measure_failure = 2, integrator_failure = 3 };

/// Fixed parameters for the stationary experiments: pump on at epsilon = kappa,
/// gamma = 1e-5 kappa.
SystemParams steady_defaults();

struct GridSpec {
  Axis delta_axis;
  Axis g_axis;
  SystemParams fixed = steady_defaults();
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct SteadyPoint {
  double concurrence = 0.0;
  double n_mode = 0.0;
  double residual = 0.0;
  double min_eigenvalue = 0.0;
  double trace_error = 0.0;
  PointStatus status = PointStatus::ok;
  std::string error;
};

/// Steady state of the driven model and its two-qubit concurrence. Failures are
/// reported in the status rather than thrown.
SteadyPoint evaluate_steady(const SystemParams& params);

/// Columns: delta, g, concurrence, n_mode, residual, min_eigenvalue, trace_error,
/// status. Delta is the slow (outer) index. Points run concurrently; row order
/// is fixed.
ResultTable grid_sweep(const GridSpec& spec);

/// Concurrence against delta for each gamma in `gammas`, at fixed g.
/// Columns: gamma, delta, then as in grid_sweep.
ResultTable line_sweep_delta(double g, const Axis& delta_axis, const std::vector<double>& gammas,
                             const SystemParams& fixed = steady_defaults(), int threads = 0);

/// Concurrence against gamma at fixed (g, delta). Same columns as line_sweep_delta.
ResultTable line_sweep_gamma(double g, double delta, const Axis& gamma_axis,
                             const SystemParams& fixed = steady_defaults(), int threads = 0);

/// Named representative points of the four stationary regimes.
struct RegimePoint {
  std::string label;
  double delta = 0.0;
  double g = 0.0;
};
std::vector<RegimePoint> default_regime_points();

struct TimeSeriesSpec {
  std::vector<SystemParams> sets;
  std::vector<std::string> labels;
  /// > 0: sample up to t_final. 0: continue until concurrence and the state
  /// (trace distance) move less than `drift_tol` over the last three octaves in
  /// every set, capped at `t_cap`.
  double t_final = 0.0;
  /// Samples are t_first * (1 + i / samples_per_octave) * 2^j.
  int samples_per_octave = 4;
  double t_first = 1e-2;
  double drift_tol = 1e-4;
  double t_cap = 1e7;

  void validate() const;
};

/// Columns: t, then C_<label> per set. Starts from |G0><G0| (concurrence 0) and
/// propagates exactly with GridPropagator. A failing set turns NaN from the
/// failure on, with its message in the metadata. Metadata also records the
/// stabilization time and the final and steady-state concurrence per set.
ResultTable time_series(const TimeSeriesSpec& spec);

struct StirapSpec {
  Schedule delta_schedule;
  Schedule g_schedule;
  double gamma = 1e-3;
  double kappa = 1.0;
  double t_start = 0.0;
  double t_final = 0.0;
  NamedState initial = NamedState::E;
  int samples = 401;
  int fock_cutoff = 8;
  bool pump = false;
  double epsilon = 1.0;
  DetuningSign sign = DetuningSign::printed;
  IntegratorConfig integrator;  // max_step defaults from the schedules

  /// Constant g = 250, delta ramped down from 2e5 (t0 = 4e-3, lambda = 500).
  static StirapSpec fixed_coupling();
  /// g ramped up and delta ramped down, both to 2e4 (t0 = 3e-3, lambda = 1e3).
  static StirapSpec dual_control();

  /// (20 max(delta_max, g_max))^-1
  double default_max_step() const;
  void validate() const;
};

/// Columns: t, P_E, P_PsiPlus, P_PsiMinus, P_G0, delta, g, trace, min_eigenvalue.
/// Metadata "final" holds the last row and the maximum P_PsiPlus.
ResultTable stirap_run(const StirapSpec& spec);

// JSON forms used in metadata and configs.
nlohmann::json to_json(const SystemParams& p);
nlohmann::json to_json(const Axis& a);
nlohmann::json to_json(const Physicality& p);
nlohmann::json to_json(const Schedule& s);
nlohmann::json to_json(const IntegratorConfig& c);
nlohmann::json to_json(const StirapSpec& s);

}  // namespace entsim
