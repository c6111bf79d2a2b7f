#include "entsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "entsim/measures.hpp"

namespace entsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must not throw.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

nlohmann::json number_or_null(double v) { return !std::isfinite(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

std::vector<double> steady_row_tail(const SteadyPoint& p) {
  return {p.concurrence, p.n_mode, p.residual, p.min_eigenvalue, p.trace_error, static_cast<double>(p.status)};
}

}  // namespace

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " values but the table has " +
                                std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("table has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> ResultTable::column(std::string_view name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void Axis::validate(std::string_view name) const {
  const std::string n(name);
  if (count < 2) throw std::invalid_argument(n + ".count must be >= 2");
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw std::invalid_argument(n + ": min must be < max");
  }
  if (min < 0.0) throw std::invalid_argument(n + ".min must be >= 0");
  if (spacing == Spacing::log && !(min > 0.0)) {
    throw std::invalid_argument(n + ": log spacing requires min > 0");
  }
}

std::vector<double> Axis::values() const {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    if (spacing == Spacing::linear) {
      v[i] = min + f * (max - min);
    } else {
      v[i] = std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
    }
  }
  v.front() = min;
  v.back() = max;
  return v;
}

SystemParams steady_defaults() {
  SystemParams p;
  p.epsilon = 1.0;
  p.gamma = 1e-5;
  p.kappa = 1.0;
  return p;
}

void GridSpec::validate() const {
  delta_axis.validate("delta_axis");
  g_axis.validate("g_axis");
  fixed.validate();
}

SteadyPoint evaluate_steady(const SystemParams& params) {
  SteadyPoint out;
  SteadyState ss{DensityMatrix::maximally_mixed(1)};
  try {
    ss = solve_steady_state(steady_liouvillian(params));
  } catch (const std::exception& e) {
    out.status = PointStatus::solver_failure;
    out.error = e.what();
    out.concurrence = out.n_mode = out.residual = out.min_eigenvalue = out.trace_error = kNaN;
    return out;
  }
  const SpaceLayout layout(params.fock_cutoff);
  out.residual = ss.residual;
  out.min_eigenvalue = ss.min_eigenvalue;
  out.trace_error = ss.rho.physicality().trace_error;
  out.n_mode = mean_photon_number(ss.rho.matrix(), layout);
  try {
    out.concurrence = concurrence(partial_trace_mode(ss.rho.matrix(), layout));
  } catch (const std::exception& e) {
    out.status = PointStatus::measure_failure;
    out.error = e.what();
    out.concurrence = kNaN;
  }
  return out;
}

ResultTable grid_sweep(const GridSpec& spec) {
  spec.validate();
  const auto deltas = spec.delta_axis.values();
  const auto gs = spec.g_axis.values();
  const std::size_t n = deltas.size() * gs.size();
  std::vector<SteadyPoint> points(n);
  parallel_for(n, spec.threads, [&](std::size_t k) {
    SystemParams p = spec.fixed;
    p.delta = deltas[k / gs.size()];
    p.g = gs[k % gs.size()];
    points[k] = evaluate_steady(p);
  });

  ResultTable table;
  table.columns = {"delta", "g", "concurrence", "n_mode", "residual", "min_eigenvalue", "trace_error", "status"};
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> row{deltas[k / gs.size()], gs[k % gs.size()]};
    const auto tail = steady_row_tail(points[k]);
    row.insert(row.end(), tail.begin(), tail.end());
    table.add_row(std::move(row));
    if (points[k].status != PointStatus::ok) failures.push_back({{"row", k}, {"error", points[k].error}});
  }
  table.metadata = {{"experiment", "grid"},
                    {"delta_axis", to_json(spec.delta_axis)},
                    {"g_axis", to_json(spec.g_axis)},
                    {"fixed", to_json(spec.fixed)},
                    {"failures", failures},
                    {"version", kVersion}};
  return table;
}

namespace {

ResultTable line_table(const std::vector<SystemParams>& params, int threads) {
  std::vector<SteadyPoint> points(params.size());
  parallel_for(params.size(), threads, [&](std::size_t k) { points[k] = evaluate_steady(params[k]); });
  ResultTable table;
  table.columns = {"gamma", "delta", "concurrence", "n_mode", "residual", "min_eigenvalue", "trace_error", "status"};
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::vector<double> row{params[k].gamma, params[k].delta};
    const auto tail = steady_row_tail(points[k]);
    row.insert(row.end(), tail.begin(), tail.end());
    table.add_row(std::move(row));
    if (points[k].status != PointStatus::ok) failures.push_back({{"row", k}, {"error", points[k].error}});
  }
  table.metadata["failures"] = failures;
  return table;
}

}  // namespace

ResultTable line_sweep_delta(double g, const Axis& delta_axis, const std::vector<double>& gammas,
                             const SystemParams& fixed, int threads) {
  delta_axis.validate("delta_axis");
  if (gammas.empty()) throw std::invalid_argument("gammas must not be empty");
  std::vector<SystemParams> params;
  for (double gamma : gammas) {
    for (double delta : delta_axis.values()) {
      SystemParams p = fixed;
      p.g = g;
      p.gamma = gamma;
      p.delta = delta;
      p.validate();
      params.push_back(p);
    }
  }
  ResultTable table = line_table(params, threads);
  table.metadata.update({{"experiment", "line"},
                         {"variable", "delta"},
                         {"g", g},
                         {"delta_axis", to_json(delta_axis)},
                         {"gammas", gammas},
                         {"fixed", to_json(fixed)},
                         {"version", kVersion}});
  return table;
}

ResultTable line_sweep_gamma(double g, double delta, const Axis& gamma_axis,
                             const SystemParams& fixed, int threads) {
  gamma_axis.validate("gamma_axis");
  std::vector<SystemParams> params;
  for (double gamma : gamma_axis.values()) {
    SystemParams p = fixed;
    p.g = g;
    p.delta = delta;
    p.gamma = gamma;
    p.validate();
    params.push_back(p);
  }
  ResultTable table = line_table(params, threads);
  table.metadata.update({{"experiment", "line"},
                         {"variable", "gamma"},
                         {"g", g},
                         {"delta", delta},
                         {"gamma_axis", to_json(gamma_axis)},
                         {"fixed", to_json(fixed)},
                         {"version", kVersion}});
  return table;
}

std::vector<RegimePoint> default_regime_points() {
  return {{"A", 10.0, 1e-2}, {"B", 1.0, 1.0}, {"C", 1e-4, 1.0}, {"D", 0.1, 1.0}};
}

void TimeSeriesSpec::validate() const {
  if (sets.empty()) throw std::invalid_argument("time series needs at least one parameter set");
  if (!labels.empty() && labels.size() != sets.size()) {
    throw std::invalid_argument("labels must match the number of parameter sets");
  }
  for (const auto& p : sets) p.validate();
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be >= 0 (0 = until stable)");
  }
  if (samples_per_octave < 1) throw std::invalid_argument("samples_per_octave must be >= 1");
  if (!(t_first > 0.0)) throw std::invalid_argument("t_first must be > 0");
  if (t_final > 0.0 && !(t_final > t_first)) throw std::invalid_argument("t_final must exceed t_first");
  if (!(drift_tol > 0.0)) throw std::invalid_argument("drift_tol must be > 0");
  if (!(t_cap > t_first)) throw std::invalid_argument("t_cap must exceed t_first");
}

ResultTable time_series(const TimeSeriesSpec& spec) {
  spec.validate();
  const std::size_t nsets = spec.sets.size();
  std::vector<std::string> labels = spec.labels;
  if (labels.empty()) {
    for (std::size_t k = 0; k < nsets; ++k) labels.push_back(std::to_string(k));
  }
  const auto per_octave = static_cast<std::uint64_t>(spec.samples_per_octave);
  const double h0 = spec.t_first / static_cast<double>(per_octave);

  struct Run {
    SpaceLayout layout{1};
    std::unique_ptr<GridPropagator> prop;
    Superoperator l;
    Operator rho;
    double c = 0.0;
    Physicality worst_sample{0.0, 0.0, std::numeric_limits<double>::infinity()};
    std::string error;
  };
  std::vector<Run> runs(nsets);
  parallel_for(nsets, 0, [&](std::size_t k) {
    Run& run = runs[k];
    run.layout = SpaceLayout(spec.sets[k].fock_cutoff);
    run.rho = DensityMatrix::pure(named_state(NamedState::G0, run.layout)).matrix();
    try {
      run.l = steady_liouvillian(spec.sets[k]);
      run.prop = std::make_unique<GridPropagator>(run.l, h0);
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  });

  // Advances every live set to time t (by `steps` grid steps, or by a one-off
  // propagator when t is off the grid) and checks the sampled state.
  auto advance = [&](double t, std::uint64_t steps, double off_grid) {
    parallel_for(nsets, 0, [&](std::size_t k) {
      Run& run = runs[k];
      if (!run.error.empty()) return;
      try {
        Operator next = off_grid > 0.0 ? GridPropagator(run.l, off_grid).apply(run.rho, 1)
                                       : run.prop->apply(run.rho, steps);
        next = 0.5 * (next + next.adjoint()).eval();
        const Physicality ph = physicality(next);
        run.worst_sample = worst(run.worst_sample, ph);
        if (!is_physical(ph, kSampleTolerances)) {
          throw IntegrationError("sampled state is unphysical (" + describe(ph) + ")", t);
        }
        run.c = concurrence(partial_trace_mode(next, run.layout));
        run.rho = std::move(next);
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    });
  };

  ResultTable table;
  table.columns = {"t"};
  for (const auto& l : labels) table.columns.push_back("C_" + l);
  auto record = [&](double t) {
    std::vector<double> row{t};
    for (const auto& run : runs) row.push_back(run.error.empty() ? run.c : kNaN);
    table.add_row(std::move(row));
  };

  record(0.0);
  const double t_end = spec.t_final > 0.0 ? spec.t_final : spec.t_cap;
  double stabilized_at = kNaN;
  double t_last = 0.0;
  std::uint64_t m = 0;
  // Octave-boundary states, for the drift test over the last three octaves.
  std::vector<std::vector<std::pair<Operator, double>>> marks;
  for (std::uint64_t stride = 1, next = per_octave;; ) {
    const double t = static_cast<double>(next) * h0;
    if (t > t_end * (1.0 + 1e-12)) break;
    advance(t, next - m, 0.0);
    m = next;
    t_last = t;
    record(t);

    if (m == per_octave * stride) {
      std::vector<std::pair<Operator, double>> mark;
      for (const auto& run : runs) mark.emplace_back(run.rho, run.c);
      marks.push_back(std::move(mark));
      if (spec.t_final == 0.0 && marks.size() > 3) {
        const auto& then = marks[marks.size() - 4];
        bool stable = true;
        for (std::size_t s = 0; s < nsets; ++s) {
          if (!runs[s].error.empty()) continue;
          if (std::abs(runs[s].c - then[s].second) >= spec.drift_tol ||
              trace_distance(runs[s].rho, then[s].first) >= spec.drift_tol) {
            stable = false;
          }
        }
        if (stable) {
          stabilized_at = t;
          break;
        }
      }
    }
    next += stride;
    if (next == 2 * per_octave * stride) stride *= 2;
  }
  if (spec.t_final > 0.0 && spec.t_final > t_last * (1.0 + 1e-12)) {
    advance(spec.t_final, 0, spec.t_final - t_last);
    t_last = spec.t_final;
    record(spec.t_final);
  }

  nlohmann::json sets = nlohmann::json::array();
  for (std::size_t k = 0; k < nsets; ++k) {
    const SteadyPoint ss = evaluate_steady(spec.sets[k]);
    nlohmann::json entry = {{"label", labels[k]},
                            {"params", to_json(spec.sets[k])},
                            {"final_concurrence", number_or_null(runs[k].error.empty() ? runs[k].c : kNaN)},
                            {"steady_concurrence", ss.concurrence},
                            {"squarings", runs[k].prop ? runs[k].prop->powers() - 1 : 0},
                            {"worst_sample", to_json(runs[k].worst_sample)}};
    if (!runs[k].error.empty()) entry["error"] = runs[k].error;
    sets.push_back(entry);
  }
  table.metadata = {{"experiment", "timeseries"},
                    {"t_final", spec.t_final},
                    {"t_first", spec.t_first},
                    {"samples_per_octave", spec.samples_per_octave},
                    {"drift_tol", spec.drift_tol},
                    {"t_cap", spec.t_cap},
                    {"t_last", t_last},
                    {"stabilized_at", number_or_null(stabilized_at)},
                    {"sets", sets},
                    {"version", kVersion}};
  return table;
}

StirapSpec StirapSpec::fixed_coupling() {
  StirapSpec s;
  s.delta_schedule = Schedule::tanh_down(2e5, 4e-3, 5e2);
  s.g_schedule = Schedule::constant(2.5e2);
  s.gamma = 1e-3;
  s.t_final = 2e-2;
  return s;
}

StirapSpec StirapSpec::dual_control() {
  StirapSpec s;
  s.delta_schedule = Schedule::tanh_down(2e4, 3e-3, 1e3);
  s.g_schedule = Schedule::tanh_up(2e4, 3e-3, 1e3);
  s.gamma = 1e-3;
  s.t_final = 1e-2;
  return s;
}

double StirapSpec::default_max_step() const {
  const double fastest = std::max(std::abs(delta_schedule.max_value()), std::abs(g_schedule.max_value()));
  return fastest > 0.0 ? 1.0 / (20.0 * fastest) : std::numeric_limits<double>::infinity();
}

void StirapSpec::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (!(t_final > t_start)) throw std::invalid_argument("t_final must exceed t_start");
  for (const Schedule* s : {&delta_schedule, &g_schedule}) {
    if (s->kind() != Schedule::Kind::constant && !(t_final > s->t0())) {
      throw std::invalid_argument("t_final must exceed the t0 of every ramped schedule");
    }
    if (s->max_value() < 0.0) throw std::invalid_argument("schedule values must be >= 0");
  }
  if (samples < 2) throw std::invalid_argument("samples must be >= 2");
  SpaceLayout{fock_cutoff};
  integrator.validate();
}

ResultTable stirap_run(const StirapSpec& spec) {
  spec.validate();
  const SpaceLayout layout(spec.fock_cutoff);
  std::vector<HamiltonianTerm> terms{
      {detuning_operator(layout, spec.sign), spec.delta_schedule},
      {coupling_operator(layout), spec.g_schedule},
  };
  if (spec.pump && spec.epsilon > 0.0) {
    terms.push_back({pump_operator(layout), Schedule::constant(spec.epsilon)});
  }
  SystemParams p;
  p.gamma = spec.gamma;
  p.kappa = spec.kappa;
  p.fock_cutoff = spec.fock_cutoff;
  const Generator gen = Generator::lindblad(std::move(terms), dissipators(p, layout));

  IntegratorConfig cfg = spec.integrator;
  if (!std::isfinite(cfg.max_step)) cfg.max_step = spec.default_max_step();

  std::vector<double> times(static_cast<std::size_t>(spec.samples));
  for (int i = 0; i < spec.samples; ++i) {
    times[i] = spec.t_start + (spec.t_final - spec.t_start) * i / (spec.samples - 1);
  }
  times.back() = spec.t_final;

  const StateVector e = named_state(NamedState::E, layout);
  const StateVector pp = named_state(NamedState::PsiPlus, layout);
  const StateVector pm = named_state(NamedState::PsiMinus, layout);
  const StateVector g0 = named_state(NamedState::G0, layout);
  const std::vector<Observable> obs{
      {"P_E", [&](const Operator& r) { return fidelity_pure(r, e); }},
      {"P_PsiPlus", [&](const Operator& r) { return fidelity_pure(r, pp); }},
      {"P_PsiMinus", [&](const Operator& r) { return fidelity_pure(r, pm); }},
      {"P_G0", [&](const Operator& r) { return fidelity_pure(r, g0); }},
      {"trace", [](const Operator& r) { return r.trace().real(); }},
      {"min_eigenvalue", [](const Operator& r) { return physicality(r).min_eigenvalue; }},
  };
  const auto rho0 = DensityMatrix::pure(named_state(spec.initial, layout));
  const Trajectory traj = evolve(rho0, gen, {spec.t_start, spec.t_final}, times, cfg, obs);

  ResultTable table;
  table.columns = {"t", "P_E", "P_PsiPlus", "P_PsiMinus", "P_G0", "delta", "g", "trace", "min_eigenvalue"};
  double max_plus = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    table.add_row({t, traj.observables[0][i], traj.observables[1][i], traj.observables[2][i],
                   traj.observables[3][i], spec.delta_schedule(t), spec.g_schedule(t),
                   traj.observables[4][i], traj.observables[5][i]});
    max_plus = std::max(max_plus, traj.observables[1][i]);
  }
  nlohmann::json spec_json = to_json(spec);
  spec_json["integrator"] = to_json(cfg);
  nlohmann::json final_row = nlohmann::json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) final_row[table.columns[c]] = table.rows.back()[c];
  table.metadata = {{"experiment", "stirap"},
                    {"spec", spec_json},
                    {"final", final_row},
                    {"max_P_PsiPlus", max_plus},
                    {"steps", traj.stats.accepted},
                    {"rejected", traj.stats.rejected},
                    {"worst_sample", to_json(traj.stats.worst_sample)},
                    {"version", kVersion}};
  return table;
}

nlohmann::json to_json(const SystemParams& p) {
  return {{"g", p.g},
          {"delta", p.delta},
          {"gamma", p.gamma},
          {"kappa", p.kappa},
          {"epsilon", p.epsilon},
          {"fock_cutoff", p.fock_cutoff},
          {"omega_m", p.omega_m},
          {"detuning_sign", to_string(p.sign)}};
}

nlohmann::json to_json(const Physicality& p) {
  return {{"hermiticity_error", p.hermiticity_error},
          {"trace_error", p.trace_error},
          {"min_eigenvalue", number_or_null(p.min_eigenvalue)}};
}

nlohmann::json to_json(const Axis& a) {
  return {{"min", a.min}, {"max", a.max}, {"count", a.count},
          {"spacing", a.spacing == Spacing::log ? "log" : "linear"}};
}

nlohmann::json to_json(const Schedule& s) {
  if (s.kind() == Schedule::Kind::constant) return {{"kind", "constant"}, {"value", s.max_value()}};
  return {{"kind", to_string(s.kind())}, {"max", s.max_value()}, {"t0", s.t0()}, {"lambda", s.lambda()}};
}

nlohmann::json to_json(const IntegratorConfig& c) {
  nlohmann::json j = {{"rtol", c.rtol}, {"atol", c.atol}, {"initial_step", c.initial_step},
                      {"max_steps", c.max_steps}};
  j["max_step"] = std::isfinite(c.max_step) ? nlohmann::json(c.max_step) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const StirapSpec& s) {
  return {{"delta_schedule", to_json(s.delta_schedule)},
          {"g_schedule", to_json(s.g_schedule)},
          {"gamma", s.gamma},
          {"kappa", s.kappa},
          {"t_start", s.t_start},
          {"t_final", s.t_final},
          {"initial", to_string(s.initial)},
          {"samples", s.samples},
          {"fock_cutoff", s.fock_cutoff},
          {"pump", s.pump},
          {"epsilon", s.epsilon},
          {"detuning_sign", to_string(s.sign)},
          {"integrator", to_json(s.integrator)}};
}

}  // namespace entsim
