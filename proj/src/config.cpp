#include "entsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "entsim/measures.hpp"

namespace entsim {

using nlohmann::json;

namespace {

constexpr Experiment kExperiments[] = {Experiment::steady, Experiment::evolve, Experiment::grid,
                                       Experiment::line,   Experiment::timeseries, Experiment::stirap,
                                       Experiment::converge};

std::string type_name(const json& v) { return v.type_name(); }

// Typed access to one JSON object; remembers which keys were read so the rest
// can be rejected.
class Fields {
 public:
  Fields(const json& j, std::string context) : j_(j), ctx_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object, got " + type_name(j_));
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* raw(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool number(const char* key, double& out) {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_number()) throw ConfigError(field(key) + "expected a number, got " + type_name(*v));
    out = v->get<double>();
    if (!std::isfinite(out)) throw ConfigError(field(key) + "must be finite");
    return true;
  }

  bool integer(const char* key, int& out) {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_number_integer()) throw ConfigError(field(key) + "expected an integer, got " + v->dump());
    out = v->get<int>();
    return true;
  }

  bool integer(const char* key, long& out) {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_number_integer()) throw ConfigError(field(key) + "expected an integer, got " + v->dump());
    out = v->get<long>();
    return true;
  }

  bool boolean(const char* key, bool& out) {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_boolean()) throw ConfigError(field(key) + "expected true or false, got " + v->dump());
    out = v->get<bool>();
    return true;
  }

  bool string(const char* key, std::string& out) {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_string()) throw ConfigError(field(key) + "expected a string, got " + type_name(*v));
    out = v->get<std::string>();
    return true;
  }

  // Parses a string field through `parse`, rewrapping its error with the field name.
  template <class T, class Parse>
  bool choice(const char* key, T& out, Parse parse) {
    std::string s;
    if (!string(key, s)) return false;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key) + e.what());
    }
    return true;
  }

  void require(const char* key) const {
    if (!has(key)) throw ConfigError(where() + "missing required field '" + key + "'");
  }

  // Rejects keys that were never read.
  void finish(const std::string& purpose) const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) {
        throw ConfigError(where() + "unknown key '" + key + "'" + (purpose.empty() ? "" : " for " + purpose));
      }
    }
  }

  std::string field(const std::string& key) const { return ctx_ + key + ": "; }
  std::string where() const { return ctx_.empty() ? "" : ctx_.substr(0, ctx_.size() - 1) + ": "; }
  const std::string& prefix() const { return ctx_; }

 private:
  const json& j_;
  std::string ctx_;
  std::set<std::string> used_;
};

void read_params(Fields& f, SystemParams& p) {
  f.number("g", p.g);
  f.number("delta", p.delta);
  f.number("gamma", p.gamma);
  f.number("kappa", p.kappa);
  f.number("epsilon", p.epsilon);
  f.integer("fock_cutoff", p.fock_cutoff);
  f.number("omega_m", p.omega_m);
  f.choice("detuning_sign", p.sign, parse_detuning_sign);
}

// SystemParams::validate names the field; prefix the location.
void check_params(const SystemParams& p, const std::string& prefix) {
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix + e.what());
  }
}

void write_params(json& j, const SystemParams& p) {
  j["g"] = p.g;
  j["delta"] = p.delta;
  j["gamma"] = p.gamma;
  j["kappa"] = p.kappa;
  j["epsilon"] = p.epsilon;
  j["fock_cutoff"] = p.fock_cutoff;
  j["omega_m"] = p.omega_m;
  j["detuning_sign"] = to_string(p.sign);
}

Spacing parse_spacing(std::string_view s) {
  if (s == "log") return Spacing::log;
  if (s == "linear") return Spacing::linear;
  throw std::invalid_argument("unknown spacing '" + std::string(s) + "' (expected log or linear)");
}

void read_axis(Fields& parent, const char* key, Axis& axis) {
  const json* v = parent.raw(key);
  if (!v) return;
  Fields f(*v, parent.prefix() + key + ".");
  f.number("min", axis.min);
  f.number("max", axis.max);
  f.integer("count", axis.count);
  f.choice("spacing", axis.spacing, parse_spacing);
  f.finish("an axis");
  try {
    axis.validate(parent.prefix() + key);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void read_schedule(Fields& parent, const char* key, Schedule& s) {
  const json* v = parent.raw(key);
  if (!v) return;
  Fields f(*v, parent.prefix() + key + ".");
  f.require("kind");
  Schedule::Kind kind{};
  f.choice("kind", kind, parse_schedule_kind);
  if (kind == Schedule::Kind::constant) {
    f.require("value");
    double value = 0.0;
    f.number("value", value);
    if (value < 0.0) throw ConfigError(f.field("value") + "must be >= 0");
    s = Schedule::constant(value);
  } else {
    for (const char* k : {"max", "t0", "lambda"}) f.require(k);
    double max = 0.0, t0 = 0.0, lambda = 0.0;
    f.number("max", max);
    f.number("t0", t0);
    f.number("lambda", lambda);
    if (max < 0.0) throw ConfigError(f.field("max") + "must be >= 0");
    if (!(lambda > 0.0)) throw ConfigError(f.field("lambda") + "must be > 0");
    s = kind == Schedule::Kind::tanh_down ? Schedule::tanh_down(max, t0, lambda)
                                          : Schedule::tanh_up(max, t0, lambda);
  }
  f.finish("a schedule");
}

void read_integrator(Fields& parent, IntegratorConfig& cfg) {
  const json* v = parent.raw("integrator");
  if (!v) return;
  Fields f(*v, "integrator.");
  f.number("rtol", cfg.rtol);
  f.number("atol", cfg.atol);
  if (const json* ms = f.raw("max_step"); ms && !ms->is_null()) {
    if (!ms->is_number()) throw ConfigError(f.field("max_step") + "expected a number or null");
    cfg.max_step = ms->get<double>();
  }
  f.number("initial_step", cfg.initial_step);
  f.integer("max_steps", cfg.max_steps);
  f.finish("the integrator");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("integrator.") + e.what());
  }
}

void require_positive(const Fields& f, const char* key, double v) {
  if (!(v > 0.0)) throw ConfigError(f.field(key) + "must be > 0");
}

}  // namespace

Experiment parse_experiment(std::string_view s) {
  for (Experiment e : kExperiments) {
    if (to_string(e) == s) return e;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(s) +
                              "' (expected steady, evolve, grid, line, timeseries, stirap or converge)");
}

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::steady: return "steady";
    case Experiment::evolve: return "evolve";
    case Experiment::grid: return "grid";
    case Experiment::line: return "line";
    case Experiment::timeseries: return "timeseries";
    case Experiment::stirap: return "stirap";
    case Experiment::converge: return "converge";
  }
  return "?";
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config_json(j);
}

RunConfig parse_config_json(const json& j) {
  Fields f(j, "");
  RunConfig c;
  f.require("experiment");
  f.choice("experiment", c.experiment, parse_experiment);
  const std::string purpose = "experiment '" + std::string(to_string(c.experiment)) + "'";

  f.string("output", c.output);
  read_integrator(f, c.integrator);

  // Transfer runs use a larger qubit decay unless told otherwise.
  if (c.experiment == Experiment::stirap) c.params.gamma = 1e-3;
  read_params(f, c.params);

  switch (c.experiment) {
    case Experiment::steady:
    case Experiment::converge:
      f.require("g");
      f.require("delta");
      if (c.experiment == Experiment::converge) {
        f.choice("observable", c.observable, [](const std::string& s) {
          if (s != "concurrence" && s != "n_mode") {
            throw std::invalid_argument("unknown observable '" + s + "' (expected concurrence or n_mode)");
          }
          return s;
        });
        f.integer("start_cutoff", c.start_cutoff);
        f.number("tol", c.tol);
        if (c.start_cutoff < 1 || c.start_cutoff >= SpaceLayout::kMaxCutoff) {
          throw ConfigError("start_cutoff: must be in [1, " + std::to_string(SpaceLayout::kMaxCutoff) + ")");
        }
        require_positive(f, "tol", c.tol);
      }
      break;

    case Experiment::evolve:
      f.require("g");
      f.require("delta");
      f.require("t_final");
      f.choice("initial", c.initial, parse_named_state);
      f.number("t_final", c.t_final);
      f.integer("samples", c.samples);
      require_positive(f, "t_final", c.t_final);
      if (c.samples < 2) throw ConfigError("samples: must be >= 2");
      break;

    case Experiment::grid:
      read_axis(f, "delta_axis", c.delta_axis);
      read_axis(f, "g_axis", c.g_axis);
      f.integer("threads", c.threads);
      break;

    case Experiment::line:
      f.require("g");
      f.choice("variable", c.variable, [](const std::string& s) {
        if (s != "delta" && s != "gamma") {
          throw std::invalid_argument("unknown variable '" + s + "' (expected delta or gamma)");
        }
        return s;
      });
      if (c.variable == "delta") {
        read_axis(f, "delta_axis", c.delta_axis);
        if (const json* v = f.raw("gammas")) {
          if (!v->is_array() || v->empty()) throw ConfigError("gammas: expected a non-empty array of numbers");
          c.gammas.clear();
          for (const auto& x : *v) {
            if (!x.is_number() || !(x.get<double>() >= 0.0)) {
              throw ConfigError("gammas: entries must be numbers >= 0");
            }
            c.gammas.push_back(x.get<double>());
          }
        }
      } else {
        f.require("delta");
        read_axis(f, "gamma_axis", c.gamma_axis);
      }
      f.integer("threads", c.threads);
      break;

    case Experiment::timeseries: {
      f.number("t_final", c.t_final);
      f.integer("samples_per_octave", c.samples_per_octave);
      f.number("t_first", c.t_first);
      f.number("drift_tol", c.drift_tol);
      f.number("t_cap", c.t_cap);
      if (const json* v = f.raw("sets")) {
        if (!v->is_array() || v->empty()) throw ConfigError("sets: expected a non-empty array");
        for (std::size_t k = 0; k < v->size(); ++k) {
          Fields s((*v)[k], "sets[" + std::to_string(k) + "].");
          s.require("label");
          std::string label;
          s.string("label", label);
          SystemParams p = c.params;
          read_params(s, p);
          s.finish("a parameter set");
          check_params(p, s.prefix());
          c.labels.push_back(label);
          c.sets.push_back(p);
        }
      } else {
        for (const auto& r : default_regime_points()) {
          SystemParams p = c.params;
          p.delta = r.delta;
          p.g = r.g;
          c.labels.push_back(r.label);
          c.sets.push_back(p);
        }
      }
      if (c.t_final < 0.0) throw ConfigError("t_final: must be >= 0 (0 = until stable)");
      if (c.samples_per_octave < 1) throw ConfigError("samples_per_octave: must be >= 1");
      require_positive(f, "t_first", c.t_first);
      require_positive(f, "drift_tol", c.drift_tol);
      if (!(c.t_cap > c.t_first)) throw ConfigError("t_cap: must exceed t_first");
      break;
    }

    case Experiment::stirap: {
      c.initial = NamedState::E;
      c.samples = 401;
      f.choice("preset", c.preset, [](const std::string& s) {
        if (s != "fixed_coupling" && s != "dual_control") {
          throw std::invalid_argument("unknown preset '" + s + "' (expected fixed_coupling or dual_control)");
        }
        return s;
      });
      if (!c.preset.empty()) {
        const StirapSpec base =
            c.preset == "fixed_coupling" ? StirapSpec::fixed_coupling() : StirapSpec::dual_control();
        c.delta_schedule = base.delta_schedule;
        c.g_schedule = base.g_schedule;
        c.t_final = base.t_final;
      } else {
        for (const char* k : {"delta_schedule", "g_schedule", "t_final"}) f.require(k);
      }
      read_schedule(f, "delta_schedule", c.delta_schedule);
      read_schedule(f, "g_schedule", c.g_schedule);
      f.number("t_start", c.t_start);
      f.number("t_final", c.t_final);
      f.choice("initial", c.initial, parse_named_state);
      f.integer("samples", c.samples);
      f.boolean("pump", c.pump);
      if (!(c.t_final > c.t_start)) throw ConfigError("t_final: must exceed t_start");
      if (c.samples < 2) throw ConfigError("samples: must be >= 2");
      break;
    }
  }
  f.finish(purpose);
  check_params(c.params, "");
  if (c.threads < 0) throw ConfigError("threads: must be >= 0");
  if (c.output.empty()) c.output = std::string(to_string(c.experiment)) + ".csv";
  return c;
}

json serialize(const RunConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["output"] = c.output;
  j["integrator"] = to_json(c.integrator);
  write_params(j, c.params);
  switch (c.experiment) {
    case Experiment::steady:
      break;
    case Experiment::converge:
      j["observable"] = c.observable;
      j["start_cutoff"] = c.start_cutoff;
      j["tol"] = c.tol;
      break;
    case Experiment::evolve:
      j["initial"] = to_string(c.initial);
      j["t_final"] = c.t_final;
      j["samples"] = c.samples;
      break;
    case Experiment::grid:
      j["delta_axis"] = to_json(c.delta_axis);
      j["g_axis"] = to_json(c.g_axis);
      j["threads"] = c.threads;
      break;
    case Experiment::line:
      j["variable"] = c.variable;
      if (c.variable == "delta") {
        j["delta_axis"] = to_json(c.delta_axis);
        j["gammas"] = c.gammas;
      } else {
        j["gamma_axis"] = to_json(c.gamma_axis);
      }
      j["threads"] = c.threads;
      break;
    case Experiment::timeseries: {
      j["t_final"] = c.t_final;
      j["samples_per_octave"] = c.samples_per_octave;
      j["t_first"] = c.t_first;
      j["drift_tol"] = c.drift_tol;
      j["t_cap"] = c.t_cap;
      json sets = json::array();
      for (std::size_t k = 0; k < c.sets.size(); ++k) {
        json s = {{"label", c.labels[k]}};
        write_params(s, c.sets[k]);
        sets.push_back(s);
      }
      j["sets"] = sets;
      break;
    }
    case Experiment::stirap:
      if (!c.preset.empty()) j["preset"] = c.preset;
      j["delta_schedule"] = to_json(c.delta_schedule);
      j["g_schedule"] = to_json(c.g_schedule);
      j["t_start"] = c.t_start;
      j["t_final"] = c.t_final;
      j["initial"] = to_string(c.initial);
      j["samples"] = c.samples;
      j["pump"] = c.pump;
      break;
  }
  return j;
}

namespace {

ResultTable run_steady(const RunConfig& c) {
  const SteadyState ss = solve_steady_state(steady_liouvillian(c.params));
  const SpaceLayout layout(c.params.fock_cutoff);
  const Operator& rho = ss.rho.matrix();
  const Populations pop = populations(rho, layout);
  ResultTable t;
  t.columns = {"g", "delta", "concurrence", "n_mode", "P_G0", "P_E", "P_PsiPlus", "P_PsiMinus",
               "residual", "min_eigenvalue"};
  t.add_row({c.params.g, c.params.delta, concurrence(partial_trace_mode(rho, layout)), pop.n_mode, pop.g0,
             pop.e, pop.psi_plus, pop.psi_minus, ss.residual, ss.min_eigenvalue});
  t.metadata = {{"experiment", "steady"}, {"rcond", ss.rcond}, {"version", kVersion}};
  return t;
}

ResultTable run_evolve(const RunConfig& c) {
  const SpaceLayout layout(c.params.fock_cutoff);
  std::vector<HamiltonianTerm> terms{
      {hamiltonian_rot(c.params, layout) + hamiltonian_pump(c.params.epsilon, layout), Schedule::constant(1.0)}};
  const Generator gen = Generator::lindblad(std::move(terms), dissipators(c.params, layout));
  std::vector<double> times(static_cast<std::size_t>(c.samples));
  for (int i = 0; i < c.samples; ++i) times[i] = c.t_final * i / (c.samples - 1);
  times.back() = c.t_final;

  const std::vector<Observable> obs{
      {"P_G0", [&](const Operator& r) { return populations(r, layout).g0; }},
      {"P_E", [&](const Operator& r) { return populations(r, layout).e; }},
      {"P_PsiPlus", [&](const Operator& r) { return populations(r, layout).psi_plus; }},
      {"P_PsiMinus", [&](const Operator& r) { return populations(r, layout).psi_minus; }},
      {"n_mode", [&](const Operator& r) { return mean_photon_number(r, layout); }},
      {"concurrence", [&](const Operator& r) { return concurrence(partial_trace_mode(r, layout)); }},
      {"trace", [](const Operator& r) { return r.trace().real(); }},
      {"min_eigenvalue", [](const Operator& r) { return physicality(r).min_eigenvalue; }},
  };
  const auto rho0 = DensityMatrix::pure(named_state(c.initial, layout));
  const Trajectory traj = evolve(rho0, gen, {0.0, c.t_final}, times, c.integrator, obs);

  ResultTable t;
  t.columns = {"t"};
  for (const auto& o : obs) t.columns.push_back(o.name);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::vector<double> row{traj.times[i]};
    for (const auto& col : traj.observables) row.push_back(col[i]);
    t.add_row(std::move(row));
  }
  t.metadata = {{"experiment", "evolve"},
                {"steps", traj.stats.accepted},
                {"rejected", traj.stats.rejected},
                {"rhs_evaluations", traj.stats.rhs_evaluations},
                {"version", kVersion}};
  return t;
}

ResultTable run_converge(const RunConfig& c) {
  StateObservable obs;
  if (c.observable == "concurrence") {
    obs = [](const DensityMatrix& rho, const SpaceLayout& layout) {
      return concurrence(partial_trace_mode(rho.matrix(), layout));
    };
  } else {
    obs = [](const DensityMatrix& rho, const SpaceLayout& layout) {
      return mean_photon_number(rho.matrix(), layout);
    };
  }
  const CutoffConvergence conv = converge_cutoff(c.params, obs, c.start_cutoff, c.tol);
  ResultTable t;
  t.columns = {"fock_cutoff", c.observable};
  for (std::size_t k = 0; k < conv.history.size(); ++k) {
    t.add_row({static_cast<double>(c.start_cutoff + static_cast<int>(k)), conv.history[k]});
  }
  t.metadata = {{"experiment", "converge"},
                {"converged_cutoff", conv.cutoff},
                {"value", conv.value},
                {"version", kVersion}};
  return t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ResultTable execute(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::steady: return run_steady(c);
    case Experiment::evolve: return run_evolve(c);
    case Experiment::converge: return run_converge(c);
    case Experiment::grid: {
      GridSpec spec;
      spec.delta_axis = c.delta_axis;
      spec.g_axis = c.g_axis;
      spec.fixed = c.params;
      spec.threads = c.threads;
      return grid_sweep(spec);
    }
    case Experiment::line:
      if (c.variable == "delta") return line_sweep_delta(c.params.g, c.delta_axis, c.gammas, c.params, c.threads);
      return line_sweep_gamma(c.params.g, c.params.delta, c.gamma_axis, c.params, c.threads);
    case Experiment::timeseries: {
      TimeSeriesSpec spec;
      spec.sets = c.sets;
      spec.labels = c.labels;
      spec.t_final = c.t_final;
      spec.samples_per_octave = c.samples_per_octave;
      spec.t_first = c.t_first;
      spec.drift_tol = c.drift_tol;
      spec.t_cap = c.t_cap;
      return time_series(spec);
    }
    case Experiment::stirap: {
      StirapSpec spec;
      spec.delta_schedule = c.delta_schedule;
      spec.g_schedule = c.g_schedule;
      spec.gamma = c.params.gamma;
      spec.kappa = c.params.kappa;
      spec.epsilon = c.params.epsilon;
      spec.fock_cutoff = c.params.fock_cutoff;
      spec.sign = c.params.sign;
      spec.t_start = c.t_start;
      spec.t_final = c.t_final;
      spec.initial = c.initial;
      spec.samples = c.samples;
      spec.pump = c.pump;
      spec.integrator = c.integrator;
      return stirap_run(spec);
    }
  }
  throw std::logic_error("unhandled experiment");
}

void write_csv(const ResultTable& t, std::ostream& out) {
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
}

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".meta.json");
  return p.string();
}

void write_outputs(const ResultTable& t, const RunConfig& c, const std::string& csv_path) {
  const std::filesystem::path dir = std::filesystem::path(csv_path).parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open output file '" + csv_path + "'");
  write_csv(t, csv);
  csv.close();
  if (!csv) throw std::runtime_error("failed writing '" + csv_path + "'");

  const std::string meta_path = sidecar_path(csv_path);
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw std::runtime_error("cannot open metadata file '" + meta_path + "'");
  json m = {{"config", serialize(c)},
            {"columns", t.columns},
            {"rows", t.rows.size()},
            {"diagnostics", t.metadata},
            {"version", kVersion}};
  meta << m.dump(2) << '\n';
  meta.close();
  if (!meta) throw std::runtime_error("failed writing '" + meta_path + "'");
}

int run(const RunConfig& c, std::ostream& log) {
  ResultTable t;
  try {
    t = execute(c);
    write_outputs(t, c, c.output);
  } catch (const std::exception& e) {
    log << "error: " << to_string(c.experiment) << ": " << e.what() << '\n';
    return 1;
  }
  int status = 0;
  if (const auto it = t.metadata.find("failures"); it != t.metadata.end() && !it->empty()) {
    for (const auto& f : *it) log << "error: row " << f["row"] << ": " << f["error"].get<std::string>() << '\n';
    status = 2;
  }
  if (const auto it = t.metadata.find("sets"); it != t.metadata.end()) {
    for (const auto& s : *it) {
      if (s.contains("error")) {
        log << "error: set " << s["label"].get<std::string>() << ": " << s["error"].get<std::string>() << '\n';
        status = 2;
      }
    }
  }
  log << "wrote " << t.rows.size() << " rows to " << c.output << " and " << sidecar_path(c.output) << '\n';
  return status;
}

}  // namespace entsim
