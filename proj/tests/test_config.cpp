#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "entsim/config.hpp"

using namespace entsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "entsim_test_config";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads back a CSV written by write_csv.
ResultTable read_csv(const std::string& text) {
  ResultTable t;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  for (std::string cell; std::getline(header, cell, ',');) t.columns.push_back(cell);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(row);
  }
  return t;
}

void check_error(const std::string& text, const std::string& needle) {
  CAPTURE(text);
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains(needle.c_str()), ConfigError);
}

}  // namespace

TEST_CASE("minimal steady config takes the documented defaults") {
  const RunConfig c = parse_config(R"({"experiment": "steady", "g": 1.0, "delta": 0.1})");
  CHECK(c.experiment == Experiment::steady);
  CHECK(c.params.g == 1.0);
  CHECK(c.params.delta == 0.1);
  CHECK(c.params.gamma == 1e-5);
  CHECK(c.params.kappa == 1.0);
  CHECK(c.params.epsilon == 1.0);
  CHECK(c.params.fock_cutoff == 8);
  CHECK(c.params.sign == DetuningSign::printed);
  CHECK(c.output == "steady.csv");
}

TEST_CASE("config errors name the field") {
  check_error(R"({"experiment": "steady", "g": 1, "delta": 0.1, "gamma": -1})", "gamma");
  check_error(R"({"experiment": "steady", "g": 1, "delta": 0.1, "fock_cutoff": 12})", "fock_cutoff");
  check_error(R"({"experiment": "steady", "g": "one", "delta": 0.1})", "g");
  check_error(R"({"experiment": "steady", "g": 1})", "delta");
  check_error(R"({"experiment": "steady", "g": 1, "delta": 0.1, "t_final": 3})", "unknown key 't_final'");
  check_error(R"({"experiment": "wave", "g": 1, "delta": 0.1})", "experiment");
  check_error(R"({"g": 1, "delta": 0.1})", "experiment");
  check_error(R"({"experiment": "grid", "delta_axis": {"min": 0, "max": 1, "count": 5, "spacing": "log"}})",
              "delta_axis");
  check_error(R"({"experiment": "line", "g": 1, "gammas": []})", "gammas");
  check_error(R"({"experiment": "evolve", "g": 1, "delta": 0.1, "t_final": 5, "initial": "Phi"})", "initial");
  check_error(R"({"experiment": "stirap", "g_schedule": {"kind": "constant", "value": 1}})", "delta_schedule");
  check_error(R"({"experiment": "timeseries", "sets": [{"label": "x", "g": 1, "delta": 0.1, "zeta": 2}]})",
              "sets[0]");
  check_error(R"({"experiment": "converge", "g": 1, "delta": 0.1, "observable": "purity"})", "observable");
  check_error(R"({"experiment": "steady", "g": 1, "delta": 0.1, "integrator": {"rtol": 0}})", "rtol");
}

TEST_CASE("syntax errors report the position") {
  CHECK_THROWS_WITH_AS(parse_config("{\n  \"experiment\": \"steady\",\n  \"g\": ,\n}"), doctest::Contains("line 3"),
                       ConfigError);
}

TEST_CASE("serialized configs parse back to the same config") {
  const char* texts[] = {
      R"({"experiment": "steady", "g": 1, "delta": 0.1, "fock_cutoff": 4, "detuning_sign": "lab_consistent"})",
      R"({"experiment": "evolve", "g": 1, "delta": 0.1, "t_final": 5, "samples": 11, "initial": "E",
          "integrator": {"rtol": 1e-9, "atol": 1e-11, "max_step": 0.5}})",
      R"({"experiment": "grid", "fock_cutoff": 3, "threads": 2,
          "delta_axis": {"min": 0.01, "max": 10, "count": 4, "spacing": "log"},
          "g_axis": {"min": 0, "max": 2, "count": 3, "spacing": "linear"}})",
      R"({"experiment": "line", "g": 1, "gammas": [1e-5, 1e-3]})",
      R"({"experiment": "line", "g": 1, "delta": 0.1, "variable": "gamma"})",
      R"({"experiment": "timeseries", "t_final": 10, "fock_cutoff": 3})",
      R"({"experiment": "timeseries", "sets": [{"label": "p", "g": 2, "delta": 0.3}], "drift_tol": 1e-5})",
      R"({"experiment": "stirap", "preset": "dual_control", "fock_cutoff": 3, "pump": true})",
      R"({"experiment": "stirap", "t_final": 0.02, "gamma": 0,
          "delta_schedule": {"kind": "tanh_down", "max": 2e5, "t0": 4e-3, "lambda": 500},
          "g_schedule": {"kind": "constant", "value": 250}})",
      R"({"experiment": "converge", "g": 1, "delta": 0.1, "observable": "n_mode", "tol": 1e-3})",
  };
  for (const char* text : texts) {
    CAPTURE(text);
    const RunConfig c = parse_config(text);
    const json j = serialize(c);
    CHECK(parse_config_json(j) == c);
    CHECK(serialize(parse_config_json(j)) == j);
  }
}

TEST_CASE("experiment-specific defaults") {
  const RunConfig ts = parse_config(R"({"experiment": "timeseries"})");
  CHECK(ts.labels == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(ts.sets[0].delta == 10.0);
  CHECK(ts.sets[0].g == 1e-2);
  const RunConfig st = parse_config(R"({"experiment": "stirap", "preset": "fixed_coupling"})");
  CHECK(st.params.gamma == 1e-3);
  CHECK(st.initial == NamedState::E);
  CHECK_FALSE(st.pump);
  CHECK(st.delta_schedule == StirapSpec::fixed_coupling().delta_schedule);
}

TEST_CASE("outputs: CSV round trip, sidecar and determinism") {
  const fs::path dir = scratch_dir();
  RunConfig c = parse_config(R"({"experiment": "grid", "fock_cutoff": 3,
      "delta_axis": {"min": 0.01, "max": 10, "count": 4, "spacing": "log"},
      "g_axis": {"min": 0.1, "max": 2, "count": 3, "spacing": "log"}})");
  c.output = (dir / "grid.csv").string();
  std::ostringstream log;
  REQUIRE(run(c, log) == 0);
  CHECK(log.str().find("wrote 12 rows") != std::string::npos);

  const ResultTable direct = execute(c);
  const ResultTable back = read_csv(slurp(c.output));
  CHECK(back.columns == direct.columns);
  CHECK(back.rows == direct.rows);  // 17 significant digits round-trip exactly

  const json meta = json::parse(slurp(sidecar_path(c.output)));
  CHECK(sidecar_path(c.output) == (dir / "grid.meta.json").string());
  CHECK(meta["rows"] == 12);
  CHECK(meta["columns"] == json(direct.columns));
  CHECK(meta["diagnostics"]["experiment"] == "grid");

  // The recorded config reproduces the table.
  const RunConfig again = parse_config_json(meta["config"]);
  CHECK(again == c);
  CHECK(execute(again).rows == direct.rows);

  const std::string first = slurp(c.output), first_meta = slurp(sidecar_path(c.output));
  REQUIRE(run(c, log) == 0);
  CHECK(slurp(c.output) == first);
  CHECK(slurp(sidecar_path(c.output)) == first_meta);
}

TEST_CASE("every experiment runs from a config") {
  const fs::path dir = scratch_dir();
  const char* texts[] = {
      R"({"experiment": "steady", "g": 1, "delta": 0.1, "fock_cutoff": 3})",
      R"({"experiment": "evolve", "g": 1, "delta": 0.1, "t_final": 2, "samples": 5, "fock_cutoff": 2})",
      R"({"experiment": "line", "g": 1, "fock_cutoff": 2,
          "delta_axis": {"min": 0.01, "max": 1, "count": 3, "spacing": "log"}})",
      R"({"experiment": "timeseries", "t_final": 1, "fock_cutoff": 2})",
      R"({"experiment": "stirap", "preset": "dual_control", "fock_cutoff": 1, "samples": 5})",
      R"({"experiment": "converge", "g": 0, "delta": 0, "observable": "n_mode", "tol": 1e-2})",
  };
  for (const char* text : texts) {
    CAPTURE(text);
    RunConfig c = parse_config(text);
    c.output = (dir / (std::string(to_string(c.experiment)) + ".csv")).string();
    std::ostringstream log;
    CHECK(run(c, log) == 0);
    CHECK(fs::exists(sidecar_path(c.output)));
  }
  const ResultTable steady = execute(parse_config(texts[0]));
  CHECK(steady.columns.front() == "g");
  CHECK(steady.rows.size() == 1);
  const ResultTable evolve = execute(parse_config(texts[1]));
  CHECK(evolve.rows.size() == 5);
  CHECK(evolve.rows.front()[evolve.column_index("P_G0")] == 1.0);
}

TEST_CASE("unwritable output is an error") {
  RunConfig c = parse_config(R"({"experiment": "steady", "g": 1, "delta": 0.1, "fock_cutoff": 2})");
  c.output = "/proc/entsim-no-such-dir/out.csv";
  std::ostringstream log;
  CHECK(run(c, log) == 1);
  CHECK(log.str().find("error:") != std::string::npos);
}
