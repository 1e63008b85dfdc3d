#include <cstdio>
#include <fstream>

#include "doctest.h"

#include <nlohmann/json.hpp>

#include "adrc/csv.hpp"
#include "adrc/scenario_io.hpp"

using namespace adrc;

namespace {
const char* kSection3Cell = R"({
  "plant": {"n": 1, "B": [[1.0]], "T": [0.1]},
  "trajectory": {"type": "sine", "amplitude": 1.0, "angular_frequency": 10.0},
  "gains": {"scaled": {"Kp": 1.0, "Kd": 2.0, "K1": 3.0, "K2": 3.0, "K3": 1.0}},
  "omega": 4.0,
  "kappa": 0.15,
  "rejection_enabled": true,
  "compensation_mode": "none",
  "duration": 2.0,
  "step": 1e-4,
  "record_stride": 10
})";
}

TEST_CASE("a full scenario parses into a runnable configuration") {
  const auto scenario = parse_scenario(kSection3Cell);
  const auto& cfg = scenario.config;
  CHECK(cfg.plant.n() == 1);
  CHECK(cfg.omega == doctest::Approx(4.0));
  CHECK(cfg.kappa == doctest::Approx(0.15));
  // scaled gains were normalized into raw ones: K1 = 3 omega, K3 = omega^3
  CHECK(cfg.gains.K1(0) == doctest::Approx(12.0));
  CHECK(cfg.gains.K3(0) == doctest::Approx(64.0));
  CHECK(cfg.gains.Kp(0) == doctest::Approx(0.36));
  CHECK(cfg.trajectory.bounds[3] == doctest::Approx(1000.0));
  const auto result = run_scenario(cfg);
  CHECK(std::isfinite(result.ise));
}

TEST_CASE("telescope scenario fields") {
  const char* text = R"({
    "plant": {
      "n": 2,
      "B": [[0.2, 0.0], [0.0, 0.03333333333333333]],
      "T": [1e-3, 1e-3],
      "friction": {"f_c": -0.5, "f_t": 1000.0, "component": "h1"},
      "disturbance": {"type": "friction_mismatch", "actual_f_c": -0.15, "actual_f_t": 1000.0,
                      "modelled_f_c": -0.5, "modelled_f_t": 1000.0}
    },
    "trajectory": {"type": "sine", "period": 30.0, "max_velocity": 3.634e-3},
    "gains": {"raw": {"Kp": 225.0, "Kd": 24.0, "K1": [1200.0, 240.0],
                       "K2": [570000.0, 22800.0], "K3": [1e8, 8e5]}},
    "omega": 1.0, "kappa": 1.0,
    "input_model": "pi_current_loop",
    "current_loop": {"k_p": 1.0, "k_i": 100.0, "k_s": 1.0, "U_m": 24.0,
                     "torque_constant": 2.45, "electrical_time_constant": 1e-3},
    "duration": 1.0, "step": 1e-4, "record_stride": 10,
    "telescope": {"variants": ["none", "reference_based", "estimate_based"]}
  })";
  const auto scenario = parse_scenario(text);
  CHECK(scenario.config.input_model == InputModel::pi_current_loop);
  CHECK(scenario.telescope_variants.size() == 3);
  CHECK(scenario.config.plant.B()(1, 1) == doctest::Approx(1.0 / 30.0));
  // trajectory amplitude derived from the peak velocity
  const double w = 2.0 * M_PI / 30.0;
  CHECK(scenario.config.trajectory.bounds[1] ==
        doctest::Approx(std::sqrt(2.0) * 3.634e-3).epsilon(1e-6));
  CHECK(scenario.config.trajectory.bounds[0] == doctest::Approx(std::sqrt(2.0) * 3.634e-3 / w)
                                                    .epsilon(1e-6));
  // friction mismatch produces the true friction at saturation
  const Vec big = Vec::Constant(2, 1.0);
  const Vec q = scenario.config.plant.q().value(big, big, big, 0.0);
  CHECK(q(0) == doctest::Approx(-0.15 - -0.5).epsilon(1e-9));
}

TEST_CASE("config errors carry the offending JSON pointer") {
  auto expect_error = [](const std::string& text, const std::string& path_fragment) {
    try {
      parse_scenario(text);
      FAIL_CHECK("expected ConfigError for ", path_fragment);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(path_fragment) != std::string::npos);
    }
  };
  // negative time constant
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [-1.0]},
                   "trajectory": {"type": "zero"},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 1.0, "kappa": 0.15})",
               "/plant/T/0");
  // zero bandwidth
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [0.1]},
                   "trajectory": {"type": "zero"},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 0.0, "kappa": 0.15})",
               "/omega");
  // both gain styles at once
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [0.1]},
                   "trajectory": {"type": "zero"},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1},
                              "raw": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 1.0, "kappa": 1.0})",
               "/gains");
  // missing trajectory
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [0.1]},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 1.0, "kappa": 1.0})",
               "/trajectory");
  // unknown compensation mode
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [0.1]},
                   "trajectory": {"type": "zero"},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 1.0, "kappa": 1.0,
                   "compensation_mode": "psychic"})",
               "/compensation_mode");
  // non-monotone friction schedule
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [0.1],
                              "friction": {"f_t": 100.0, "schedule": [[0.0, 0.5], [-1.0, 0.2]]}},
                   "trajectory": {"type": "zero"},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 1.0, "kappa": 1.0})",
               "/plant/friction/schedule/1");
  // empty grid axis
  expect_error(R"({"plant": {"n": 1, "B": [[1.0]], "T": [0.1]},
                   "trajectory": {"type": "zero"},
                   "gains": {"scaled": {"Kp": 1, "Kd": 2, "K1": 3, "K2": 3, "K3": 1}},
                   "omega": 1.0, "kappa": 1.0,
                   "grid": {"T_values": [], "omega_values": [1.0]}})",
               "/grid/T_values");
  // malformed JSON
  expect_error("{", "invalid JSON");
}

TEST_CASE("summary json round trips") {
  const auto scenario = parse_scenario(kSection3Cell);
  const auto result = run_scenario(scenario.config);
  const std::string path = "test_summary_roundtrip.json";
  write_summary_json(path, result, scenario.config);
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j["ise"].get<double>() == doctest::Approx(result.ise));
  CHECK(j["diverged"].get<bool>() == result.diverged);
  CHECK(j["sup_zeta_bar"].get<double>() ==
        doctest::Approx(result.steady_state_sup_zeta_bar));
  CHECK(j["samples"].get<std::size_t>() == result.samples());
  std::remove(path.c_str());
}

TEST_CASE("csv headers are frozen") {
  const auto scenario = parse_scenario(kSection3Cell);
  auto result = run_scenario(scenario.config);
  const std::string path = "test_timeseries_golden.csv";
  write_timeseries_csv(path, result, 1);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,e1_0,e2_0,zt1_0,zt2_0,zt3_0,u_0,v_0");
  std::string first_row;
  std::getline(in, first_row);
  CHECK(first_row.rfind("0,", 0) == 0);
  std::remove(path.c_str());

  CsvWriter grid_csv({"T", "omega", "rejection", "ise", "isc", "diverged", "sup_zeta_bar",
                      "lambda_min_QY1", "Lambda_V", "Gamma_V", "error_bound", "c1"});
  CHECK(grid_csv.header().size() == 12);
  CHECK(format_double(0.1) == "0.10000000000000001");
}
