#include "adrc/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adrc/csv.hpp"

namespace adrc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path, what);
}

const json& member(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

bool has(const json& obj, const std::string& key) {
  return obj.is_object() && obj.contains(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double positive_number(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x > 0) || !std::isfinite(x)) fail(path, "must be finite and > 0");
  return x;
}

double nonnegative_number(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x >= 0) || !std::isfinite(x)) fail(path, "must be finite and >= 0");
  return x;
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

/// Gains may be a single number (applied to every axis) or an n-vector.
Vec gain_vector(const json& v, const std::string& path, int n) {
  Vec out(n);
  if (v.is_number()) {
    out.setConstant(positive_number(v, path));
    return out;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    fail(path, "expected a number or an array of " + std::to_string(n) + " numbers");
  for (int i = 0; i < n; ++i)
    out(i) = positive_number(v[static_cast<size_t>(i)], path + "/" + std::to_string(i));
  return out;
}

Mat matrix(const json& v, const std::string& path, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    fail(path, "expected " + std::to_string(n) + " rows");
  Mat m(n, n);
  for (int r = 0; r < n; ++r) {
    const json& row = v[static_cast<size_t>(r)];
    const std::string rpath = path + "/" + std::to_string(r);
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      fail(rpath, "expected " + std::to_string(n) + " columns");
    for (int c = 0; c < n; ++c)
      m(r, c) = as_number(row[static_cast<size_t>(c)], rpath + "/" + std::to_string(c));
  }
  return m;
}

CompensationMode parse_mode(const json& v, const std::string& path) {
  const std::string s = as_string(v, path);
  if (s == "none") return CompensationMode::none;
  if (s == "reference_based") return CompensationMode::reference_based;
  if (s == "estimate_based") return CompensationMode::estimate_based;
  fail(path, "expected one of none|reference_based|estimate_based");
}

PlantModel parse_plant(const json& plant, const std::string& path) {
  const int n = static_cast<int>(positive_number(member(plant, path, "n"), path + "/n"));
  Mat B = matrix(member(plant, path, "B"), path + "/B", n);

  const json& tj = member(plant, path, "T");
  Vec T(n);
  if (tj.is_number()) {
    T.setConstant(as_number(tj, path + "/T"));
  } else if (tj.is_array() && static_cast<int>(tj.size()) == n) {
    for (int i = 0; i < n; ++i)
      T(i) = as_number(tj[static_cast<size_t>(i)], path + "/T/" + std::to_string(i));
  } else {
    fail(path + "/T", "expected a number or an array of " + std::to_string(n) + " numbers");
  }
  for (int i = 0; i < n; ++i)
    if (!(T(i) > 0)) fail(path + "/T/" + std::to_string(i), "time constants must be > 0");

  DynamicsComponent h1 = zero_component(n);
  DynamicsComponent h2 = zero_component(n);
  if (has(plant, "friction")) {
    const json& fr = plant["friction"];
    const std::string fpath = path + "/friction";
    const double f_t = positive_number(member(fr, fpath, "f_t"), fpath + "/f_t");
    Schedule schedule;
    if (has(fr, "schedule")) {
      const json& sj = fr["schedule"];
      if (!sj.is_array() || sj.empty()) fail(fpath + "/schedule", "expected a nonempty array");
      double prev = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < sj.size(); ++i) {
        const std::string spath = fpath + "/schedule/" + std::to_string(i);
        const json& entry = sj[i];
        if (!entry.is_array() || entry.size() != 2) fail(spath, "expected [time, f_c]");
        const double time = as_number(entry[0], spath + "/0");
        const double fc = as_number(entry[1], spath + "/1");
        if (time < prev) fail(spath, "schedule times must be nondecreasing");
        prev = time;
        schedule.steps.emplace_back(time, fc);
      }
    } else {
      schedule = Schedule::constant(as_number(member(fr, fpath, "f_c"), fpath + "/f_c"));
    }
    const std::string slot =
        has(fr, "component") ? as_string(fr["component"], fpath + "/component") : "h1";
    if (slot == "h1")
      h1 = tanh_friction(schedule, f_t);
    else if (slot == "h2")
      h2 = tanh_friction(schedule, f_t);
    else
      fail(fpath + "/component", "expected h1 or h2");
  }

  Disturbance q = zero_disturbance(n);
  if (has(plant, "disturbance")) {
    const json& dj = plant["disturbance"];
    const std::string dpath = path + "/disturbance";
    const std::string type = as_string(member(dj, dpath, "type"), dpath + "/type");
    auto vec_field = [&](const char* key) {
      const json& vj = member(dj, dpath, key);
      const std::string vpath = dpath + "/" + key;
      Vec out(n);
      if (vj.is_number()) {
        out.setConstant(as_number(vj, vpath));
      } else if (vj.is_array() && static_cast<int>(vj.size()) == n) {
        for (int i = 0; i < n; ++i)
          out(i) = as_number(vj[static_cast<size_t>(i)], vpath + "/" + std::to_string(i));
      } else {
        fail(vpath, "expected a number or an array of " + std::to_string(n) + " numbers");
      }
      return out;
    };
    if (type == "constant") {
      q = constant_disturbance(vec_field("value"));
    } else if (type == "sine_time") {
      q = sine_time_disturbance(
          vec_field("amplitude"),
          positive_number(member(dj, dpath, "angular_frequency"), dpath + "/angular_frequency"));
    } else if (type == "friction_mismatch") {
      auto schedule_field = [&](const char* key) {
        const json& sj = member(dj, dpath, key);
        const std::string spath = dpath + "/" + key;
        Schedule schedule;
        if (sj.is_number()) {
          schedule = Schedule::constant(as_number(sj, spath));
        } else if (sj.is_array() && !sj.empty()) {
          double prev = -std::numeric_limits<double>::infinity();
          for (size_t i = 0; i < sj.size(); ++i) {
            const std::string epath = spath + "/" + std::to_string(i);
            const json& entry = sj[i];
            if (!entry.is_array() || entry.size() != 2) fail(epath, "expected [time, value]");
            const double time = as_number(entry[0], epath + "/0");
            if (time < prev) fail(epath, "schedule times must be nondecreasing");
            prev = time;
            schedule.steps.emplace_back(time, as_number(entry[1], epath + "/1"));
          }
        } else {
          fail(spath, "expected a number or a [time, value] array");
        }
        return schedule;
      };
      const double actual_ft =
          positive_number(member(dj, dpath, "actual_f_t"), dpath + "/actual_f_t");
      const double modelled_ft =
          positive_number(member(dj, dpath, "modelled_f_t"), dpath + "/modelled_f_t");
      q = friction_mismatch_disturbance(schedule_field("actual_f_c"), actual_ft,
                                        schedule_field("modelled_f_c"), modelled_ft, n);
    } else {
      fail(dpath + "/type", "expected constant, sine_time or friction_mismatch");
    }
  }

  try {
    return PlantModel(std::move(B), std::move(T), std::move(h1), std::move(h2), std::move(q));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

ReferenceTrajectory parse_trajectory(const json& tj, const std::string& path, int n) {
  const std::string type = as_string(member(tj, path, "type"), path + "/type");
  if (type == "zero") return zero_reference(n);
  if (type != "sine") fail(path + "/type", "expected sine or zero");

  double w;
  if (has(tj, "angular_frequency"))
    w = positive_number(tj["angular_frequency"], path + "/angular_frequency");
  else if (has(tj, "period"))
    w = 2.0 * M_PI / positive_number(tj["period"], path + "/period");
  else
    fail(path, "sine trajectory needs angular_frequency or period");

  double amplitude;
  if (has(tj, "amplitude"))
    amplitude = nonnegative_number(tj["amplitude"], path + "/amplitude");
  else if (has(tj, "max_velocity"))
    amplitude = nonnegative_number(tj["max_velocity"], path + "/max_velocity") / w;
  else
    fail(path, "sine trajectory needs amplitude or max_velocity");

  return sine_reference(amplitude, w, n);
}

GainSet parse_gains(const json& gj, const std::string& path, int n, double omega,
                    double kappa) {
  const bool scaled = has(gj, "scaled");
  const bool raw = has(gj, "raw");
  if (scaled == raw) fail(path, "provide exactly one of scaled or raw gains");
  const json& src = scaled ? gj["scaled"] : gj["raw"];
  const std::string spath = path + (scaled ? "/scaled" : "/raw");
  GainSet set;
  set.Kp = gain_vector(member(src, spath, "Kp"), spath + "/Kp", n);
  set.Kd = gain_vector(member(src, spath, "Kd"), spath + "/Kd", n);
  set.K1 = gain_vector(member(src, spath, "K1"), spath + "/K1", n);
  set.K2 = gain_vector(member(src, spath, "K2"), spath + "/K2", n);
  set.K3 = gain_vector(member(src, spath, "K3"), spath + "/K3", n);
  if (scaled) {
    ScaledGainSet bars{set.Kp, set.Kd, set.K1, set.K2, set.K3};
    return unscale_gains(bars, omega, kappa);
  }
  return set;
}

SweepGrid parse_grid_spec(const json& gj, const std::string& path, const SweepGrid& defaults) {
  SweepGrid grid = defaults;
  if (has(gj, "min")) grid.min = positive_number(gj["min"], path + "/min");
  if (has(gj, "max")) grid.max = positive_number(gj["max"], path + "/max");
  if (has(gj, "points"))
    grid.points = static_cast<int>(positive_number(gj["points"], path + "/points"));
  if (grid.max <= grid.min) fail(path, "max must exceed min");
  return grid;
}

}  // namespace

LoadedScenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("", "top level must be an object");

  const json& plant_json = member(root, "", "plant");
  PlantModel plant = parse_plant(plant_json, "/plant");
  const int n = plant.n();

  const double omega = positive_number(member(root, "", "omega"), "/omega");
  const double kappa = positive_number(member(root, "", "kappa"), "/kappa");

  ReferenceTrajectory trajectory =
      parse_trajectory(member(root, "", "trajectory"), "/trajectory", n);
  GainSet gains = parse_gains(member(root, "", "gains"), "/gains", n, omega, kappa);

  ScenarioConfig cfg(std::move(plant), std::move(trajectory), std::move(gains), omega, kappa);
  if (has(root, "compensation_mode"))
    cfg.compensation_mode = parse_mode(root["compensation_mode"], "/compensation_mode");
  if (has(root, "rejection_enabled"))
    cfg.rejection_enabled = as_bool(root["rejection_enabled"], "/rejection_enabled");
  if (has(root, "open_loop")) cfg.open_loop = as_bool(root["open_loop"], "/open_loop");
  if (has(root, "duration")) cfg.duration = positive_number(root["duration"], "/duration");
  if (has(root, "step")) cfg.step = positive_number(root["step"], "/step");
  if (has(root, "record_stride"))
    cfg.record_stride = static_cast<int>(positive_number(root["record_stride"], "/record_stride"));
  if (has(root, "input_model")) {
    const std::string m = as_string(root["input_model"], "/input_model");
    if (m == "first_order_lag")
      cfg.input_model = InputModel::first_order_lag;
    else if (m == "pi_current_loop")
      cfg.input_model = InputModel::pi_current_loop;
    else
      fail("/input_model", "expected first_order_lag or pi_current_loop");
  }
  if (has(root, "current_loop")) {
    const json& cj = root["current_loop"];
    const std::string cpath = "/current_loop";
    auto& loop = cfg.current_loop;
    if (has(cj, "k_p")) loop.k_p = positive_number(cj["k_p"], cpath + "/k_p");
    if (has(cj, "k_i")) loop.k_i = positive_number(cj["k_i"], cpath + "/k_i");
    if (has(cj, "k_s")) loop.k_s = nonnegative_number(cj["k_s"], cpath + "/k_s");
    if (has(cj, "U_m")) loop.U_m = positive_number(cj["U_m"], cpath + "/U_m");
    if (has(cj, "torque_constant"))
      loop.torque_constant = positive_number(cj["torque_constant"], cpath + "/torque_constant");
    if (has(cj, "electrical_time_constant"))
      loop.electrical_time_constant =
          positive_number(cj["electrical_time_constant"], cpath + "/electrical_time_constant");
    if (has(cj, "feedforward")) {
      const double u_r = as_number(cj["feedforward"], cpath + "/feedforward");
      loop.feedforward = [u_r](double) { return u_r; };
    }
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail("", e.what());
  }

  LoadedScenario scenario(std::move(cfg));

  if (has(root, "seed")) {
    if (!root["seed"].is_number_integer()) fail("/seed", "expected an integer");
    scenario.seed = root["seed"].get<long>();
  }

  if (has(root, "bounds")) {
    const json& bj = root["bounds"];
    const std::string bpath = "/bounds";
    auto field = [&](const char* key, double& slot) {
      if (has(bj, key)) slot = nonnegative_number(bj[key], bpath + "/" + key);
    };
    field("h1a", scenario.bounds.h1a);
    field("h1b", scenario.bounds.h1b);
    field("h2a", scenario.bounds.h2a);
    field("h2b", scenario.bounds.h2b);
    field("q_z1", scenario.bounds.q_z1);
    field("q_z2", scenario.bounds.q_z2);
    field("q_u", scenario.bounds.q_u);
    field("q_t", scenario.bounds.q_t);
  }

  scenario.Qc_bar = Mat::Identity(2 * n, 2 * n);
  scenario.Qo_bar = Mat::Identity(3 * n, 3 * n);
  if (has(root, "stability")) {
    const json& sj = root["stability"];
    const std::string spath = "/stability";
    if (has(sj, "Qc_scale"))
      scenario.Qc_bar *= positive_number(sj["Qc_scale"], spath + "/Qc_scale");
    if (has(sj, "Qo_scale"))
      scenario.Qo_bar *= positive_number(sj["Qo_scale"], spath + "/Qo_scale");
    if (has(sj, "omega_grid"))
      scenario.omega_grid = parse_grid_spec(sj["omega_grid"], spath + "/omega_grid",
                                            scenario.omega_grid);
    if (has(sj, "kappa_grid"))
      scenario.kappa_grid = parse_grid_spec(sj["kappa_grid"], spath + "/kappa_grid",
                                            scenario.kappa_grid);
  }

  if (has(root, "grid")) {
    const json& gj = root["grid"];
    const std::string gpath = "/grid";
    auto number_list = [&](const char* key) {
      const json& lj = member(gj, gpath, key);
      const std::string lpath = gpath + "/" + key;
      if (!lj.is_array() || lj.empty()) fail(lpath, "expected a nonempty array");
      std::vector<double> out;
      for (size_t i = 0; i < lj.size(); ++i)
        out.push_back(positive_number(lj[i], lpath + "/" + std::to_string(i)));
      return out;
    };
    scenario.grid.T_values = number_list("T_values");
    scenario.grid.omega_values = number_list("omega_values");
    if (has(gj, "rejection")) {
      const json& rj = gj["rejection"];
      if (!rj.is_array() || rj.empty()) fail(gpath + "/rejection", "expected a nonempty array");
      scenario.grid.rejection_values.clear();
      for (size_t i = 0; i < rj.size(); ++i)
        scenario.grid.rejection_values.push_back(
            as_bool(rj[i], gpath + "/rejection/" + std::to_string(i)));
    }
  }

  if (has(root, "telescope")) {
    const json& tj = root["telescope"];
    const json& vj = member(tj, "/telescope", "variants");
    if (!vj.is_array() || vj.empty()) fail("/telescope/variants", "expected a nonempty array");
    for (size_t i = 0; i < vj.size(); ++i)
      scenario.telescope_variants.push_back(
          parse_mode(vj[i], "/telescope/variants/" + std::to_string(i)));
  }

  return scenario;
}

LoadedScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("", "cannot open scenario file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

GridBase make_grid_base(const LoadedScenario& scenario) {
  const auto& cfg = scenario.config;
  GridBase base{scale_gains(cfg.gains, cfg.omega, cfg.kappa),
                cfg.kappa,
                cfg.trajectory,
                cfg.duration,
                cfg.step,
                cfg.record_stride,
                cfg.compensation_mode,
                cfg.plant.B(),
                scenario.Qc_bar,
                scenario.Qo_bar,
                scenario.bounds};
  return base;
}

StabilityProblem make_stability_problem(const LoadedScenario& scenario) {
  const auto& cfg = scenario.config;
  return StabilityProblem{scale_gains(cfg.gains, cfg.omega, cfg.kappa),
                          scenario.Qc_bar,
                          scenario.Qo_bar,
                          cfg.plant.B(),
                          cfg.plant.time_constants(),
                          scenario.bounds,
                          cfg.trajectory.bounds};
}

void write_timeseries_csv(const std::string& path, const ScenarioResult& result, int n) {
  std::vector<std::string> header{"t"};
  auto add_cols = [&](const std::string& base) {
    for (int i = 0; i < n; ++i) header.push_back(base + "_" + std::to_string(i));
  };
  add_cols("e1");
  add_cols("e2");
  add_cols("zt1");
  add_cols("zt2");
  add_cols("zt3");
  add_cols("u");
  add_cols("v");

  CsvWriter csv(header);
  std::vector<double> row(header.size());
  for (std::size_t k = 0; k < result.samples(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    size_t c = 0;
    row[c++] = result.t[k];
    for (int i = 0; i < n; ++i) row[c++] = result.e1(r, i);
    for (int i = 0; i < n; ++i) row[c++] = result.e2(r, i);
    for (int i = 0; i < n; ++i) row[c++] = result.ztilde1(r, i);
    for (int i = 0; i < n; ++i) row[c++] = result.ztilde2(r, i);
    for (int i = 0; i < n; ++i) row[c++] = result.ztilde3(r, i);
    for (int i = 0; i < n; ++i) row[c++] = result.u(r, i);
    for (int i = 0; i < n; ++i) row[c++] = result.v(r, i);
    csv.add_row(row);
  }
  csv.write(path);
}

void write_summary_json(const std::string& path, const ScenarioResult& result,
                        const ScenarioConfig& config) {
  json j;
  j["ise"] = result.ise;
  j["isc"] = result.isc;
  j["diverged"] = result.diverged;
  j["sup_zeta_bar"] = result.steady_state_sup_zeta_bar;
  j["samples"] = result.samples();
  j["duration"] = config.duration;
  j["step"] = config.step;
  j["omega"] = config.omega;
  j["kappa"] = config.kappa;
  j["rejection_enabled"] = config.rejection_enabled;
  j["compensation_mode"] = to_string(config.compensation_mode);
  j["input_model"] = to_string(config.input_model);
  std::vector<double> per_axis(result.ise_per_axis.data(),
                               result.ise_per_axis.data() + result.ise_per_axis.size());
  j["ise_per_axis"] = per_axis;
  if (config.input_model == InputModel::pi_current_loop) {
    j["windup_warning"] = result.windup_warning;
    j["saturated_fraction"] = result.saturated_fraction;
  }
  write_file_atomic(path, j.dump(2) + "\n");
}

void write_grid_summary_csv(const std::string& path, const std::vector<GridCell>& cells) {
  CsvWriter csv({"T", "omega", "rejection", "ise", "isc", "diverged", "sup_zeta_bar",
                 "lambda_min_QY1", "Lambda_V", "Gamma_V", "error_bound", "c1"});
  for (const auto& cell : cells) {
    csv.add_row({cell.T, cell.omega, cell.rejection ? 1.0 : 0.0, cell.ise, cell.isc,
                 cell.diverged ? 1.0 : 0.0, cell.sup_zeta_bar, cell.certificate.lambda_min_QY1,
                 cell.certificate.Lambda_V, cell.certificate.Gamma_V,
                 cell.certificate.error_bound, cell.certificate.c1 ? 1.0 : 0.0});
  }
  csv.write(path);
}

namespace {
json interval_list(const std::vector<Interval>& intervals) {
  json out = json::array();
  for (const auto& iv : intervals) out.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
  return out;
}

json report_json(const StabilityReport& r) {
  json j;
  j["omega"] = r.omega;
  j["kappa"] = r.kappa;
  j["lambda_min_QY1"] = r.lambda_min_QY1;
  j["lambda_max_QY1"] = r.lambda_max_QY1;
  j["c1"] = r.c1;
  j["c2"] = r.c2;
  j["Lambda_V"] = r.Lambda_V;
  j["Gamma_V"] = r.Gamma_V;
  j["gamma_nominal"] = r.gamma_nominal;
  if (std::isfinite(r.error_bound))
    j["error_bound"] = r.error_bound;
  else
    j["error_bound"] = "inf";
  return j;
}
}  // namespace

void write_stability_report_json(const std::string& path, const StabilityReport& base,
                                 const FeasibleSetResult& sets) {
  json j;
  j["base"] = report_json(base);
  j["omega_feasible"] = interval_list(sets.omega_feasible);
  j["kappa_feasible"] = interval_list(sets.kappa_feasible);
  write_file_atomic(path, j.dump(2) + "\n");
}

void write_omega_sweep_csv(const std::string& path,
                           const std::vector<StabilityReport>& sweep) {
  CsvWriter csv({"omega", "lambda_min_QY1", "Lambda_V", "Gamma_V", "bound"});
  for (const auto& r : sweep)
    csv.add_row({r.omega, r.lambda_min_QY1, r.Lambda_V, r.Gamma_V, r.error_bound});
  csv.write(path);
}

void write_telescope_summary_csv(const std::string& path,
                                 const std::vector<TelescopeVariantResult>& variants) {
  CsvWriter csv({"variant", "ise_axis0", "ise_axis1", "ise", "isc", "diverged",
                 "windup_warning", "saturated_fraction"});
  for (const auto& v : variants) {
    const auto& r = v.result;
    std::vector<std::string> row{to_string(v.mode),
                                 format_double(r.ise_per_axis(0)),
                                 format_double(r.ise_per_axis.size() > 1 ? r.ise_per_axis(1)
                                                                         : 0.0),
                                 format_double(r.ise),
                                 format_double(r.isc),
                                 r.diverged ? "1" : "0",
                                 r.windup_warning ? "1" : "0",
                                 format_double(r.saturated_fraction)};
    csv.add_row_raw(row);
  }
  csv.write(path);
}

}  // namespace adrc
