#include "boltz/scenarios.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "boltz/analysis.hpp"
#include "boltz/dsmc.hpp"
#include "boltz/dvm.hpp"
#include "boltz/errors.hpp"
#include "boltz/iterated_gain.hpp"
#include "boltz/linearized.hpp"
#include "boltz/parallel.hpp"
#include "boltz/stability.hpp"

#ifndef BOLTZ_GIT_DESCRIBE
#define BOLTZ_GIT_DESCRIBE "unknown"
#endif

namespace boltz {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version_string() { return BOLTZ_GIT_DESCRIBE; }

std::string config_hash(const json& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigInvalid("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigInvalid("override '" + key + "': '" + parts[i] + "' is not an object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config " + path);
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw ConfigInvalid(path + ": not valid JSON");
  if (!j.is_object()) throw ConfigInvalid(path + ": top level must be an object");
  return j;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"relax_dsmc", "relax_dvm", "decompose",      "gain_probe",
                                              "gap",        "constants", "stability_twin", "mehler_probe"};
  return names;
}

namespace {

// ---------------------------------------------------------------- validation

bool same_kind(const json& def, const json& val) {
  if (def.is_number()) return val.is_number();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return true;
}

/// Merges `user` over `defaults`; every user key must exist in defaults with the same JSON kind.
json merge_checked(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigInvalid(where + ": expected an object");
  json out = defaults;
  for (const auto& [key, val] : user.items()) {
    if (!defaults.contains(key)) throw ConfigInvalid(where + "/" + key + ": unknown key");
    if (!same_kind(defaults[key], val)) throw ConfigInvalid(where + "/" + key + ": wrong type");
    out[key] = val;
  }
  return out;
}

json vec_json(std::initializer_list<double> v) { return json(std::vector<double>(v)); }

json default_kernel() { return {{"N", 3}, {"gamma", 1.0}, {"normalize", true}}; }

json two_temperature_mixture() {
  return {{"type", "mixture"},
          {"normalize", true},
          {"components",
           json::array({{{"weight", 0.5}, {"u", vec_json({1.0, 0.0, 0.0})}, {"T", 0.3}},
                        {{"weight", 0.5}, {"u", vec_json({-1.0, 0.0, 0.0})}, {"T", 1.2}}})}};
}

json bimodal_mixture() {
  return {{"type", "mixture"},
          {"normalize", true},
          {"components",
           json::array({{{"weight", 0.5}, {"u", vec_json({1.2, 0.0, 0.0})}, {"T", 0.5}},
                        {{"weight", 0.5}, {"u", vec_json({-1.2, 0.0, 0.0})}, {"T", 0.5}}})}};
}

json dvm_grid_defaults(int n, double R) {
  return {{"n", n},        {"R", R},           {"dt", 0.2},           {"t_end", 3.0},
          {"sphere_t", 4}, {"sphere_phi", 8}, {"overflow_tol", 1e-6}, {"conservative", true}};
}

struct ScenarioDefaults {
  json params;
  json init;
};

ScenarioDefaults defaults_for(const std::string& scenario) {
  if (scenario == "relax_dsmc")
    return {{{"particles", 100000},
             {"dt", 0.05},
             {"t_end", 8.0},
             {"record_every", 1},
             {"bins_h", 1.5},
             {"bins_R", 4.5},
             {"normalize", true},
             {"fit_t_min", 0.5},
             {"floor_factor", 3.0},
             {"s0", 2.0},
             {"gap", 0.0},
             {"gap_degree", 12},
             {"gap_l_max", 4},
             {"band_lo", 0.5},
             {"band_hi", 1.5},
             {"rate_check", true},
             {"drift_tol", 1e-9}},
            two_temperature_mixture()};
  if (scenario == "relax_dvm") {
    json p = dvm_grid_defaults(13, 5.5);
    p["s0"] = 2.0;
    p["conservation_tol"] = 1e-10;
    return {p, bimodal_mixture()};
  }
  if (scenario == "decompose") {
    json p = dvm_grid_defaults(21, 6.0);
    p["overflow_tol"] = 1e-3;
    p["t0"] = 1.0;
    p["n_max"] = 2;
    p["identity_tol"] = 1e-6;
    p["conservation_tol"] = 1e-10;
    return {p, bimodal_mixture()};
  }
  if (scenario == "gain_probe")
    return {{{"probes", json::array({"pythagoras", "representation", "lp"})},
             {"pythagoras_samples", 100000},
             {"pythagoras_tol", 1e-10},
             {"mc_samples", 1000000},
             {"z_max", 3.0},
             {"lp_tol", 0.05},
             {"lp_radii", vec_json({0.5, 1.0, 2.0, 4.0})}},
            json::object()};
  if (scenario == "gap")
    return {{{"degrees", json::array({12, 14})},
             {"l_max", 4},
             {"stability_tol", 0.02},
             {"scaling_tol", 0.04},
             {"scaling_pairs", json::array({vec_json({2.0, 0.0, 1.0}), vec_json({1.0, 0.0, 4.0}),
                                            vec_json({1.0, 0.7, 1.0})})}},
            json::object()};
  if (scenario == "constants")
    return {{{"mass", 1.0},
             {"energy_norm", 4.0},
             {"T", 1.0},
             {"rho", 1.0},
             {"t0", 1.0},
             {"s0", 2.0},
             {"inequality_samples", 1000},
             {"inequality_n", 41},
             {"inequality_R", 9.0},
             {"a2_scale", 1.0}},
            json::object()};
  if (scenario == "stability_twin") {
    json p = dvm_grid_defaults(13, 5.5);
    p["mode"] = "verify";
    p["calibration"] = "tests/golden/stability_calibration.json";
    p["calibration_eps"] = vec_json({0.01, 0.05, 0.2});
    p["verify_eps"] = vec_json({0.03, 0.08, 0.15});
    p["short_horizon"] = 1.0;
    p["safety"] = 1.25;
    return {p, bimodal_mixture()};
  }
  if (scenario == "mehler_probe")
    return {{{"samples", 1000000},
             {"n_values", vec_json({0.5, 1.0, 2.0, 4.0})},
             {"z_max", 4.0},
             {"bins_h", 0.5},
             {"bins_R", 3.0}},
            {{"type", "maxwellian"}, {"rho", 1.0}, {"u", vec_json({0.5, -0.2, 0.1})}, {"T", 1.5}}};
  throw ConfigInvalid("/scenario: unknown scenario '" + scenario + "'");
}

json resolve_init(const json& init, const json& fallback) {
  if (init.is_null()) return fallback;
  if (!init.is_object() || !init.contains("type") || !init["type"].is_string())
    throw ConfigInvalid("/init: expected an object with a string 'type'");
  const std::string type = init["type"];
  json defs;
  if (type == "maxwellian")
    defs = {{"type", type}, {"rho", 1.0}, {"u", json::array()}, {"T", 1.0}};
  else if (type == "mixture")
    defs = {{"type", type}, {"normalize", true}, {"components", json::array()}};
  else if (type == "heavy_tail")
    defs = {{"type", type}, {"nu", 5.0}};
  else if (type == "atoms")
    defs = {{"type", type}, {"path", ""}, {"velocities", json::array()}, {"weights", json::array()}};
  else
    throw ConfigInvalid("/init/type: unknown initial-data type '" + type + "'");
  json out = merge_checked(defs, init, "/init");
  if (type == "mixture") {
    if (out["components"].empty()) throw ConfigInvalid("/init/components: empty mixture");
    for (std::size_t i = 0; i < out["components"].size(); ++i)
      out["components"][i] = merge_checked({{"weight", 1.0}, {"u", json::array()}, {"T", 1.0}}, out["components"][i],
                                           "/init/components/" + std::to_string(i));
  }
  if (type == "atoms" && out["path"].get<std::string>().empty() && out["velocities"].empty())
    throw ConfigInvalid("/init: atoms need 'path' or 'velocities'");
  return out;
}

Vec vec_from(const json& j, int dim, const std::string& where) {
  Vec v = Vec::Zero(dim);
  if (j.empty()) return v;
  if (static_cast<int>(j.size()) != dim) throw ConfigInvalid(where + ": expected " + std::to_string(dim) + " entries");
  for (int d = 0; d < dim; ++d) {
    if (!j[static_cast<std::size_t>(d)].is_number()) throw ConfigInvalid(where + ": not a number");
    v[d] = j[static_cast<std::size_t>(d)].get<double>();
  }
  return v;
}

MaxwellianMixture mixture_from(const json& init, int dim) {
  MaxwellianMixture m;
  for (std::size_t i = 0; i < init["components"].size(); ++i) {
    const auto& c = init["components"][i];
    m.components.push_back({c["weight"].get<double>(),
                            vec_from(c["u"], dim, "/init/components/" + std::to_string(i) + "/u"), c["T"].get<double>()});
  }
  return init["normalize"].get<bool>() ? m.normalized() : m;
}

}  // namespace

KernelSpec kernel_from_config(const json& kernel) {
  const json k = merge_checked({{"N", 3}, {"gamma", 1.0}, {"b", json::object()}, {"normalize", true}}, kernel, "/kernel");
  KernelSpec spec;
  try {
    if (k["b"].empty())
      spec = hard_spheres(k["N"].get<int>(), k["gamma"].get<double>());
    else
      spec = kernel_from_json({{"N", k["N"]}, {"gamma", k["gamma"]}, {"b", k["b"]}});
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("/kernel: ") + e.what());
  }
  return k["normalize"].get<bool>() ? normalize_b(spec) : spec;
}

ParticleMeasure particles_from_init(const json& init, int dim, std::size_t count, std::uint64_t seed) {
  const std::string type = init["type"];
  if (type == "maxwellian")
    return maxwellian_sample({init["rho"].get<double>(), vec_from(init["u"], dim, "/init/u"), init["T"].get<double>()},
                             count, seed);
  if (type == "mixture") return mixture_from(init, dim).sample(count, seed);
  if (type == "heavy_tail") return heavy_tail_sample(dim, init["nu"].get<double>(), count, seed);
  if (!init["path"].get<std::string>().empty()) return read_measure_csv(init["path"].get<std::string>());
  const auto& vel = init["velocities"];
  ParticleMeasure F(dim, vel.size());
  for (std::size_t i = 0; i < vel.size(); ++i)
    F.v.col(static_cast<Eigen::Index>(i)) = vec_from(vel[i], dim, "/init/velocities/" + std::to_string(i));
  const auto& w = init["weights"];
  if (!w.empty() && w.size() != vel.size()) throw ConfigInvalid("/init/weights: length differs from velocities");
  for (std::size_t i = 0; i < vel.size(); ++i)
    F.w[static_cast<Eigen::Index>(i)] = w.empty() ? 1.0 / static_cast<double>(vel.size()) : w[i].get<double>();
  return F;
}

GridDensity grid_from_init(const json& init, std::shared_ptr<const GridGeometry> geom) {
  const std::string type = init["type"];
  const int dim = geom->dim;
  if (type == "maxwellian")
    return maxwellian_grid({init["rho"].get<double>(), vec_from(init["u"], dim, "/init/u"), init["T"].get<double>()},
                           std::move(geom));
  if (type == "mixture") {
    auto f = mixture_from(init, dim).grid(std::move(geom));
    // the truncated grid loses a little mass; restore the requested total
    const double target = init["normalize"].get<bool>() ? 1.0 : mixture_from(init, dim).triple().rho;
    f *= target / f.mass();
    return f;
  }
  throw ConfigInvalid("/init/type: '" + type + "' has no grid density; use maxwellian or mixture");
}

json resolve_config(const json& config) {
  if (!config.is_object()) throw ConfigInvalid("/: config must be an object");
  static const std::vector<std::string> top{"scenario", "description", "kernel", "init", "params",
                                            "seed",     "output",      "workers"};
  for (const auto& [key, _] : config.items())
    if (std::find(top.begin(), top.end(), key) == top.end()) throw ConfigInvalid("/" + key + ": unknown key");
  if (!config.contains("scenario") || !config["scenario"].is_string())
    throw ConfigInvalid("/scenario: missing or not a string");
  const std::string scenario = config["scenario"];
  const auto defs = defaults_for(scenario);
  json out;
  out["scenario"] = scenario;
  if (config.contains("description")) out["description"] = config["description"];
  out["kernel"] = merge_checked({{"N", 3}, {"gamma", 1.0}, {"b", json::object()}, {"normalize", true}},
                                config.value("kernel", default_kernel()), "/kernel");
  static_cast<void>(kernel_from_config(out["kernel"]));
  out["init"] = resolve_init(config.value("init", json()), defs.init);
  out["params"] = merge_checked(defs.params, config.value("params", json::object()), "/params");
  const json seed = config.value("seed", json(1));
  if (!seed.is_number_integer() || seed.get<std::int64_t>() < 0) throw ConfigInvalid("/seed: expected a nonnegative integer");
  out["seed"] = seed;
  const json workers = config.value("workers", json(0));
  if (!workers.is_number_integer() || workers.get<int>() < 0) throw ConfigInvalid("/workers: expected an integer >= 0");
  out["workers"] = workers;
  const json output = config.value("output", json("runs/" + scenario));
  if (!output.is_string()) throw ConfigInvalid("/output: expected a string");
  out["output"] = output;
  if (!out["init"].empty() && out["init"].contains("u") && !out["init"]["u"].empty() &&
      static_cast<int>(out["init"]["u"].size()) != out["kernel"]["N"].get<int>())
    throw ConfigInvalid("/init/u: dimension differs from /kernel/N");
  return out;
}

namespace {

// ------------------------------------------------------------------ outputs

struct Output {
  fs::path dir;
  std::string header;
  std::vector<std::string> files;

  std::string path(const std::string& name) {
    files.push_back((dir / name).string());
    return files.back();
  }
  void write_json(const std::string& name, json j, const json& meta) {
    j["meta"] = meta;
    std::ofstream out(path(name));
    out << j.dump(2) << '\n';
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

Verdict make_verdict(const std::string& check, double value, double bound, bool pass) {
  return {check, value, bound, pass};
}

std::string verdict_summary(const std::vector<Verdict>& vs) {
  std::string failed;
  for (const auto& v : vs)
    if (!v.pass) failed += (failed.empty() ? "" : ",") + v.check;
  return failed.empty() ? "all checks pass" : "failed: " + failed;
}

json verdicts_json(const std::vector<Verdict>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({{"check", v.check}, {"value", v.value}, {"bound", v.bound}, {"pass", v.pass}});
  return out;
}

GridCollision make_grid_op(const json& p, const KernelSpec& spec) {
  const auto geom = GridGeometry::make(spec.dim, p["n"].get<int>(), p["R"].get<double>());
  DvmResolution res;
  res.sphere = {p["sphere_t"].get<int>(), p["sphere_phi"].get<int>()};
  res.overflow_tol = p["overflow_tol"].get<double>();
  return GridCollision(geom, spec, res);
}

EvolveOptions evolve_options(const json& p) {
  EvolveOptions o;
  o.dt = p["dt"].get<double>();
  o.t_end = p["t_end"].get<double>();
  o.conservative = p["conservative"].get<bool>();
  return o;
}

MaxwellianParams grid_triple(const GridDensity& f) {
  MaxwellianParams p;
  p.rho = f.mass();
  p.u = f.momentum() / p.rho;
  p.T = (f.energy() / p.rho - p.u.squaredNorm()) / f.geometry().dim;
  return p;
}

/// Relative drift of (mass, momentum, energy) over a DVM run.
double grid_drift(const DvmTrajectory& tr) {
  const auto& f0 = tr.f.front();
  const double m0 = f0.mass(), e0 = f0.energy();
  const Vec p0 = f0.momentum();
  double d = 0.0;
  for (const auto& f : tr.f) {
    d = std::max(d, std::abs(f.mass() - m0) / m0);
    d = std::max(d, (f.momentum() - p0).norm() / std::sqrt(m0 * e0));
    d = std::max(d, std::abs(f.energy() - e0) / e0);
  }
  return d;
}

void write_grid_trajectory(const DvmTrajectory& tr, const GridDensity& M, const std::string& path,
                           const std::string& header) {
  std::ofstream out(path);
  out << header << '\n' << "t,dist_l1,dist_l1_2,mass,";
  const int dim = M.geometry().dim;
  for (int d = 0; d < dim; ++d) out << "m1_" << d << ',';
  out << "energy,norm3,norm4,norm6,min_value\n";
  for (std::size_t k = 0; k < tr.f.size(); ++k) {
    const auto& f = tr.f[k];
    out << fmt(tr.t[k]) << ',' << fmt(grid_distance(f, M, 0.0)) << ',' << fmt(grid_distance(f, M, 2.0)) << ','
        << fmt(f.mass()) << ',';
    const Vec m = f.momentum();
    for (int d = 0; d < dim; ++d) out << fmt(m[d]) << ',';
    out << fmt(f.energy()) << ',' << fmt(f.l1_norm(3.0)) << ',' << fmt(f.l1_norm(4.0)) << ',' << fmt(f.l1_norm(6.0))
        << ',' << fmt(f.min_value()) << '\n';
  }
}

Trajectory grid_trajectory(const DvmTrajectory& tr, const GridDensity& M) {
  Trajectory out;
  out.moments.assign(7, {});
  for (std::size_t k = 0; k < tr.f.size(); ++k) {
    out.t.push_back(tr.t[k]);
    out.distance.push_back(grid_distance(tr.f[k], M, 0.0));
    for (int s = 0; s < 7; ++s) out.moments[static_cast<std::size_t>(s)].push_back(tr.f[k].l1_norm(s));
  }
  return out;
}

// ---------------------------------------------------------------- scenarios

using Runner = ScenarioResult (*)(const json&, Output&);

ScenarioResult run_relax_dsmc(const json& cfg, Output& out) {
  const auto spec = kernel_from_config(cfg["kernel"]);
  const auto& p = cfg["params"];
  const auto seed = cfg["seed"].get<std::uint64_t>();
  const auto F0 = particles_from_init(cfg["init"], spec.dim, p["particles"].get<std::size_t>(), seed);
  DsmcConfig dc;
  dc.dt = p["dt"].get<double>();
  dc.t_end = p["t_end"].get<double>();
  dc.record_every = p["record_every"].get<int>();
  dc.seed = seed;
  dc.bins = {p["bins_h"].get<double>(), p["bins_R"].get<double>()};
  RelaxOptions ro;
  ro.normalize = p["normalize"].get<bool>();
  ro.fit_t_min = p["fit_t_min"].get<double>();
  ro.floor_factor = p["floor_factor"].get<double>();
  ro.s0 = p["s0"].get<double>();
  const auto tr = relax_experiment(F0, spec, dc, ro);

  const bool rate_check = p["rate_check"].get<bool>();
  double gap = p["gap"].get<double>();
  if (rate_check && !(gap > 0.0)) {
    GalerkinBasis basis;
    basis.degree = p["gap_degree"].get<int>();
    basis.l_max = p["gap_l_max"].get<int>();
    gap = spectral_gap(tr.triple, spec, basis).lambda_hat;
  }
  const auto& r0 = tr.rows.front();
  auto report = make_envelope_report(spec.dim, spec.gamma, spec.a2, r0.norms[0], r0.norms[2], tr.triple.T, 1.0, ro.s0);
  if (rate_check) {
    report.fit = tr.fit;
    report.gap = gap;
  }
  report.band_lo = p["band_lo"].get<double>();
  report.band_hi = p["band_hi"].get<double>();
  auto verdicts = envelope_verdict(as_trajectory(tr), report, false);
  verdicts.push_back(make_verdict("triple_drift", tr.max_triple_drift, p["drift_tol"].get<double>(),
                                  tr.max_triple_drift <= p["drift_tol"].get<double>()));
  if (rate_check && !tr.fit) verdicts.push_back(make_verdict("rate_fit", 0.0, 0.0, false));

  write_trajectory_csv(tr, out.path("trajectory.csv"), out.header);
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);
  json rep = to_json(report);
  rep["noise_floor"] = tr.noise_floor;
  rep["window"] = {{"t_min", tr.window.t_min}, {"t_max", tr.window.t_max}, {"floor", tr.window.floor}};
  out.write_json("report.json", rep, {});

  ScenarioResult res;
  res.pass = all_pass(verdicts);
  res.metrics = {{"gap", gap},
                 {"lambda_hat", tr.fit ? tr.fit->lambda_hat : 0.0},
                 {"rate_ratio", tr.fit && gap > 0.0 ? tr.fit->lambda_hat / gap : 0.0},
                 {"fit_r2", tr.fit ? tr.fit->r2 : 0.0},
                 {"noise_floor", tr.noise_floor},
                 {"triple_drift", tr.max_triple_drift},
                 {"collisions", tr.collisions},
                 {"verdicts", verdicts_json(verdicts)}};
  res.summary = "lambda_hat=" + fmt(tr.fit ? tr.fit->lambda_hat : 0.0) + " gap=" + fmt(gap) + " drift=" +
                fmt(tr.max_triple_drift) + "; " + verdict_summary(verdicts);
  return res;
}

ScenarioResult run_relax_dvm(const json& cfg, Output& out) {
  const auto spec = kernel_from_config(cfg["kernel"]);
  const auto& p = cfg["params"];
  const auto op = make_grid_op(p, spec);
  const auto f0 = grid_from_init(cfg["init"], op.geometry_ptr());
  const auto tr = evolve(f0, op, evolve_options(p));
  const auto eq = grid_triple(f0);
  const auto M = maxwellian_grid(eq, op.geometry_ptr());
  const auto traj = grid_trajectory(tr, M);

  auto report = make_envelope_report(spec.dim, spec.gamma, spec.a2, f0.mass(), f0.l1_norm(2.0), eq.T, 1.0,
                                     p["s0"].get<double>());
  report.d0 = std::min(traj.distance.front(), 2.0 * eq.rho);
  auto verdicts = envelope_verdict(traj, report, true);
  const double drift = grid_drift(tr);
  const double tol = p["conservation_tol"].get<double>();
  verdicts.push_back(make_verdict("conservation", drift, tol, drift <= tol));

  write_grid_trajectory(tr, M, out.path("trajectory.csv"), out.header);
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);
  out.write_json("report.json", to_json(report), {});

  ScenarioResult res;
  res.pass = all_pass(verdicts);
  double min_margin = INFINITY;
  for (const auto& v : verdicts)
    if (v.check == "lower_envelope") min_margin = std::min(min_margin, v.value - v.bound);
  res.metrics = {{"d0", report.d0},
                 {"final_distance", traj.distance.back()},
                 {"drift", drift},
                 {"overflow_mass", tr.overflow_mass},
                 {"clip_mass", tr.clip_mass},
                 {"lower_envelope_min_margin", std::isfinite(min_margin) ? min_margin : 0.0},
                 {"verdicts", verdicts_json(verdicts)}};
  res.summary = "d(0)=" + fmt(traj.distance.front()) + " d(end)=" + fmt(traj.distance.back()) + " drift=" + fmt(drift) +
                "; " + verdict_summary(verdicts);
  return res;
}

ScenarioResult run_decompose(const json& cfg, Output& out) {
  const auto spec = kernel_from_config(cfg["kernel"]);
  const auto& p = cfg["params"];
  const auto op = make_grid_op(p, spec);
  const auto f0 = grid_from_init(cfg["init"], op.geometry_ptr());
  const auto tr = evolve(f0, op, evolve_options(p));
  const double t0 = p["t0"].get<double>();
  const auto freq = collision_frequency_bound(tr, t0, spec);
  const auto state = decompose(tr, t0, p["n_max"].get<int>(), op);
  const auto summary = decomposition_report(state, tr, spec, p["identity_tol"].get<double>());
  const double drift = grid_drift(tr);
  const double tol = p["conservation_tol"].get<double>();

  bool envelope = true, positive = summary.min_node_value >= 0.0;
  for (const auto& r : summary.rows) envelope = envelope && r.l1_h <= r.envelope_rhs;
  std::vector<Verdict> verdicts{
      make_verdict("identity_residual", summary.max_identity_residual, p["identity_tol"].get<double>(),
                   summary.max_identity_residual <= p["identity_tol"].get<double>()),
      make_verdict("positivity", summary.min_node_value, 0.0, positive),
      make_verdict("damping_ordering", summary.damping_ordering ? 1.0 : 0.0, 1.0, summary.damping_ordering),
      make_verdict("h_envelope", envelope ? 1.0 : 0.0, 1.0, envelope),
      make_verdict("collision_frequency", freq.min_ratio, freq.a_value, freq.pass),
      make_verdict("conservation", drift, tol, drift <= tol)};

  const auto M = maxwellian_grid(grid_triple(f0), op.geometry_ptr());
  write_grid_trajectory(tr, M, out.path("trajectory.csv"), out.header);
  write_decomposition_csv(summary, out.path("decomposition.csv"), out.header);
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);

  ScenarioResult res;
  res.pass = all_pass(verdicts) && summary.pass;
  double worst_env = 0.0;
  for (const auto& r : summary.rows) worst_env = std::max(worst_env, r.l1_h / r.envelope_rhs);
  res.metrics = {{"max_identity_residual", summary.max_identity_residual},
                 {"min_node_value", summary.min_node_value},
                 {"damping_ordering", summary.damping_ordering},
                 {"h_envelope_ratio", worst_env},
                 {"a", freq.a_value},
                 {"frequency_min_ratio", freq.min_ratio},
                 {"drift", drift},
                 {"overflow_mass", tr.overflow_mass},
                 {"grid_n", p["n"]},
                 {"verdicts", verdicts_json(verdicts)}};
  res.summary = "identity=" + fmt(summary.max_identity_residual) + " min=" + fmt(summary.min_node_value) +
                " freq_ratio=" + fmt(freq.min_ratio) + "; " + verdict_summary(verdicts);
  return res;
}

Vec random_gaussian(std::mt19937_64& rng, int dim, double scale) {
  std::normal_distribution<double> nd;
  Vec v(dim);
  for (int d = 0; d < dim; ++d) v[d] = scale * nd(rng);
  return v;
}

struct PythagorasStats {
  std::size_t samples = 0;
  double worst_dot = 0.0;
  double worst_len = 0.0;
  bool ordered = true;
};

/// Samples configurations with K_B > 0 and checks the right angle at v and |w' - v_*| >= |v - v_*|.
PythagorasStats pythagoras_probe(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud;
  PythagorasStats s;
  const int dims[2] = {3, 5};
  std::size_t attempts = 0;
  while (s.samples < samples && attempts < 50 * samples) {
    const int dim = dims[attempts++ % 2];
    const Vec vs = random_gaussian(rng, dim, 2.0), w = random_gaussian(rng, dim, 2.0), ws = random_gaussian(rng, dim, 2.0);
    Vec n = random_gaussian(rng, dim, 1.0);
    n.normalize();
    const double d = (w - ws).norm();
    const double proj = n.dot(0.5 * (w + ws) - vs);
    const double lo = std::max(0.0, proj - 0.5 * d), hi = proj + 0.5 * d;
    if (hi <= lo) continue;
    const Vec v = vs + (lo + ud(rng) * (hi - lo)) * n;
    Vec omega = random_gaussian(rng, dim, 1.0);
    omega -= omega.dot(n) * n;
    omega.normalize();
    const auto geo = gain_geometry(v, vs, w, ws, omega);
    if (!geo || !(std::abs(geo->t) < 1.0)) continue;
    ++s.samples;
    const double scale = (v - vs).norm() * (v - geo->w_prime).norm() + 1e-300;
    s.worst_dot = std::max(s.worst_dot, std::abs((v - geo->w_prime).dot(v - vs)) / scale);
    const double lhs = (geo->w_prime - vs).squaredNorm();
    const double rhs = (v - vs).squaredNorm() + (v - geo->w_prime).squaredNorm();
    s.worst_len = std::max(s.worst_len, std::abs(lhs - rhs) / rhs);
    s.ordered = s.ordered && (geo->w_prime - vs).norm() >= (v - vs).norm() * (1.0 - 1e-12);
  }
  return s;
}

struct RepresentationCase {
  std::string name;
  KernelSpec spec;
  std::string psi;
  ParticleMeasure f, g, h;
};

std::vector<RepresentationCase> representation_battery() {
  std::vector<RepresentationCase> cases;
  const auto M3 = MaxwellianParams::standard(3);
  cases.push_back({"maxwellian_hs3_one", hard_spheres(3, 1.0), "one", maxwellian_sample(M3, 5, 1),
                   maxwellian_sample(M3, 5, 2), maxwellian_sample(M3, 5, 3)});
  Vec a = Vec::Zero(3), b = Vec::Zero(3);
  a[0] = 1.0;
  b[0] = -1.0;
  const MaxwellianMixture mix{{{0.5, a, 0.3}, {0.5, b, 1.2}}};
  cases.push_back({"mixture_hs3_energy", hard_spheres(3, 1.0), "energy", mix.sample(6, 4), mix.sample(6, 5),
                   mix.sample(6, 6)});
  cases.push_back({"maxwellian_poly3_bracket1",
                   normalize_b(make_kernel(3, 0.5, AngularFunction(AngularForm::Polynomial, {1.0, 0.0, 2.0}))),
                   "bracket:1", maxwellian_sample(M3, 5, 7), maxwellian_sample(M3, 5, 8), maxwellian_sample(M3, 5, 9)});
  cases.push_back({"maxwellian_gamma2_bracket", hard_spheres(3, 2.0), "bracket:2", maxwellian_sample(M3, 5, 10),
                   maxwellian_sample(M3, 5, 11), maxwellian_sample(M3, 5, 12)});
  const auto M4 = MaxwellianParams::standard(4);
  cases.push_back({"maxwellian_hs4_one", hard_spheres(4, 1.5), "one", maxwellian_sample(M4, 4, 13),
                   maxwellian_sample(M4, 4, 14), maxwellian_sample(M4, 4, 15)});
  return cases;
}

ScenarioResult run_gain_probe(const json& cfg, Output& out) {
  const auto& p = cfg["params"];
  const auto seed = cfg["seed"].get<std::uint64_t>();
  std::vector<ProbeRow> rows;
  std::vector<Verdict> verdicts;
  json metrics = json::object();
  for (const auto& probe : p["probes"]) {
    const std::string name = probe.get<std::string>();
    if (name == "pythagoras") {
      const auto s = pythagoras_probe(p["pythagoras_samples"].get<std::size_t>(), seed);
      const double tol = p["pythagoras_tol"].get<double>();
      rows.push_back({"pythagoras_right_angle", 0.0, 0.0, std::to_string(s.samples), s.worst_dot});
      rows.push_back({"pythagoras_length", 0.0, 0.0, std::to_string(s.samples), s.worst_len});
      verdicts.push_back(make_verdict("pythagoras", std::max(s.worst_dot, s.worst_len), tol,
                                      std::max(s.worst_dot, s.worst_len) <= tol && s.ordered &&
                                          s.samples == p["pythagoras_samples"].get<std::size_t>()));
      metrics["pythagoras"] = {{"samples", s.samples}, {"worst_dot", s.worst_dot}, {"worst_len", s.worst_len},
                               {"ordered", s.ordered}};
    } else if (name == "representation") {
      RepresentationOptions opt;
      opt.mc_samples = p["mc_samples"].get<std::size_t>();
      const double z_max = p["z_max"].get<double>();
      double worst = 0.0;
      json cases = json::array();
      std::uint64_t case_seed = seed;
      for (const auto& c : representation_battery()) {
        opt.seed = case_seed++;
        const auto r = representation_check(c.f, c.g, c.h, test_function(c.psi), c.spec, opt);
        rows.push_back({"representation_lhs", c.spec.gamma, 0.0, c.name, r.lhs});
        rows.push_back({"representation_rhs", c.spec.gamma, 0.0, c.name, r.rhs});
        rows.push_back({"representation_z", c.spec.gamma, 0.0, c.name, r.z_score});
        worst = std::max(worst, r.z_score);
        cases.push_back({{"case", c.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"sigma", r.sigma_mc}, {"z", r.z_score},
                         {"l1_bound", r.l1_bound}});
        verdicts.push_back(make_verdict("representation_" + c.name, r.z_score, z_max, r.z_score <= z_max));
        verdicts.push_back(make_verdict("representation_bound_" + c.name, r.lhs, r.l1_bound,
                                        c.psi != "one" || r.lhs <= r.l1_bound));
      }
      metrics["representation"] = {{"worst_z", worst}, {"cases", cases}};
    } else if (name == "lp") {
      const auto radii = p["lp_radii"].get<std::vector<double>>();
      const double tol = p["lp_tol"].get<double>();
      Vec vs(3), dir(3), offset(3);
      vs << 0.2, -0.1, 0.3;
      dir << 1.0, 1.0, 0.0;
      offset << 0.1, 0.0, 0.2;
      struct LpCase {
        std::string name;
        KernelSpec spec;
        double p;
        Vec offset;
      };
      const std::vector<LpCase> lp_cases{{"gamma_half_p_4/3", hard_spheres(3, 0.5), 4.0 / 3.0, Vec()},
                                         {"gamma_two_p_2", hard_spheres(3, 2.0), 2.0, offset}};
      json cases = json::array();
      for (const auto& c : lp_cases) {
        const auto r = lp_scaling_probe(vs, dir, c.p, c.spec, radii, LpResolution{}, c.offset);
        for (std::size_t i = 0; i < r.radii.size(); ++i)
          rows.push_back({"lp_norm", c.spec.gamma, c.p, fmt(r.radii[i]), r.norms[i]});
        rows.push_back({"lp_slope", c.spec.gamma, c.p, c.name, r.slope});
        rows.push_back({"lp_predicted", c.spec.gamma, c.p, c.name, r.predicted});
        const double err = std::abs(r.slope - r.predicted);
        verdicts.push_back(make_verdict("lp_" + c.name, err, tol, err <= tol));
        cases.push_back({{"case", c.name}, {"slope", r.slope}, {"predicted", r.predicted}});
      }
      metrics["lp"] = cases;
    } else {
      throw ConfigInvalid("/params/probes: unknown probe '" + name + "'");
    }
  }
  write_probe_csv(rows, out.path("probes.csv"), out.header);
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);
  ScenarioResult res;
  res.pass = all_pass(verdicts);
  metrics["verdicts"] = verdicts_json(verdicts);
  res.metrics = metrics;
  res.summary = verdict_summary(verdicts);
  return res;
}

ScenarioResult run_gap(const json& cfg, Output& out) {
  const auto spec = kernel_from_config(cfg["kernel"]);
  const auto& p = cfg["params"];
  const auto degrees = p["degrees"].get<std::vector<int>>();
  if (degrees.empty()) throw ConfigInvalid("/params/degrees: empty");
  const int l_max = p["l_max"].get<int>();
  const auto unit = MaxwellianParams::standard(spec.dim);
  std::vector<GapRow> rows;
  std::vector<Verdict> verdicts;
  std::vector<double> gaps;
  json per_degree = json::array();
  for (int D : degrees) {
    GalerkinBasis basis;
    basis.degree = D;
    basis.l_max = l_max;
    const auto g = spectral_gap(unit, spec, basis);
    const auto r = gap_rows(g, basis);
    rows.insert(rows.end(), r.begin(), r.end());
    gaps.push_back(g.lambda_hat);
    double kres = 0.0;
    for (double x : g.kernel_residuals) kres = std::max(kres, x);
    per_degree.push_back({{"degree", D}, {"lambda_hat", g.lambda_hat}, {"kernel_dim", g.kernel_dim},
                          {"kernel_residual", kres}, {"symmetry_error", g.symmetry_error}});
    verdicts.push_back(make_verdict("kernel_dim_D" + std::to_string(D), g.kernel_dim, spec.dim + 2,
                                    g.kernel_dim == spec.dim + 2));
    verdicts.push_back(make_verdict("gap_positive_D" + std::to_string(D), g.lambda_hat, 0.0, g.lambda_hat > 0.0));
  }
  double stability = 0.0;
  for (std::size_t i = 1; i < gaps.size(); ++i)
    stability = std::max(stability, std::abs(gaps[i] / gaps[i - 1] - 1.0));
  verdicts.push_back(make_verdict("basis_stability", stability, p["stability_tol"].get<double>(),
                                  stability <= p["stability_tol"].get<double>()));

  GalerkinBasis base;
  base.degree = degrees.front();
  base.l_max = l_max;
  std::ofstream sc(out.path("scaling.csv"));
  sc << out.header << '\n' << "rho,u,T,gap_ref,gap,ratio,expected,pass\n";
  json scaling = json::array();
  for (const auto& pair : p["scaling_pairs"]) {
    const auto v = pair.get<std::vector<double>>();
    if (v.size() != 3) throw ConfigInvalid("/params/scaling_pairs: entries are [rho, u, T]");
    Vec u = Vec::Zero(spec.dim);
    u[0] = v[1];
    const auto c = gap_scaling_check(unit, {v[0], u, v[2]}, spec, base, p["scaling_tol"].get<double>());
    sc << fmt(v[0]) << ',' << fmt(v[1]) << ',' << fmt(v[2]) << ',' << fmt(c.gap1) << ',' << fmt(c.gap2) << ','
       << fmt(c.ratio) << ',' << fmt(c.expected) << ',' << (c.pass ? 1 : 0) << '\n';
    verdicts.push_back(make_verdict("scaling_" + fmt(v[0]) + "_" + fmt(v[1]) + "_" + fmt(v[2]),
                                    std::abs(c.ratio / c.expected - 1.0), p["scaling_tol"].get<double>(), c.pass));
    scaling.push_back({{"pair", v}, {"ratio", c.ratio}, {"expected", c.expected}});
  }
  write_gap_csv(rows, out.path("gap.csv"), out.header);
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);
  ScenarioResult res;
  res.pass = all_pass(verdicts);
  res.metrics = {{"degrees", per_degree}, {"lambda_hat", gaps.back()}, {"basis_stability", stability},
                 {"scaling", scaling}, {"verdicts", verdicts_json(verdicts)}};
  res.summary = "gap=" + fmt(gaps.back()) + " stability=" + fmt(stability) + "; " + verdict_summary(verdicts);
  return res;
}

MaxwellianMixture random_mixture(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> w(0.1, 1.0), t(0.2, 2.0), u(-1.5, 1.5);
  std::uniform_int_distribution<int> k(2, 3);
  MaxwellianMixture m;
  const int count = k(rng);
  for (int c = 0; c < count; ++c) {
    Vec mean(dim);
    for (int d = 0; d < dim; ++d) mean[d] = u(rng);
    m.components.push_back({w(rng), mean, t(rng)});
  }
  return m.normalized();
}

ScenarioResult run_constants(const json& cfg, Output& out) {
  const auto spec = kernel_from_config(cfg["kernel"]);
  const auto& p = cfg["params"];
  const double a2 = spec.a2 * p["a2_scale"].get<double>();
  const double mass = p["mass"].get<double>(), en = p["energy_norm"].get<double>(), T = p["T"].get<double>();
  const double rho = p["rho"].get<double>();
  auto report = make_envelope_report(spec.dim, spec.gamma, a2, mass, en, T, p["t0"].get<double>(), p["s0"].get<double>());
  const auto quad = lower_envelope_params(rho, T, 2.0, spec.dim);
  const auto sub = lower_envelope_params(rho, T, 1.0, spec.dim);
  const double d0 = stability_threshold(rho, T, en, spec.dim);

  // weighted-from-L1 inequality on random normalized mixtures
  const int n_ineq = p["inequality_samples"].get<int>();
  const auto geom = GridGeometry::make(spec.dim, p["inequality_n"].get<int>(), p["inequality_R"].get<double>());
  const auto M = maxwellian_grid(MaxwellianParams::standard(spec.dim), geom);
  std::mt19937_64 rng(cfg["seed"].get<std::uint64_t>());
  std::ofstream iq(out.path("inequality.csv"));
  iq << out.header << '\n' << "sample,d0,d2,bound,pass\n";
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < n_ineq; ++i) {
    const auto F = random_mixture(rng, spec.dim).grid(geom);
    const double l0 = grid_distance(F, M, 0.0), l2 = grid_distance(F, M, 2.0);
    const double bound = weighted_from_l1_bound(l0, spec.dim);
    worst = std::max(worst, l2 / bound);
    failures += l2 > bound;
    iq << i << ',' << fmt(l0) << ',' << fmt(l2) << ',' << fmt(bound) << ',' << (l2 <= bound ? 1 : 0) << '\n';
  }
  // atomic F against M: ||F - M||_0 = 2 and ||F - M||_2 = 2(1 + N) exactly
  const double atomic_rhs = weighted_from_l1_bound(2.0, spec.dim);
  const double atomic_margin = atomic_rhs / (2.0 * (1.0 + spec.dim)) - 1.0;
  iq << "atomic," << fmt(2.0) << ',' << fmt(2.0 * (1.0 + spec.dim)) << ',' << fmt(atomic_rhs) << ",1\n";

  json rep = to_json(report);
  rep["constants"] = {{"K3", k_s(3.0, mass, en, a2, spec.gamma)},
                      {"K4", k_s(4.0, mass, en, a2, spec.gamma)},
                      {"a", report.a},
                      {"alpha_gamma1", sub.alpha},
                      {"beta_gamma1", sub.beta},
                      {"kappa_gamma2", quad.kappa},
                      {"D0", d0},
                      {"C_tau1", restart_growth_rate(1.0, mass, en, a2, spec.gamma)}};
  rep["inequality"] = {{"samples", n_ineq}, {"worst_ratio", worst}, {"failures", failures},
                       {"atomic_margin", atomic_margin}};
  out.write_json("report.json", rep, {});

  ScenarioResult res;
  res.pass = failures == 0 && atomic_margin >= 0.38;
  res.metrics = rep["constants"];
  res.metrics["inequality"] = rep["inequality"];
  res.summary = "K3=" + fmt(res.metrics["K3"].get<double>()) + " K4=" + fmt(res.metrics["K4"].get<double>()) + " a=" + fmt(report.a) +
                " D0=" + fmt(d0) + " inequality worst=" + fmt(worst);
  return res;
}

ScenarioResult run_stability_twin(const json& cfg, Output& out) {
  const auto spec = kernel_from_config(cfg["kernel"]);
  const auto& p = cfg["params"];
  const std::string mode = p["mode"];
  if (mode != "calibrate" && mode != "verify") throw ConfigInvalid("/params/mode: expected calibrate or verify");
  const json locked_setup = {{"n", p["n"]}, {"R", p["R"]}, {"dt", p["dt"]}, {"t_end", p["t_end"]},
                             {"sphere_t", p["sphere_t"]}, {"sphere_phi", p["sphere_phi"]}, {"kernel", cfg["kernel"]},
                             {"init", cfg["init"]}};
  StabilityCalibration cal;
  const std::string cal_path = p["calibration"];
  if (mode == "verify") {
    std::ifstream in(cal_path);
    if (!in) throw ConfigInvalid("/params/calibration: cannot open " + cal_path + " (run with mode=calibrate first)");
    const json golden = json::parse(in, nullptr, false);
    if (golden.is_discarded()) throw ConfigInvalid(cal_path + ": not valid JSON");
    if (golden.value("setup", json()) != locked_setup)
      throw ConfigInvalid(cal_path + ": calibration was locked for a different grid, kernel or initial datum");
    cal = calibration_from_json(golden.at("calibration"));
  }

  const auto op = make_grid_op(p, spec);
  const auto opts = evolve_options(p);
  const auto F0 = grid_from_init(cfg["init"], op.geometry_ptr());
  const auto F = evolve(F0, op, opts);
  const int dim = spec.dim;
  Vec a = Vec::Zero(dim), b = Vec::Zero(dim);
  a[dim - 1] = 0.5;
  b[0] = -0.8;
  const auto Pa = maxwellian_grid({1.0, a, 0.8}, op.geometry_ptr());
  const auto Pb = maxwellian_grid({1.0, b, 0.3}, op.geometry_ptr());
  auto perturbed = [&](const GridDensity& P, double eps) { return (1.0 - eps) * F0 + eps * P; };

  std::ofstream tw(out.path("twin.csv"));
  tw << out.header << '\n' << "role,eps,r,psi,sup_distance,modulus,short_ratio,pass\n";
  std::vector<TwinRun> calib_runs;
  if (mode == "calibrate") {
    for (double eps : p["calibration_eps"].get<std::vector<double>>())
      calib_runs.push_back(twin_run(F, perturbed(Pa, eps), op, opts));
    cal = calibrate_stability(calib_runs, p["short_horizon"].get<double>(), p["safety"].get<double>());
  }
  std::vector<Verdict> verdicts;
  auto record = [&](const std::string& role, double eps, const TwinRun& run) {
    const auto v = twin_run_stability(run, cal);
    tw << role << ',' << fmt(eps) << ',' << fmt(run.r) << ',' << fmt(run.psi) << ',' << fmt(v.sup_distance) << ','
       << fmt(v.modulus_value) << ',' << fmt(v.short_ratio) << ',' << (v.pass ? 1 : 0) << '\n';
    verdicts.push_back(make_verdict(role + "_modulus_" + fmt(eps), v.sup_distance, v.modulus_value, v.pass_modulus));
    verdicts.push_back(make_verdict(role + "_short_" + fmt(eps), v.short_ratio, 1.0, v.pass_short));
  };
  const auto cal_eps = p["calibration_eps"].get<std::vector<double>>();
  for (std::size_t i = 0; i < calib_runs.size(); ++i) record("calibration", cal_eps[i], calib_runs[i]);
  if (mode == "verify") {
    record("identical", 0.0, twin_run(F, F0, op, opts));
    for (double eps : p["verify_eps"].get<std::vector<double>>()) record("verify", eps, twin_run(F, perturbed(Pb, eps), op, opts));
  }
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);
  const json cal_json = {{"calibration", to_json(cal)}, {"setup", locked_setup}};
  out.write_json("calibration.json", cal_json, {});
  if (mode == "calibrate") {
    // lock: the golden file is what later verify runs read
    if (fs::path(cal_path).has_parent_path()) fs::create_directories(fs::path(cal_path).parent_path());
    std::ofstream golden(cal_path);
    golden << cal_json.dump(2) << '\n';
    out.files.push_back(cal_path);
  }
  ScenarioResult res;
  res.pass = all_pass(verdicts);
  res.metrics = {{"mode", mode}, {"calibration", to_json(cal)}, {"verdicts", verdicts_json(verdicts)}};
  res.summary = mode + " C=" + fmt(cal.C) + " eta=" + fmt(cal.eta) + " C_short=" + fmt(cal.C_short) + "; " +
                verdict_summary(verdicts);
  return res;
}

ScenarioResult run_mehler_probe(const json& cfg, Output& out) {
  const int dim = cfg["kernel"]["N"].get<int>();
  const auto& p = cfg["params"];
  const auto seed = cfg["seed"].get<std::uint64_t>();
  const auto count = p["samples"].get<std::size_t>();
  const bool maxwellian = cfg["init"]["type"] == "maxwellian";
  const auto F = particles_from_init(cfg["init"], dim, maxwellian ? count : 4096, seed);
  const auto tri = conserved_triple(F);
  // exact targets: the Maxwellian's own parameters, else the moments of F itself
  MaxwellianParams target = tri;
  double m4_target = 0.0;
  if (maxwellian) {
    target = {cfg["init"]["rho"].get<double>(), vec_from(cfg["init"]["u"], dim, "/init/u"), cfg["init"]["T"].get<double>()};
    m4_target = dim * (dim + 2.0) * target.T * target.T;
  }
  const double z_max = p["z_max"].get<double>();
  const BinSpec bins{p["bins_h"].get<double>(), p["bins_R"].get<double>()};
  std::ofstream mc(out.path("mehler.csv"));
  mc << out.header << '\n' << "n,rho,";
  for (int d = 0; d < dim; ++d) mc << "u" << d << ',';
  mc << "T,m4,z_u,z_T,z_m4,dist_binned\n";
  std::vector<Verdict> verdicts;
  double prev = INFINITY, worst_z = 0.0;
  bool monotone = true;
  std::uint64_t s = seed + 1000;
  for (double n : p["n_values"].get<std::vector<double>>()) {
    const auto I = mehler_sample(F, n, count, s++);
    const auto q = conserved_triple(I);
    // standard errors from the sample itself
    double var_c = 0.0, m2 = 0.0, m4 = 0.0, m8 = 0.0;
    const double W = I.mass();
    for (std::size_t i = 0; i < I.size(); ++i) {
      const double w = I.weight(i) / W;
      const Vec c = I.atom(i) - target.u;
      const double r2 = c.squaredNorm();
      var_c += w * r2;
      m2 += w * r2 * r2;
      m4 += w * r2 * r2;
      m8 += w * r2 * r2 * r2 * r2;
    }
    const double cnt = static_cast<double>(I.size());
    const double se_u = std::sqrt(var_c / dim / cnt);
    const double se_T = std::sqrt(std::max(m2 - var_c * var_c, 0.0) / cnt) / dim;
    const double se_m4 = std::sqrt(std::max(m8 - m4 * m4, 0.0) / cnt);
    const double z_u = (q.u - target.u).cwiseAbs().maxCoeff() / se_u;
    const double z_T = std::abs(q.T - target.T) / se_T;
    const double z_m4 = maxwellian ? std::abs(m4 - m4_target) / se_m4 : 0.0;
    const double dist = maxwellian ? 0.0 : measure_distance(I, F, 0.0, DistanceScheme::Binned, bins);
    mc << fmt(n) << ',' << fmt(q.rho) << ',';
    for (int d = 0; d < dim; ++d) mc << fmt(q.u[d]) << ',';
    mc << fmt(q.T) << ',' << fmt(m4) << ',' << fmt(z_u) << ',' << fmt(z_T) << ',' << fmt(z_m4) << ',' << fmt(dist) << '\n';
    const double z = std::max({z_u, z_T, z_m4});
    worst_z = std::max(worst_z, z);
    verdicts.push_back(make_verdict("clt_n" + fmt(n), z, z_max, z <= z_max));
    verdicts.push_back(make_verdict("mass_n" + fmt(n), std::abs(q.rho - target.rho), 1e-12 * target.rho,
                                    std::abs(q.rho - target.rho) <= 1e-12 * target.rho));
    if (!maxwellian) {
      monotone = monotone && dist < prev;
      prev = dist;
    }
  }
  if (!maxwellian) verdicts.push_back(make_verdict("monotone_distance", monotone ? 1.0 : 0.0, 1.0, monotone));
  write_verdict_csv(verdicts, out.path("verdicts.csv"), out.header);
  ScenarioResult res;
  res.pass = all_pass(verdicts);
  res.metrics = {{"worst_z", worst_z}, {"monotone", monotone}, {"final_distance", maxwellian ? 0.0 : prev},
                 {"verdicts", verdicts_json(verdicts)}};
  res.summary = "worst z=" + fmt(worst_z) + "; " + verdict_summary(verdicts);
  return res;
}

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"relax_dsmc", run_relax_dsmc}, {"relax_dvm", run_relax_dvm},         {"decompose", run_decompose},
      {"gain_probe", run_gain_probe}, {"gap", run_gap},                     {"constants", run_constants},
      {"stability_twin", run_stability_twin}, {"mehler_probe", run_mehler_probe}};
  return table;
}

}  // namespace

ScenarioResult run_scenario(const json& config, const std::string& out_dir) {
  const json cfg = resolve_config(config);
  const std::string hash = config_hash(cfg);
  if (cfg["workers"].get<int>() > 0) set_workers(cfg["workers"].get<int>());
  Output out;
  out.dir = out_dir.empty() ? fs::path(cfg["output"].get<std::string>()) : fs::path(out_dir);
  out.header = "# boltz " + version_string() + " config " + hash;
  fs::create_directories(out.dir);
  const json meta = {{"version", version_string()}, {"config_hash", hash}};
  ScenarioResult res = runners().at(cfg["scenario"].get<std::string>())(cfg, out);
  res.scenario = cfg["scenario"];
  // json outputs carry the header as a field
  for (const auto& f : out.files) {
    if (fs::path(f).extension() != ".json" || !fs::exists(f)) continue;
    std::ifstream in(f);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    in.close();
    j["meta"] = meta;
    std::ofstream o(f);
    o << j.dump(2) << '\n';
  }
  json resolved = cfg;
  resolved["meta"] = meta;
  std::ofstream(out.dir / "config.resolved.json") << resolved.dump(2) << '\n';
  out.files.push_back((out.dir / "config.resolved.json").string());
  res.files = out.files;
  return res;
}

}  // namespace boltz
