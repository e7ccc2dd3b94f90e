#pragma once

// Run orchestration: named scenarios, JSON run configuration, single runs
// with energy/criterion diagnostics, and concurrent viscosity sweeps with the
// two-sided consistency verdict.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vvlab/corrector.hpp"
#include "vvlab/diagnostics.hpp"
#include "vvlab/euler.hpp"
#include "vvlab/fitting.hpp"
#include "vvlab/geometry.hpp"
#include "vvlab/report.hpp"
#include "vvlab/snapshot.hpp"
#include "vvlab/solver.hpp"

namespace vvlab {

/// Raised for malformed or inconsistent run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// scenarios
// ---------------------------------------------------------------------------

/// Names a reference solution plus the shared initial data.  The viscous run
/// always starts from the reference's own t = 0 fields.
struct ScenarioSpec {
  std::string name = "rest";  ///< rest | shear-sine | shear-cosine
  double amplitude = 1.0;
  int mode = 2;
  double rho_contrast = 0.0;

  bool operator==(const ScenarioSpec&) const = default;
};

inline EulerSolution make_solution(const ScenarioSpec& sc, const Domain& dom) {
  try {
    if (sc.name == "rest") return rest_state(dom);
    if (sc.name == "shear-sine") return steady_shear(dom, sc.amplitude, sc.mode, sc.rho_contrast);
    if (sc.name == "shear-cosine")
      return steady_cosine_shear(dom, sc.amplitude, sc.mode, sc.rho_contrast);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario \"") + sc.name + "\": " + e.what());
  }
  throw ConfigError("unknown scenario \"" + sc.name +
                    "\"; expected rest, shear-sine, or shear-cosine");
}

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  ScenarioSpec scenario;
  double nu = 0.01;
  int nx = 8;
  int ny = 128;
  double beta = 0.0;
  double length_x = 1.0;
  double length_y = 1.0;
  double horizon = 1.0;
  double cfl = 0.4;
  double poisson_tol = 1e-10;
  std::string output_dir;          ///< empty disables file artifacts
  double output_interval = 0.01;   ///< diagnostic sampling period
  unsigned seed = 2024;            ///< feeds randomized inequality families
  double dt_max = 1e-3;
  bool timings = false;            ///< off keeps wall_clock at 0 for byte-stable CSVs

  bool operator==(const RunConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = nlohmann::json{{"name", s.name},
                     {"amplitude", s.amplitude},
                     {"mode", s.mode},
                     {"rho_contrast", s.rho_contrast}};
}

inline void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  static const char* known[] = {"name", "amplitude", "mode", "rho_contrast"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return item.key() == k; }) == std::end(known))
      throw ConfigError("scenario: unknown key \"" + item.key() + "\"");
  }
  s.name = j.at("name").get<std::string>();
  s.amplitude = j.value("amplitude", 1.0);
  s.mode = j.value("mode", 2);
  s.rho_contrast = j.value("rho_contrast", 0.0);
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"scenario", c.scenario},
                     {"nu", c.nu},
                     {"grid",
                      {{"nx", c.nx},
                       {"ny", c.ny},
                       {"beta", c.beta},
                       {"length_x", c.length_x},
                       {"length_y", c.length_y}}},
                     {"horizon", c.horizon},
                     {"cfl", c.cfl},
                     {"poisson_tol", c.poisson_tol},
                     {"output_dir", c.output_dir},
                     {"output_interval", c.output_interval},
                     {"seed", c.seed},
                     {"dt_max", c.dt_max},
                     {"timings", c.timings}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  static const char* known[] = {"scenario", "nu",   "grid",           "horizon",
                                "cfl",      "poisson_tol", "output_dir",
                                "output_interval", "seed", "dt_max", "timings"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return item.key() == k; }) == std::end(known))
      throw ConfigError("run config: unknown key \"" + item.key() + "\"");
  }
  c.scenario = j.at("scenario").get<ScenarioSpec>();
  c.nu = j.at("nu").get<double>();
  const auto& g = j.at("grid");
  for (const auto& item : g.items()) {
    static const char* gk[] = {"nx", "ny", "beta", "length_x", "length_y"};
    if (std::find_if(std::begin(gk), std::end(gk),
                     [&](const char* k) { return item.key() == k; }) == std::end(gk))
      throw ConfigError("run config: unknown grid key \"" + item.key() + "\"");
  }
  c.nx = g.at("nx").get<int>();
  c.ny = g.at("ny").get<int>();
  c.beta = g.value("beta", 0.0);
  c.length_x = g.value("length_x", 1.0);
  c.length_y = g.value("length_y", 1.0);
  c.horizon = j.at("horizon").get<double>();
  c.cfl = j.value("cfl", 0.4);
  c.poisson_tol = j.value("poisson_tol", 1e-10);
  c.output_dir = j.value("output_dir", std::string());
  c.output_interval = j.value("output_interval", 0.01);
  c.seed = j.value("seed", 2024u);
  c.dt_max = j.value("dt_max", 1e-3);
  c.timings = j.value("timings", false);
}

inline void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("run config: " + msg);
  };
  require(c.nx >= 4 && c.ny >= 4, "grid must be at least 4x4");
  require(c.beta >= 0.0 && std::isfinite(c.beta), "beta must be finite and nonnegative");
  require(c.length_x > 0.0 && c.length_y > 0.0, "domain lengths must be positive");
  require(std::isfinite(c.nu) && c.nu > 0.0, "nu must be positive");
  require(std::isfinite(c.horizon) && c.horizon > 0.0, "horizon must be positive");
  require(c.cfl > 0.0 && c.cfl <= 1.0, "cfl must lie in (0, 1]");
  require(c.poisson_tol > 0.0, "poisson_tol must be positive");
  require(c.output_interval > 0.0, "output_interval must be positive");
  require(c.dt_max > 0.0, "dt_max must be positive");
  require(std::isfinite(c.scenario.amplitude), "scenario amplitude must be finite");
  // constructing the catalog entry validates mode and density contrast
  make_solution(c.scenario, Domain{c.length_x, c.length_y});
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  RunConfig cfg;
  try {
    cfg = nlohmann::json::parse(is).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  validate(cfg);
  return cfg;
}

/// A sweep file is a run config whose "nu" is replaced by a "nus" array in
/// descending order; every other field is shared.  Each run gets its own
/// output subdirectory when output_dir is set.
inline std::vector<RunConfig> load_sweep_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  std::vector<double> nus;
  RunConfig base;
  try {
    j = nlohmann::json::parse(is);
    if (!j.contains("nus")) throw ConfigError(path + ": sweep config needs a \"nus\" array");
    nus = j.at("nus").get<std::vector<double>>();
    j.erase("nus");
    j.erase("nu");
    j["nu"] = 1.0;  // placeholder; replaced per run below
    base = j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  std::vector<RunConfig> configs;
  for (double nu : nus) {
    RunConfig cfg = base;
    cfg.nu = nu;
    if (!base.output_dir.empty()) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "%g", nu);
      cfg.output_dir = base.output_dir + "/nu_" + tag;
    }
    validate(cfg);
    configs.push_back(cfg);
  }
  return configs;
}

// ---------------------------------------------------------------------------
// single run
// ---------------------------------------------------------------------------

/// Cells whose full extent lies inside the wall strip of the given width, on
/// the less-resolved of the two walls.
inline int cells_inside_strip(const Grid& g, double thickness) {
  int bottom = 0;
  while (bottom < g.ny && g.y_face[bottom + 1] <= thickness * (1.0 + 1e-12)) ++bottom;
  int top = 0;
  while (top < g.ny && g.domain.length_y - g.y_face[g.ny - 1 - top] <= thickness * (1.0 + 1e-12))
    ++top;
  return std::min(bottom, top);
}

struct RunResult {
  SweepRecord record;
  std::vector<DiagnosticRow> diagnostics;
  /// Largest per-step relative excess of kinetic energy plus dissipation over
  /// the previous step's kinetic energy; <= 0 means the discrete energy
  /// inequality held at every step.
  double energy_max_violation = 0.0;
};

namespace detail {

inline double max_energy_violation(const EnergyLedger& ledger) {
  const double scale = std::max(ledger.kinetic.empty() ? 0.0 : ledger.kinetic.front(), 1e-300);
  double worst = 0.0;
  for (size_t k = 1; k < ledger.kinetic.size(); ++k) {
    const double excess = ledger.kinetic[k] - ledger.kinetic[k - 1] +
                          (ledger.dissipation_total[k] - ledger.dissipation_total[k - 1]);
    worst = std::max(worst, excess / scale);
  }
  return worst;
}

inline std::string grid_descriptor(const RunConfig& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%dx%d beta=%g", c.nx, c.ny, c.beta);
  return buf;
}

}  // namespace detail

inline RunResult run_single(const RunConfig& cfg) {
  validate(cfg);
  const Domain dom{cfg.length_x, cfg.length_y};
  const Grid grid = build_grid(dom, cfg.nx, cfg.ny, cfg.beta);
  const int strip_cells = cells_inside_strip(grid, cfg.nu);
  if (strip_cells < 6)
    throw ConfigError("run config: grid does not resolve nu = " + std::to_string(cfg.nu) +
                      "; only " + std::to_string(strip_cells) +
                      " cells fit inside the wall strip, need 6 (raise ny or beta)");
  const EulerSolution sol = make_solution(cfg.scenario, dom);

  StepperSettings st;
  st.cfl = cfg.cfl;
  st.dt_max = cfg.dt_max;
  st.poisson_tol = cfg.poisson_tol;

  const auto t_start = std::chrono::steady_clock::now();

  FlowState state;
  EnergyLedger ledger;
  try {
    state = initial_state(grid, sol, cfg.nu, st);
    ledger.layer_thickness = cfg.nu;
    ledger.start(state);
  } catch (const std::exception& e) {
    throw SolverError("run " + cfg.scenario.name + " nu=" + std::to_string(cfg.nu) +
                      ": " + e.what());
  }
  const FlowState initial = state;
  const CorrectorField corr = build_corrector(grid, sol, 0.0, cfg.nu);
  GronwallAudit audit(sol, corr, kHardyConstant);

  const double limit = stable_dt(state, st);
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(cfg.horizon / limit)));
  const double dt = cfg.horizon / static_cast<double>(steps);
  const long stride = std::max<long>(1, std::lround(cfg.output_interval / dt));

  audit.add(state);
  try {
    for (long n = 1; n <= steps; ++n) {
      state = step(state, dt, st, &ledger);
      if (n % stride == 0 || n == steps) audit.add(state);
    }
  } catch (const std::exception& e) {
    throw SolverError("run " + cfg.scenario.name + " nu=" + std::to_string(cfg.nu) + " at t=" +
                      std::to_string(state.t) + ": " + e.what());
  }

  RunResult out;
  const auto& energies = audit.energies();
  const auto& terms = audit.samples();
  out.diagnostics.reserve(energies.size());
  double e_sup = 0.0;
  for (size_t k = 0; k < energies.size(); ++k) {
    DiagnosticRow row;
    row.t = energies[k].t;
    row.e1 = energies[k].e1;
    row.e2 = energies[k].e2;
    row.e_total = energies[k].total();
    row.diss_total = ledger.dissipation_at(row.t, false);
    row.diss_layer = ledger.dissipation_at(row.t, true);
    row.i1 = terms[k].i1;
    row.i2 = terms[k].i2;
    row.i3 = terms[k].i3;
    row.i4 = terms[k].i4;
    row.i5 = terms[k].i5;
    row.hardy_bound = terms[k].hardy_bound;
    e_sup = std::max(e_sup, row.e_total);
    out.diagnostics.push_back(row);
  }

  out.record.nu = cfg.nu;
  out.record.e1_final = energies.back().e1;
  out.record.e2_final = energies.back().e2;
  out.record.e_sup = e_sup;
  out.record.kato_d = ledger.dissipation_layer.back();
  out.record.diss_total = ledger.dissipation_total.back();
  out.record.gronwall_max_violation = audit.max_violation();
  out.record.grid_descriptor = detail::grid_descriptor(cfg);
  out.energy_max_violation = detail::max_energy_violation(ledger);
  if (cfg.timings) {
    const auto t_end = std::chrono::steady_clock::now();
    out.record.wall_clock = std::chrono::duration<double>(t_end - t_start).count();
  }

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw SolverError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_flow((dir / "initial.flow").string(), initial);
    write_flow((dir / "final.flow").string(), state);
    write_diagnostic_csv(out.diagnostics, (dir / "diagnostics.csv").string());
  }
  return out;
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

struct SweepSummary {
  std::vector<RunResult> runs;        ///< ordered as the configs (descending nu)
  std::vector<SweepRecord> records;   ///< the runs' records, same order
  std::optional<RateFit> e_sup_fit, e1_fit, e2_fit, kato_fit;
  std::string verdict;                ///< CONSISTENT | INCONSISTENT | TRIVIALLY CONSISTENT
  std::string regime;                 ///< "homogeneous regime" | "variable density"
  double energy_max_violation = 0.0;
};

namespace detail {

/// Power-law fit of a sweep series, or nullopt when the series touches zero
/// (identically-at-rest quantities have no rate).
inline std::optional<RateFit> sweep_fit(const std::vector<double>& values,
                                        const std::vector<double>& nus) {
  for (double v : values)
    if (!(v > 0.0)) return std::nullopt;
  return fit_rate(values, nus);
}

}  // namespace detail

/// Two-sided check: the relative energy and the layer dissipation must vanish
/// together.  Flag only a clear split: one series demonstrably trending to
/// zero (good power-law fit with positive rate, or identically zero) while
/// the other demonstrably is not.  Both identically zero is the rest case,
/// consistent for free.
inline std::string consistency_verdict(const std::optional<RateFit>& e_sup_fit,
                                       const std::optional<RateFit>& kato_fit) {
  auto trending = [](const std::optional<RateFit>& f) {
    return !f.has_value() || (f->slope > 0.1 && f->max_residual < 0.2);
  };
  auto flat = [](const std::optional<RateFit>& f) { return f.has_value() && f->slope < 0.02; };
  if (!e_sup_fit.has_value() && !kato_fit.has_value()) return "TRIVIALLY CONSISTENT";
  if ((trending(e_sup_fit) && flat(kato_fit)) || (trending(kato_fit) && flat(e_sup_fit)))
    return "INCONSISTENT";
  return "CONSISTENT";
}

inline SweepSummary run_sweep(const std::vector<RunConfig>& configs, int workers = 1) {
  if (configs.size() < 3)
    throw ConfigError("run_sweep: need at least 3 viscosities, got " +
                      std::to_string(configs.size()));
  for (size_t k = 1; k < configs.size(); ++k) {
    if (!(configs[k].scenario == configs.front().scenario))
      throw ConfigError("run_sweep: configs mix scenarios (\"" + configs.front().scenario.name +
                        "\" vs \"" + configs[k].scenario.name + "\")");
    if (configs[k].horizon != configs.front().horizon)
      throw ConfigError("run_sweep: configs must share the horizon");
    if (!(configs[k].nu < configs[k - 1].nu))
      throw ConfigError("run_sweep: viscosities must be strictly descending");
  }

  const size_t n = configs.size();
  std::vector<RunResult> results(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
      try {
        results[i] = run_single(configs[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int pool = std::clamp<int>(workers, 1, static_cast<int>(n));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int w = 0; w < pool; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (size_t i = 0; i < n; ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);

  SweepSummary out;
  out.runs = std::move(results);
  std::vector<double> nus, e_sup, e1, e2, kato;
  for (const auto& r : out.runs) {
    out.records.push_back(r.record);
    nus.push_back(r.record.nu);
    e_sup.push_back(r.record.e_sup);
    e1.push_back(r.record.e1_final);
    e2.push_back(r.record.e2_final);
    kato.push_back(r.record.kato_d);
    out.energy_max_violation = std::max(out.energy_max_violation, r.energy_max_violation);
  }
  out.e_sup_fit = detail::sweep_fit(e_sup, nus);
  out.e1_fit = detail::sweep_fit(e1, nus);
  out.e2_fit = detail::sweep_fit(e2, nus);
  out.kato_fit = detail::sweep_fit(kato, nus);

  out.verdict = consistency_verdict(out.e_sup_fit, out.kato_fit);
  bool homogeneous = true;
  for (const auto& c : configs) homogeneous = homogeneous && c.scenario.rho_contrast == 0.0;
  out.regime = homogeneous ? "homogeneous regime" : "variable density";
  return out;
}

}  // namespace vvlab
