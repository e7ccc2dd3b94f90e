#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vvlab/report.hpp"
#include "vvlab/snapshot.hpp"
#include "vvlab/sweep.hpp"

using namespace vvlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "vvlab-sweep-tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream os(p, std::ios::binary);
  os << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig quick_rest_config() {
  RunConfig cfg;
  cfg.scenario.name = "rest";
  cfg.nu = 0.1;
  cfg.nx = 4;
  cfg.ny = 128;
  cfg.horizon = 0.01;
  return cfg;
}

void check_records_equal(const SweepRecord& a, const SweepRecord& b) {
  CHECK(a.nu == b.nu);
  CHECK(a.e1_final == b.e1_final);
  CHECK(a.e2_final == b.e2_final);
  CHECK(a.e_sup == b.e_sup);
  CHECK(a.kato_d == b.kato_d);
  CHECK(a.diss_total == b.diss_total);
  CHECK(a.gronwall_max_violation == b.gronwall_max_violation);
  CHECK(a.wall_clock == b.wall_clock);
}

}  // namespace

TEST_CASE("run configurations survive a JSON round trip unchanged") {
  RunConfig cfg;
  cfg.scenario = {"shear-cosine", 1.7, 3, 0.45};
  cfg.nu = 0.037;
  cfg.nx = 12;
  cfg.ny = 96;
  cfg.beta = 1.8;
  cfg.length_x = 2.0;
  cfg.length_y = 1.5;
  cfg.horizon = 0.75;
  cfg.cfl = 0.3;
  cfg.poisson_tol = 1e-11;
  cfg.output_dir = "out/some/dir";
  cfg.output_interval = 0.02;
  cfg.seed = 99;
  cfg.dt_max = 5e-4;
  cfg.timings = true;

  const nlohmann::json j = cfg;
  const RunConfig back = j.get<RunConfig>();
  CHECK(back == cfg);
}

TEST_CASE("config files with unknown or missing keys are refused with context") {
  const std::string good = R"({
    "scenario": {"name": "shear-sine", "mode": 2},
    "nu": 0.05, "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128}
  })";
  CHECK_NOTHROW(load_run_config(write_text("good.json", good).string()));

  const std::string misspelled = R"({
    "scenario": {"name": "rest"},
    "viscosity": 0.05, "nu": 0.05, "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128}
  })";
  CHECK_THROWS_MATCHES(load_run_config(write_text("bad1.json", misspelled).string()), ConfigError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("viscosity")));

  const std::string bad_grid_key = R"({
    "scenario": {"name": "rest"},
    "nu": 0.05, "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128, "stretch": 2}
  })";
  CHECK_THROWS_AS(load_run_config(write_text("bad2.json", bad_grid_key).string()), ConfigError);

  const std::string no_nu = R"({
    "scenario": {"name": "rest"}, "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128}
  })";
  CHECK_THROWS_AS(load_run_config(write_text("bad3.json", no_nu).string()), ConfigError);

  const std::string bad_scenario_key = R"({
    "scenario": {"name": "rest", "speed": 3},
    "nu": 0.05, "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128}
  })";
  CHECK_THROWS_AS(load_run_config(write_text("bad4.json", bad_scenario_key).string()), ConfigError);

  CHECK_THROWS_AS(load_run_config((scratch_dir() / "no-such-file.json").string()), ConfigError);
}

TEST_CASE("validation walks every numeric gate") {
  const RunConfig good = quick_rest_config();
  CHECK_NOTHROW(validate(good));

  auto broken = [&](auto mutate) {
    RunConfig c = good;
    mutate(c);
    CHECK_THROWS_AS(validate(c), ConfigError);
  };
  broken([](RunConfig& c) { c.nx = 3; });
  broken([](RunConfig& c) { c.ny = 2; });
  broken([](RunConfig& c) { c.beta = -1.0; });
  broken([](RunConfig& c) { c.length_y = 0.0; });
  broken([](RunConfig& c) { c.nu = 0.0; });
  broken([](RunConfig& c) { c.horizon = -0.5; });
  broken([](RunConfig& c) { c.cfl = 0.0; });
  broken([](RunConfig& c) { c.cfl = 1.5; });
  broken([](RunConfig& c) { c.poisson_tol = 0.0; });
  broken([](RunConfig& c) { c.output_interval = 0.0; });
  broken([](RunConfig& c) { c.dt_max = 0.0; });
  broken([](RunConfig& c) { c.scenario.name = "vortex"; });
  broken([](RunConfig& c) { c.scenario = {"shear-sine", 1.0, 3, 0.0}; });  // odd mode
  broken([](RunConfig& c) { c.scenario = {"shear-cosine", 1.0, 1, 1.0}; });  // full contrast
}

TEST_CASE("sweep files expand into one validated run per viscosity") {
  const std::string sweep = R"({
    "scenario": {"name": "shear-cosine", "mode": 1},
    "nus": [0.2, 0.1, 0.05], "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128},
    "output_dir": "artifacts"
  })";
  const auto configs = load_sweep_config(write_text("sweep.json", sweep).string());
  REQUIRE(configs.size() == 3);
  CHECK(configs[0].nu == 0.2);
  CHECK(configs[1].nu == 0.1);
  CHECK(configs[2].nu == 0.05);
  CHECK(configs[0].output_dir == "artifacts/nu_0.2");
  CHECK(configs[2].output_dir == "artifacts/nu_0.05");
  for (const auto& c : configs) {
    CHECK(c.scenario.name == "shear-cosine");
    CHECK(c.horizon == 0.1);
  }

  const std::string no_nus = R"({
    "scenario": {"name": "rest"}, "nu": 0.1, "horizon": 0.1,
    "grid": {"nx": 8, "ny": 128}
  })";
  CHECK_THROWS_AS(load_sweep_config(write_text("sweep-bad.json", no_nus).string()), ConfigError);
}

TEST_CASE("strip cell counting matches face arithmetic") {
  const Grid g = build_grid({8, 100, 0.0, 1.0, 1.0});
  CHECK(cells_inside_strip(g, 0.065) == 6);
  CHECK(cells_inside_strip(g, 0.06) == 6);    // face at exactly 0.06
  CHECK(cells_inside_strip(g, 0.005) == 0);
  CHECK(cells_inside_strip(g, 0.01) == 1);
}

TEST_CASE("a rest run reports identically zero diagnostics") {
  RunConfig cfg = quick_rest_config();
  const RunResult r = run_single(cfg);

  CHECK(r.record.nu == 0.1);
  CHECK(r.record.e1_final == 0.0);
  CHECK(r.record.e2_final == 0.0);
  CHECK(r.record.e_sup == 0.0);
  CHECK(r.record.kato_d == 0.0);
  CHECK(r.record.diss_total == 0.0);
  CHECK(r.record.gronwall_max_violation == 0.0);
  CHECK(r.record.wall_clock == 0.0);  // timings are off by default
  CHECK(r.energy_max_violation == 0.0);
  CHECK(r.record.grid_descriptor == "4x128 beta=0");

  // under-resolved strip: the guard names the fix
  cfg.nu = 0.01;
  CHECK_THROWS_MATCHES(
      run_single(cfg), ConfigError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("raise ny")));
}

TEST_CASE("single runs are deterministic bit for bit") {
  RunConfig cfg;
  cfg.scenario = {"shear-cosine", 1.0, 1, 0.5};
  cfg.nu = 0.1;
  cfg.nx = 4;
  cfg.ny = 64;
  cfg.beta = 1.5;
  cfg.horizon = 0.02;

  const RunResult a = run_single(cfg);
  const RunResult b = run_single(cfg);
  check_records_equal(a.record, b.record);
  REQUIRE(a.diagnostics.size() == b.diagnostics.size());
  for (size_t k = 0; k < a.diagnostics.size(); ++k) {
    CHECK(a.diagnostics[k].t == b.diagnostics[k].t);
    CHECK(a.diagnostics[k].e1 == b.diagnostics[k].e1);
    CHECK(a.diagnostics[k].diss_layer == b.diagnostics[k].diss_layer);
    CHECK(a.diagnostics[k].i3 == b.diagnostics[k].i3);
  }

  // variable density, but x-independent: the density never actually moves
  CHECK(a.record.e2_final == 0.0);
}

TEST_CASE("a viscous shear run tracks the one-dimensional oracle") {
  RunConfig cfg;
  cfg.scenario = {"shear-sine", 1.0, 2, 0.0};
  cfg.nu = 0.05;
  cfg.nx = 4;
  cfg.ny = 128;
  cfg.horizon = 0.1;

  const RunResult r = run_single(cfg);

  const auto u0 = [](double y) { return std::sin(2.0 * kPi * y); };
  const auto rho0 = [](double) { return 1.0; };
  const OracleShearRun oracle = oracle_shear_run(u0, rho0, u0, cfg.nu, cfg.horizon,
                                                 cfg.nu, 2048, 2000);

  CHECK(r.record.e1_final == Catch::Approx(oracle.e1_final).epsilon(0.02));
  CHECK(r.record.e_sup == Catch::Approx(oracle.e1_sup).epsilon(0.02));
  CHECK(r.record.kato_d == Catch::Approx(oracle.kato_dissipation).epsilon(0.05));
  CHECK(r.record.diss_total == Catch::Approx(oracle.dissipation_total).epsilon(0.05));

  CHECK(r.record.e2_final == 0.0);
  CHECK(r.record.gronwall_max_violation <= 1e-9);
  CHECK(r.energy_max_violation <= 1e-10);
  CHECK(r.diagnostics.size() == 11);  // one row per output interval plus t=0
}

TEST_CASE("sweeps demand shared shape and descending viscosities") {
  const RunConfig base = quick_rest_config();
  std::vector<RunConfig> two = {base, base};
  two[1].nu = 0.05;
  CHECK_THROWS_AS(run_sweep(two), ConfigError);

  std::vector<RunConfig> mixed = {base, base, base};
  mixed[1].nu = 0.05;
  mixed[2].nu = 0.025;
  mixed[2].scenario.name = "shear-sine";
  CHECK_THROWS_AS(run_sweep(mixed), ConfigError);

  std::vector<RunConfig> horizons = {base, base, base};
  horizons[1].nu = 0.05;
  horizons[2].nu = 0.025;
  horizons[2].horizon = 0.2;
  CHECK_THROWS_AS(run_sweep(horizons), ConfigError);

  std::vector<RunConfig> ascending = {base, base, base};
  ascending[1].nu = 0.2;
  ascending[2].nu = 0.3;
  CHECK_THROWS_AS(run_sweep(ascending), ConfigError);

  // guard failures inside a worker surface as the original error
  std::vector<RunConfig> unresolved = {base, base, base};
  unresolved[1].nu = 0.05;
  unresolved[2].nu = 0.01;  // too thin for ny = 128
  CHECK_THROWS_AS(run_sweep(unresolved, 2), ConfigError);
}

TEST_CASE("worker counts change neither records nor csv bytes") {
  std::vector<RunConfig> configs;
  for (double nu : {0.2, 0.15, 0.1}) {
    RunConfig cfg;
    cfg.scenario = {"shear-cosine", 1.0, 1, 0.5};
    cfg.nu = nu;
    cfg.nx = 4;
    cfg.ny = 64;
    cfg.beta = 1.5;
    cfg.horizon = 0.02;
    configs.push_back(cfg);
  }

  const SweepSummary serial = run_sweep(configs, 1);
  const SweepSummary pooled = run_sweep(configs, 4);

  REQUIRE(serial.records.size() == 3);
  REQUIRE(pooled.records.size() == 3);
  for (size_t k = 0; k < 3; ++k) check_records_equal(serial.records[k], pooled.records[k]);
  CHECK(serial.verdict == pooled.verdict);
  CHECK(serial.regime == "variable density");

  const fs::path pa = scratch_dir() / "serial.csv";
  const fs::path pb = scratch_dir() / "pooled.csv";
  write_sweep_csv(serial.records, pa.string());
  write_sweep_csv(pooled.records, pb.string());
  CHECK(slurp(pa) == slurp(pb));
}

TEST_CASE("rest sweeps come out trivially consistent in the homogeneous regime") {
  std::vector<RunConfig> configs;
  for (double nu : {0.2, 0.1, 0.05}) {
    RunConfig cfg = quick_rest_config();
    cfg.nu = nu;
    configs.push_back(cfg);
  }
  const SweepSummary s = run_sweep(configs);
  CHECK(s.verdict == "TRIVIALLY CONSISTENT");
  CHECK(s.regime == "homogeneous regime");
  CHECK_FALSE(s.e_sup_fit.has_value());
  CHECK_FALSE(s.kato_fit.has_value());
  CHECK(s.energy_max_violation == 0.0);
}

TEST_CASE("the verdict separates trending from flat series") {
  const auto fit = [](double slope, double residual) {
    RateFit f;
    f.slope = slope;
    f.max_residual = residual;
    return std::optional<RateFit>(f);
  };
  const std::optional<RateFit> none;

  CHECK(consistency_verdict(fit(0.5, 0.05), fit(1.0, 0.05)) == "CONSISTENT");
  CHECK(consistency_verdict(fit(0.5, 0.05), fit(0.001, 0.05)) == "INCONSISTENT");
  CHECK(consistency_verdict(fit(0.001, 0.05), fit(0.5, 0.05)) == "INCONSISTENT");
  CHECK(consistency_verdict(none, none) == "TRIVIALLY CONSISTENT");

  // identically zero counts as trending: the other side must follow
  CHECK(consistency_verdict(none, fit(0.001, 0.01)) == "INCONSISTENT");
  CHECK(consistency_verdict(none, fit(0.5, 0.05)) == "CONSISTENT");

  // neither clearly trending nor clearly flat stays consistent
  CHECK(consistency_verdict(fit(0.5, 0.05), fit(0.06, 0.05)) == "CONSISTENT");
  CHECK(consistency_verdict(fit(0.5, 0.5), fit(0.001, 0.05)) == "CONSISTENT");
  CHECK(consistency_verdict(fit(0.001, 0.01), fit(0.001, 0.01)) == "CONSISTENT");
}

TEST_CASE("sweep csv files round trip exactly and keep their pinned header") {
  std::vector<SweepRecord> records(2);
  records[0] = {0.1, 1e-3, 2.5e-4, 1.2e-3, 0.071, 0.31, -1.0 / 3.0, 0.0, "8x256 beta=2"};
  records[1] = {0.05, 7.7e-4, 1.1e-4, 9e-4, 0.052, 0.29, 1e-17, 0.0, "8x256 beta=2"};

  const fs::path p = scratch_dir() / "roundtrip.csv";
  write_sweep_csv(records, p.string());

  const std::string text = slurp(p);
  CHECK(text.rfind("nu,e1_final,e2_final,e_sup,kato_d,diss_total,gronwall_max_violation,wall_clock\n",
                   0) == 0);

  const auto back = read_sweep_csv(p.string());
  REQUIRE(back.size() == 2);
  for (size_t k = 0; k < 2; ++k) check_records_equal(back[k], records[k]);

  const fs::path refused = scratch_dir() / "never-written.csv";
  CHECK_THROWS_AS(write_sweep_csv({}, refused.string()), std::invalid_argument);
  CHECK_FALSE(fs::exists(refused));

  const fs::path tampered = write_text("tampered.csv", "nu,bogus\n0.1,2\n");
  CHECK_THROWS_AS(read_sweep_csv(tampered.string()), std::runtime_error);
}

TEST_CASE("reports annotate the fitted slopes and refuse nonpositive series") {
  std::vector<SweepRecord> records;
  for (double nu : {0.2, 0.1, 0.05, 0.025}) {
    SweepRecord r;
    r.nu = nu;
    r.e_sup = 2.0 * std::sqrt(nu);
    r.kato_d = 3.0 * nu;
    records.push_back(r);
  }

  const fs::path p = scratch_dir() / "report.svg";
  render_report(records, p.string());
  const std::string svg = slurp(p);
  CHECK(svg.find("slope=0.500") != std::string::npos);
  CHECK(svg.find("slope=1.000") != std::string::npos);
  CHECK(svg.find("<svg") != std::string::npos);

  const fs::path p2 = scratch_dir() / "report2.svg";
  render_report(records, p2.string());
  CHECK(slurp(p) == slurp(p2));

  records[1].kato_d = 0.0;
  CHECK_THROWS_AS(render_report(records, (scratch_dir() / "nope.svg").string()),
                  std::invalid_argument);
  CHECK_THROWS_AS(render_report({}, (scratch_dir() / "nope.svg").string()),
                  std::invalid_argument);
}

TEST_CASE("flow snapshots round trip bitwise and refuse the wrong grid") {
  const Grid g = build_grid({8, 32, 1.0, 1.0, 1.0});
  FlowState s;
  s.grid = &g;
  s.t = 0.625;
  s.nu = 0.05;
  s.rho = sample_scalar(g, [](double x, double y) { return 1.0 + 0.3 * std::sin(x + y); });
  s.vel = sample_vector(
      g, [](double x, double y) { return std::cos(2.0 * kPi * x) * y * (1.0 - y); },
      [](double, double) { return 0.0; });
  declare_noslip(s.vel);
  s.pressure = sample_scalar(g, [](double x, double y) { return x * y; });

  const fs::path p = scratch_dir() / "state.flow";
  write_flow(p.string(), s);
  const FlowState back = read_flow(p.string(), g);

  CHECK(back.t == s.t);
  CHECK(back.nu == s.nu);
  CHECK(back.rho.c == s.rho.c);
  CHECK(back.vel.u == s.vel.u);
  CHECK(back.vel.v == s.vel.v);
  CHECK(back.pressure.c == s.pressure.c);

  const Grid other = build_grid({8, 48, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(read_flow(p.string(), other), std::runtime_error);

  fs::resize_file(p, fs::file_size(p) / 2);
  CHECK_THROWS_AS(read_flow(p.string(), g), std::runtime_error);
}

TEST_CASE("run artifacts land in the output directory") {
  RunConfig cfg = quick_rest_config();
  const fs::path dir = scratch_dir() / "artifacts" / "rest";
  fs::remove_all(dir);
  cfg.output_dir = dir.string();

  const RunResult r = run_single(cfg);
  CHECK(fs::exists(dir / "initial.flow"));
  CHECK(fs::exists(dir / "final.flow"));
  CHECK(fs::exists(dir / "diagnostics.csv"));

  const std::string diag = slurp(dir / "diagnostics.csv");
  CHECK(diag.rfind("t,e1,e2,e_total,diss_total,diss_layer,I1,I2,I3,I4,I5,hardy_bound\n", 0) == 0);
  CHECK(r.diagnostics.size() >= 2);
}
