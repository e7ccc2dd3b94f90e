// Command-line front end: single runs, viscosity sweeps, corrector scaling
// checks, layer-inequality measurements, and SVG reports.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 sweep verdict INCONSISTENT.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vvlab/inequalities.hpp"
#include "vvlab/report.hpp"
#include "vvlab/sweep.hpp"

namespace {

struct GlobalFlags {
  int workers = 1;
  bool verbose = false;
  bool timings = false;
};

void print_fit(const char* name, const std::optional<vvlab::RateFit>& fit) {
  if (fit)
    std::printf("  %-22s slope %+.4f  prefactor %.4g  residual %.3g\n", name, fit->slope,
                fit->prefactor(), fit->max_residual);
  else
    std::printf("  %-22s degenerate (series identically zero)\n", name);
}

int cmd_simulate(const std::string& config_path, const GlobalFlags& flags) {
  vvlab::RunConfig cfg = vvlab::load_run_config(config_path);
  if (flags.timings) cfg.timings = true;
  const vvlab::RunResult r = vvlab::run_single(cfg);
  std::printf("scenario %s on %s, nu = %g, horizon = %g\n", cfg.scenario.name.c_str(),
              r.record.grid_descriptor.c_str(), cfg.nu, cfg.horizon);
  std::printf("  e1_final %.6g  e2_final %.6g  e_sup %.6g\n", r.record.e1_final,
              r.record.e2_final, r.record.e_sup);
  std::printf("  kato_d %.6g  diss_total %.6g\n", r.record.kato_d, r.record.diss_total);
  std::printf("  gronwall_max_violation %.3g  energy_max_violation %.3g\n",
              r.record.gronwall_max_violation, r.energy_max_violation);
  if (cfg.timings) std::printf("  wall_clock %.3f s\n", r.record.wall_clock);
  if (flags.verbose) {
    std::printf("  %zu diagnostic samples\n", r.diagnostics.size());
    if (!cfg.output_dir.empty())
      std::printf("  artifacts in %s (initial.flow, final.flow, diagnostics.csv)\n",
                  cfg.output_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const GlobalFlags& flags) {
  std::vector<vvlab::RunConfig> configs = vvlab::load_sweep_config(config_path);
  if (flags.timings)
    for (auto& c : configs) c.timings = true;

  // the base output directory also receives the sweep CSV
  std::string base;
  {
    std::ifstream is(config_path);
    base = nlohmann::json::parse(is).value("output_dir", std::string());
  }
  const vvlab::SweepSummary summary = vvlab::run_sweep(configs, flags.workers);

  std::string csv_path = "sweep.csv";
  if (!base.empty()) {
    std::filesystem::create_directories(base);
    csv_path = base + "/sweep.csv";
  }
  vvlab::write_sweep_csv(summary.records, csv_path);

  std::printf("sweep of %zu viscosities, scenario %s (%s)\n", configs.size(),
              configs.front().scenario.name.c_str(), summary.regime.c_str());
  if (flags.verbose) {
    for (const auto& rec : summary.records)
      std::printf("  nu %-9g e_sup %-12.6g kato_d %-12.6g diss_total %.6g\n", rec.nu, rec.e_sup,
                  rec.kato_d, rec.diss_total);
  }
  print_fit("e_sup", summary.e_sup_fit);
  print_fit("e1_final", summary.e1_fit);
  print_fit("e2_final", summary.e2_fit);
  print_fit("kato_d", summary.kato_fit);
  std::printf("  energy_max_violation %.3g\n", summary.energy_max_violation);
  std::printf("verdict: %s\n", summary.verdict.c_str());
  std::printf("wrote %s\n", csv_path.c_str());
  return summary.verdict == "INCONSISTENT" ? 4 : 0;
}

int cmd_corrector_check(const std::string& config_path, const GlobalFlags& flags) {
  std::ifstream is(config_path);
  if (!is) throw vvlab::ConfigError("cannot open config file " + config_path);
  nlohmann::json j;
  vvlab::ScenarioSpec scenario;
  vvlab::Domain dom;
  int nx = 8, ny = 256;
  double beta = 2.0;
  std::vector<double> nus;
  std::string output_dir;
  try {
    j = nlohmann::json::parse(is);
    scenario = j.at("scenario").get<vvlab::ScenarioSpec>();
    const auto& g = j.at("grid");
    nx = g.at("nx").get<int>();
    ny = g.at("ny").get<int>();
    beta = g.value("beta", 0.0);
    dom = {g.value("length_x", 1.0), g.value("length_y", 1.0)};
    nus = j.at("nus").get<std::vector<double>>();
    output_dir = j.value("output_dir", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw vvlab::ConfigError(config_path + ": " + e.what());
  }

  const vvlab::Grid grid = vvlab::build_grid(dom, nx, ny, beta);
  const vvlab::EulerSolution sol = vvlab::make_solution(scenario, dom);
  const vvlab::CorrectorBoundCheck check = vvlab::verify_corrector_bounds(grid, sol, 0.0, nus);

  std::printf("corrector norms, scenario %s, %zu viscosities\n", scenario.name.c_str(),
              nus.size());
  if (flags.verbose) {
    std::printf("  %-9s %-11s %-11s %-11s %-11s %-11s %s\n", "nu", "sup", "grad_sup", "l2",
                "grad_l2", "dt_l2", "dist2_grad_sup");
    for (const auto& n : check.norms)
      std::printf("  %-9g %-11.5g %-11.5g %-11.5g %-11.5g %-11.5g %.5g\n", n.nu, n.sup,
                  n.grad_sup, n.l2, n.grad_l2, n.dt_l2, n.dist2_grad_sup);
  }
  std::printf("  fitted exponents in nu:\n");
  std::printf("    sup            %+.4f (uniform bound wants 0)\n", check.sup_fit.slope);
  std::printf("    grad_sup       %+.4f (wants -1)\n", check.grad_sup_fit.slope);
  std::printf("    l2             %+.4f (wants +0.5)\n", check.l2_fit.slope);
  if (check.dt_degenerate)
    std::printf("    dt_l2          steady entry, identically zero\n");
  else
    std::printf("    dt_l2          %+.4f\n", check.dt_fit.slope);
  std::printf("    grad_l2        %+.4f (wants -0.5)\n", check.grad_l2_fit.slope);
  std::printf("    dist2_grad_sup %+.4f\n", check.dist2_fit.slope);

  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    const std::string path = output_dir + "/corrector.csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "nu,sup,grad_sup,l2,grad_l2,dt_l2,dist2_grad_sup\n";
    for (const auto& n : check.norms)
      os << vvlab::detail::format_full(n.nu) << ',' << vvlab::detail::format_full(n.sup) << ','
         << vvlab::detail::format_full(n.grad_sup) << ',' << vvlab::detail::format_full(n.l2)
         << ',' << vvlab::detail::format_full(n.grad_l2) << ','
         << vvlab::detail::format_full(n.dt_l2) << ','
         << vvlab::detail::format_full(n.dist2_grad_sup) << '\n';
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_inequalities(const std::string& config_path, const GlobalFlags& flags) {
  std::ifstream is(config_path);
  if (!is) throw vvlab::ConfigError("cannot open config file " + config_path);
  nlohmann::json j;
  vvlab::Domain dom;
  int nx = 8, ny = 512;
  double beta = 0.0;
  std::vector<double> eps = {0.25, 0.125, 0.05, 0.025};
  unsigned seed = 2024;
  std::string output_dir;
  try {
    j = nlohmann::json::parse(is);
    const auto& g = j.at("grid");
    nx = g.at("nx").get<int>();
    ny = g.at("ny").get<int>();
    beta = g.value("beta", 0.0);
    dom = {g.value("length_x", 1.0), g.value("length_y", 1.0)};
    if (j.contains("eps")) eps = j.at("eps").get<std::vector<double>>();
    seed = j.value("seed", 2024u);
    output_dir = j.value("output_dir", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw vvlab::ConfigError(config_path + ": " + e.what());
  }

  const vvlab::Grid grid = vvlab::build_grid(dom, nx, ny, beta);
  const auto families = vvlab::standard_families(dom, seed);
  const vvlab::ConstantStabilityResult res = vvlab::constant_stability(grid, families, eps);

  std::printf("strip inequality constants over %zu thicknesses, %zu test functions\n",
              res.eps.size(), res.records.size() / res.eps.size());
  if (flags.verbose)
    for (const auto& r : res.records)
      std::printf("  %-16s %-12s eps %-8g hardy %-10.6g poincare %.6g\n", r.family.c_str(),
                  r.label.c_str(), r.eps, r.hardy, r.poincare);
  std::printf("  hardy    sup ratio %.6g, eps-slope %+.4f\n", res.hardy_sup,
              res.hardy_fit.slope);
  std::printf("  poincare sup ratio %.6g, eps-slope %+.4f\n", res.poincare_sup,
              res.poincare_fit.slope);

  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    const std::string path = output_dir + "/inequalities.csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "family,label,eps,hardy,poincare\n";
    for (const auto& r : res.records)
      os << r.family << ',' << r.label << ',' << vvlab::detail::format_full(r.eps) << ','
         << vvlab::detail::format_full(r.hardy) << ',' << vvlab::detail::format_full(r.poincare)
         << '\n';
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_report(const std::string& input, const std::string& out) {
  const std::vector<vvlab::SweepRecord> records = vvlab::read_sweep_csv(input);
  vvlab::render_report(records, out);
  std::printf("wrote %s (%zu records)\n", out.c_str(), records.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for viscous channel flows and their inviscid limit"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--workers", flags.workers, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", flags.verbose, "print per-run and per-sample detail");
  app.add_flag("--timings", flags.timings, "record wall-clock times (makes CSVs run-dependent)");

  // let trailing global flags (--verbose, --workers) reach the parent parser
  app.fallthrough();

  std::string config_path, input_path, out_path;
  CLI::App* sim = app.add_subcommand("simulate", "run one viscous scenario");
  sim->add_option("--config", config_path, "run config JSON")->required();
  CLI::App* swp =
      app.add_subcommand("sweep", "run a descending-viscosity sweep and check consistency");
  swp->add_option("--config", config_path, "run config JSON with a \"nus\" array")->required();
  CLI::App* cor =
      app.add_subcommand("corrector-check", "fit boundary-corrector norm scalings in nu");
  cor->add_option("--config", config_path, "JSON with scenario, grid, and a \"nus\" array")
      ->required();
  CLI::App* ine =
      app.add_subcommand("inequalities", "measure strip Hardy and Poincare constants");
  ine->add_option("--config", config_path, "JSON with grid and an \"eps\" array")->required();
  CLI::App* rep = app.add_subcommand("report", "render an SVG chart from a sweep CSV");
  rep->add_option("--input", input_path, "sweep CSV path")->required();
  rep->add_option("--out", out_path, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, flags);
    if (swp->parsed()) return cmd_sweep(config_path, flags);
    if (cor->parsed()) return cmd_corrector_check(config_path, flags);
    if (ine->parsed()) return cmd_inequalities(config_path, flags);
    if (rep->parsed()) return cmd_report(input_path, out_path);
  } catch (const vvlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
