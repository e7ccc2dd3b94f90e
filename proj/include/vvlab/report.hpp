#pragma once

// Deterministic text outputs: sweep and diagnostic CSVs, and a hand-rolled
// SVG log-log chart of e_sup and kato_d against viscosity with their fitted
// power laws.  All numbers go through fixed printf formats so identical
// inputs produce identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vvlab/fitting.hpp"

namespace vvlab {

struct SweepRecord {
  double nu = 0.0;
  double e1_final = 0.0;
  double e2_final = 0.0;
  double e_sup = 0.0;
  double kato_d = 0.0;
  double diss_total = 0.0;
  double gronwall_max_violation = 0.0;
  double wall_clock = 0.0;
  std::string grid_descriptor;  ///< e.g. "8x256 beta=2.5"; not part of the CSV
};

struct DiagnosticRow {
  double t = 0.0;
  double e1 = 0.0, e2 = 0.0, e_total = 0.0;
  double diss_total = 0.0, diss_layer = 0.0;
  double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0, i5 = 0.0;
  double hardy_bound = 0.0;
};

namespace detail {

/// Shortest exact decimal for a double (%.17g round-trips; %g keeps it tidy
/// for values that need fewer digits).
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline void write_sweep_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  if (records.empty())
    throw std::invalid_argument("write_sweep_csv: refusing to write an empty record set");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  os << "nu,e1_final,e2_final,e_sup,kato_d,diss_total,gronwall_max_violation,wall_clock\n";
  for (const auto& r : records) {
    os << detail::format_full(r.nu) << ',' << detail::format_full(r.e1_final) << ','
       << detail::format_full(r.e2_final) << ',' << detail::format_full(r.e_sup) << ','
       << detail::format_full(r.kato_d) << ',' << detail::format_full(r.diss_total) << ','
       << detail::format_full(r.gronwall_max_violation) << ','
       << detail::format_full(r.wall_clock) << '\n';
  }
  if (!os) throw std::runtime_error("write_sweep_csv: write failed for " + path);
}

inline void write_diagnostic_csv(const std::vector<DiagnosticRow>& rows, const std::string& path) {
  if (rows.empty())
    throw std::invalid_argument("write_diagnostic_csv: refusing to write an empty row set");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_diagnostic_csv: cannot open " + path);
  os << "t,e1,e2,e_total,diss_total,diss_layer,I1,I2,I3,I4,I5,hardy_bound\n";
  for (const auto& r : rows) {
    os << detail::format_full(r.t) << ',' << detail::format_full(r.e1) << ','
       << detail::format_full(r.e2) << ',' << detail::format_full(r.e_total) << ','
       << detail::format_full(r.diss_total) << ',' << detail::format_full(r.diss_layer) << ','
       << detail::format_full(r.i1) << ',' << detail::format_full(r.i2) << ','
       << detail::format_full(r.i3) << ',' << detail::format_full(r.i4) << ','
       << detail::format_full(r.i5) << ',' << detail::format_full(r.hardy_bound) << '\n';
  }
  if (!os) throw std::runtime_error("write_diagnostic_csv: write failed for " + path);
}

/// Reads back a sweep CSV (used by the report subcommand).
inline std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_sweep_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_sweep_csv: empty file " + path);
  const std::string expected = "nu,e1_final,e2_final,e_sup,kato_d,diss_total,gronwall_max_violation,wall_clock";
  if (line != expected)
    throw std::runtime_error("read_sweep_csv: unexpected header in " + path);
  std::vector<SweepRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    SweepRecord r;
    double* fields[] = {&r.nu,    &r.e1_final,   &r.e2_final,
                        &r.e_sup, &r.kato_d,     &r.diss_total,
                        &r.gronwall_max_violation, &r.wall_clock};
    size_t pos = 0;
    for (int k = 0; k < 8; ++k) {
      size_t next = line.find(',', pos);
      if (k < 7 && next == std::string::npos)
        throw std::runtime_error("read_sweep_csv: short row in " + path);
      *fields[k] = std::stod(line.substr(pos, next - pos));
      pos = next + 1;
    }
    records.push_back(r);
  }
  if (records.empty()) throw std::runtime_error("read_sweep_csv: no data rows in " + path);
  return records;
}

// ---------------------------------------------------------------------------
// SVG chart
// ---------------------------------------------------------------------------

namespace detail {

struct LogSeries {
  std::string label;
  std::string color;
  std::vector<double> x, y;  // positive values
  RateFit fit;
};

inline std::string svg_chart(const std::vector<LogSeries>& series, const std::string& title) {
  // view box and plot frame
  const double w = 720.0, h = 480.0;
  const double ml = 80.0, mr = 30.0, mt = 50.0, mb = 60.0;

  double lxmin = 0.0, lxmax = 0.0, lymin = 0.0, lymax = 0.0;
  bool first = true;
  for (const auto& s : series)
    for (size_t k = 0; k < s.x.size(); ++k) {
      const double lx = std::log10(s.x[k]), ly = std::log10(s.y[k]);
      if (first) {
        lxmin = lxmax = lx;
        lymin = lymax = ly;
        first = false;
      }
      lxmin = std::min(lxmin, lx);
      lxmax = std::max(lxmax, lx);
      lymin = std::min(lymin, ly);
      lymax = std::max(lymax, ly);
    }
  if (first) throw std::invalid_argument("svg_chart: no data");
  const double padx = std::max(0.1, 0.05 * (lxmax - lxmin));
  const double pady = std::max(0.1, 0.08 * (lymax - lymin));
  lxmin -= padx;
  lxmax += padx;
  lymin -= pady;
  lymax += pady;

  auto px = [&](double lx) { return ml + (lx - lxmin) / (lxmax - lxmin) * (w - ml - mr); };
  auto py = [&](double ly) { return h - mb - (ly - lymin) / (lymax - lymin) * (h - mt - mb); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_fixed(w, 0) +
         "\" height=\"" + format_fixed(h, 0) + "\" viewBox=\"0 0 " + format_fixed(w, 0) + " " +
         format_fixed(h, 0) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + format_fixed(w / 2, 1) + "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
  out += "<rect x=\"" + format_fixed(ml, 1) + "\" y=\"" + format_fixed(mt, 1) + "\" width=\"" +
         format_fixed(w - ml - mr, 1) + "\" height=\"" + format_fixed(h - mt - mb, 1) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  // decade grid lines and tick labels
  for (int d = static_cast<int>(std::ceil(lxmin)); d <= static_cast<int>(std::floor(lxmax)); ++d) {
    const double x = px(d);
    out += "<line x1=\"" + format_fixed(x, 1) + "\" y1=\"" + format_fixed(mt, 1) + "\" x2=\"" +
           format_fixed(x, 1) + "\" y2=\"" + format_fixed(h - mb, 1) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + format_fixed(x, 1) + "\" y=\"" + format_fixed(h - mb + 18, 1) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" +
           std::to_string(d) + "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(lymin)); d <= static_cast<int>(std::floor(lymax)); ++d) {
    const double y = py(d);
    out += "<line x1=\"" + format_fixed(ml, 1) + "\" y1=\"" + format_fixed(y, 1) + "\" x2=\"" +
           format_fixed(w - mr, 1) + "\" y2=\"" + format_fixed(y, 1) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + format_fixed(ml - 8, 1) + "\" y=\"" + format_fixed(y + 4, 1) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
           std::to_string(d) + "</text>\n";
  }
  out += "<text x=\"" + format_fixed((ml + w - mr) / 2, 1) + "\" y=\"" +
         format_fixed(h - 16, 1) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">nu</text>\n";

  double legend_y = mt + 20.0;
  for (const auto& s : series) {
    // fit is in natural logs; convert: log10 y = slope*log10 x + intercept/ln10
    const double b10 = s.fit.intercept / std::log(10.0);
    const double fyl = s.fit.slope * lxmin + b10;
    const double fyr = s.fit.slope * lxmax + b10;
    out += "<line x1=\"" + format_fixed(px(lxmin), 1) + "\" y1=\"" + format_fixed(py(fyl), 1) +
           "\" x2=\"" + format_fixed(px(lxmax), 1) + "\" y2=\"" + format_fixed(py(fyr), 1) +
           "\" stroke=\"" + s.color + "\" stroke-dasharray=\"6,4\"/>\n";
    std::string pts;
    for (size_t k = 0; k < s.x.size(); ++k) {
      const double X = px(std::log10(s.x[k])), Y = py(std::log10(s.y[k]));
      pts += format_fixed(X, 1) + "," + format_fixed(Y, 1) + " ";
      out += "<circle cx=\"" + format_fixed(X, 1) + "\" cy=\"" + format_fixed(Y, 1) +
             "\" r=\"3.5\" fill=\"" + s.color + "\"/>\n";
    }
    out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color + "\"/>\n";
    out += "<text x=\"" + format_fixed(ml + 12, 1) + "\" y=\"" + format_fixed(legend_y, 1) +
           "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"" + s.color + "\">" + s.label +
           "  slope=" + format_fixed(s.fit.slope, 3) + "</text>\n";
    legend_y += 18.0;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace detail

/// Renders the sweep's two headline series with their fitted slopes.
inline void render_report(const std::vector<SweepRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("render_report: no records");
  std::vector<double> nus, esup, kato;
  for (const auto& r : records) {
    nus.push_back(r.nu);
    esup.push_back(r.e_sup);
    kato.push_back(r.kato_d);
  }
  for (double v : esup)
    if (!(v > 0.0))
      throw std::invalid_argument("render_report: e_sup must be positive for a log-log chart");
  for (double v : kato)
    if (!(v > 0.0))
      throw std::invalid_argument("render_report: kato_d must be positive for a log-log chart");

  detail::LogSeries se{"e_sup", "#1f5fbf", nus, esup, fit_rate(esup, nus)};
  detail::LogSeries sk{"kato_d", "#bf401f", nus, kato, fit_rate(kato, nus)};
  const std::string svg =
      detail::svg_chart({se, sk}, "relative energy and layer dissipation vs viscosity");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("render_report: cannot open " + path);
  os << svg;
  if (!os) throw std::runtime_error("render_report: write failed for " + path);
}

}  // namespace vvlab
