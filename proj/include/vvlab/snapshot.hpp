#pragma once

// .flow snapshot files: a single JSON header line describing the grid, time,
// viscosity, and field layout, followed by the raw field payloads as
// little-endian 64-bit floats in header order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvlab/geometry.hpp"
#include "vvlab/solver.hpp"

namespace vvlab {

namespace detail {

inline void write_doubles_le(std::ostream& os, const std::vector<double>& data) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    for (double v : data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      char buf[8];
      for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      os.write(buf, 8);
    }
  }
}

inline void read_doubles_le(std::istream& is, std::vector<double>& data, const std::string& name) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    for (double& v : data) {
      char buf[8];
      is.read(buf, 8);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[b])) << (8 * b);
      std::memcpy(&v, &bits, 8);
    }
  }
  if (!is) throw std::runtime_error("flow snapshot: truncated payload while reading " + name);
}

}  // namespace detail

/// Writes one state to a .flow file.
inline void write_flow(const std::string& path, const FlowState& s) {
  const Grid& g = *s.grid;
  nlohmann::json header = {
      {"format", "flow"},
      {"version", 1},
      {"time", s.t},
      {"nu", s.nu},
      {"grid",
       {{"nx", g.nx},
        {"ny", g.ny},
        {"beta", g.beta},
        {"length_x", g.domain.length_x},
        {"length_y", g.domain.length_y}}},
      {"fields",
       {{{"name", "rho"}, {"shape", {g.ny, g.nx}}},
        {{"name", "u"}, {"shape", {g.ny, g.nx}}},
        {{"name", "v"}, {"shape", {g.ny + 1, g.nx}}},
        {{"name", "p"}, {"shape", {g.ny, g.nx}}}}},
  };
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("flow snapshot: cannot open " + path + " for writing");
  os << header.dump() << '\n';
  detail::write_doubles_le(os, s.rho.c);
  detail::write_doubles_le(os, s.vel.u);
  detail::write_doubles_le(os, s.vel.v);
  detail::write_doubles_le(os, s.pressure.c);
  if (!os) throw std::runtime_error("flow snapshot: write failed for " + path);
}

/// Reads a .flow file written for the given grid.  The header must describe
/// the same grid; mismatches are refused rather than silently reinterpreted.
inline FlowState read_flow(const std::string& path, const Grid& grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("flow snapshot: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("flow snapshot: missing header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("flow snapshot: bad header in " + path + ": " + e.what());
  }
  if (header.value("format", "") != "flow" || header.value("version", 0) != 1)
    throw std::runtime_error("flow snapshot: " + path + " is not a version-1 flow file");
  const auto& hg = header.at("grid");
  if (hg.at("nx").get<int>() != grid.nx || hg.at("ny").get<int>() != grid.ny ||
      hg.at("beta").get<double>() != grid.beta ||
      hg.at("length_x").get<double>() != grid.domain.length_x ||
      hg.at("length_y").get<double>() != grid.domain.length_y)
    throw std::runtime_error("flow snapshot: grid in " + path + " does not match the target grid");

  FlowState s;
  s.grid = &grid;
  s.t = header.at("time").get<double>();
  s.nu = header.at("nu").get<double>();
  s.rho = make_scalar(grid);
  s.vel = make_vector(grid);
  s.pressure = make_scalar(grid);
  detail::read_doubles_le(is, s.rho.c, "rho");
  detail::read_doubles_le(is, s.vel.u, "u");
  detail::read_doubles_le(is, s.vel.v, "v");
  detail::read_doubles_le(is, s.pressure.c, "p");
  declare_noslip(s.vel);
  return s;
}

}  // namespace vvlab
