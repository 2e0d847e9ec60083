#pragma once

#include "msk/io/json.hpp"
#include "msk/rom/grid.hpp"

#include <charconv>

namespace msk {

// Text grid format:
//   msk-grid 1
//   joint <name>
//   resolution <twist> <azimuth> <polar>
//   cone_center <x> <y> <z>
//   conditioning <pose json on one line>
//   runs <r0> <r1> ...
// Runs alternate between invalid and valid cells starting with invalid, in cell
// index order (it * azimuth + ia) * polar + ip; a leading run may be 0.

inline std::vector<std::size_t> grid_runs(const std::vector<std::uint8_t>& cells) {
  std::vector<std::size_t> runs;
  std::uint8_t current = 0;
  std::size_t n = 0;
  for (auto c : cells) {
    const std::uint8_t v = c != 0;
    if (v != current) {
      runs.push_back(n);
      current = v;
      n = 0;
    }
    ++n;
  }
  runs.push_back(n);
  return runs;
}

inline std::vector<std::uint8_t> cells_from_runs(const std::vector<std::size_t>& runs, std::size_t expected,
                                                 const std::string& where) {
  std::vector<std::uint8_t> cells;
  cells.reserve(expected);
  std::uint8_t v = 0;
  for (auto r : runs) {
    if (cells.size() + r > expected) throw Error(where + ": runs exceed " + std::to_string(expected) + " cells");
    cells.insert(cells.end(), r, v);
    v = static_cast<std::uint8_t>(1 - v);
  }
  if (cells.size() != expected)
    throw Error(where + ": runs cover " + std::to_string(cells.size()) + " of " + std::to_string(expected) + " cells");
  return cells;
}

namespace detail {

inline std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void check_resolution(const GridResolution& r, const std::string& where) {
  if (r.twist <= 0 || r.azimuth <= 0 || r.polar <= 0) throw Error(where + ": resolution must be positive");
}

}  // namespace detail

inline std::string grid_to_text(const RomGrid& g, const Skeleton& skel) {
  std::string s = "msk-grid 1\njoint " + g.joint + "\nresolution " + std::to_string(g.resolution.twist) + " " +
                  std::to_string(g.resolution.azimuth) + " " + std::to_string(g.resolution.polar) + "\ncone_center " +
                  detail::shortest(g.cone_center.x()) + " " + detail::shortest(g.cone_center.y()) + " " +
                  detail::shortest(g.cone_center.z()) + "\nconditioning " + to_json(g.conditioning, skel).dump() +
                  "\nruns";
  for (auto r : grid_runs(g.cells)) s += " " + std::to_string(r);
  return s + "\n";
}

inline RomGrid grid_from_text(std::string_view text, const Skeleton& skel, const std::string& source = "grid") {
  RomGrid g;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  auto next = [&](std::string_view key) {
    while (std::getline(in, line)) {
      ++n;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) break;
    }
    const std::string where = source + ":" + std::to_string(n);
    if (!line.starts_with(key) || (line.size() > key.size() && line[key.size()] != ' '))
      throw Error(where + ": expected '" + std::string(key) + "'");
    line.erase(0, std::min(line.size(), key.size() + 1));
    return where;
  };
  auto where = next("msk-grid");
  if (line != "1") throw Error(where + ": unsupported grid version '" + line + "'");
  next("joint");
  g.joint = line;
  where = next("resolution");
  {
    std::istringstream ss(line);
    if (!(ss >> g.resolution.twist >> g.resolution.azimuth >> g.resolution.polar)) throw Error(where + ": malformed resolution");
    detail::check_resolution(g.resolution, where);
  }
  where = next("cone_center");
  {
    std::istringstream ss(line);
    std::string t[3];
    if (!(ss >> t[0] >> t[1] >> t[2])) throw Error(where + ": malformed cone center");
    for (int k = 0; k < 3; ++k) {
      const auto [ptr, ec] = std::from_chars(t[k].data(), t[k].data() + t[k].size(), g.cone_center[k]);
      if (ec != std::errc() || ptr != t[k].data() + t[k].size()) throw Error(where + ": malformed cone center");
    }
  }
  where = next("conditioning");
  g.conditioning = pose_from_json(parse_json(line, where), skel, "conditioning");
  where = next("runs");
  std::vector<std::size_t> runs;
  {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      std::size_t r = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), r);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) throw Error(where + ": malformed run '" + tok + "'");
      runs.push_back(r);
    }
  }
  g.cells = cells_from_runs(runs, g.resolution.cells(), where);
  return g;
}

inline Json grid_to_json(const RomGrid& g, const Skeleton& skel) {
  return {{"format", "msk-grid-1"},
          {"joint", g.joint},
          {"resolution", {g.resolution.twist, g.resolution.azimuth, g.resolution.polar}},
          {"cone_center", to_json(g.cone_center)},
          {"conditioning", to_json(g.conditioning, skel)},
          {"cells", g.cells.size()},
          {"valid_cells", g.true_count()},
          {"runs", grid_runs(g.cells)}};
}

inline RomGrid grid_from_json(const Json& j, const Skeleton& skel, const std::string& path = "grid") {
  using namespace jsonpath;
  if (string(member(j, "format", path), path + ".format") != "msk-grid-1") fail(path + ".format", "expected 'msk-grid-1'");
  RomGrid g;
  g.joint = string(member(j, "joint", path), path + ".joint");
  const Json& res = array(member(j, "resolution", path), path + ".resolution", 3);
  g.resolution = {integer(res[0], path + ".resolution[0]"), integer(res[1], path + ".resolution[1]"),
                  integer(res[2], path + ".resolution[2]")};
  detail::check_resolution(g.resolution, path + ".resolution");
  g.cone_center = vec3(member(j, "cone_center", path), path + ".cone_center");
  g.conditioning = pose_from_json(member(j, "conditioning", path), skel, path + ".conditioning");
  const Json& runs_json = array(member(j, "runs", path), path + ".runs");
  std::vector<std::size_t> runs;
  for (std::size_t i = 0; i < runs_json.size(); ++i) {
    if (!runs_json[i].is_number_unsigned()) fail(index(path + ".runs", i), "expected a non-negative integer");
    runs.push_back(runs_json[i].get<std::size_t>());
  }
  g.cells = cells_from_runs(runs, g.resolution.cells(), path + ".runs");
  return g;
}

/// One row per cell with indices and cell-center angles (radians).
inline std::string grid_to_csv(const RomGrid& g) {
  std::string s = "twist_index,azimuth_index,polar_index,twist,azimuth,polar,valid\n";
  for (int it = 0; it < g.resolution.twist; ++it)
    for (int ia = 0; ia < g.resolution.azimuth; ++ia)
      for (int ip = 0; ip < g.resolution.polar; ++ip) {
        s += std::to_string(it) + "," + std::to_string(ia) + "," + std::to_string(ip) + "," +
             detail::shortest(grid_twist_center(g.resolution, it)) + "," +
             detail::shortest(grid_azimuth_center(g.resolution, ia)) + "," +
             detail::shortest(grid_polar_center(g.resolution, ip)) + "," + (g.at(it, ia, ip) ? "1" : "0") + "\n";
      }
  return s;
}

/// "18x36x36" style resolution.
inline GridResolution parse_resolution(std::string_view s) {
  GridResolution r;
  int* fields[3] = {&r.twist, &r.azimuth, &r.polar};
  std::size_t start = 0;
  for (int k = 0; k < 3; ++k) {
    const auto end = k < 2 ? s.find('x', start) : s.size();
    if (end == std::string_view::npos) throw Error("resolution '" + std::string(s) + "': expected TxAxP");
    const auto part = s.substr(start, end - start);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), *fields[k]);
    if (ec != std::errc() || ptr != part.data() + part.size() || *fields[k] <= 0)
      throw Error("resolution '" + std::string(s) + "': expected positive integers TxAxP");
    start = end + 1;
  }
  return r;
}

inline std::string to_string(const GridResolution& r) {
  return std::to_string(r.twist) + "x" + std::to_string(r.azimuth) + "x" + std::to_string(r.polar);
}

}  // namespace msk
