#pragma once

// CSV/JSON artifacts. Every file starts with '#' lines carrying the version and
// the resolved run config; numbers are written with 17 significant digits.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/spectral_core.hpp"
#include "amp_sheet/trajectory.hpp"
#include "amp_sheet/version.hpp"

namespace amp_sheet::io {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: LF line endings everywhere
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

inline void write_header(std::ostream& os, const nlohmann::json& config) {
  os << "# amp_sheet " << version << '\n';
  os << "# config " << config.dump() << '\n';
}

/// One row per snapshot: t, f(x_0), ..., f(x_{n-1}).
inline void write_series_csv(std::ostream& os, const FieldSeries& s, const nlohmann::json& config, int every = 1) {
  write_header(os, config);
  if (s.empty()) return;
  const int n = s.grid().n();
  os << "t";
  for (int j = 0; j < n; ++j) os << ",x" << j;
  os << '\n';
  every = std::max(1, every);
  for (size_t i = 0; i < s.size(); ++i) {
    if (i % static_cast<size_t>(every) != 0 && i + 1 != s.size()) continue;
    os << fmt(s.time(i));
    for (double v : synthesize_real(s[i])) os << ',' << fmt(v);
    os << '\n';
  }
}

/// k, re, im for |k| <= K.
inline void write_spectrum_csv(std::ostream& os, const SpectralField& f, const nlohmann::json& config) {
  write_header(os, config);
  os << "k,re,im\n";
  for (int k = -f.max_mode(); k <= f.max_mode(); ++k)
    os << k << ',' << fmt(f[k].real()) << ',' << fmt(f[k].imag()) << '\n';
}

inline void write_json(std::ostream& os, const nlohmann::json& payload, const nlohmann::json& config) {
  nlohmann::json j = payload;
  j["version"] = version;
  j["config"] = config;
  os << j.dump(2) << '\n';
}

namespace detail {
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}
inline double to_num(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw InputShapeError("csv: malformed number '" + s + "'");
  return v;
}
}  // namespace detail

/// Inverse of write_series_csv; the grid is inferred from the column count.
inline FieldSeries read_series_csv(std::istream& is) {
  FieldSeries out;
  std::string line;
  bool header_seen = false;
  std::optional<TorusGrid> grid;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = detail::split(line);
    if (!header_seen) {
      header_seen = true;
      if (cells.empty() || cells[0] != "t") throw InputShapeError("csv: expected a 't,x0,...' header row");
      if (cells.size() < 5 || (cells.size() - 1) % 2 != 0) throw InputShapeError("csv: need an even number >= 4 of columns");
      grid.emplace(static_cast<int>(cells.size() - 1));
      continue;
    }
    if (cells.size() != static_cast<size_t>(grid->n()) + 1) throw InputShapeError("csv: ragged row");
    std::vector<double> v(static_cast<size_t>(grid->n()));
    for (size_t j = 0; j < v.size(); ++j) v[j] = detail::to_num(cells[j + 1]);
    out.push_back(detail::to_num(cells[0]), analyze(*grid, v));
  }
  if (!header_seen) throw InputShapeError("csv: no data");
  return out;
}

inline FieldSeries read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read '" + path + "'");
  return read_series_csv(is);
}

inline SpectralField read_spectrum_csv(std::istream& is, const TorusGrid& grid) {
  SpectralField f(grid, false);
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto c = detail::split(line);
    if (c.size() != 3) throw InputShapeError("spectrum csv: expected k,re,im");
    f.at(std::stoi(c[0])) = cplx(detail::to_num(c[1]), detail::to_num(c[2]));
  }
  if (f.hermitian_defect() == 0.0) {
    auto c = f.coefficients();
    f = SpectralField(grid, std::vector<cplx>(c.begin(), c.end()), true);
  }
  return f;
}

}  // namespace amp_sheet::io
