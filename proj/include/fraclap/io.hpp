#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclap/experiments.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/kernel.hpp"

namespace fraclap::io {

// Decimal float with 17 significant digits; round-trips through strtod.
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// write-then-rename so reruns overwrite atomically.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  std::error_code ec;
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out << content;
    if (!out.good()) {
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

inline std::string grid_function_csv(const GridFunction& u) {
  std::ostringstream out;
  out << "x1,x2,value\n";
  for (int i = 0; i < u.grid.n1(); ++i) {
    const double x1 = u.grid.axis(0).node(i);
    for (int j = 0; j < u.grid.n2(); ++j) {
      const double x2 = u.grid.dim() == 2 ? u.grid.axis(1).node(j) : 0.0;
      out << format_g17(x1) << ',' << format_g17(x2) << ','
          << format_g17(u.v[u.grid.index(i, j)]) << '\n';
    }
  }
  return out.str();
}

// Quadrant weight table; the full table is its symmetric extension in both
// offsets.
inline std::string weights_csv(const KernelWeights& w) {
  std::ostringstream out;
  out << "k1,k2,weight\n";
  for (int d1 = 0; d1 < w.n1; ++d1) {
    for (int d2 = 0; d2 < w.n2; ++d2) {
      if (d1 == 0 && d2 == 0) continue;
      out << d1 << ',' << d2 << ',' << format_g17(w.qat(d1, d2)) << '\n';
    }
  }
  return out.str();
}

inline std::string table_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << "ell,value,local_rate\n";
  for (const auto& r : t.rows) {
    out << format_g17(r.ell) << ',' << format_g17(r.value) << ','
        << format_g17(r.local_rate) << '\n';
  }
  return out.str();
}

// Reads a 1D profile written by grid_function_csv: column x1 carries the
// coordinate, rows must form a uniform interior lattice.
inline GridFunction read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("profile file not found: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("profile file empty: " + path.string());
  }
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x1 = 0.0, x2 = 0.0, val = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x1, &x2, &val) != 3) {
      throw ConfigError("malformed profile row: " + line);
    }
    rows.emplace_back(x1, val);
  }
  if (rows.size() < 2) {
    throw ConfigError("profile needs at least two rows: " + path.string());
  }
  std::sort(rows.begin(), rows.end());
  const double h = rows[1].first - rows[0].first;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (std::abs(rows[i + 1].first - rows[i].first - h) > 1e-9 * h) {
      throw ConfigError("profile nodes are not uniformly spaced");
    }
  }
  UniformGrid grid = UniformGrid::line(rows.front().first - h,
                                       rows.back().first + h, h);
  GridFunction u = GridFunction::zeros(grid);
  for (std::size_t i = 0; i < rows.size(); ++i) u.v[i] = rows[i].second;
  return u;
}

enum class ForceKind { One, Slab, Profile };

struct ForceSpec {
  ForceKind kind = ForceKind::One;
  std::string profile_path;

  static ForceSpec parse(const std::string& text) {
    ForceSpec f;
    if (text == "one") {
      f.kind = ForceKind::One;
    } else if (text == "slab") {
      f.kind = ForceKind::Slab;
    } else if (text.rfind("profile:", 0) == 0) {
      f.kind = ForceKind::Profile;
      f.profile_path = text.substr(8);
      if (!std::filesystem::exists(f.profile_path)) {
        throw ConfigError("force profile file missing: " + f.profile_path);
      }
    } else {
      throw ConfigError("force must be one | slab | profile:<path>, got '" +
                        text + "'");
    }
    return f;
  }
  std::string text() const {
    switch (kind) {
      case ForceKind::One:
        return "one";
      case ForceKind::Slab:
        return "slab";
      default:
        return "profile:" + profile_path;
    }
  }
};

struct RunConfig {
  double s = 0.75;
  double h = 1.0 / 16.0;
  std::vector<double> ladder = {4.0, 8.0, 16.0};
  double alpha = 0.5;
  double eps = 0.75;  // defaults to s when absent
  double lambda = 8.0;
  Normalization norm = Normalization::StandardFourPow;
  ForceSpec force;

  LadderSpec ladder_spec() const {
    LadderSpec spec;
    spec.s = s;
    spec.h = h;
    spec.ladder = ladder;
    spec.alpha = alpha;
    spec.eps = eps;
    spec.lambda = lambda;
    spec.norm = norm;
    return spec;
  }
};

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["s"] = c.s;
  j["h"] = c.h;
  j["ladder"] = c.ladder;
  j["alpha"] = c.alpha;
  j["eps"] = c.eps;
  j["lambda"] = c.lambda;
  j["norm"] =
      c.norm == Normalization::StandardFourPow ? "standard" : "paper";
  j["force"] = c.force.text();
  return j;
}

inline Normalization parse_norm(const std::string& text) {
  if (text == "standard") return Normalization::StandardFourPow;
  if (text == "paper") return Normalization::PaperTwoPow;
  throw ConfigError("norm must be 'standard' or 'paper', got '" + text + "'");
}

inline RunConfig parse_config_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("s")) c.s = j.at("s").get<double>();
    if (j.contains("h")) c.h = j.at("h").get<double>();
    if (j.contains("ladder")) {
      c.ladder = j.at("ladder").get<std::vector<double>>();
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    c.eps = j.contains("eps") ? j.at("eps").get<double>() : c.s;
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("norm")) {
      c.norm = parse_norm(j.at("norm").get<std::string>());
    }
    if (j.contains("force")) {
      c.force = ForceSpec::parse(j.at("force").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") +
                      e.what());
  }
  // Validate module preconditions before any computation starts.
  if (!(c.s > 0.0) || !(c.s < 1.0)) {
    throw ConfigError("config field 's' must lie in (0,1), got " +
                      format_g17(c.s));
  }
  if (!(c.h > 0.0)) {
    throw ConfigError("config field 'h' must be positive");
  }
  if (!(c.alpha > 0.0) || !(c.alpha < 1.0)) {
    throw ConfigError("config field 'alpha' must lie in (0,1)");
  }
  if (!(c.eps > 0.0) || c.eps > 2.0) {
    throw ConfigError("config field 'eps' must lie in (0,2]");
  }
  if (!(c.lambda > 0.0)) {
    throw ConfigError("config field 'lambda' must be positive");
  }
  if (c.ladder.empty()) {
    throw ConfigError("config field 'ladder' must be nonempty");
  }
  return c;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  return parse_config_json(j);
}

struct RatesOutput {
  ConvergenceTable table;
  nlohmann::json summary;  // always carries "pass"
  std::vector<std::pair<double, GridFunction>> solutions;  // optional
};

inline void emit_outputs(const std::filesystem::path& dir,
                         const RatesOutput& out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output dir " + dir.string());
  atomic_write(dir / "table.csv", table_csv(out.table));
  atomic_write(dir / "summary.json", out.summary.dump(2) + "\n");
  for (const auto& [ell, u] : out.solutions) {
    std::ostringstream name;
    name << "solution_" << format_g17(ell) << ".csv";
    atomic_write(dir / name.str(), grid_function_csv(u));
  }
}

}  // namespace fraclap::io
