#pragma once

// Config dialect (JSON with "schema": 1) and CSV/JSON serialization.
// Config errors carry the 1-based line of the offending key.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "field.hpp"
#include "harvesting.hpp"
#include "profiles.hpp"
#include "thermal_purity.hpp"

namespace mixedness::io {

using json = nlohmann::json;

inline constexpr int kSchema = 1;

class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& source, int line, const std::string& msg)
      : ValidationError(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Round-trippable decimal form of a double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class ConfigReader {
 public:
  ConfigReader(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {
    try {
      root_ = json::parse(text_);
    } catch (const json::parse_error& e) {
      throw ConfigError(source_, line_at(e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
    }
    if (!root_.is_object()) throw ConfigError(source_, 1, "top level must be a JSON object");
    if (root_.contains("schema") && root_["schema"] != kSchema)
      fail({"schema"}, "unsupported schema version (expected 1)");
  }

  static ConfigReader from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ConfigReader(ss.str(), path);
  }

  const json& root() const { return root_; }
  const std::string& source() const { return source_; }

  bool has(const std::vector<std::string>& path) const { return find(path) != nullptr; }

  const json& at(const std::vector<std::string>& path) const {
    const json* j = find(path);
    if (!j) fail(path, "missing required key '" + dotted(path) + "'");
    return *j;
  }

  double number(const std::vector<std::string>& path, std::optional<double> fallback = std::nullopt) const {
    const json* j = find(path);
    if (!j || j->is_null()) {
      if (fallback) return *fallback;
      fail(path, "missing required number '" + dotted(path) + "'");
    }
    if (j->is_string() && (*j == "inf" || *j == "infinity")) return std::numeric_limits<double>::infinity();
    if (!j->is_number()) fail(path, "'" + dotted(path) + "' must be a number");
    return j->get<double>();
  }

  std::optional<double> optional_number(const std::vector<std::string>& path) const {
    const json* j = find(path);
    if (!j || j->is_null()) return std::nullopt;
    return number(path);
  }

  long long integer(const std::vector<std::string>& path, std::optional<long long> fallback = std::nullopt) const {
    const json* j = find(path);
    if (!j || j->is_null()) {
      if (fallback) return *fallback;
      fail(path, "missing required integer '" + dotted(path) + "'");
    }
    if (!j->is_number_integer()) fail(path, "'" + dotted(path) + "' must be an integer");
    return j->get<long long>();
  }

  std::string string(const std::vector<std::string>& path, std::optional<std::string> fallback = std::nullopt) const {
    const json* j = find(path);
    if (!j || j->is_null()) {
      if (fallback) return *fallback;
      fail(path, "missing required string '" + dotted(path) + "'");
    }
    if (!j->is_string()) fail(path, "'" + dotted(path) + "' must be a string");
    return j->get<std::string>();
  }

  std::vector<double> number_list(const std::vector<std::string>& path) const {
    const json& j = at(path);
    if (!j.is_array()) fail(path, "'" + dotted(path) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
      if (!x.is_number()) fail(path, "'" + dotted(path) + "' must contain only numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    throw ConfigError(source_, line_of(path), msg);
  }

  /// Best-effort line of the last path segment that appears in the source text.
  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    std::size_t found = std::string::npos;
    for (const auto& seg : path) {
      const std::size_t p = text_.find("\"" + seg + "\"", pos);
      if (p == std::string::npos) break;
      found = pos = p;
    }
    return found == std::string::npos ? 1 : line_at(found);
  }

 private:
  static std::string dotted(const std::vector<std::string>& path) {
    std::string s;
    for (std::size_t i = 0; i < path.size(); ++i) s += (i ? "." : "") + path[i];
    return s;
  }

  int line_at(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
  }

  const json* find(const std::vector<std::string>& path) const {
    const json* j = &root_;
    for (const auto& seg : path) {
      if (!j->is_object() || !j->contains(seg)) return nullptr;
      j = &(*j)[seg];
    }
    return j;
  }

  std::string text_;
  std::string source_;
  json root_;
};

// ---------------------------------------------------------------------------
// Typed sections

/// "profile": {"family", "m", "ell" (default 1), "kappa" | "kappa_ell_over_pi" (ZKappa)}.
inline ModeProfile read_profile(const ConfigReader& cfg, const std::string& key = "profile") {
  std::map<std::string, std::string> kv;
  kv["family"] = cfg.string({key, "family"});
  kv["m"] = std::to_string(cfg.integer({key, "m"}));
  const double ell = cfg.number({key, "ell"}, 1.0);
  kv["ell"] = format_double(ell);
  if (parse_family(kv["family"]) == Family::ZKappa) {
    if (cfg.has({key, "kappa_ell_over_pi"})) {
      kv["kappa"] = format_double(cfg.number({key, "kappa_ell_over_pi"}) * std::numbers::pi / ell);
    } else {
      kv["kappa"] = format_double(cfg.number({key, "kappa"}));
    }
  }
  if (cfg.has({key, "dim"})) kv["dim"] = std::to_string(cfg.integer({key, "dim"}));
  try {
    return ModeProfile::from_keys(kv);
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    cfg.fail({key}, e.what());
  } catch (const std::logic_error& e) {
    cfg.fail({key}, std::string("bad profile value: ") + e.what());
  }
}

/// "field": {"dim", "regulator", "mass", "temperature" | "beta", "cavity_length"}.
inline FieldSpec read_field(const ConfigReader& cfg, const std::string& key = "field") {
  FieldSpec f;
  f.dim = static_cast<int>(cfg.integer({key, "dim"}, 1));
  try {
    f.regulator = parse_regulator(cfg.string({key, "regulator"}, "None"));
  } catch (const ValidationError& e) {
    cfg.fail({key, "regulator"}, e.what());
  }
  f.mass = cfg.number({key, "mass"}, f.regulator == Regulator::Mass ? 1.0 : 0.0);
  if (cfg.has({key, "beta"})) {
    f.beta = cfg.number({key, "beta"});
  } else {
    const double t = cfg.number({key, "temperature"}, 0.0);
    if (!(t >= 0.0)) cfg.fail({key, "temperature"}, "temperature must be >= 0");
    f.beta = FieldSpec::beta_from_temperature(t);
  }
  f.cavity_length = cfg.number({key, "cavity_length"}, f.regulator == Regulator::Cavity ? 1.0 : 0.0);
  try {
    f.validate();
  } catch (const ValidationError& e) {
    cfg.fail({key}, e.what());
  }
  return f;
}

/// "quadrature": {"rel_tol", "uv_cutoff_kl", "cavity_jmax"}; --tol overrides rel_tol.
inline QuadratureConfig read_quadrature(const ConfigReader& cfg, std::optional<double> tol_override) {
  QuadratureConfig q;
  q.rel_tol = cfg.number({"quadrature", "rel_tol"}, 1e-8);
  if (tol_override) q.rel_tol = *tol_override;
  q.uv_cutoff_kl = cfg.optional_number({"quadrature", "uv_cutoff_kl"});
  if (cfg.has({"quadrature", "cavity_jmax"}) && !cfg.at({"quadrature", "cavity_jmax"}).is_null())
    q.cavity_jmax = cfg.integer({"quadrature", "cavity_jmax"});
  try {
    q.validate();
  } catch (const ValidationError& e) {
    cfg.fail({"quadrature"}, e.what());
  }
  return q;
}

inline AxisSpec read_axis(const ConfigReader& cfg, const std::string& axis) {
  AxisSpec a{cfg.number({"grid", axis, "min"}), cfg.number({"grid", axis, "max"}),
             static_cast<int>(cfg.integer({"grid", axis, "count"}))};
  try {
    (void)a.samples();
  } catch (const ValidationError& e) {
    cfg.fail({"grid", axis}, e.what());
  }
  return a;
}

inline DetectorSpec read_detector(const ConfigReader& cfg, const std::string& name, DetectorKind kind) {
  const std::vector<std::string> base{"detectors", name};
  auto p = [&](const char* k) {
    auto v = base;
    v.push_back(k);
    return v;
  };
  DetectorSpec d;
  d.kind = kind;
  d.gap = cfg.number(p("gap"));
  d.coupling = cfg.number(p("coupling"), 1.0);
  d.z = cfg.number(p("z"), 0.0);
  if (cfg.has(p("center"))) {
    const auto c = cfg.number_list(p("center"));
    if (c.empty() || c.size() > 3) cfg.fail(p("center"), "center must have 1 to 3 components");
    for (std::size_t i = 0; i < c.size(); ++i) d.center[i] = c[i];
  }
  d.spatial_width = cfg.number(p("spatial_width"), 1.0);
  d.switch_center = cfg.number(p("switch_center"), 0.0);
  d.switch_width = cfg.number(p("switch_width"), 1.0);
  try {
    d.validate();
  } catch (const ValidationError& e) {
    cfg.fail(base, e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Purity grid serialization
//
// CSV: first row "# axis_x:" followed by the x samples; every further row is
// y, P(x_1, y), ..., P(x_n, y). Failed cells are written as "nan".

inline std::string grid_to_csv(const PurityGrid& g) {
  std::string out = "# axis_x:";
  for (std::size_t i = 0; i < g.x_axis.size(); ++i) out += (i ? "," : "") + format_double(g.x_axis[i]);
  out += "\n";
  for (std::size_t iy = 0; iy < g.y_axis.size(); ++iy) {
    out += format_double(g.y_axis[iy]);
    for (std::size_t ix = 0; ix < g.x_axis.size(); ++ix) {
      out += ",";
      out += g.status_at(iy, ix) == CellStatus::Ok ? format_double(g.at(iy, ix)) : "nan";
    }
    out += "\n";
  }
  return out;
}

struct CsvGrid {
  std::vector<double> x_axis;
  std::vector<double> y_axis;
  std::vector<double> values;  // row-major [y][x]
};

inline CsvGrid parse_grid_csv(const std::string& text) {
  auto parse_num = [](const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ValidationError("csv: bad number '" + s + "'");
    return v;
  };
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
  };
  std::stringstream in(text);
  std::string line;
  CsvGrid g;
  if (!std::getline(in, line) || line.rfind("# axis_x:", 0) != 0) throw ValidationError("csv: missing '# axis_x:' header");
  for (const auto& c : split(line.substr(9))) g.x_axis.push_back(parse_num(c));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != g.x_axis.size() + 1) throw ValidationError("csv: row width does not match axis_x");
    g.y_axis.push_back(parse_num(cells[0]));
    for (std::size_t i = 1; i < cells.size(); ++i) g.values.push_back(parse_num(cells[i]));
  }
  return g;
}

inline json grid_to_json(const PurityGrid& g, const json& metadata) {
  json j;
  j["schema"] = kSchema;
  j["metadata"] = metadata;
  j["profile"] = g.profile;
  j["regulator"] = regulator_name(g.regulator);
  j["dim"] = g.dim;
  j["axis_x"] = g.x_axis;
  j["axis_y"] = g.y_axis;
  json values = json::array(), status = json::array();
  for (std::size_t iy = 0; iy < g.y_axis.size(); ++iy) {
    json row = json::array(), srow = json::array();
    for (std::size_t ix = 0; ix < g.x_axis.size(); ++ix) {
      const bool ok = g.status_at(iy, ix) == CellStatus::Ok;
      row.push_back(ok ? json(g.at(iy, ix)) : json(nullptr));
      srow.push_back(cell_status_name(g.status_at(iy, ix)));
    }
    values.push_back(row);
    status.push_back(srow);
  }
  j["values"] = values;
  j["status"] = status;
  return j;
}

// ---------------------------------------------------------------------------

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json elements_to_json(const HarvestElements& e) {
  return json{{"L_AA", complex_json(e.L_AA())}, {"L_AB", complex_json(e.L_AB())}, {"L_BA", complex_json(e.L_BA())},
              {"L_BB", complex_json(e.L_BB())}, {"M", complex_json(e.M)},         {"K_A", complex_json(e.K_A)},
              {"K_B", complex_json(e.K_B)}};
}

inline json detector_to_json(const DetectorSpec& d) {
  return json{{"kind", detector_kind_name(d.kind)},
              {"gap", d.gap},
              {"coupling", d.coupling},
              {"z", d.z},
              {"center", d.center},
              {"spatial_width", d.spatial_width},
              {"switch_center", d.switch_center},
              {"switch_width", d.switch_width}};
}

inline json field_to_json(const FieldSpec& f) {
  return json{{"dim", f.dim},
              {"regulator", regulator_name(f.regulator)},
              {"mass", f.mass},
              {"beta", std::isinf(f.beta) ? json("inf") : json(f.beta)},
              {"cavity_length", f.cavity_length}};
}

inline json quadrature_to_json(const QuadratureConfig& q) {
  return json{{"rel_tol", q.rel_tol},
              {"uv_cutoff_kl", q.uv_cutoff_kl ? json(*q.uv_cutoff_kl) : json(nullptr)},
              {"cavity_jmax", q.cavity_jmax ? json(*q.cavity_jmax) : json(nullptr)}};
}

inline json profile_to_json(const ModeProfile& p) {
  json j{{"family", family_name(p.family())}, {"m", p.m()}, {"ell", p.ell()}, {"dim", p.dim()}};
  if (p.family() == Family::ZKappa) j["kappa"] = p.kappa();
  return j;
}

}  // namespace mixedness::io
