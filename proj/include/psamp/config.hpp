#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "psamp/errors.hpp"
#include "psamp/scan.hpp"
#include "psamp/tpa.hpp"

namespace psamp {

enum class OutputFormat { csv, json };

/// Grid as configured. The half-extent is a far-field angle q_max / k.
struct GridSettings {
  std::optional<std::size_t> n_points;
  std::optional<double> q_max_angle;  // rad
  double truncation = 0.999;

  friend bool operator==(const GridSettings&, const GridSettings&) = default;
};

/**
 * Everything a CLI run needs. Lengths and angles are SI internally; the
 * text form carries the unit in the key suffix (_nm, _mm, _um, _mrad).
 */
struct RunConfig {
  CrystalPumpConfig physics;
  GridSettings grid;

  double scan_divergence = 3.8e-3;
  std::vector<double> scan_angles;
  std::vector<double> scan_divergences;
  std::size_t n_phases = 64;
  std::size_t threads = 1;

  double seed_divergence = 3.8e-3;
  double seed_angle = 0.0;
  double seed_photon_number = 1.0;
  double seed_phase = 0.0;

  std::string output_directory = ".";
  OutputFormat format = OutputFormat::csv;
  std::size_t output_modes = 10;

  RunConfig() {
    const auto s = default_scan_spec();
    scan_angles = s.central_angles;
    scan_divergences = s.divergences;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  GridSpec grid_spec() const {
    GridSpec g;
    g.n_points = grid.n_points;
    if (grid.q_max_angle) g.q_max = *grid.q_max_angle * physics.wavenumber();
    g.truncation = grid.truncation;
    return g;
  }

  ScanSpec map_spec() const { return ScanSpec{scan_divergences, scan_angles, physics, grid_spec()}; }
};

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

// Unit conversions shift the decimal exponent of the text itself, so
// "240" with a micrometre key reads exactly as the literal 240e-6 and the
// shortest text of an SI value converts back without rounding.
inline std::string shift_exponent(std::string_view text, int shift) {
  const std::string t = trim(text);
  const auto e = t.find_first_of("eE");
  int exp10 = 0;
  if (e != std::string::npos) {
    const std::string tail = t.substr(e + 1);
    const char* first = tail.data() + (!tail.empty() && tail[0] == '+' ? 1 : 0);
    auto res = std::from_chars(first, tail.data() + tail.size(), exp10);
    if (res.ec != std::errc() || res.ptr != tail.data() + tail.size()) return t;
  }
  return t.substr(0, e) + "e" + std::to_string(exp10 + shift);
}

// SI value as text in a unit 10^-shift of the SI unit.
inline std::string scaled_text(double si, int shift) {
  if (si == 0.0 || !std::isfinite(si)) return format_number(si);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, si, std::chars_format::scientific);
  const std::string sci(buf, res.ptr);
  const auto e = sci.find('e');
  std::string mant = sci.substr(0, e);
  const int exp10 = std::stoi(sci.substr(e + 1)) + shift;
  const bool negative = mant[0] == '-';
  if (negative) mant.erase(0, 1);
  std::string digits;
  for (char ch : mant)
    if (ch != '.') digits += ch;
  std::string out;
  if (exp10 < -5 || exp10 > 16) {
    out = digits.substr(0, 1) + (digits.size() > 1 ? "." + digits.substr(1) : "") + "e" + std::to_string(exp10);
  } else if (exp10 < 0) {
    out = "0." + std::string(static_cast<std::size_t>(-exp10 - 1), '0') + digits;
  } else {
    const auto int_len = static_cast<std::size_t>(exp10 + 1);
    if (digits.size() <= int_len) out = digits + std::string(int_len - digits.size(), '0');
    else out = digits.substr(0, int_len) + "." + digits.substr(int_len);
  }
  return negative ? "-" + out : out;
}

struct KeyDef {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline double number_or_throw(const std::string& key, const std::string& text) {
  auto v = parse_double(text);
  if (!v || !std::isfinite(*v)) throw ValidationError(key, "'" + text + "' is not a number");
  return *v;
}

inline double scaled_or_throw(const std::string& key, const std::string& text, int shift) {
  number_or_throw(key, text);
  return number_or_throw(key, shift_exponent(text, -shift));
}

inline std::size_t count_or_throw(const std::string& key, const std::string& text, std::size_t min) {
  const double v = number_or_throw(key, text);
  if (v != std::floor(v) || v < static_cast<double>(min))
    throw ValidationError(key, "expected an integer >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

// "a:b:n" (linear), "a:b:n:log" (geometric) or "x, y, z", returned in SI.
// Range points are generated in the unit and divided down, like
// default_scan_spec(); listed values convert exactly.
inline std::vector<double> parse_list(const std::string& key, const std::string& text, int shift) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
    if (parts.size() < 3 || parts.size() > 4 || (parts.size() == 4 && parts[3] != "log"))
      throw ValidationError(key, "range must be start:stop:count or start:stop:count:log");
    const double a = number_or_throw(key, parts[0]);
    const double b = number_or_throw(key, parts[1]);
    const std::size_t n = count_or_throw(key, parts[2], 1);
    if (parts.size() == 4) {
      if (!(a > 0.0) || !(b > 0.0)) throw ValidationError(key, "log range needs positive bounds");
      out = geomspace(a, b, n);
    } else {
      out = linspace(a, b, n);
    }
    for (auto& x : out) x /= std::pow(10.0, shift);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(scaled_or_throw(key, p, shift));
  if (out.empty()) throw ValidationError(key, "empty list");
  return out;
}

inline std::string join_list(const std::vector<double>& xs, int shift) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += scaled_text(xs[i], shift);
  }
  return s;
}

inline void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError(key, what);
}

inline void require_increasing(const std::vector<double>& xs, const std::string& key) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    require(xs[i] > xs[i - 1], key, "values must be strictly increasing");
}

inline const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = [] {
    std::vector<KeyDef> t;
    auto length = [&t](std::string name, int shift, double CrystalPumpConfig::*field) {
      t.push_back({name,
                   [name, shift, field](RunConfig& c, const std::string& v) {
                     const double x = scaled_or_throw(name, v, shift);
                     require(x > 0.0, name, "must be positive");
                     c.physics.*field = x;
                   },
                   [shift, field](const RunConfig& c) { return scaled_text(c.physics.*field, shift); }});
    };
    length("physics.wavelength_nm", 9, &CrystalPumpConfig::seed_wavelength);
    length("physics.crystal_length_mm", 3, &CrystalPumpConfig::crystal_length);
    length("physics.pump_fwhm_um", 6, &CrystalPumpConfig::pump_fwhm);
    t.push_back({"physics.gain",
                 [](RunConfig& c, const std::string& v) {
                   const double g = number_or_throw("physics.gain", v);
                   require(g >= 0.0, "physics.gain", "must be non-negative");
                   c.physics.gain = g;
                 },
                 [](const RunConfig& c) { return format_number(c.physics.gain); }});
    t.push_back({"physics.phase_matching",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "sinc") c.physics.phase_matching = PhaseMatchingModel::sinc;
                   else if (v == "gaussian") c.physics.phase_matching = PhaseMatchingModel::gaussian_approx;
                   else throw ValidationError("physics.phase_matching", "expected 'sinc' or 'gaussian'");
                 },
                 [](const RunConfig& c) { return to_string(c.physics.phase_matching); }});

    t.push_back({"grid.n_points",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "auto") c.grid.n_points.reset();
                   else c.grid.n_points = count_or_throw("grid.n_points", v, QGrid::min_points);
                 },
                 [](const RunConfig& c) {
                   return c.grid.n_points ? std::to_string(*c.grid.n_points) : std::string("auto");
                 }});
    t.push_back({"grid.q_max_mrad",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "auto") {
                     c.grid.q_max_angle.reset();
                     return;
                   }
                   const double a = scaled_or_throw("grid.q_max_mrad", v, 3);
                   require(a > 0.0, "grid.q_max_mrad", "must be positive");
                   c.grid.q_max_angle = a;
                 },
                 [](const RunConfig& c) {
                   return c.grid.q_max_angle ? scaled_text(*c.grid.q_max_angle, 3) : std::string("auto");
                 }});
    t.push_back({"grid.truncation",
                 [](RunConfig& c, const std::string& v) {
                   const double x = number_or_throw("grid.truncation", v);
                   require(x > 0.0 && x <= 1.0, "grid.truncation", "must lie in (0, 1]");
                   c.grid.truncation = x;
                 },
                 [](const RunConfig& c) { return format_number(c.grid.truncation); }});

    t.push_back({"scan.divergence_mrad",
                 [](RunConfig& c, const std::string& v) {
                   const double x = scaled_or_throw("scan.divergence_mrad", v, 3);
                   require(x > 0.0, "scan.divergence_mrad", "must be positive");
                   c.scan_divergence = x;
                 },
                 [](const RunConfig& c) { return scaled_text(c.scan_divergence, 3); }});
    t.push_back({"scan.angles_mrad",
                 [](RunConfig& c, const std::string& v) {
                   auto xs = parse_list("scan.angles_mrad", v, 3);
                   require_increasing(xs, "scan.angles_mrad");
                   c.scan_angles = std::move(xs);
                 },
                 [](const RunConfig& c) { return join_list(c.scan_angles, 3); }});
    t.push_back({"scan.divergences_mrad",
                 [](RunConfig& c, const std::string& v) {
                   auto xs = parse_list("scan.divergences_mrad", v, 3);
                   require_increasing(xs, "scan.divergences_mrad");
                   require(xs.front() > 0.0, "scan.divergences_mrad", "must be positive");
                   c.scan_divergences = std::move(xs);
                 },
                 [](const RunConfig& c) { return join_list(c.scan_divergences, 3); }});
    t.push_back({"scan.n_phases",
                 [](RunConfig& c, const std::string& v) { c.n_phases = count_or_throw("scan.n_phases", v, 8); },
                 [](const RunConfig& c) { return std::to_string(c.n_phases); }});
    t.push_back({"scan.threads",
                 [](RunConfig& c, const std::string& v) { c.threads = count_or_throw("scan.threads", v, 1); },
                 [](const RunConfig& c) { return std::to_string(c.threads); }});

    t.push_back({"seed.divergence_mrad",
                 [](RunConfig& c, const std::string& v) {
                   const double x = scaled_or_throw("seed.divergence_mrad", v, 3);
                   require(x > 0.0, "seed.divergence_mrad", "must be positive");
                   c.seed_divergence = x;
                 },
                 [](const RunConfig& c) { return scaled_text(c.seed_divergence, 3); }});
    t.push_back({"seed.angle_mrad",
                 [](RunConfig& c, const std::string& v) {
                   c.seed_angle = scaled_or_throw("seed.angle_mrad", v, 3);
                 },
                 [](const RunConfig& c) { return scaled_text(c.seed_angle, 3); }});
    t.push_back({"seed.photon_number",
                 [](RunConfig& c, const std::string& v) {
                   const double x = number_or_throw("seed.photon_number", v);
                   require(x >= 0.0, "seed.photon_number", "must be non-negative");
                   c.seed_photon_number = x;
                 },
                 [](const RunConfig& c) { return format_number(c.seed_photon_number); }});
    t.push_back({"seed.phase_rad",
                 [](RunConfig& c, const std::string& v) { c.seed_phase = number_or_throw("seed.phase_rad", v); },
                 [](const RunConfig& c) { return format_number(c.seed_phase); }});

    t.push_back({"output.directory",
                 [](RunConfig& c, const std::string& v) {
                   require(!v.empty(), "output.directory", "must not be empty");
                   c.output_directory = v;
                 },
                 [](const RunConfig& c) { return c.output_directory; }});
    t.push_back({"output.format",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "csv") c.format = OutputFormat::csv;
                   else if (v == "json") c.format = OutputFormat::json;
                   else throw ValidationError("output.format", "expected 'csv' or 'json'");
                 },
                 [](const RunConfig& c) { return std::string(c.format == OutputFormat::csv ? "csv" : "json"); }});
    t.push_back({"output.modes",
                 [](RunConfig& c, const std::string& v) { c.output_modes = count_or_throw("output.modes", v, 1); },
                 [](const RunConfig& c) { return std::to_string(c.output_modes); }});
    return t;
  }();
  return table;
}

// Full key for a dotted or bare (unambiguous leaf) name.
inline const KeyDef& lookup(const std::string& key, std::size_t line) {
  const auto& table = key_table();
  for (const auto& k : table)
    if (k.name == key) return k;
  if (key.find('.') == std::string::npos) {
    const KeyDef* hit = nullptr;
    for (const auto& k : table) {
      if (k.name.substr(k.name.find('.') + 1) != key) continue;
      if (hit) throw ParseError(line, "key '" + key + "' is ambiguous; qualify it with a section");
      hit = &k;
    }
    if (hit) return *hit;
  }
  throw UnknownKeyError(key);
}

}  // namespace detail

/**
 * Parses a flat key/value document:
 *
 *   # comment
 *   physics.gain = 3.2
 *   pump_fwhm_um = 240          # bare keys work when unambiguous
 *   [scan]
 *   angles_mrad = 0:10:41
 *
 * Keys not present keep their defaults; unknown keys are rejected.
 */
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (!quoted && line[i] == '#') {
        line.resize(i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ParseError(line_no, "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    const auto& def = detail::lookup(key, line_no);
    if (auto [it, fresh] = seen.emplace(def.name, line_no); !fresh)
      throw ParseError(line_no, "'" + def.name + "' already set on line " + std::to_string(it->second));
    def.set(cfg, value);
  }
  return cfg;
}

/// Canonical text form listing every key; parse_config() of it reproduces cfg.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : detail::key_table()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

/// Every key with its canonical value.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : detail::key_table()) out.emplace_back(k.name, k.get(cfg));
  return out;
}

}  // namespace psamp
