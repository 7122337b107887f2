#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psamp/amplifier.hpp"
#include "psamp/amplitude.hpp"
#include "psamp/config.hpp"
#include "psamp/errors.hpp"
#include "psamp/scan.hpp"
#include "psamp/schmidt.hpp"

namespace psamp::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline std::string num(double v) { return format_number(v); }
inline std::string mrad(double rad) { return format_number(rad * 1e3); }

// ---- CSV -------------------------------------------------------------------

inline void write_tpa_csv(std::ostream& os, const FarAmplitude& f) {
  const auto& g = f.grid();
  os << "q_s,q_i,re_f,im_f\n";
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t k = 0; k < g.size(); ++k) {
      const cplx v = f(j, k);
      os << num(g[j]) << ',' << num(g[k]) << ',' << num(v.real()) << ',' << num(v.imag()) << '\n';
    }
}

inline void write_weights_csv(std::ostream& os, const FarDecomposition& d) {
  const auto g = d.gains();
  os << "index,weight,mode_gain,parity\n";
  for (std::size_t m = 0; m < d.size(); ++m) {
    const auto i = static_cast<Eigen::Index>(m);
    os << m << ',' << num(d.weights()(i)) << ',' << num(g(i)) << ',' << to_string(d.parity()[m]) << '\n';
  }
}

/// Columns: q, then re/im of the signal modes U_0..U_{count-1}.
inline void write_modes_csv(std::ostream& os, const FarDecomposition& d, std::size_t count) {
  count = std::min(count, d.size());
  const auto& g = d.grid();
  os << 'q';
  for (std::size_t m = 0; m < count; ++m) os << ",re_u" << m << ",im_u" << m;
  os << '\n';
  for (std::size_t j = 0; j < g.size(); ++j) {
    os << num(g[j]);
    for (std::size_t m = 0; m < count; ++m) {
      const cplx v = d.signal_modes()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m));
      os << ',' << num(v.real()) << ',' << num(v.imag());
    }
    os << '\n';
  }
}

inline void write_phase_scan_csv(std::ostream& os, const std::vector<PhasePoint>& pts) {
  os << "phase_rad,photons\n";
  for (const auto& p : pts) os << num(p.phase) << ',' << num(p.photons) << '\n';
}

inline void write_scan_csv(std::ostream& os, const std::vector<VisibilityResult>& rows) {
  os << "central_angle_mrad,visibility,n_max,n_min\n";
  for (const auto& r : rows)
    os << mrad(r.central_angle) << ',' << num(r.stats.visibility) << ',' << num(r.stats.n_max) << ','
       << num(r.stats.n_min) << '\n';
}

/// First row: central angles (mrad); first column: divergences (mrad).
inline void write_map_csv(std::ostream& os, const VisibilityMap& m) {
  os << "divergence_mrad";
  for (double a : m.central_angles) os << ',' << mrad(a);
  os << '\n';
  for (std::size_t r = 0; r < m.divergences.size(); ++r) {
    os << mrad(m.divergences[r]);
    for (Eigen::Index c = 0; c < m.visibility.cols(); ++c)
      os << ',' << num(m.visibility(static_cast<Eigen::Index>(r), c));
    os << '\n';
  }
}

// ---- JSON ------------------------------------------------------------------

inline json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const auto& [k, v] : config_entries(cfg)) out[k] = v;
  return out;
}

inline json envelope(const RunConfig& cfg, json data) {
  json out;
  out["schema_version"] = schema_version;
  out["code_version"] = version;
  out["config"] = config_json(cfg);
  out["data"] = std::move(data);
  return out;
}

inline json stats_json(const PhaseScanResult& s) {
  return json{{"A", s.A},           {"abs_C", std::abs(s.C)}, {"arg_C", std::arg(s.C)},
              {"visibility", s.visibility}, {"n_max", s.n_max}, {"n_min", s.n_min},
              {"optimal_phase", s.optimal_phase}};
}

inline json grid_json(const QGrid& g) {
  return json{{"n_points", g.size()}, {"q_max", g.half_extent()}, {"dq", g.spacing()}};
}

inline json tpa_json(const FarAmplitude& f) {
  json re = json::array(), im = json::array();
  for (Eigen::Index j = 0; j < f.values().rows(); ++j) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index k = 0; k < f.values().cols(); ++k) {
      rr.push_back(f.values()(j, k).real());
      ii.push_back(f.values()(j, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return json{{"grid", grid_json(f.grid())}, {"q", f.grid().samples()}, {"re_f", re}, {"im_f", im}};
}

inline json schmidt_json(const FarDecomposition& d, std::size_t mode_count) {
  mode_count = std::min(mode_count, d.size());
  const auto g = d.gains();
  json modes = json::array();
  for (std::size_t m = 0; m < mode_count; ++m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index j = 0; j < d.signal_modes().rows(); ++j) {
      const cplx v = d.signal_modes()(j, static_cast<Eigen::Index>(m));
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    modes.push_back(json{{"index", m}, {"re_u", re}, {"im_u", im}});
  }
  json w = json::array(), gg = json::array(), par = json::array();
  for (std::size_t m = 0; m < d.size(); ++m) {
    w.push_back(d.weights()(static_cast<Eigen::Index>(m)));
    gg.push_back(g(static_cast<Eigen::Index>(m)));
    par.push_back(to_string(d.parity()[m]));
  }
  return json{{"grid", grid_json(d.grid())},
              {"schmidt_number", schmidt_number(d)},
              {"truncation_residual", d.truncation_residual()},
              {"weights", w},
              {"mode_gains", gg},
              {"parity", par},
              {"q", d.grid().samples()},
              {"modes", modes}};
}

inline json scan_json(const std::vector<VisibilityResult>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back(json{{"central_angle_mrad", r.central_angle * 1e3},
                       {"visibility", r.stats.visibility},
                       {"n_max", r.stats.n_max},
                       {"n_min", r.stats.n_min}});
  }
  return out;
}

inline json map_json(const VisibilityMap& m) {
  json div = json::array(), ang = json::array(), vis = json::array();
  for (double d : m.divergences) div.push_back(d * 1e3);
  for (double a : m.central_angles) ang.push_back(a * 1e3);
  for (Eigen::Index r = 0; r < m.visibility.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.visibility.cols(); ++c) row.push_back(m.visibility(r, c));
    vis.push_back(std::move(row));
  }
  return json{{"divergences_mrad", div},
              {"central_angles_mrad", ang},
              {"visibility", vis},
              {"grid", json{{"n_points", m.grid_points}, {"q_max", m.grid_q_max}}},
              {"truncation", m.truncation}};
}

// ---- files -----------------------------------------------------------------

/// Writes `content` to dir/name, creating dir. Returns the full path.
inline std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                        const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto path = dir / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
  return path;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace psamp::io
