#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psamp/amplifier.hpp"
#include "psamp/config.hpp"
#include "psamp/errors.hpp"
#include "psamp/io.hpp"
#include "psamp/scan.hpp"
#include "psamp/schmidt.hpp"
#include "psamp/tpa.hpp"

namespace psamp {

namespace cli_detail {

struct Options {
  std::string command;
  std::string config = "default";
  std::string out;
  std::string format;
  std::size_t grid_size = 0;
  std::size_t threads = 0;
  std::vector<std::string> overrides;
  bool quiet = false;
};

inline std::string read_config_text(const std::string& path) {
  if (path == "default") return {};
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline RunConfig load(const Options& o) {
  std::string text = read_config_text(o.config);
  // --set key=value lines are appended; a key set twice is a parse error.
  for (const auto& s : o.overrides) text += "\n" + s;
  RunConfig cfg = parse_config(text);
  if (!o.format.empty()) cfg.format = o.format == "json" ? OutputFormat::json : OutputFormat::csv;
  if (o.grid_size) {
    if (o.grid_size < QGrid::min_points) throw ValidationError("--grid-size", "needs at least 8 points");
    cfg.grid.n_points = o.grid_size;
  }
  if (o.threads) cfg.threads = o.threads;
  return cfg;
}

inline std::filesystem::path output_dir(const Options& o, const RunConfig& cfg) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) return env;
  return cfg.output_directory;
}

inline void warn_coverage(const RunConfig& cfg, const QGrid& grid, const Options& o, std::ostream& err) {
  if (!o.quiet && !grid_covers_phase_matching(cfg.physics, grid))
    err << "warning: grid half-extent " << format_number(grid.half_extent())
        << " rad/m is below twice the phase-matching width; the kernel is truncated\n";
}

inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

inline int cmd_tpa(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const QGrid grid = resolve_grid(cfg.physics, cfg.grid_spec(), 0.0);
  warn_coverage(cfg, grid, o, err);
  const auto f = build_tpa(cfg.physics, grid);
  const auto dir = output_dir(o, cfg);
  std::filesystem::path path;
  if (cfg.format == OutputFormat::csv) {
    std::ostringstream s;
    io::write_tpa_csv(s, f);
    path = io::write_file(dir, "tpa.csv", s.str());
  } else {
    path = io::write_file(dir, "tpa.json", io::dump(io::envelope(cfg, io::tpa_json(f))));
  }
  if (!o.quiet)
    out << "tpa: " << grid.size() << "x" << grid.size() << " samples over |q| <= "
        << format_number(grid.half_extent()) << " rad/m -> " << path.string() << "\n";
  return 0;
}

inline int cmd_schmidt(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const QGrid grid = resolve_grid(cfg.physics, cfg.grid_spec(), 0.0);
  warn_coverage(cfg, grid, o, err);
  const auto model = build_model(cfg.physics, grid, cfg.grid.truncation);
  const auto& d = model.decomposition;
  const auto dir = output_dir(o, cfg);
  std::string where;
  if (cfg.format == OutputFormat::csv) {
    std::ostringstream w, m;
    io::write_weights_csv(w, d);
    io::write_modes_csv(m, d, cfg.output_modes);
    where = io::write_file(dir, "schmidt_weights.csv", w.str()).string() + ", " +
            io::write_file(dir, "schmidt_modes.csv", m.str()).string();
  } else {
    where = io::write_file(dir, "schmidt.json",
                           io::dump(io::envelope(cfg, io::schmidt_json(d, cfg.output_modes))))
                .string();
  }
  if (!o.quiet)
    out << "schmidt: K = " << fixed(schmidt_number(d), 3) << ", " << d.size()
        << " modes retained, lambda_0 = " << fixed(d.weights()(0), 5) << " -> " << where << "\n";
  return 0;
}

inline int cmd_amplify(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const QGrid grid = resolve_grid(cfg.physics, cfg.grid_spec(), cfg.seed_divergence);
  warn_coverage(cfg, grid, o, err);
  const auto model = build_model(cfg.physics, grid, cfg.grid.truncation);
  const cplx alpha = std::polar(std::sqrt(cfg.seed_photon_number), cfg.seed_phase);
  const auto seed = gaussian_seed(grid, cfg.seed_divergence, cfg.seed_angle * cfg.physics.wavenumber(),
                                  cfg.physics.seed_wavelength, alpha);
  const auto ov = overlaps(seed, model.decomposition);
  const auto stats = output_photon_number(ov, model.decomposition, alpha);
  const auto half = half_spectrum_photon_number(seed, model.decomposition, alpha, Half::signal);
  const auto pts = phase_scan(ov, model.decomposition, cfg.seed_photon_number, cfg.n_phases);

  io::json data = io::stats_json(stats);
  data["photons_at_seed_phase"] = stats.at(cfg.seed_phase);
  data["signal_half"] = io::stats_json(half);

  const auto dir = output_dir(o, cfg);
  if (cfg.format == OutputFormat::csv) {
    std::ostringstream s;
    io::write_phase_scan_csv(s, pts);
    io::write_file(dir, "phase_scan.csv", s.str());
  } else {
    io::json full = data;
    io::json scan = io::json::array();
    for (const auto& p : pts) scan.push_back(io::json{{"phase_rad", p.phase}, {"photons", p.photons}});
    full["phase_scan"] = std::move(scan);
    io::write_file(dir, "amplify.json", io::dump(io::envelope(cfg, std::move(full))));
  }
  out << data.dump() << "\n";
  return 0;
}

inline int cmd_scan(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const QGrid grid = resolve_grid(cfg.physics, cfg.grid_spec(), cfg.scan_divergence);
  warn_coverage(cfg, grid, o, err);
  const auto model = build_model(cfg.physics, grid, cfg.grid.truncation);
  const auto rows = scan_angle(model, cfg.scan_divergence, cfg.scan_angles, cfg.threads);

  std::string width;
  io::json fw = nullptr;
  try {
    const double w = visibility_fwhm(rows);
    width = fixed(w * 1e3, 3) + " mrad";
    fw = w * 1e3;
  } catch (const std::exception& e) {
    width = std::string("undetermined (") + e.what() + ")";
  }

  const auto dir = output_dir(o, cfg);
  std::filesystem::path path;
  if (cfg.format == OutputFormat::csv) {
    std::ostringstream s;
    io::write_scan_csv(s, rows);
    path = io::write_file(dir, "scan.csv", s.str());
  } else {
    io::json data{{"divergence_mrad", cfg.scan_divergence * 1e3},
                  {"fwhm_mrad", fw},
                  {"rows", io::scan_json(rows)}};
    path = io::write_file(dir, "scan.json", io::dump(io::envelope(cfg, std::move(data))));
  }
  if (!o.quiet)
    out << "scan: divergence " << format_number(cfg.scan_divergence * 1e3) << " mrad, " << rows.size()
        << " angles, FWHM = " << width << " -> " << path.string() << "\n";
  return 0;
}

inline int cmd_map(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto spec = cfg.map_spec();
  const QGrid grid = resolve_grid(cfg.physics, cfg.grid_spec(), spec.divergences.front());
  warn_coverage(cfg, grid, o, err);
  const auto map = scan_map(spec, cfg.threads);
  const auto dir = output_dir(o, cfg);
  std::filesystem::path path;
  if (cfg.format == OutputFormat::csv) {
    std::ostringstream s;
    io::write_map_csv(s, map);
    path = io::write_file(dir, "map.csv", s.str());
  } else {
    path = io::write_file(dir, "map.json", io::dump(io::envelope(cfg, io::map_json(map))));
  }
  if (!o.quiet)
    out << "map: " << map.divergences.size() << " divergences x " << map.central_angles.size()
        << " angles on a " << map.grid_points << "-point grid -> " << path.string() << "\n";
  return 0;
}

}  // namespace cli_detail

/**
 * Entry point behind the psamp executable. `args` excludes the program name.
 * Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
 */
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  cli_detail::Options o;
  CLI::App app{"Multimode phase-sensitive amplifier simulator", "psamp"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1, 1);
  app.fallthrough();

  app.add_option("--config", o.config, "Config file, or 'default' for built-in values");
  app.add_option("--out", o.out, "Output directory (overrides OUTPUT_DIR and output.directory)");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--grid-size", o.grid_size, "Number of wavevector samples");
  app.add_option("--threads", o.threads, "Worker threads for scan and map")->check(CLI::PositiveNumber);
  app.add_option("--set", o.overrides, "Extra config line, e.g. --set physics.gain=2");
  app.add_flag("--quiet,-q", o.quiet, "Suppress summary lines and warnings");

  const std::pair<const char*, const char*> commands[] = {
      {"tpa", "Write the two-photon amplitude on the wavevector grid"},
      {"schmidt", "Write Schmidt weights and leading modes"},
      {"amplify", "Print seeded output photon statistics as JSON"},
      {"scan", "Visibility versus central angle at one divergence"},
      {"map", "Visibility over divergence and central angle"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    const RunConfig cfg = cli_detail::load(o);
    if (o.command == "tpa") return cli_detail::cmd_tpa(o, cfg, out, err);
    if (o.command == "schmidt") return cli_detail::cmd_schmidt(o, cfg, out, err);
    if (o.command == "amplify") return cli_detail::cmd_amplify(o, cfg, out, err);
    if (o.command == "scan") return cli_detail::cmd_scan(o, cfg, out, err);
    return cli_detail::cmd_map(o, cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace psamp
