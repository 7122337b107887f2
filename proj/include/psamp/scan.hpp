#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "psamp/amplifier.hpp"
#include "psamp/errors.hpp"
#include "psamp/schmidt.hpp"
#include "psamp/tpa.hpp"

namespace psamp {

#ifndef PSAMP_VERSION
#define PSAMP_VERSION "0.1.0"
#endif

inline constexpr const char* version = PSAMP_VERSION;

/// Grid choice for a sweep; unset fields are derived from the physics.
struct GridSpec {
  std::optional<std::size_t> n_points;
  std::optional<double> q_max;  // rad/m
  double truncation = 0.999;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/**
 * Grid for a configuration. The half-extent defaults to 3 q_pm. An automatic
 * point count is the smallest odd count that still gives at least two
 * samples across the narrowest seed, with 257 as the floor.
 */
inline QGrid resolve_grid(const CrystalPumpConfig& cfg, const GridSpec& spec,
                          double narrowest_divergence) {
  const double q_max = spec.q_max.value_or(3.0 * phase_matching_bandwidth(cfg));
  if (spec.n_points) return QGrid(*spec.n_points, q_max);
  std::size_t n = 257;
  if (narrowest_divergence > 0.0) {
    const double step = 0.5 * cfg.wavenumber() * narrowest_divergence;
    const auto half = static_cast<std::size_t>(std::ceil(q_max / step));
    n = std::max(n, 2 * half + 1);
  }
  return QGrid(n, q_max);
}

/// Physics configuration with its grid and (seed-independent) decomposition.
struct AmplifierModel {
  CrystalPumpConfig physics;
  QGrid grid;
  FarDecomposition decomposition;
};

inline AmplifierModel build_model(const CrystalPumpConfig& cfg, const QGrid& grid,
                                  double truncation = 0.999) {
  auto tpa = build_tpa(cfg, grid);
  DecomposeOptions opt;
  opt.truncation = truncation;
  auto d = decompose(tpa, cfg.gain, opt);
  return AmplifierModel{cfg, grid, std::move(d)};
}

struct VisibilityResult {
  double divergence;     // rad
  double central_angle;  // rad
  PhaseScanResult stats;
};

/// Visibility of a unit-photon Gaussian seed at one (divergence, angle) point.
inline VisibilityResult evaluate(const AmplifierModel& model, double divergence,
                                 double central_angle) {
  const double q0 = central_angle * model.physics.wavenumber();
  const auto seed = gaussian_seed(model.grid, divergence, q0, model.physics.seed_wavelength);
  const auto ov = overlaps(seed, model.decomposition);
  return {divergence, central_angle, output_photon_number(ov, model.decomposition, seed.alpha)};
}

namespace detail {

// Runs body(i) for i in [0, count). Workers pull indices from a shared
// counter and write only their own slot, so the outcome never depends on
// scheduling. The exception with the lowest index is rethrown.
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(threads, count);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline void check_increasing(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw InvalidArgument(std::string(what) + " must not be empty");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw InvalidArgument(std::string(what) + " must be strictly increasing");
}

inline std::string mrad(double angle) { return std::to_string(angle * 1e3) + " mrad"; }

}  // namespace detail

/// One row of the sweep against an existing model; results follow input order.
inline std::vector<VisibilityResult> scan_angle(const AmplifierModel& model, double divergence,
                                                std::span<const double> angles,
                                                std::size_t threads = 1) {
  std::vector<std::optional<VisibilityResult>> slots(angles.size());
  detail::parallel_for(angles.size(), threads, [&](std::size_t i) {
    try {
      slots[i] = evaluate(model, divergence, angles[i]);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("central angle " + detail::mrad(angles[i]) + ": " + e.what());
    }
  });
  std::vector<VisibilityResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(*s);
  return out;
}

/// Visibility versus central angle at fixed divergence. One decomposition.
inline std::vector<VisibilityResult> scan_angle(double divergence, std::span<const double> angles,
                                                const CrystalPumpConfig& cfg,
                                                const GridSpec& grid = {},
                                                std::size_t threads = 1) {
  if (angles.empty()) throw InvalidArgument("angle list must not be empty");
  const auto model = build_model(cfg, resolve_grid(cfg, grid, divergence), grid.truncation);
  return scan_angle(model, divergence, angles, threads);
}

struct ScanSpec {
  std::vector<double> divergences;     // rad
  std::vector<double> central_angles;  // rad
  CrystalPumpConfig physics;
  GridSpec grid;
};

/// n evenly spaced values from a to b inclusive.
inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 1) return {a};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = b;
  return out;
}

/// n log-spaced values from a to b inclusive (a, b > 0).
inline std::vector<double> geomspace(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("geomspace needs positive bounds");
  if (n == 1) return {a};
  std::vector<double> out(n);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

/// 41 angles over 0-10 mrad and 31 log-spaced divergences over 0.05-10 mrad.
/// Built in mrad and divided down, the same way the config parser does it.
inline ScanSpec default_scan_spec() {
  ScanSpec s;
  for (double a : linspace(0.0, 10.0, 41)) s.central_angles.push_back(a / 1e3);
  for (double d : geomspace(0.05, 10.0, 31)) s.divergences.push_back(d / 1e3);
  return s;
}

struct VisibilityMap {
  std::vector<double> divergences;
  std::vector<double> central_angles;
  Eigen::MatrixXd visibility;  // rows: divergences, cols: central angles
  Eigen::MatrixXd n_max;
  Eigen::MatrixXd n_min;
  CrystalPumpConfig physics;
  std::size_t grid_points = 0;
  double grid_q_max = 0.0;
  double truncation = 0.0;
  std::string code_version = version;
};

inline VisibilityMap scan_map(const ScanSpec& spec, std::size_t threads = 1) {
  detail::check_increasing(spec.divergences, "divergences");
  detail::check_increasing(spec.central_angles, "central angles");
  const double narrowest = spec.divergences.front();
  const auto model = build_model(spec.physics, resolve_grid(spec.physics, spec.grid, narrowest),
                                 spec.grid.truncation);

  const auto rows = static_cast<Eigen::Index>(spec.divergences.size());
  const auto cols = static_cast<Eigen::Index>(spec.central_angles.size());
  VisibilityMap map;
  map.divergences = spec.divergences;
  map.central_angles = spec.central_angles;
  map.visibility.resize(rows, cols);
  map.n_max.resize(rows, cols);
  map.n_min.resize(rows, cols);
  map.physics = spec.physics;
  map.grid_points = model.grid.size();
  map.grid_q_max = model.grid.half_extent();
  map.truncation = spec.grid.truncation;

  const auto total = static_cast<std::size_t>(rows * cols);
  detail::parallel_for(total, threads, [&](std::size_t idx) {
    const auto r = static_cast<Eigen::Index>(idx / static_cast<std::size_t>(cols));
    const auto c = static_cast<Eigen::Index>(idx % static_cast<std::size_t>(cols));
    const double div = spec.divergences[static_cast<std::size_t>(r)];
    const double ang = spec.central_angles[static_cast<std::size_t>(c)];
    VisibilityResult res;
    try {
      res = evaluate(model, div, ang);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("divergence " + detail::mrad(div) + ", central angle " +
                            detail::mrad(ang) + ": " + e.what());
    }
    map.visibility(r, c) = res.stats.visibility;
    map.n_max(r, c) = res.stats.n_max;
    map.n_min(r, c) = res.stats.n_min;
  });
  return map;
}

/**
 * Full width at half maximum of a sampled peak, with the baseline at zero
 * and crossings located by linear interpolation.
 */
inline double fwhm(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DimensionMismatch("fwhm: xs and ys differ in length");
  if (xs.size() < 5) throw InvalidArgument("fwhm needs at least 5 points");
  detail::check_increasing(xs, "fwhm abscissae");
  const auto top = std::max_element(ys.begin(), ys.end());
  const auto i = static_cast<std::size_t>(top - ys.begin());
  if (std::count(ys.begin(), ys.end(), *top) > 1) throw InvalidArgument("fwhm: maximum is not unique");
  if (i == 0 || i + 1 == ys.size()) throw InvalidArgument("fwhm: maximum lies on the boundary");
  const double half = 0.5 * ys[i];

  std::size_t l = i;
  while (l > 0 && ys[l - 1] >= half) --l;
  if (l == 0) throw NoCrossing("curve stays above half maximum on the low side");
  std::size_t r = i;
  while (r + 1 < ys.size() && ys[r + 1] >= half) ++r;
  if (r + 1 == ys.size()) throw NoCrossing("curve stays above half maximum on the high side");

  auto cross = [&](std::size_t a, std::size_t b) {
    return xs[a] + (half - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a]);
  };
  return cross(r, r + 1) - cross(l - 1, l);
}

/**
 * FWHM of a visibility-vs-angle curve. A one-sided sweep starting at zero
 * angle is mirrored first (the map is even in the central angle).
 */
inline double visibility_fwhm(std::span<const VisibilityResult> curve) {
  std::vector<double> xs, ys;
  const bool one_sided = !curve.empty() && curve.front().central_angle == 0.0 &&
                         std::all_of(curve.begin(), curve.end(),
                                     [](const VisibilityResult& v) { return v.central_angle >= 0.0; });
  if (one_sided)
    for (std::size_t i = curve.size(); i-- > 1;) {
      xs.push_back(-curve[i].central_angle);
      ys.push_back(curve[i].stats.visibility);
    }
  for (const auto& v : curve) {
    xs.push_back(v.central_angle);
    ys.push_back(v.stats.visibility);
  }
  return fwhm(xs, ys);
}

}  // namespace psamp
