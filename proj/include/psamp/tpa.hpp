#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "psamp/amplitude.hpp"
#include "psamp/errors.hpp"
#include "psamp/grid.hpp"

namespace psamp {

enum class PhaseMatchingModel { sinc, gaussian_approx };

inline std::string to_string(PhaseMatchingModel m) {
  return m == PhaseMatchingModel::sinc ? "sinc" : "gaussian";
}

/**
 * Physical parameters of a collinear degenerate type-I down-converter used
 * as an amplifier. All lengths are SI metres. Defaults are the 800 nm seed,
 * 2 mm BBO, 240 um pump (intensity FWHM) and G = 3.2 operating point.
 */
struct CrystalPumpConfig {
  double seed_wavelength = 800e-9;
  double crystal_length = 2e-3;
  double pump_fwhm = 240e-6;
  double gain = 3.2;
  PhaseMatchingModel phase_matching = PhaseMatchingModel::sinc;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument(std::string(name) + " must be positive and finite");
    };
    positive(seed_wavelength, "seed_wavelength");
    positive(crystal_length, "crystal_length");
    positive(pump_fwhm, "pump_fwhm");
    if (!(gain >= 0.0) || !std::isfinite(gain))
      throw InvalidArgument("gain must be non-negative and finite");
  }

  /// Vacuum wavenumber of the seed, 2 pi / lambda.
  double wavenumber() const { return 2.0 * std::numbers::pi / seed_wavelength; }

  /// Standard deviation of the pump's near-field *amplitude* profile. An
  /// intensity FWHM w means |E|^2 ~ exp(-4 ln2 x^2 / w^2), hence
  /// E ~ exp(-x^2 / (2 sigma^2)) with sigma = w / (2 sqrt(ln 2)); its angular
  /// spectrum is then exp(-sigma^2 q^2 / 2).
  double pump_sigma() const { return pump_fwhm / (2.0 * std::sqrt(std::numbers::ln2)); }

  friend bool operator==(const CrystalPumpConfig&, const CrystalPumpConfig&) = default;
};

namespace detail {

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

/// Positive root of sin(x)/x = 1/2.
inline double sinc_half_point() {
  double x = 1.9;
  for (int it = 0; it < 50; ++it) {
    const double f = std::sin(x) / x - 0.5;
    const double df = (x * std::cos(x) - std::sin(x)) / (x * x);
    const double step = f / df;
    x -= step;
    if (std::abs(step) < 1e-16 * x) break;
  }
  return x;
}

/// exp(-c x^2 / 2) has the same half-maximum point as sinc(x).
inline double gaussian_pm_coefficient() {
  const double xh = sinc_half_point();
  return 2.0 * std::numbers::ln2 / (xh * xh);
}

}  // namespace detail

/**
 * Wavevector at which the collinear phase-matching argument
 * L (q_s^2 + q_i^2) / (4k) reaches pi along q_s = q_i: q_pm = sqrt(2 pi k / L).
 */
inline double phase_matching_bandwidth(const CrystalPumpConfig& cfg) {
  cfg.validate();
  return std::sqrt(2.0 * std::numbers::pi * cfg.wavenumber() / cfg.crystal_length);
}

/// 257 points over +-3 q_pm: main lobe plus two side lobes, q = 0 on grid.
inline QGrid default_qgrid(const CrystalPumpConfig& cfg, std::size_t n_points = 257) {
  return QGrid(n_points, 3.0 * phase_matching_bandwidth(cfg));
}

inline bool grid_covers_phase_matching(const CrystalPumpConfig& cfg, const QGrid& grid) {
  return grid.half_extent() >= 2.0 * phase_matching_bandwidth(cfg);
}

/**
 * Far-field amplitude of collinear degenerate type-I down-conversion in the
 * paraxial approximation:
 *
 *   F(q_s, q_i) = N exp[-sigma_p^2 (q_s + q_i)^2 / 2] PM(q_s, q_i)
 *
 * with PM = sinc[L (q_s^2 + q_i^2) / (4k)] or its FWHM-matched Gaussian.
 * N normalizes the continuum norm to one. The result is real, exchange
 * symmetric and inversion symmetric by construction.
 */
inline FarAmplitude build_tpa(const CrystalPumpConfig& cfg, const QGrid& grid) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double sigma = cfg.pump_sigma();
  const double a = cfg.crystal_length / (4.0 * cfg.wavenumber());
  const double cg = detail::gaussian_pm_coefficient();
  const auto q = grid.samples();

  Eigen::MatrixXcd f(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      const double qs = q[static_cast<std::size_t>(j)];
      const double qi = q[static_cast<std::size_t>(k)];
      const double sum = qs + qi;
      const double x = a * (qs * qs + qi * qi);
      const double pm = cfg.phase_matching == PhaseMatchingModel::sinc
                            ? detail::sinc(x)
                            : std::exp(-0.5 * cg * x * x);
      const double v = std::exp(-0.5 * sigma * sigma * sum * sum) * pm;
      f(j, k) = v;
      f(k, j) = v;
    }
  }
  FarAmplitude out(grid, std::move(f));
  if (!(out.norm() > 0.0))
    throw InvalidArgument("amplitude vanishes on this grid; widen the grid or the pump");
  return out.normalized();
}

/**
 * Idealized thin-crystal, plane-wave-pump amplitude F ~ delta(q_s + q_i):
 * 1/dq on the antidiagonal, then normalized.
 */
inline FarAmplitude build_delta_tpa(const QGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) f(j, n - 1 - j) = 1.0 / grid.spacing();
  return FarAmplitude(grid, std::move(f)).normalized();
}

}  // namespace psamp
