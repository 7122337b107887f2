#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psamp/amplitude.hpp"
#include "psamp/errors.hpp"
#include "psamp/grid.hpp"
#include "psamp/schmidt.hpp"

namespace psamp {

/// Coherent seed alpha * f(q) with f normalized to sum |f|^2 dq = 1.
struct SeedSpectrum {
  QGrid grid;
  Eigen::VectorXcd amplitude;
  double divergence = 0.0;          // intensity FWHM of |f|^2 in angle, rad
  double central_wavevector = 0.0;  // rad/m
  double wavelength = 0.0;          // m
  cplx alpha{1.0, 0.0};

  double photon_number() const { return std::norm(alpha); }
  double phase() const { return std::arg(alpha); }
  double central_angle() const {
    return central_wavevector * wavelength / (2.0 * std::numbers::pi);
  }
};

/// Normalizes an arbitrary sampled profile into a seed.
inline SeedSpectrum make_seed(const QGrid& grid, Eigen::VectorXcd amplitude, cplx alpha = 1.0) {
  if (amplitude.size() != static_cast<Eigen::Index>(grid.size()))
    throw DimensionMismatch("seed profile length differs from grid size");
  const double norm = std::sqrt(amplitude.squaredNorm() * grid.spacing());
  if (!(norm > 0.0)) throw InvalidArgument("seed profile is identically zero");
  return SeedSpectrum{grid, amplitude / norm, 0.0, 0.0, 0.0, alpha};
}

/**
 * Gaussian seed whose angular intensity spectrum |f(q/k)|^2 has FWHM equal to
 * `divergence`. Written as exp[-lambda^2 (q - q0)^2 / (2 pi^2 w^2)] this is
 * w = divergence / sqrt(ln 2).
 *
 * Throws if the width spans fewer than two grid steps or if more than 1% of
 * the continuous |f|^2 lies outside the grid.
 */
inline SeedSpectrum gaussian_seed(const QGrid& grid, double divergence, double q0,
                                  double wavelength, cplx alpha = 1.0) {
  if (!(divergence > 0.0) || !std::isfinite(divergence))
    throw InvalidArgument("seed divergence must be positive");
  if (!(wavelength > 0.0)) throw InvalidArgument("seed wavelength must be positive");
  if (!(std::abs(q0) < grid.half_extent()))
    throw InvalidArgument("seed central wavevector lies outside the grid");
  const double k = 2.0 * std::numbers::pi / wavelength;
  const double fwhm_q = k * divergence;
  if (fwhm_q < 2.0 * grid.spacing())
    throw InvalidArgument("seed of divergence " + std::to_string(divergence * 1e3) +
                          " mrad is unresolved: width " + std::to_string(fwhm_q) +
                          " rad/m < 2 grid steps of " + std::to_string(grid.spacing()) + " rad/m");
  const double s = fwhm_q / (2.0 * std::sqrt(2.0 * std::numbers::ln2));  // std of |f|^2
  const double root2s = std::sqrt(2.0) * s;
  const double outside = 0.5 * std::erfc((grid.half_extent() - q0) / root2s) +
                         0.5 * std::erfc((grid.half_extent() + q0) / root2s);
  if (outside > 0.01)
    throw InvalidArgument("seed is clipped by the grid (" + std::to_string(100.0 * outside) +
                          "% of its power outside)");

  Eigen::VectorXcd f(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double d = grid[j] - q0;
    f(static_cast<Eigen::Index>(j)) = std::exp(-d * d / (4.0 * s * s));
  }
  SeedSpectrum seed = make_seed(grid, std::move(f), alpha);
  seed.divergence = divergence;
  seed.central_wavevector = q0;
  seed.wavelength = wavelength;
  return seed;
}

/// beta_m = int f* U_m dq and beta'_m = int f* V_m dq.
struct OverlapSet {
  Eigen::VectorXcd beta;
  Eigen::VectorXcd beta_prime;
};

inline OverlapSet overlaps(const SeedSpectrum& seed, const FarDecomposition& d) {
  if (!(seed.grid == d.grid()))
    throw DimensionMismatch("seed and decomposition live on different grids");
  const double dq = d.grid().spacing();
  const Eigen::VectorXcd fc = seed.amplitude.conjugate();
  return OverlapSet{d.signal_modes().transpose() * fc * dq, d.idler_modes().transpose() * fc * dq};
}

/**
 * Output photon number as a function of the seed phase phi = arg(alpha):
 *   N(phi) = A + Re[e^{2i phi} C].
 */
struct PhaseScanResult {
  double A = 0.0;
  cplx C{0.0, 0.0};
  double n_max = 0.0;
  double n_min = 0.0;
  double visibility = 0.0;
  double optimal_phase = 0.0;

  double at(double phase) const { return A + std::real(std::polar(1.0, 2.0 * phase) * C); }
};

inline PhaseScanResult summarize(double a, cplx c) {
  PhaseScanResult r;
  r.A = a;
  r.C = c;
  r.n_max = a + std::abs(c);
  r.n_min = a - std::abs(c);
  r.visibility = a > 0.0 ? std::abs(c) / a : 0.0;
  r.optimal_phase = std::abs(c) > 0.0 ? -0.5 * std::arg(c) : 0.0;
  return r;
}

/**
 * Mean signal photon number of a coherent seed amplified by a bank of
 * two-mode squeezers with gains G_m (non-seeded emission omitted):
 *   A = |alpha|^2 sum [|beta|^2 cosh^2 G + |beta'|^2 sinh^2 G]
 *   C = |alpha|^2 sum sinh(2G) conj(beta) conj(beta')
 */
inline PhaseScanResult output_photon_number(const OverlapSet& ov, const Eigen::VectorXd& gains,
                                            cplx alpha) {
  if (ov.beta.size() != gains.size() || ov.beta_prime.size() != gains.size())
    throw DimensionMismatch("overlap count differs from mode count");
  const double n0 = std::norm(alpha);
  double a = 0.0;
  cplx c{0.0, 0.0};
  for (Eigen::Index m = 0; m < gains.size(); ++m) {
    const double ch = std::cosh(gains(m));
    const double sh = std::sinh(gains(m));
    a += std::norm(ov.beta(m)) * ch * ch + std::norm(ov.beta_prime(m)) * sh * sh;
    c += std::sinh(2.0 * gains(m)) * std::conj(ov.beta(m)) * std::conj(ov.beta_prime(m));
  }
  return summarize(n0 * a, n0 * c);
}

inline PhaseScanResult output_photon_number(const OverlapSet& ov, const FarDecomposition& d,
                                            cplx alpha) {
  return output_photon_number(ov, d.gains(), alpha);
}

struct PhasePoint {
  double phase;
  double photons;
};

/// Term-by-term evaluation at n_phases uniformly spaced seed phases in [0, 2 pi).
inline std::vector<PhasePoint> phase_scan(const OverlapSet& ov, const Eigen::VectorXd& gains,
                                          double photon_number, std::size_t n_phases) {
  if (n_phases < 8) throw InvalidArgument("phase scan needs at least 8 phases");
  if (ov.beta.size() != gains.size() || ov.beta_prime.size() != gains.size())
    throw DimensionMismatch("overlap count differs from mode count");
  std::vector<PhasePoint> out(n_phases);
  for (std::size_t i = 0; i < n_phases; ++i) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_phases);
    double n = 0.0;
    for (Eigen::Index m = 0; m < gains.size(); ++m) {
      const double g = gains(m);
      const double b = std::abs(ov.beta(m));
      const double bp = std::abs(ov.beta_prime(m));
      n += b * b * std::cosh(g) * std::cosh(g) + bp * bp * std::sinh(g) * std::sinh(g) +
           std::sinh(2.0 * g) * b * bp *
               std::cos(2.0 * phi - std::arg(ov.beta(m)) - std::arg(ov.beta_prime(m)));
    }
    out[i] = {phi, photon_number * n};
  }
  return out;
}

inline std::vector<PhasePoint> phase_scan(const OverlapSet& ov, const FarDecomposition& d,
                                          double photon_number, std::size_t n_phases) {
  return phase_scan(ov, d.gains(), photon_number, n_phases);
}

enum class Half { signal, idler, whole };

/**
 * Photon number of the amplified seed inside half of the angular spectrum
 * (signal: q > 0, idler: q < 0, the q = 0 sample split evenly).
 *
 * Only defined for single-family (Takagi) decompositions, where signal and
 * idler share one field. The mean output field is
 *   E(q) = alpha sum U_m cosh G_m conj(beta_m) + conj(alpha) sum V_m sinh G_m beta_m,
 * and Half::whole reproduces output_photon_number exactly.
 */
inline PhaseScanResult half_spectrum_photon_number(const SeedSpectrum& seed,
                                                   const FarDecomposition& d, cplx alpha,
                                                   Half half = Half::signal) {
  if (!d.single_family())
    throw InvalidArgument("half-spectrum photon number needs a single-family decomposition");
  const OverlapSet ov = overlaps(seed, d);
  const Eigen::VectorXd g = d.gains();
  const Eigen::VectorXd ch = g.array().cosh().matrix();
  const Eigen::VectorXd sh = g.array().sinh().matrix();
  const Eigen::VectorXcd p = d.signal_modes() * ch.cast<cplx>().cwiseProduct(ov.beta.conjugate());
  const Eigen::VectorXcd q = d.idler_modes() * sh.cast<cplx>().cwiseProduct(ov.beta);

  const auto& grid = d.grid();
  double a = 0.0;
  cplx c{0.0, 0.0};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid[j];
    double w = 1.0;
    if (half != Half::whole) {
      if (x == 0.0) w = 0.5;
      else if ((x > 0.0) != (half == Half::signal)) w = 0.0;
    }
    if (w == 0.0) continue;
    const auto i = static_cast<Eigen::Index>(j);
    a += w * (std::norm(p(i)) + std::norm(q(i)));
    c += w * 2.0 * p(i) * std::conj(q(i));
  }
  const double n0 = std::norm(alpha) * grid.spacing();
  return summarize(n0 * a, n0 * c);
}

}  // namespace psamp
