#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

#include "psamp/amplitude.hpp"
#include "psamp/grid.hpp"

namespace psamp {

namespace detail {

/// Matrix T with T(l, j) = dx/sqrt(2 pi) * exp(sign * i * x_j * y_l) between
/// a grid and its conjugate. Phases are reduced in exact integer arithmetic:
/// x_j * y_l = pi * (2j-n+1)(2l-n+1) / (2n).
template <Domain D>
Eigen::MatrixXcd conjugate_transform_matrix(const UniformGrid<D>& g, int sign) {
  const auto n = static_cast<std::int64_t>(g.size());
  const std::int64_t period = 4 * n;
  const double scale = g.spacing() / std::sqrt(2.0 * std::numbers::pi);
  Eigen::MatrixXcd t(n, n);
  for (std::int64_t l = 0; l < n; ++l) {
    const std::int64_t b = 2 * l - n + 1;
    for (std::int64_t j = 0; j < n; ++j) {
      const std::int64_t a = 2 * j - n + 1;
      std::int64_t p = (a * b) % period;
      if (p < 0) p += period;
      const double phase = sign * std::numbers::pi * static_cast<double>(p) /
                           static_cast<double>(2 * n);
      t(l, j) = scale * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return t;
}

}  // namespace detail

/**
 * Near-field amplitude from a far-field one:
 *   F_near(r_s, r_i) = 1/(2 pi) * iint dq_s dq_i F_far(q_s, q_i) e^{+i(q_s r_s + q_i r_i)}
 * discretized on the conjugate grid, where the transform is unitary and
 * the continuum norm is preserved exactly.
 */
inline NearAmplitude far_to_near(const FarAmplitude& f) {
  const auto t = detail::conjugate_transform_matrix(f.grid(), +1);
  Eigen::MatrixXcd near = t * f.values() * t.transpose();
  return NearAmplitude(conjugate_grid(f.grid()), std::move(near));
}

/// Same transform for a raw matrix sampled on `grid` x `grid`.
inline NearAmplitude far_to_near(const Eigen::MatrixXcd& values, const QGrid& grid) {
  return far_to_near(FarAmplitude(grid, values));
}

/// Inverse of far_to_near (kernel e^{-i(q r)}).
inline FarAmplitude near_to_far(const NearAmplitude& f) {
  const auto t = detail::conjugate_transform_matrix(f.grid(), -1);
  Eigen::MatrixXcd far = t * f.values() * t.transpose();
  return FarAmplitude(conjugate_grid(f.grid()), std::move(far));
}

}  // namespace psamp
