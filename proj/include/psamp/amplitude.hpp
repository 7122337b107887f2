#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "psamp/errors.hpp"
#include "psamp/grid.hpp"

namespace psamp {

using cplx = std::complex<double>;

/**
 * Two-photon amplitude F(x_s, x_i) sampled on grid x grid.
 *
 * Entry (j, k) is F(x_j, x_k) with signal index j and idler index k. The
 * continuum norm is sum |F_jk|^2 dx^2, so a normalized amplitude has unit
 * integral of |F|^2 in the Riemann-sum sense.
 */
template <Domain D>
class TwoPhotonAmplitude {
 public:
  using grid_type = UniformGrid<D>;
  static constexpr Domain domain = D;

  TwoPhotonAmplitude(grid_type grid, Eigen::MatrixXcd values)
      : grid_(grid), values_(std::move(values)) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (values_.rows() != n || values_.cols() != n)
      throw DimensionMismatch("amplitude is " + std::to_string(values_.rows()) + "x" +
                              std::to_string(values_.cols()) + " but grid has " +
                              std::to_string(grid_.size()) + " points");
  }

  const grid_type& grid() const noexcept { return grid_; }
  const Eigen::MatrixXcd& values() const noexcept { return values_; }
  cplx operator()(std::size_t j, std::size_t k) const {
    return values_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  }

  /// sqrt(sum |F|^2 dx^2).
  double norm() const { return values_.norm() * grid_.spacing(); }

  TwoPhotonAmplitude normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw InvalidArgument("cannot normalize an all-zero amplitude");
    return TwoPhotonAmplitude(grid_, values_ / n);
  }

  /// max |F_jk - F_kj| relative to max |F|.
  double exchange_asymmetry() const {
    const double scale = values_.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (values_ - values_.transpose()).cwiseAbs().maxCoeff() / scale;
  }

  /// max |F(-x_s,-x_i) - F(x_s,x_i)| relative to max |F|.
  double inversion_asymmetry() const {
    const double scale = values_.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (values_ - values_.reverse()).cwiseAbs().maxCoeff() / scale;
  }

 private:
  grid_type grid_;
  Eigen::MatrixXcd values_;
};

using FarAmplitude = TwoPhotonAmplitude<Domain::far>;
using NearAmplitude = TwoPhotonAmplitude<Domain::near>;

}  // namespace psamp
