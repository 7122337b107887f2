#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "psamp/errors.hpp"

namespace psamp {

/// Which transverse representation a grid samples: wavevector (far field)
/// or position (near field).
enum class Domain { far, near };

constexpr const char* to_string(Domain d) noexcept {
  return d == Domain::far ? "far" : "near";
}

/**
 * Uniform, origin-symmetric 1-D sampling of a transverse coordinate.
 *
 * Sample j sits at (j - (n-1)/2) * spacing, so sample n-1-j is the exact
 * floating-point negation of sample j. Odd counts put a sample on the
 * origin. The domain tag keeps wavevector and position grids from being
 * mixed up at compile time.
 */
template <Domain D>
class UniformGrid {
 public:
  static constexpr Domain domain = D;
  static constexpr std::size_t min_points = 8;

  UniformGrid(std::size_t n_points, double half_extent)
      : n_(n_points), half_extent_(half_extent) {
    if (n_points < min_points)
      throw InvalidArgument("grid needs at least " + std::to_string(min_points) +
                            " points, got " + std::to_string(n_points));
    if (!(half_extent > 0.0) || !std::isfinite(half_extent))
      throw InvalidArgument("grid half-extent must be positive and finite");
    spacing_ = 2.0 * half_extent / static_cast<double>(n_points - 1);
  }

  std::size_t size() const noexcept { return n_; }
  double half_extent() const noexcept { return half_extent_; }
  double spacing() const noexcept { return spacing_; }

  double operator[](std::size_t j) const noexcept {
    const double offset = 2.0 * static_cast<double>(j) - static_cast<double>(n_ - 1);
    return offset * (0.5 * spacing_);
  }

  /// Index of the sample at -x_j.
  std::size_t mirror(std::size_t j) const noexcept { return n_ - 1 - j; }

  bool has_center() const noexcept { return n_ % 2 == 1; }
  std::size_t center_index() const noexcept { return (n_ - 1) / 2; }

  std::vector<double> samples() const {
    std::vector<double> xs(n_);
    for (std::size_t j = 0; j < n_; ++j) xs[j] = (*this)[j];
    return xs;
  }

  friend bool operator==(const UniformGrid& a, const UniformGrid& b) noexcept {
    return a.n_ == b.n_ && a.half_extent_ == b.half_extent_;
  }

 private:
  std::size_t n_;
  double half_extent_;
  double spacing_;
};

using QGrid = UniformGrid<Domain::far>;
using RGrid = UniformGrid<Domain::near>;

inline QGrid make_qgrid(std::size_t n_points, double q_max) { return QGrid(n_points, q_max); }

template <Domain D>
constexpr Domain conjugate_domain() {
  return D == Domain::far ? Domain::near : Domain::far;
}

/**
 * Fourier-conjugate grid: spacing 2*pi/(n*spacing), which makes the
 * centered discrete transform between the two grids unitary. The
 * half-extent is pi*(n-1)^2/(2*n*x_max), i.e. roughly pi*(n-1)/(2*x_max).
 */
template <Domain D>
UniformGrid<conjugate_domain<D>()> conjugate_grid(const UniformGrid<D>& g) {
  const auto n = static_cast<double>(g.size());
  const double spacing = 2.0 * std::numbers::pi / (n * g.spacing());
  return UniformGrid<conjugate_domain<D>()>(g.size(), 0.5 * (n - 1.0) * spacing);
}

}  // namespace psamp
