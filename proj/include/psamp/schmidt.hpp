#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psamp/amplitude.hpp"
#include "psamp/errors.hpp"
#include "psamp/grid.hpp"

namespace psamp {

enum class Parity { even, odd, none };

inline const char* to_string(Parity p) noexcept {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

/**
 * Schmidt decomposition F(x_s, x_i) = sum_m sqrt(lambda_m) U_m(x_s) V_m(x_i).
 *
 * Modes are stored column-wise and normalized in the continuum sense
 * (sum |U|^2 dx = 1). Each signal mode is phased so that its
 * largest-modulus sample is real and positive. For exchange-symmetric
 * amplitudes the decomposition is a Takagi factorization: V_m = e^{2i psi_m} U_m
 * and U_m e^{i psi_m} is the single mode family with F = sum sqrt(lambda) T T^T.
 */
template <Domain D>
class SchmidtDecomposition {
 public:
  using grid_type = UniformGrid<D>;

  SchmidtDecomposition(grid_type grid, double gain, Eigen::VectorXd weights,
                       Eigen::MatrixXcd signal_modes, Eigen::MatrixXcd idler_modes,
                       std::vector<Parity> parity, Eigen::VectorXd takagi_phase,
                       bool single_family, double total_weight)
      : grid_(grid),
        gain_(gain),
        weights_(std::move(weights)),
        signal_(std::move(signal_modes)),
        idler_(std::move(idler_modes)),
        parity_(std::move(parity)),
        takagi_phase_(std::move(takagi_phase)),
        single_family_(single_family),
        total_weight_(total_weight) {
    const auto m = weights_.size();
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (signal_.rows() != n || idler_.rows() != n || signal_.cols() != m ||
        idler_.cols() != m || static_cast<Eigen::Index>(parity_.size()) != m ||
        takagi_phase_.size() != m)
      throw DimensionMismatch("inconsistent Schmidt decomposition shapes");
    if (!(gain >= 0.0)) throw InvalidArgument("gain must be non-negative");
  }

  const grid_type& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }

  /// Overall parametric gain G.
  double gain() const noexcept { return gain_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  /// G_m = G sqrt(lambda_m).
  Eigen::VectorXd gains() const { return gain_ * weights_.cwiseSqrt(); }

  const Eigen::MatrixXcd& signal_modes() const noexcept { return signal_; }
  const Eigen::MatrixXcd& idler_modes() const noexcept { return idler_; }
  const std::vector<Parity>& parity() const noexcept { return parity_; }

  /// True when U and V describe one mode family (Takagi form).
  bool single_family() const noexcept { return single_family_; }

  /// Sum of all weights before truncation (1 up to rounding).
  double total_weight() const noexcept { return total_weight_; }
  double truncation_residual() const noexcept { return total_weight_ - weights_.sum(); }

  /// Columns T_m with F = sum sqrt(lambda_m) T_m T_m^T. Only for single-family results.
  Eigen::MatrixXcd takagi_modes() const {
    if (!single_family_)
      throw InvalidArgument("takagi_modes() requires an exchange-symmetric amplitude");
    Eigen::MatrixXcd t = signal_;
    for (Eigen::Index m = 0; m < t.cols(); ++m)
      t.col(m) *= std::polar(1.0, takagi_phase_(m));
    return t;
  }

  /// sum sqrt(lambda_m) U_m V_m^T over the retained modes.
  Eigen::MatrixXcd reconstruct() const {
    Eigen::MatrixXcd scaled = signal_;
    for (Eigen::Index m = 0; m < scaled.cols(); ++m) scaled.col(m) *= std::sqrt(weights_(m));
    return scaled * idler_.transpose();
  }

 private:
  grid_type grid_;
  double gain_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXcd signal_;
  Eigen::MatrixXcd idler_;
  std::vector<Parity> parity_;
  Eigen::VectorXd takagi_phase_;
  bool single_family_;
  double total_weight_;
};

using FarDecomposition = SchmidtDecomposition<Domain::far>;

/// Effective number of modes K = (sum lambda)^2 / sum lambda^2 over retained modes.
template <Domain D>
double schmidt_number(const SchmidtDecomposition<D>& d) {
  const double s = d.weights().sum();
  const double s2 = d.weights().squaredNorm();
  if (!(s2 > 0.0)) throw InvalidArgument("decomposition has no weight");
  return s * s / s2;
}

struct DecomposeOptions {
  /// Retain modes until the cumulative weight reaches this value; 1 keeps all.
  double truncation = 0.999;
  /// Relative tolerance for treating the amplitude as exchange/inversion symmetric.
  double symmetry_tolerance = 1e-12;
  /// Relative singular-value gap below which modes count as degenerate.
  double degeneracy_tolerance = 1e-10;
};

namespace detail {

// Orthonormal real basis vector with at most two non-zero entries.
struct SparseBasisVector {
  Eigen::Index i0 = 0, i1 = -1;
  double c0 = 1.0, c1 = 0.0;
};

struct ModeBlock {
  Parity parity = Parity::none;
  std::vector<SparseBasisVector> basis;
  Eigen::VectorXd key;  // diagonal operator used to split degenerate subspaces
};

template <Domain D>
std::vector<ModeBlock> mode_blocks(const UniformGrid<D>& g, bool split_parity) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (!split_parity) {
    ModeBlock b;
    b.basis.resize(static_cast<std::size_t>(n));
    b.key.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      b.basis[static_cast<std::size_t>(j)] = {j, -1, 1.0, 0.0};
      b.key(j) = g[static_cast<std::size_t>(j)];
    }
    return {std::move(b)};
  }
  const double h = std::sqrt(0.5);
  ModeBlock even, odd;
  even.parity = Parity::even;
  odd.parity = Parity::odd;
  std::vector<double> even_key, odd_key;
  if (g.has_center()) {
    even.basis.push_back({static_cast<Eigen::Index>(g.center_index()), -1, 1.0, 0.0});
    even_key.push_back(0.0);
  }
  for (Eigen::Index j = n / 2; j < n; ++j) {
    const Eigen::Index mj = n - 1 - j;
    if (mj >= j) continue;
    const double x = g[static_cast<std::size_t>(j)];
    even.basis.push_back({j, mj, h, h});
    odd.basis.push_back({j, mj, h, -h});
    even_key.push_back(x * x);
    odd_key.push_back(x * x);
  }
  even.key = Eigen::Map<Eigen::VectorXd>(even_key.data(), static_cast<Eigen::Index>(even_key.size()));
  odd.key = Eigen::Map<Eigen::VectorXd>(odd_key.data(), static_cast<Eigen::Index>(odd_key.size()));
  return {std::move(even), std::move(odd)};
}

// B^T K B with K = scale * values; only the lower triangle is formed.
inline Eigen::MatrixXcd project_block(const Eigen::MatrixXcd& values, double scale,
                                      const ModeBlock& block) {
  const auto d = static_cast<Eigen::Index>(block.basis.size());
  Eigen::MatrixXcd m(d, d);
  auto at = [&](const SparseBasisVector& a, const SparseBasisVector& b) {
    cplx acc = a.c0 * b.c0 * values(a.i0, b.i0);
    if (b.i1 >= 0) acc += a.c0 * b.c1 * values(a.i0, b.i1);
    if (a.i1 >= 0) {
      acc += a.c1 * b.c0 * values(a.i1, b.i0);
      if (b.i1 >= 0) acc += a.c1 * b.c1 * values(a.i1, b.i1);
    }
    return scale * acc;
  };
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      m(a, b) = at(block.basis[static_cast<std::size_t>(a)], block.basis[static_cast<std::size_t>(b)]);
      m(b, a) = m(a, b);
    }
  return m;
}

// Within every run of (relatively) equal eigenvalues, rotate the eigenvectors
// so they diagonalize `key`; the basis inside a degenerate subspace is then
// fixed by the grid rather than by solver internals.
inline void split_degenerate(const Eigen::VectorXd& vals, Eigen::MatrixXd& vecs,
                             const Eigen::VectorXd& key, double tol) {
  const Eigen::Index n = vals.size();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n) {
      const double scale = std::max(std::abs(vals(end)), std::abs(vals(end - 1)));
      if (std::abs(vals(end) - vals(end - 1)) > tol * scale) break;
      ++end;
    }
    const Eigen::Index len = end - start;
    if (len > 1) {
      auto block = vecs.middleCols(start, len);
      Eigen::MatrixXd op = block.transpose() * key.asDiagonal() * block;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op);
      if (es.info() != Eigen::Success)
        throw NumericalFailure("degenerate-subspace diagonalization did not converge");
      Eigen::MatrixXd rotated = block * es.eigenvectors();
      block = rotated;
    }
    start = end;
  }
}

struct TakagiBlock {
  Eigen::VectorXd values;   // Takagi (singular) values, >= 0
  Eigen::MatrixXcd coeffs;  // column i: vector in the block basis
};

// Takagi factorization M = sum s t t^T of a complex symmetric block.
inline TakagiBlock takagi_block(const Eigen::MatrixXcd& m, const Eigen::VectorXd& key,
                                double tol) {
  const Eigen::Index d = m.rows();
  TakagiBlock out;
  if (d == 0) return out;

  const bool real = m.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    // Real symmetric: M = W diag(mu) W^T, and t = w (mu >= 0) or i w (mu < 0).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
    if (es.info() != Eigen::Success)
      throw NumericalFailure("symmetric eigensolver did not converge");
    Eigen::VectorXd mu = es.eigenvalues();
    Eigen::MatrixXd w = es.eigenvectors();
    split_degenerate(mu, w, key, tol);
    out.values = mu.cwiseAbs();
    out.coeffs = w.cast<cplx>();
    for (Eigen::Index i = 0; i < d; ++i)
      if (mu(i) < 0.0) out.coeffs.col(i) *= cplx(0.0, 1.0);
    return out;
  }

  // Complex symmetric A + iB: the real symmetric matrix [[A, B], [B, -A]] has
  // eigenpairs (s, (x; y)) with M conj(x + iy) = s (x + iy), in +-s pairs.
  const Eigen::MatrixXd a = m.real();
  const Eigen::MatrixXd b = m.imag();
  Eigen::MatrixXd big(2 * d, 2 * d);
  big << a, b, b, -a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigensolver did not converge");
  Eigen::VectorXd vals = es.eigenvalues();
  Eigen::MatrixXd vecs = es.eigenvectors();
  Eigen::VectorXd key2(2 * d);
  key2 << key, key;
  split_degenerate(vals, vecs, key2, tol);
  out.values.resize(d);
  out.coeffs.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index src = 2 * d - 1 - i;
    out.values(i) = std::max(vals(src), 0.0);
    for (Eigen::Index r = 0; r < d; ++r) out.coeffs(r, i) = cplx(vecs(r, src), vecs(d + r, src));
  }
  return out;
}

inline Eigen::VectorXcd expand(const ModeBlock& block, const Eigen::VectorXcd& coeff,
                               Eigen::Index n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  for (std::size_t a = 0; a < block.basis.size(); ++a) {
    const auto& bv = block.basis[a];
    const cplx c = coeff(static_cast<Eigen::Index>(a));
    v(bv.i0) += bv.c0 * c;
    if (bv.i1 >= 0) v(bv.i1) += bv.c1 * c;
  }
  return v;
}

// Phase that makes the largest-modulus sample real positive. Ties (as in
// parity modes, where |U(x)| = |U(-x)|) go to the highest index.
inline double pivot_phase(const Eigen::VectorXcd& u) {
  const double peak = u.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  for (Eigen::Index j = u.size() - 1; j >= 0; --j)
    if (std::abs(u(j)) >= (1.0 - 1e-9) * peak) return std::arg(u(j));
  return 0.0;
}

inline std::size_t retained_count(const std::vector<double>& weights, double truncation) {
  if (truncation >= 1.0) return weights.size();
  double cum = 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    cum += weights[m];
    if (cum >= truncation) return m + 1;
  }
  return weights.size();
}

}  // namespace detail

/**
 * Schmidt decomposition of a normalized two-photon amplitude with gain G.
 *
 * Exchange-symmetric amplitudes go through a Takagi factorization; if they
 * are also inversion symmetric the even and odd subspaces are factorized
 * separately, so every mode has definite parity. Modes with equal weight are
 * ordered even first, then by increasing <x^2>. Any other amplitude gets a
 * plain SVD with U = u and V = conj(v).
 */
template <Domain D>
SchmidtDecomposition<D> decompose(const TwoPhotonAmplitude<D>& f, double gain,
                                  const DecomposeOptions& opt = {}) {
  if (!(opt.truncation > 0.0) || opt.truncation > 1.0)
    throw InvalidArgument("truncation must lie in (0, 1]");
  if (!(gain >= 0.0) || !std::isfinite(gain))
    throw InvalidArgument("gain must be non-negative and finite");
  const double norm = f.norm();
  if (!(std::abs(norm - 1.0) <= 1e-6))
    throw InvalidArgument("amplitude is not normalized (norm " + std::to_string(norm) + ")");

  const auto& grid = f.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double dx = grid.spacing();
  const double inv_sqrt_dx = 1.0 / std::sqrt(dx);

  struct Candidate {
    double value;
    Parity parity;
    double spread;
    std::size_t block;
    Eigen::Index column;
  };
  std::vector<Candidate> cands;
  std::vector<detail::ModeBlock> blocks;
  std::vector<detail::TakagiBlock> factors;
  bool single_family = false;
  Eigen::MatrixXcd svd_u, svd_v;

  if (f.exchange_asymmetry() <= opt.symmetry_tolerance) {
    single_family = true;
    const bool split = f.inversion_asymmetry() <= opt.symmetry_tolerance;
    blocks = detail::mode_blocks(grid, split);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& block = blocks[bi];
      const Eigen::MatrixXcd m = detail::project_block(f.values(), dx, block);
      factors.push_back(detail::takagi_block(m, block.key, opt.degeneracy_tolerance));
      const auto& tb = factors.back();
      if (!tb.values.allFinite() || !tb.coeffs.allFinite())
        throw NumericalFailure("factorization produced non-finite values");
      const Eigen::VectorXd absk = block.key.cwiseAbs();
      for (Eigen::Index c = 0; c < tb.values.size(); ++c)
        cands.push_back({tb.values(c), block.parity, tb.coeffs.col(c).cwiseAbs2().dot(absk), bi, c});
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(f.values() * dx, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalFailure("SVD did not converge");
    svd_u = svd.matrixU();
    svd_v = svd.matrixV().conjugate();
    const Eigen::VectorXd s = svd.singularValues();
    if (!s.allFinite() || !svd_u.allFinite() || !svd_v.allFinite())
      throw NumericalFailure("factorization produced non-finite values");
    for (Eigen::Index m = 0; m < s.size(); ++m) cands.push_back({s(m), Parity::none, 0.0, 0, m});
  }

  auto parity_rank = [](Parity p) { return p == Parity::odd ? 1 : 0; };
  std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return parity_rank(a.parity) < parity_rank(b.parity);
  });
  // Resolve near-degenerate runs deterministically: even before odd, then
  // by increasing spread. Members of a run share the run's mean weight so
  // the reordering keeps the weights nonincreasing.
  std::vector<double> all_weights(cands.size());
  for (std::size_t start = 0; start < cands.size();) {
    std::size_t end = start + 1;
    while (end < cands.size() &&
           cands[end - 1].value - cands[end].value <= opt.degeneracy_tolerance * cands[end - 1].value)
      ++end;
    std::stable_sort(cands.begin() + static_cast<std::ptrdiff_t>(start),
                     cands.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](const Candidate& a, const Candidate& b) {
                       if (parity_rank(a.parity) != parity_rank(b.parity))
                         return parity_rank(a.parity) < parity_rank(b.parity);
                       return a.spread < b.spread;
                     });
    double mean = 0.0;
    for (std::size_t m = start; m < end; ++m) mean += cands[m].value * cands[m].value;
    mean /= static_cast<double>(end - start);
    std::fill(all_weights.begin() + static_cast<std::ptrdiff_t>(start),
              all_weights.begin() + static_cast<std::ptrdiff_t>(end), mean);
    start = end;
  }

  const double total = std::accumulate(all_weights.begin(), all_weights.end(), 0.0);
  const std::size_t kept = detail::retained_count(all_weights, opt.truncation);
  const auto mk = static_cast<Eigen::Index>(kept);

  Eigen::VectorXd weights(mk);
  Eigen::MatrixXcd u(n, mk), v(n, mk);
  Eigen::VectorXd psi(mk);
  std::vector<Parity> parity(kept);
  for (Eigen::Index m = 0; m < mk; ++m) {
    const auto& c = cands[static_cast<std::size_t>(m)];
    weights(m) = all_weights[static_cast<std::size_t>(m)];
    parity[static_cast<std::size_t>(m)] = c.parity;
    if (single_family) {
      const Eigen::VectorXcd t =
          detail::expand(blocks[c.block], factors[c.block].coeffs.col(c.column), n) * inv_sqrt_dx;
      const double phase = detail::pivot_phase(t);
      u.col(m) = t * std::polar(1.0, -phase);
      v.col(m) = t * std::polar(1.0, phase);
      psi(m) = phase;
    } else {
      const Eigen::VectorXcd su = svd_u.col(c.column) * inv_sqrt_dx;
      const Eigen::VectorXcd sv = svd_v.col(c.column) * inv_sqrt_dx;
      const double phase = detail::pivot_phase(su);
      u.col(m) = su * std::polar(1.0, -phase);
      v.col(m) = sv * std::polar(1.0, phase);
      psi(m) = 0.0;
    }
  }
  return SchmidtDecomposition<D>(grid, gain, std::move(weights), std::move(u), std::move(v),
                                 std::move(parity), std::move(psi), single_family, total);
}

}  // namespace psamp
