#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "psamp/schmidt.hpp"
#include "psamp/tpa.hpp"

using namespace psamp;

namespace {

DecomposeOptions keep_all() {
  DecomposeOptions o;
  o.truncation = 1.0;
  return o;
}

// Squared singular values of F dq from an SVD that knows nothing about symmetry.
Eigen::VectorXd dense_svd_weights(const FarAmplitude& f) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(f.values() * f.grid().spacing());
  return svd.singularValues().cwiseAbs2();
}

FarAmplitude double_gaussian(std::size_t n, double q_max, double sp, double sm) {
  const auto g = make_qgrid(n, q_max);
  Eigen::MatrixXcd m(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const double u = g[j] + g[k], v = g[j] - g[k];
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          std::exp(-u * u / (4.0 * sp * sp) - v * v / (4.0 * sm * sm));
    }
  return FarAmplitude(g, m).normalized();
}

double orthonormality_error(const Eigen::MatrixXcd& modes, double dq) {
  const Eigen::MatrixXcd gram = modes.adjoint() * modes * dq;
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

const FarDecomposition& default_full() {
  static const FarDecomposition d = [] {
    const CrystalPumpConfig cfg;
    return decompose(build_tpa(cfg, default_qgrid(cfg)), cfg.gain, keep_all());
  }();
  return d;
}

}  // namespace

TEST(Schmidt, RankOneProductMode) {
  const auto g = make_qgrid(101, 6.0);
  Eigen::VectorXcd u(101);
  for (std::size_t j = 0; j < 101; ++j) u(static_cast<Eigen::Index>(j)) = std::exp(-g[j] * g[j] / 2.0);
  u /= std::sqrt(u.squaredNorm() * g.spacing());
  const FarAmplitude f(g, u * u.transpose());
  const auto d = decompose(f, 1.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d.weights()(0), 1.0, 1e-12);
  EXPECT_LE((d.signal_modes().col(0) - u).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((d.idler_modes().col(0) - u).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(schmidt_number(d), 1.0, 1e-12);
}

TEST(Schmidt, DeltaKernelFlatSpectrum) {
  const auto g = make_qgrid(41, 10.0);
  const auto f = build_delta_tpa(g);
  const auto d = decompose(f, 1.0, keep_all());
  ASSERT_EQ(d.size(), 41u);
  for (Eigen::Index m = 0; m < 41; ++m) EXPECT_NEAR(d.weights()(m), 1.0 / 41.0, 1e-14);
  const Eigen::VectorXd oracle = dense_svd_weights(f);
  for (Eigen::Index m = 0; m < 41; ++m) EXPECT_NEAR(oracle(m), 1.0 / 41.0, 1e-14);
  EXPECT_NEAR(schmidt_number(d), 41.0, 1e-9);
}

TEST(Schmidt, DeltaKernelPairsOppositeWavevectors) {
  const auto g = make_qgrid(21, 5.0);
  const auto d = decompose(build_delta_tpa(g), 1.0, keep_all());
  // Fully degenerate: the 11 even modes come first, then the 10 odd ones,
  // each living on a single {q, -q} pair.
  for (std::size_t m = 0; m < d.size(); ++m) {
    EXPECT_EQ(d.parity()[m], m < 11 ? Parity::even : Parity::odd) << m;
    const Eigen::VectorXcd u = d.signal_modes().col(static_cast<Eigen::Index>(m));
    int support = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (std::abs(u(static_cast<Eigen::Index>(j))) > 1e-12) {
        ++support;
        EXPECT_GT(std::abs(u(static_cast<Eigen::Index>(g.mirror(j)))), 1e-12);
      }
    EXPECT_LE(support, 2);
  }
  // Ties by spread: the on-axis mode leads.
  EXPECT_NEAR(std::abs(d.signal_modes()(10, 0)), 1.0 / std::sqrt(g.spacing()), 1e-12);
}

TEST(Schmidt, DoubleGaussianGeometricWeights) {
  const double sp = 1.0, sm = 0.2;
  const double ratio = std::pow((sp - sm) / (sp + sm), 2);
  const auto d = decompose(double_gaussian(257, 8.0, sp, sm), 1.0, keep_all());
  for (Eigen::Index m = 0; m < 10; ++m) EXPECT_NEAR(d.weights()(m + 1) / d.weights()(m), ratio, 1e-6) << m;
  EXPECT_NEAR(d.weights()(0), 1.0 - ratio, 1e-6);
}

TEST(Schmidt, DoubleGaussianAgreesWithDenseSvdAtTwoResolutions) {
  const double sp = 1.0, sm = 0.2;
  const auto coarse = double_gaussian(129, 8.0, sp, sm);
  const auto fine = double_gaussian(257, 8.0, sp, sm);
  const auto dc = decompose(coarse, 1.0, keep_all());
  const auto df = decompose(fine, 1.0, keep_all());
  const Eigen::VectorXd oc = dense_svd_weights(coarse);
  const Eigen::VectorXd of = dense_svd_weights(fine);
  for (Eigen::Index m = 0; m < 10; ++m) {
    EXPECT_NEAR(dc.weights()(m), oc(m), 1e-12);
    EXPECT_NEAR(df.weights()(m), of(m), 1e-12);
    EXPECT_NEAR(oc(m) / of(m), 1.0, 0.01);
    EXPECT_NEAR((oc(m + 1) / oc(m)) / (of(m + 1) / of(m)), 1.0, 0.01);
  }
}

TEST(Schmidt, DoubleGaussianHermiteGaussianModes) {
  const double sp = 1.0, sm = 0.2;
  const auto d = decompose(double_gaussian(257, 8.0, sp, sm), 1.0);
  const auto& g = d.grid();
  const double s2 = sp * sm;  // U_n ~ H_n(q / s) exp(-q^2 / (2 s^2))
  Eigen::VectorXcd h0(g.size()), h1(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double e = std::exp(-g[j] * g[j] / (2.0 * s2));
    h0(static_cast<Eigen::Index>(j)) = e;
    h1(static_cast<Eigen::Index>(j)) = g[j] * e;
  }
  h0 /= std::sqrt(h0.squaredNorm() * g.spacing());
  h1 /= std::sqrt(h1.squaredNorm() * g.spacing());
  EXPECT_NEAR(std::abs(h0.dot(d.signal_modes().col(0)) * g.spacing()), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(h1.dot(d.signal_modes().col(1)) * g.spacing()), 1.0, 1e-10);
  EXPECT_EQ(d.parity()[0], Parity::even);
  EXPECT_EQ(d.parity()[1], Parity::odd);
}

TEST(Schmidt, DefaultKernelInvariants) {
  const auto& d = default_full();
  const auto f = build_tpa(CrystalPumpConfig{}, d.grid());
  const double dq = d.grid().spacing();

  EXPECT_NEAR(d.weights().sum(), 1.0, 1e-10);
  EXPECT_NEAR(d.total_weight(), 1.0, 1e-10);
  for (Eigen::Index m = 0; m < d.weights().size(); ++m) {
    EXPECT_GE(d.weights()(m), 0.0);
    if (m > 0) EXPECT_LE(d.weights()(m), d.weights()(m - 1));
  }
  EXPECT_LE(orthonormality_error(d.signal_modes(), dq), 1e-8);
  EXPECT_LE(orthonormality_error(d.idler_modes(), dq), 1e-8);
  EXPECT_LE((f.values() - d.reconstruct()).norm() * dq, 1e-8);

  // Single family: F = sum sqrt(lambda) T T^T.
  ASSERT_TRUE(d.single_family());
  const Eigen::MatrixXcd t = d.takagi_modes();
  Eigen::MatrixXcd ts = t;
  for (Eigen::Index m = 0; m < ts.cols(); ++m) ts.col(m) *= std::sqrt(d.weights()(m));
  EXPECT_LE((f.values() - ts * t.transpose()).norm() * dq, 1e-8);
}

TEST(Schmidt, ParityAndModulusPairing) {
  const auto& d = default_full();
  const auto& g = d.grid();
  for (std::size_t m = 0; m < d.size(); ++m) {
    const Eigen::VectorXcd u = d.signal_modes().col(static_cast<Eigen::Index>(m));
    const Eigen::VectorXcd v = d.idler_modes().col(static_cast<Eigen::Index>(m));
    const double sign = d.parity()[m] == Parity::even ? 1.0 : -1.0;
    ASSERT_NE(d.parity()[m], Parity::none);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      EXPECT_NEAR(std::abs(u(i) - sign * u(static_cast<Eigen::Index>(g.mirror(j)))), 0.0, 1e-8);
      EXPECT_NEAR(std::abs(u(i)), std::abs(v(i)), 1e-8);
    }
  }
}

TEST(Schmidt, PhaseConvention) {
  const auto& d = default_full();
  for (Eigen::Index m = 0; m < 20; ++m) {
    const Eigen::VectorXcd u = d.signal_modes().col(m);
    Eigen::Index j = 0;
    const double peak = u.cwiseAbs().maxCoeff(&j);
    // Highest index among the (mirror-)tied maxima.
    for (Eigen::Index k = u.size() - 1; k >= 0; --k)
      if (std::abs(u(k)) >= (1.0 - 1e-9) * peak) {
        j = k;
        break;
      }
    EXPECT_NEAR(u(j).imag(), 0.0, 1e-12 * peak);
    EXPECT_GT(u(j).real(), 0.0);
  }
}

TEST(Schmidt, DefaultKernelMatchesDenseSvd) {
  const auto& d = default_full();
  const auto f = build_tpa(CrystalPumpConfig{}, d.grid());
  const Eigen::VectorXd oracle = dense_svd_weights(f);
  for (Eigen::Index m = 0; m < 30; ++m) EXPECT_NEAR(d.weights()(m), oracle(m), 1e-12);
}

TEST(Schmidt, SchmidtNumberRegression) {
  // Frozen after agreeing with the dense-SVD oracle at 513 points.
  const double k = schmidt_number(default_full());
  EXPECT_NEAR(k, 14.4033, 1e-3);

  const CrystalPumpConfig cfg;
  const Eigen::VectorXd fine = dense_svd_weights(build_tpa(cfg, default_qgrid(cfg, 513)));
  const double k_fine = fine.sum() * fine.sum() / fine.squaredNorm();
  EXPECT_NEAR(k / k_fine, 1.0, 0.01);
}

TEST(Schmidt, GridRefinementStable) {
  const CrystalPumpConfig cfg;
  const auto coarse = decompose(build_tpa(cfg, default_qgrid(cfg, 257)), cfg.gain, keep_all());
  const auto fine = decompose(build_tpa(cfg, default_qgrid(cfg, 513)), cfg.gain, keep_all());
  for (Eigen::Index m = 0; m < 10; ++m)
    EXPECT_NEAR(coarse.weights()(m) / fine.weights()(m), 1.0, 0.01) << m;
}

TEST(Schmidt, GaussianApproximationCloseToSinc) {
  CrystalPumpConfig sinc_cfg, gauss_cfg;
  gauss_cfg.phase_matching = PhaseMatchingModel::gaussian_approx;
  const auto g = default_qgrid(sinc_cfg);
  const auto a = decompose(build_tpa(sinc_cfg, g), 3.2, keep_all());
  const auto b = decompose(build_tpa(gauss_cfg, g), 3.2, keep_all());
  for (Eigen::Index m = 0; m < 5; ++m) EXPECT_NEAR(b.weights()(m) / a.weights()(m), 1.0, 0.10) << m;
}

TEST(Schmidt, TruncationKeepsThreshold) {
  const CrystalPumpConfig cfg;
  const auto f = build_tpa(cfg, default_qgrid(cfg));
  const auto d = decompose(f, cfg.gain);
  EXPECT_GE(d.weights().sum(), 0.999);
  EXPECT_LT(d.weights().head(static_cast<Eigen::Index>(d.size()) - 1).sum(), 0.999);
  EXPECT_NEAR(d.truncation_residual(), 1.0 - d.weights().sum(), 1e-10);
  EXPECT_LT(d.size(), d.grid().size());
}

TEST(Schmidt, PerModeGains) {
  const auto& d = default_full();
  const Eigen::VectorXd g = d.gains();
  for (Eigen::Index m = 0; m < 5; ++m) EXPECT_DOUBLE_EQ(g(m), 3.2 * std::sqrt(d.weights()(m)));
}

TEST(Schmidt, ChirpedComplexSymmetricKernel) {
  const CrystalPumpConfig cfg;
  const auto g = make_qgrid(129, 3.0 * phase_matching_bandwidth(cfg));
  const auto base = build_tpa(cfg, g);
  Eigen::MatrixXcd m = base.values();
  const double c = 1e-10;
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t k = 0; k < g.size(); ++k)
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *= std::polar(1.0, c * (g[j] * g[j] + g[k] * g[k]));
  const FarAmplitude f(g, m);
  const auto d = decompose(f, 1.0, keep_all());
  ASSERT_TRUE(d.single_family());
  EXPECT_LE((f.values() - d.reconstruct()).norm() * g.spacing(), 1e-8);
  EXPECT_LE(orthonormality_error(d.signal_modes(), g.spacing()), 1e-8);
  const Eigen::VectorXd oracle = dense_svd_weights(f);
  for (Eigen::Index k = 0; k < 10; ++k) EXPECT_NEAR(d.weights()(k), oracle(k), 1e-12);
  for (std::size_t k = 0; k < d.size(); ++k)
    for (Eigen::Index j = 0; j < d.signal_modes().rows(); ++j)
      EXPECT_NEAR(std::abs(d.signal_modes()(j, static_cast<Eigen::Index>(k))),
                  std::abs(d.idler_modes()(j, static_cast<Eigen::Index>(k))), 1e-8);
}

TEST(Schmidt, GeneralKernelUsesSvd) {
  const auto g = make_qgrid(24, 2.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd m(24, 24);
  for (Eigen::Index j = 0; j < 24; ++j)
    for (Eigen::Index k = 0; k < 24; ++k) m(j, k) = cplx(nd(rng), nd(rng));
  const auto f = FarAmplitude(g, m).normalized();
  const auto d = decompose(f, 2.0, keep_all());
  EXPECT_FALSE(d.single_family());
  EXPECT_EQ(d.parity()[0], Parity::none);
  EXPECT_THROW((void)d.takagi_modes(), InvalidArgument);
  EXPECT_LE((f.values() - d.reconstruct()).norm() * g.spacing(), 1e-10);
  EXPECT_LE(orthonormality_error(d.signal_modes(), g.spacing()), 1e-10);
  EXPECT_LE(orthonormality_error(d.idler_modes(), g.spacing()), 1e-10);
  EXPECT_NEAR(d.weights().sum(), 1.0, 1e-10);
}

TEST(Schmidt, Deterministic) {
  const CrystalPumpConfig cfg;
  const auto f = build_tpa(cfg, default_qgrid(cfg));
  const auto a = decompose(f, cfg.gain);
  const auto b = decompose(f, cfg.gain);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.signal_modes(), b.signal_modes());
  EXPECT_EQ(a.idler_modes(), b.idler_modes());
}

TEST(Schmidt, RejectsBadInput) {
  const auto g = make_qgrid(16, 1.0);
  const FarAmplitude unnormalized(g, Eigen::MatrixXcd::Identity(16, 16));
  EXPECT_THROW(decompose(unnormalized, 1.0), InvalidArgument);
  const auto f = unnormalized.normalized();
  DecomposeOptions zero;
  zero.truncation = 0.0;
  EXPECT_THROW(decompose(f, 1.0, zero), InvalidArgument);
  DecomposeOptions over;
  over.truncation = 1.5;
  EXPECT_THROW(decompose(f, 1.0, over), InvalidArgument);
  EXPECT_THROW(decompose(f, -1.0), InvalidArgument);
}
