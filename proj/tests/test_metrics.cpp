#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "uis/metrics.hpp"
#include "uis/rng.hpp"

using namespace uis;

namespace {

// Scalar SSIM written independently: moments from raw sums over each tile.
double reference_ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int win) {
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0;
  int count = 0;
  for (int r = 0; r < a.rows(); r += win) {
    for (int c = 0; c < a.cols(); c += win) {
      const int h = std::min<int>(win, static_cast<int>(a.rows()) - r);
      const int w = std::min<int>(win, static_cast<int>(a.cols()) - c);
      const Eigen::ArrayXXd ta = a.block(r, c, h, w).array();
      const Eigen::ArrayXXd tb = b.block(r, c, h, w).array();
      const double n = h * w;
      const double mx = ta.sum() / n, my = tb.sum() / n;
      const double vx = (ta * ta).sum() / n - mx * mx;
      const double vy = (tb * tb).sum() / n - my * my;
      const double cxy = (ta * tb).sum() / n - mx * my;
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / count;
}

SignalVector as_image(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
  }
  return SignalVector(v, ImageShape{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), 1});
}

Eigen::MatrixXd random_image(int h, int w, RngStream& rng) {
  Eigen::MatrixXd m(h, w);
  for (auto& v : m.reshaped()) v = rng.uniform();
  return m;
}

}  // namespace

TEST(Psnr, AnalyticCases) {
  const SignalVector x = SignalVector::constant(ImageShape{4, 4, 1}, 0.3);
  EXPECT_EQ(psnr(x, x), std::numeric_limits<double>::infinity());
  const SignalVector off = SignalVector::constant(ImageShape{4, 4, 1}, 0.4);
  EXPECT_NEAR(psnr(x, off), 20.0, 1e-10);
  Eigen::VectorXd alt(4);
  alt << 0.1, -0.1, 0.1, -0.1;
  EXPECT_NEAR(psnr(SignalVector(Eigen::VectorXd::Zero(4)), SignalVector(alt)), 20.0, 1e-12);
  EXPECT_NEAR(psnr(SignalVector(Eigen::VectorXd::Zero(4)), SignalVector(alt), 2.0), 20.0 + 20 * std::log10(2.0), 1e-12);
}

TEST(Psnr, ColorUsesLuma) {
  RngStream rng(3);
  const ImageShape shape{4, 4, 3};
  Eigen::VectorXd a(48), b(48);
  for (Eigen::Index i = 0; i < 48; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  double mse = 0;
  for (Eigen::Index p = 0; p < 16; ++p) {
    const double ya = 0.299 * a[p] + 0.587 * a[16 + p] + 0.114 * a[32 + p];
    const double yb = 0.299 * b[p] + 0.587 * b[16 + p] + 0.114 * b[32 + p];
    mse += (ya - yb) * (ya - yb) / 16;
  }
  EXPECT_NEAR(psnr(SignalVector(a, shape), SignalVector(b, shape)), 10 * std::log10(1 / mse), 1e-10);
}

TEST(Psnr, LayoutMismatch) {
  EXPECT_THROW(psnr(SignalVector::constant(4, 0.0), SignalVector::constant(5, 0.0)), ArgumentError);
}

TEST(Ssim, IdenticalIsOne) {
  RngStream rng(1);
  const SignalVector x = as_image(random_image(16, 16, rng));
  EXPECT_NEAR(ssim(x, x), 1.0, 1e-15);
}

TEST(Ssim, ConstantVersusInverted) {
  const SignalVector x = SignalVector::constant(ImageShape{8, 8, 1}, 0.2);
  const SignalVector y = SignalVector::constant(ImageShape{8, 8, 1}, 0.8);
  const double c1 = 1e-4;
  EXPECT_NEAR(ssim(x, y), (2 * 0.2 * 0.8 + c1) / (0.04 + 0.64 + c1), 1e-14);
}

TEST(Ssim, MatchesScalarReference) {
  RngStream rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = random_image(16, 16, rng);
    const Eigen::MatrixXd b = (a + 0.2 * random_image(16, 16, rng)).cwiseMin(1.0);
    EXPECT_NEAR(ssim(as_image(a), as_image(b)), reference_ssim(a, b, 8), 1e-10);
  }
  const Eigen::MatrixXd a = random_image(19, 13, rng);
  const Eigen::MatrixXd b = random_image(19, 13, rng);
  EXPECT_NEAR(ssim(as_image(a), as_image(b)), reference_ssim(a, b, 8), 1e-10);
}

TEST(Ssim, NeedsShapeAndSize) {
  EXPECT_THROW(ssim(SignalVector::constant(64, 0.0), SignalVector::constant(64, 0.0)), ArgumentError);
  EXPECT_THROW(ssim(SignalVector::constant(ImageShape{4, 4, 1}, 0.0), SignalVector::constant(ImageShape{4, 4, 1}, 0.0)),
               ArgumentError);
}

TEST(ConvergenceReport, SingleIdentityIteration) {
  IterationTrace trace;
  trace.sigma_initial = 1.0;
  trace.records.push_back({1, 0.01, 0.0, 1.0, 0.0, std::nullopt});
  const ConvergenceReport r = convergence_report(trace, 1.0, 0.01);
  ASSERT_EQ(r.observed_ratios.size(), 1u);
  EXPECT_EQ(r.observed_ratios[0], 0.0);
  EXPECT_EQ(r.iterations, 1u);
}

TEST(ConvergenceReport, ScheduledDecayMatchesExactly) {
  const double beta = 0.5, h0 = 0.1;
  IterationTrace trace;
  trace.sigma_initial = 1.0;
  double sigma = 1.0;
  for (std::size_t t = 1; t <= 20; ++t) {
    if (t > 1) sigma *= 1 - beta * step_size(h0, t - 1);
    trace.records.push_back({t, step_size(h0, t), sigma, 0.0, 0.0, std::nullopt});
  }
  const ConvergenceReport r = convergence_report(trace, beta, h0);
  EXPECT_NEAR(r.mean_observed_ratio, r.mean_expected_ratio, 1e-15);
  EXPECT_TRUE(r.faster_than_expected);
  EXPECT_THROW(convergence_report(IterationTrace{}, 1.0, 0.1), ArgumentError);
}

TEST(ManifoldDistance, UnitCircle) {
  const Curve circle = Curve::circle({0, 0}, 1.0);
  const double pitch = discretization_pitch(circle);
  EXPECT_NEAR(manifold_distance({2, 0}, circle), 1.0, pitch);
  EXPECT_NEAR(manifold_distance({0, 0}, circle), 1.0, pitch);
  EXPECT_LE(manifold_distance(circle.point(0.123456), circle), pitch);
  EXPECT_THROW(manifold_distance({0, 0}, circle, 100), ArgumentError);
}
