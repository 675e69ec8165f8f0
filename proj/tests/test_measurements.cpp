#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "uis/measurement.hpp"

using namespace uis;

namespace {

void expect_orthonormal(const LinearMeasurement& m, double tol = 1e-10) {
  const Eigen::MatrixXd d = m.dense();
  const auto n = static_cast<Eigen::Index>(m.rank());
  EXPECT_LE((d.transpose() * d - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), tol);
}

Eigen::VectorXd random_vector(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  return rng.normal_vector(static_cast<Eigen::Index>(n));
}

}  // namespace

TEST(PixelSubset, KeepAllIsIdentity) {
  std::vector<std::size_t> all(6);
  for (std::size_t i = 0; i < 6; ++i) all[i] = i;
  const LinearMeasurement m = pixel_subset(6, all);
  const Eigen::VectorXd x = random_vector(6, 1);
  EXPECT_EQ(m.measure(x), x);
  EXPECT_EQ(m.project(x), x);
}

TEST(PixelSubset, EmbedScatters) {
  const LinearMeasurement m = pixel_subset(5, {3, 1, 3});
  EXPECT_EQ(m.rank(), 2u);
  const Eigen::VectorXd e = m.embed(Eigen::Vector2d(7.0, 9.0));
  Eigen::VectorXd want(5);
  want << 0, 7, 0, 9, 0;
  EXPECT_EQ(e, want);
  EXPECT_THROW(pixel_subset(5, {5}), ArgumentError);
}

TEST(EmptyMeasurement, ZeroEverywhere) {
  const LinearMeasurement m = LinearMeasurement::empty(4);
  EXPECT_TRUE(m.is_empty());
  const Eigen::VectorXd x = random_vector(4, 2);
  EXPECT_EQ(m.measure(x).size(), 0);
  EXPECT_TRUE(m.embed(Eigen::VectorXd()).isZero(0.0));
  EXPECT_TRUE(m.project(x).isZero(0.0));
}

TEST(InpaintBox, KeepsComplement) {
  const ImageShape shape{4, 5, 2};
  const LinearMeasurement m = inpaint_box(shape, 1, 2, 2, 2);
  EXPECT_EQ(m.rank(), shape.size() - 2 * 4);
  const Eigen::VectorXd p = m.project(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(shape.size())));
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t col = 0; col < 5; ++col) {
        const bool hidden = r >= 1 && r < 3 && col >= 2 && col < 4;
        EXPECT_EQ(p[static_cast<Eigen::Index>(shape.index(c, r, col))], hidden ? 0.0 : 1.0);
      }
    }
  }
  EXPECT_THROW(inpaint_box(shape, 3, 0, 2, 1), ArgumentError);
}

TEST(RandomMask, CountAndDeterminism) {
  RngStream a(11), b(11);
  const LinearMeasurement m1 = random_pixel_mask(1000, 0.1, a);
  const LinearMeasurement m2 = random_pixel_mask(1000, 0.1, b);
  EXPECT_EQ(m1.rank(), 100u);
  EXPECT_EQ(m1.dense(), m2.dense());
  expect_orthonormal(m1, 0.0);
}

TEST(BlockAverage, ConstantImageMeasuresFourV) {
  const ImageShape shape{8, 8, 1};
  const LinearMeasurement m = block_average(shape, 4);
  EXPECT_EQ(m.rank(), 4u);
  const Eigen::VectorXd c = m.measure(Eigen::VectorXd::Constant(64, 0.3));
  for (Eigen::Index i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 4 * 0.3, 1e-15);
}

TEST(BlockAverage, ColumnsHaveSixteenQuarterEntries) {
  const LinearMeasurement m = block_average(ImageShape{8, 12, 3}, 4);
  const Eigen::MatrixXd d = m.dense();
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    int nonzero = 0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      if (d(i, j) != 0.0) {
        ++nonzero;
        EXPECT_EQ(d(i, j), 0.25);
      }
    }
    EXPECT_EQ(nonzero, 16);
  }
  expect_orthonormal(m, 0.0);
}

TEST(BlockAverage, NeedsDivisibleShape) { EXPECT_THROW(block_average(ImageShape{10, 8, 1}, 4), ArgumentError); }

TEST(FourierLowpass, FrequencyOrder) {
  const auto f = detail::lowpass_frequencies(8, 8);
  ASSERT_GE(f.size(), 5u);
  using P = std::pair<std::size_t, std::size_t>;
  EXPECT_EQ(f[0], P(0, 0));
  EXPECT_EQ(f[1], P(0, 1));
  EXPECT_EQ(f[2], P(1, 0));
  EXPECT_EQ(f[3], P(1, 7));
  EXPECT_EQ(f[4], P(1, 1));
  // Every frequency appears once up to conjugation.
  std::set<P> seen;
  for (auto [k, l] : f) {
    EXPECT_TRUE(seen.insert({k, l}).second);
    EXPECT_FALSE(seen.count({(8 - k) % 8, (8 - l) % 8}) && (k != (8 - k) % 8 || l != (8 - l) % 8));
  }
}

// Columns compared against the real Fourier basis written out directly.
TEST(FourierLowpass, MatchesExplicitBasis) {
  for (const auto& [h, w] : {std::pair<std::size_t, std::size_t>{6, 8}, {5, 7}, {4, 4}}) {
    const ImageShape shape{h, w, 2};
    const LinearMeasurement m = fourier_lowpass(shape, 1.0);
    ASSERT_EQ(m.rank(), shape.size());
    expect_orthonormal(m);
    const Eigen::MatrixXd d = m.dense();
    const double n = static_cast<double>(h * w);
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      for (auto [k, l] : detail::lowpass_frequencies(h, w)) {
        const bool self = (2 * k) % h == 0 && (2 * l) % w == 0;
        for (int part = 0; part < (self ? 1 : 2); ++part, ++col) {
          for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t q = 0; q < w; ++q) {
              const double theta = 2 * std::numbers::pi * (double(k * r) / h + double(l * q) / w);
              const double want = self ? std::cos(theta) / std::sqrt(n)
                                       : std::sqrt(2 / n) * (part == 0 ? std::cos(theta) : std::sin(theta));
              EXPECT_NEAR(d(static_cast<Eigen::Index>(shape.index(c, r, q)), col), want, 1e-12);
            }
          }
        }
      }
    }
  }
}

TEST(FourierLowpass, CountsAndDc) {
  const ImageShape shape{64, 64, 1};
  EXPECT_EQ(fourier_lowpass(shape, 0.05).rank(), 205u);
  EXPECT_EQ(fourier_lowpass(shape, 0.10).rank(), 410u);
  const LinearMeasurement tiny = fourier_lowpass(ImageShape{4, 4, 3}, 0.01);
  EXPECT_EQ(tiny.rank(), 3u);
  const Eigen::VectorXd c = tiny.measure(Eigen::VectorXd::Constant(48, 0.5));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(c[i], 0.5 * 4, 1e-13);
}

TEST(RandomOrthonormal, OrthonormalAndSeeded) {
  RngStream a(3), b(3), c(4);
  const LinearMeasurement m1 = random_orthonormal(200, 20, a);
  const LinearMeasurement m2 = random_orthonormal(200, 20, b);
  const LinearMeasurement m3 = random_orthonormal(200, 20, c);
  expect_orthonormal(m1);
  EXPECT_EQ(m1.dense(), m2.dense());
  EXPECT_NE(m1.dense(), m3.dense());
  EXPECT_THROW(random_orthonormal(5, 6, a), ArgumentError);
}

TEST(Projection, ComplementIsOrthogonal) {
  RngStream rng(8);
  const LinearMeasurement m = random_orthonormal(300, 45, rng);
  const Eigen::VectorXd y = random_vector(300, 9);
  const Eigen::VectorXd p = m.project(y);
  EXPECT_LE(std::abs((y - p).dot(p)), 1e-10 * 300);
  EXPECT_LE((m.project(p) - p).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::VectorXd c = random_vector(45, 10);
  EXPECT_NEAR(m.embed(c).norm(), c.norm(), 1e-12);
}

TEST(DenseMeasurement, RejectsNonOrthonormal) {
  Eigen::MatrixXd w(3, 2);
  w << 1, 1, 0, 1, 0, 0;
  EXPECT_THROW(dense_measurement(w), ArgumentError);
}

TEST(FromArbitrary, ScaledAxis) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 1);
  w(0, 0) = 2.0;
  auto [m, xc] = from_arbitrary(w, Eigen::VectorXd::Constant(1, 6.0));
  ASSERT_EQ(m.rank(), 1u);
  EXPECT_NEAR(std::abs(m.dense()(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(xc[0]), 3.0, 1e-14);
  const Eigen::VectorXd e = m.embed(xc);
  EXPECT_NEAR(e[0], 3.0, 1e-14);
  EXPECT_NEAR(e[1], 0.0, 1e-15);
}

TEST(FromArbitrary, OrthonormalInputAgrees) {
  RngStream rng(12);
  const LinearMeasurement direct = random_orthonormal(40, 6, rng);
  const Eigen::MatrixXd w = direct.dense();
  const Eigen::VectorXd x = random_vector(40, 13);
  auto [m, xc] = from_arbitrary(w, w.transpose() * x);
  EXPECT_LE((m.project(x) - direct.project(x)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((m.embed(xc) - direct.project(x)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FromArbitrary, RankDeficient) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 2);
  w(0, 0) = 1.0;
  w(0, 1) = 1.0;
  auto [m, xc] = from_arbitrary(w, Eigen::Vector2d(2.0, 2.0));
  EXPECT_EQ(m.rank(), 1u);
  EXPECT_NEAR(m.embed(xc)[0], 2.0, 1e-12);
  EXPECT_THROW(from_arbitrary(w, Eigen::Vector2d(1.0, 2.0)), InfeasibleConstraint);
}

TEST(MeasurementJson, RoundTripsThroughDescriptor) {
  const ImageShape shape{8, 8, 1};
  const std::vector<nlohmann::json> descriptors = {
      {{"type", "pixel_subset"}, {"kept", {1, 5, 9}}},
      {{"type", "inpaint_box"}},
      {{"type", "random_mask"}, {"fraction", 0.25}, {"seed", 4}},
      {{"type", "block_average"}, {"block", 2}},
      {{"type", "fourier_lowpass"}, {"fraction", 0.1}},
      {{"type", "random_orthonormal"}, {"rank", 5}, {"seed", 2}},
  };
  for (const auto& d : descriptors) {
    auto [m, xc] = measurement_from_json(d, shape);
    EXPECT_FALSE(xc.has_value());
    auto [again, unused] = measurement_from_json(m.descriptor(), std::nullopt);
    EXPECT_EQ(m.dense(), again.dense()) << d.dump();
    expect_orthonormal(m);
  }
}

TEST(MeasurementJson, ArbitraryYieldsConstraintValues) {
  const nlohmann::json d = {{"type", "arbitrary"}, {"signal_dim", 2}, {"W", {{2.0, 0.0}}}, {"xw", {6.0}}};
  auto [m, xc] = measurement_from_json(d, std::nullopt);
  ASSERT_TRUE(xc.has_value());
  EXPECT_NEAR(m.embed(*xc)[0], 3.0, 1e-14);
}

TEST(MeasurementJson, UnknownType) {
  EXPECT_THROW(measurement_from_json({{"type", "warp"}}, ImageShape{2, 2, 1}), ConfigError);
}
