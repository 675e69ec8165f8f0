#include <cmath>

#include <gtest/gtest.h>

#include "uis/schedules.hpp"

using namespace uis;

TEST(StepSize, HandValues) {
  EXPECT_DOUBLE_EQ(step_size(0.01, 1), 0.01);
  EXPECT_DOUBLE_EQ(step_size(1.0, 7), 1.0);
  // 0.01 * 100 / (1 + 0.01 * 99) = 1 / 1.99
  EXPECT_NEAR(step_size(0.01, 100), 1.0 / 1.99, 1e-15);
  EXPECT_NEAR(step_size(0.01, 100), 0.5025126, 1e-7);
}

TEST(StepSize, IncreasesTowardOne) {
  double prev = 0.0;
  for (std::size_t t = 1; t < 5000; t += 37) {
    const double h = step_size(0.05, t);
    EXPECT_GT(h, prev);
    EXPECT_LE(h, 1.0);
    prev = h;
  }
}

TEST(StepSize, RejectsBadArguments) {
  EXPECT_THROW(step_size(0.01, 0), ArgumentError);
  EXPECT_THROW(step_size(0.0, 1), ArgumentError);
  EXPECT_THROW(step_size(1.5, 1), ArgumentError);
}

TEST(InjectedNoise, HandValues) {
  EXPECT_EQ(injected_noise_amplitude(1.0, 0.3, NoiseLevel(2.0)), 0.0);
  EXPECT_NEAR(injected_noise_amplitude(0.0, 0.5, NoiseLevel(1.0)), std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(injected_noise_amplitude(0.0, 0.5, NoiseLevel(1.0)), 0.8660254, 1e-7);
  EXPECT_NEAR(injected_noise_amplitude(0.3, 1e-12, NoiseLevel(1.0)), 0.0, 1e-5);
}

TEST(InjectedNoise, ScheduleIdentity) {
  for (double beta : {0.01, 0.1, 0.5, 0.99}) {
    for (double h : {0.01, 0.2, 0.7, 1.0}) {
      for (double sigma : {0.01, 0.5, 3.0}) {
        const double g = injected_noise_amplitude(beta, h, NoiseLevel(sigma));
        const double lhs = (1 - h) * (1 - h) * sigma * sigma + g * g;
        const double rhs = std::pow((1 - beta * h) * sigma, 2);
        EXPECT_NEAR(lhs / rhs, 1.0, 1e-12);
      }
    }
  }
}

TEST(InjectedNoise, RejectsBadArguments) {
  EXPECT_THROW(injected_noise_amplitude(1.5, 0.5, NoiseLevel(1.0)), ArgumentError);
  EXPECT_THROW(injected_noise_amplitude(0.5, -0.1, NoiseLevel(1.0)), ArgumentError);
}

TEST(ExpectedSigma, HandValues) {
  EXPECT_EQ(expected_sigma_next(1.0, 1.0, NoiseLevel(0.7)).value(), 0.0);
  EXPECT_EQ(expected_sigma_next(0.0, 0.4, NoiseLevel(0.7)).value(), 0.7);
  EXPECT_NEAR(expected_sigma_next(0.5, 0.2, NoiseLevel(1.0)).value(), 0.9, 1e-15);
}

TEST(SamplerParams, Validate) {
  SamplerParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.sigma0.value(), 1.0);
  EXPECT_EQ(p.sigmaL.value(), 0.01);
  EXPECT_EQ(p.h0, 0.01);
  EXPECT_EQ(p.beta, 0.01);
  EXPECT_EQ(p.max_iters, 10000u);

  SamplerParams bad = p;
  bad.sigmaL = NoiseLevel(2.0);
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = p;
  bad.beta = 1.5;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = p;
  bad.max_iters = 0;
  EXPECT_THROW(bad.validate(), ArgumentError);
}
