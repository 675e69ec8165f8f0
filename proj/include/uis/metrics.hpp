#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "uis/core.hpp"
#include "uis/curve.hpp"
#include "uis/sampler.hpp"

namespace uis {

// Full-range BT.601 luma: Y = 0.299 R + 0.587 G + 0.114 B.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// Luma plane of a 3-channel image; single-channel images pass through.
SignalVector luma(const SignalVector& image);

double mean_squared_error(const SignalVector& x, const SignalVector& xhat);

/// 10 log10(peak^2 / MSE) in dB, on the luma plane for 3-channel images.
/// Returns +infinity when the signals are identical.
double psnr(const SignalVector& x, const SignalVector& xhat, double peak = 1.0);

/// Mean SSIM over non-overlapping window x window tiles (edge tiles may be
/// smaller), with C1 = (k1 peak)^2, C2 = (k2 peak)^2 and population
/// statistics per tile. 3-channel images are compared on luma. Both signals
/// need an image shape no smaller than the window.
double ssim(const SignalVector& x, const SignalVector& xhat, std::size_t window = 8, double k1 = 0.01,
            double k2 = 0.03, double peak = 1.0);

/// Observed versus scheduled decay of the effective noise over one run.
struct ConvergenceReport {
  double beta = 0.0;
  std::size_t iterations = 0;
  double mean_observed_ratio = 0.0;  // mean of sigma_t / sigma_{t-1}
  double mean_expected_ratio = 0.0;  // mean of (1 - beta h_{t-1}); 1 at t = 1
  bool faster_than_expected = false;  // beta < 1 and observed <= expected
  std::vector<double> observed_ratios;
  std::vector<double> expected_ratios;

  nlohmann::json to_json() const;
};

/// The ratio at t = 1 compares against the trace's initial sigma0.
/// Throws ArgumentError on an empty trace.
ConvergenceReport convergence_report(const IterationTrace& trace, double beta, double h0);

/// Distance from p to the nearest point of a uniform parameter
/// discretization of the curve with `samples` segments (at least 10^4).
double manifold_distance(const Eigen::Vector2d& p, const Curve& curve, std::size_t samples = 1 << 14);

/// Largest spacing between consecutive points of that discretization.
double discretization_pitch(const Curve& curve, std::size_t samples = 1 << 14);

}  // namespace uis
