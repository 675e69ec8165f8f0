#include "uis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace uis {
namespace {

void check_same_layout(const SignalVector& x, const SignalVector& xhat) {
  if (!x.same_layout(xhat)) {
    throw ArgumentError(fmt::format("signals differ in layout ({} vs {} values)", x.size(), xhat.size()));
  }
  if (x.size() == 0) throw ArgumentError("metrics need nonempty signals");
}

SignalVector plane_for_metrics(const SignalVector& s) {
  if (s.shape() && s.shape()->channels == 3) return luma(s);
  return s;
}

}  // namespace

SignalVector luma(const SignalVector& image) {
  if (!image.shape() || image.shape()->channels == 1) return image;
  const ImageShape& s = *image.shape();
  if (s.channels != 3) throw ArgumentError(fmt::format("luma needs 1 or 3 channels, got {}", s.channels));
  const auto plane = static_cast<Eigen::Index>(s.plane_size());
  const Eigen::VectorXd& d = image.data();
  Eigen::VectorXd y = kLumaR * d.segment(0, plane) + kLumaG * d.segment(plane, plane) + kLumaB * d.segment(2 * plane, plane);
  return SignalVector(std::move(y), ImageShape{s.height, s.width, 1});
}

double mean_squared_error(const SignalVector& x, const SignalVector& xhat) {
  check_same_layout(x, xhat);
  return (x.data() - xhat.data()).squaredNorm() / static_cast<double>(x.size());
}

double psnr(const SignalVector& x, const SignalVector& xhat, double peak) {
  check_same_layout(x, xhat);
  if (!(peak > 0.0)) throw ArgumentError("psnr peak must be positive");
  const double mse = mean_squared_error(plane_for_metrics(x), plane_for_metrics(xhat));
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const SignalVector& x, const SignalVector& xhat, std::size_t window, double k1, double k2, double peak) {
  check_same_layout(x, xhat);
  if (!x.shape()) throw ArgumentError("ssim needs image-shaped signals");
  if (window == 0) throw ArgumentError("ssim window must be positive");
  const SignalVector a = plane_for_metrics(x);
  const SignalVector b = plane_for_metrics(xhat);
  const ImageShape& s = *a.shape();
  if (s.channels != 1) throw ArgumentError("ssim compares a single plane");
  if (s.height < window || s.width < window) {
    throw ArgumentError(fmt::format("image {} is smaller than the {}x{} window", to_string(s), window, window));
  }
  const double c1 = (k1 * peak) * (k1 * peak);
  const double c2 = (k2 * peak) * (k2 * peak);
  double total = 0.0;
  std::size_t tiles = 0;
  for (std::size_t r0 = 0; r0 < s.height; r0 += window) {
    for (std::size_t c0 = 0; c0 < s.width; c0 += window) {
      const std::size_t r1 = std::min(r0 + window, s.height);
      const std::size_t cend = std::min(c0 + window, s.width);
      const double n = static_cast<double>((r1 - r0) * (cend - c0));
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < cend; ++c) {
          const double va = a[s.index(0, r, c)];
          const double vb = b[s.index(0, r, c)];
          sa += va;
          sb += vb;
        }
      }
      const double ma = sa / n;
      const double mb = sb / n;
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < cend; ++c) {
          const double da = a[s.index(0, r, c)] - ma;
          const double db = b[s.index(0, r, c)] - mb;
          saa += da * da;
          sbb += db * db;
          sab += da * db;
        }
      }
      const double va = saa / n, vb = sbb / n, cov = sab / n;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++tiles;
    }
  }
  return total / static_cast<double>(tiles);
}

nlohmann::json ConvergenceReport::to_json() const {
  return {{"beta", beta},
          {"iterations", iterations},
          {"mean_observed_ratio", mean_observed_ratio},
          {"mean_expected_ratio", mean_expected_ratio},
          {"faster_than_expected", faster_than_expected},
          {"observed_ratios", observed_ratios},
          {"expected_ratios", expected_ratios}};
}

ConvergenceReport convergence_report(const IterationTrace& trace, double beta, double h0) {
  if (trace.empty()) throw ArgumentError("convergence_report needs a nonempty trace");
  ConvergenceReport report;
  report.beta = beta;
  report.iterations = trace.size();
  double prev = trace.sigma_initial;
  for (const IterationRecord& r : trace.records) {
    report.observed_ratios.push_back(prev > 0.0 ? r.sigma_observed / prev : 0.0);
    report.expected_ratios.push_back(r.t == 1 ? 1.0 : 1.0 - beta * step_size(h0, r.t - 1));
    prev = r.sigma_observed;
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.mean_observed_ratio = mean(report.observed_ratios);
  report.mean_expected_ratio = mean(report.expected_ratios);
  report.faster_than_expected = beta < 1.0 && report.mean_observed_ratio <= report.mean_expected_ratio;
  return report;
}

double manifold_distance(const Eigen::Vector2d& p, const Curve& curve, std::size_t samples) {
  if (samples < 10000) throw ArgumentError("manifold_distance needs at least 10^4 samples");
  curve.length();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= samples; ++i) {
    best = std::min(best, (curve.point(static_cast<double>(i) / static_cast<double>(samples)) - p).squaredNorm());
  }
  return std::sqrt(best);
}

double discretization_pitch(const Curve& curve, std::size_t samples) {
  double pitch = 0.0;
  Eigen::Vector2d prev = curve.point(0.0);
  for (std::size_t i = 1; i <= samples; ++i) {
    const Eigen::Vector2d next = curve.point(static_cast<double>(i) / static_cast<double>(samples));
    pitch = std::max(pitch, (next - prev).norm());
    prev = next;
  }
  return pitch;
}

}  // namespace uis
