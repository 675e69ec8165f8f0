#include "uis/schedules.hpp"

#include <cassert>
#include <cmath>

#include <fmt/format.h>

namespace uis {
namespace {

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ArgumentError(fmt::format("beta must lie in [0, 1], got {}", beta));
  }
}

void check_step(double h) {
  if (!(h > 0.0 && h <= 1.0)) {
    throw ArgumentError(fmt::format("step fraction must lie in (0, 1], got {}", h));
  }
}

}  // namespace

void SamplerParams::validate() const {
  if (!(sigmaL.value() > 0.0 && sigmaL < sigma0)) {
    throw ArgumentError(fmt::format("need 0 < sigmaL < sigma0, got sigmaL={} sigma0={}",
                                    sigmaL.value(), sigma0.value()));
  }
  check_step(h0);
  check_beta(beta);
  if (max_iters < 1) throw ArgumentError("max_iters must be at least 1");
  if (!std::isfinite(init_mean)) throw ArgumentError("init_mean must be finite");
}

double step_size(double h0, std::size_t t) {
  check_step(h0);
  if (t == 0) throw ArgumentError("step_size is defined for t >= 1");
  const double td = static_cast<double>(t);
  return h0 * td / (1.0 + h0 * (td - 1.0));
}

double injected_noise_amplitude(double beta, double h_t, NoiseLevel sigma_t) {
  check_beta(beta);
  check_step(h_t);
  const double kept = 1.0 - beta * h_t;
  const double removed = 1.0 - h_t;
  double radicand = kept * kept - removed * removed;
  if (radicand < 0.0 && radicand > -1e-15) radicand = 0.0;
  assert(radicand >= 0.0);
  return sigma_t.value() * std::sqrt(radicand);
}

NoiseLevel expected_sigma_next(double beta, double h_t, NoiseLevel sigma_prev) {
  check_beta(beta);
  check_step(h_t);
  return NoiseLevel((1.0 - beta * h_t) * sigma_prev.value());
}

}  // namespace uis
