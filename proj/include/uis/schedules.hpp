#pragma once

#include <cstddef>
#include <cstdint>

#include "uis/core.hpp"

namespace uis {

/// Parameters of the coarse-to-fine ascent.
struct SamplerParams {
  NoiseLevel sigma0{1.0};   // std of the initial draw, first denoiser hint
  NoiseLevel sigmaL{0.01};  // stop once the effective noise falls to this level
  double h0 = 0.01;         // initial fraction of the denoiser step, (0, 1]
  double beta = 0.01;       // 1 = no injected noise, 0 = noise keeps sigma flat
  std::size_t max_iters = 10000;
  std::uint64_t seed = 0;
  double init_mean = 0.5;

  // Throws ArgumentError when any field is out of range.
  void validate() const;
};

/// h_t = h0 t / (1 + h0 (t - 1)), for t >= 1.
double step_size(double h0, std::size_t t);

/// gamma_t = sigma_t sqrt((1 - beta h_t)^2 - (1 - h_t)^2).
///
/// Radicands within 1e-15 below zero are treated as zero.
double injected_noise_amplitude(double beta, double h_t, NoiseLevel sigma_t);

/// (1 - beta h_t) sigma_prev.
NoiseLevel expected_sigma_next(double beta, double h_t, NoiseLevel sigma_prev);

}  // namespace uis
