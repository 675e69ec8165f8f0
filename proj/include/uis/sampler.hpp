#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uis/core.hpp"
#include "uis/measurement.hpp"
#include "uis/rng.hpp"
#include "uis/schedules.hpp"

namespace uis {

struct IterationRecord {
  std::size_t t = 0;
  double h = 0.0;               // step fraction h_t
  double sigma_observed = 0.0;  // ||d_t|| / sqrt(N), noise of y_{t-1}
  double sigma_expected = 0.0;  // schedule prediction for sigma_observed
  double gamma = 0.0;           // injected noise amplitude
  std::optional<double> constraint_rms;  // ||M^T y_t - x_c|| / sqrt(n)
};

struct IterationTrace {
  double sigma_initial = 0.0;  // sigma0 of the initial draw
  std::vector<IterationRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

struct SampleResult {
  SignalVector sample;
  IterationTrace trace;
  bool converged = false;

  std::size_t iterations() const { return trace.size(); }
};

/// Thrown when a chain cannot continue (denoiser failure or non-finite
/// iterate). Carries the trace recorded so far and the underlying error.
class SamplerAborted : public Error {
 public:
  SamplerAborted(const std::string& what, IterationTrace trace, std::exception_ptr cause)
      : Error(what), trace_(std::move(trace)), cause_(std::move(cause)) {}

  const IterationTrace& trace() const { return trace_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  IterationTrace trace_;
  std::exception_ptr cause_;
};

/// Called after every iteration with (t, y_t).
using AscentObserver = std::function<void(std::size_t, const Eigen::VectorXd&)>;

/// Unconstrained coarse-to-fine stochastic ascent on the denoiser's implicit prior.
///
/// Draws y_0 ~ N(init_mean e, sigma0^2 I), then iterates
///   y_t = y_{t-1} + h_t d_t + gamma_t z_t,  d_t = x̂(y_{t-1}) - y_{t-1}
/// while the effective noise ||d_t||/sqrt(N) stays above sigmaL. The denoiser
/// receives the previous effective noise (sigma0 at t = 1) as its hint.
/// Hitting max_iters returns with converged == false.
SampleResult sample_prior(Denoiser& denoiser, const ImageShape& shape, const SamplerParams& params,
                          RngStream& rng, const AscentObserver& observer = {});
SampleResult sample_prior(Denoiser& denoiser, std::size_t signal_dim, const SamplerParams& params,
                          RngStream& rng, const AscentObserver& observer = {});

/// Ascent on p(x | M^T x = x_c). The update direction is
///   d_t = (I - M M^T) f(y_{t-1}) + M (x_c - M^T y_{t-1})
/// and y_0 ~ N(init_mean (I - M M^T) e + M x_c, sigma0^2 I). With an empty
/// measurement the result is bitwise identical to sample_prior.
SampleResult sample_conditional(Denoiser& denoiser, const LinearMeasurement& measurement,
                                const Eigen::Ref<const Eigen::VectorXd>& xc, const SamplerParams& params,
                                RngStream& rng, const AscentObserver& observer = {});

/// Runs the ascent from a given starting point instead of the random draw.
/// An empty measurement gives the unconstrained update.
SampleResult ascend_from(Denoiser& denoiser, const LinearMeasurement& measurement,
                         const Eigen::Ref<const Eigen::VectorXd>& xc, const SignalVector& y0,
                         const SamplerParams& params, RngStream& rng, const AscentObserver& observer = {});

/// CSV with header t,h_t,sigma_observed,sigma_expected,gamma_t,constraint_rms.
/// An absent constraint_rms is written as an empty field.
void write_trace_csv(const IterationTrace& trace, std::ostream& out);
std::string trace_csv(const IterationTrace& trace);

}  // namespace uis
