#include "uis/sampler.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace uis {
namespace {

using Direction = std::function<Eigen::VectorXd(const SignalVector&, NoiseLevel)>;

struct ConstraintView {
  const LinearMeasurement* measurement = nullptr;
  const Eigen::Ref<const Eigen::VectorXd>* xc = nullptr;

  std::optional<double> rms(const Eigen::VectorXd& y) const {
    if (measurement == nullptr || measurement->is_empty()) return std::nullopt;
    const Eigen::VectorXd err = measurement->measure(y) - *xc;
    return err.norm() / std::sqrt(static_cast<double>(err.size()));
  }
};

SampleResult run_ascent(const Direction& direction, Eigen::VectorXd y, std::optional<ImageShape> shape,
                        const SamplerParams& params, RngStream& rng, const ConstraintView& constraint,
                        const AscentObserver& observer) {
  SampleResult result;
  IterationTrace& trace = result.trace;
  trace.sigma_initial = params.sigma0.value();
  const auto n = y.size();
  if (n == 0) throw ArgumentError("cannot sample a zero-dimensional signal");

  double sigma_prev = params.sigma0.value();
  double h_prev = 0.0;
  for (std::size_t t = 1; t <= params.max_iters; ++t) {
    const double h = step_size(params.h0, t);
    Eigen::VectorXd d;
    try {
      d = direction(SignalVector(y, shape), NoiseLevel(sigma_prev));
    } catch (const Error& e) {
      throw SamplerAborted(fmt::format("sampler aborted at iteration {}: {}", t, e.what()), std::move(trace),
                           std::current_exception());
    }
    const NoiseLevel sigma = effective_sigma(d);
    const double gamma = injected_noise_amplitude(params.beta, h, sigma);
    const Eigen::VectorXd z = rng.normal_vector(n);
    y += h * d;
    y += gamma * z;

    IterationRecord rec;
    rec.t = t;
    rec.h = h;
    rec.sigma_observed = sigma.value();
    rec.sigma_expected =
        t == 1 ? params.sigma0.value() : expected_sigma_next(params.beta, h_prev, NoiseLevel(sigma_prev)).value();
    rec.gamma = gamma;
    if (all_finite(y)) rec.constraint_rms = constraint.rms(y);
    trace.records.push_back(rec);

    if (!all_finite(y)) {
      auto cause = std::make_exception_ptr(NumericError(fmt::format("non-finite iterate at t = {}", t)));
      throw SamplerAborted(fmt::format("sampler aborted at iteration {}: non-finite iterate", t), std::move(trace),
                           cause);
    }
    if (observer) observer(t, y);

    if (sigma <= params.sigmaL) {
      result.converged = true;
      break;
    }
    sigma_prev = sigma.value();
    h_prev = h;
  }
  result.sample = SignalVector(std::move(y), shape);
  return result;
}

Direction prior_direction(Denoiser& denoiser) {
  return [&denoiser](const SignalVector& y, NoiseLevel hint) {
    return residual(denoiser, y, hint).data();
  };
}

Direction conditional_direction(Denoiser& denoiser, const LinearMeasurement& m,
                                const Eigen::Ref<const Eigen::VectorXd>& xc) {
  return [&denoiser, &m, &xc](const SignalVector& y, NoiseLevel hint) {
    const Eigen::VectorXd f = residual(denoiser, y, hint).data();
    Eigen::VectorXd d = f - m.project(f);
    d += m.embed(xc - m.measure(y.data()));
    return d;
  };
}

void check_conditional(const LinearMeasurement& m, const Eigen::Ref<const Eigen::VectorXd>& xc) {
  if (static_cast<std::size_t>(xc.size()) != m.rank()) {
    throw ArgumentError(fmt::format("x_c has {} values but the measurement has rank {}", xc.size(), m.rank()));
  }
  if (!all_finite(xc)) throw ArgumentError("x_c must be finite");
}

}  // namespace

SampleResult sample_prior(Denoiser& denoiser, std::size_t signal_dim, const SamplerParams& params,
                          RngStream& rng, const AscentObserver& observer) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(signal_dim);
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, params.init_mean);
  Eigen::VectorXd y0 = mean + params.sigma0.value() * rng.normal_vector(n);
  return run_ascent(prior_direction(denoiser), std::move(y0), std::nullopt, params, rng, {}, observer);
}

SampleResult sample_prior(Denoiser& denoiser, const ImageShape& shape, const SamplerParams& params,
                          RngStream& rng, const AscentObserver& observer) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(shape.size());
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, params.init_mean);
  Eigen::VectorXd y0 = mean + params.sigma0.value() * rng.normal_vector(n);
  return run_ascent(prior_direction(denoiser), std::move(y0), shape, params, rng, {}, observer);
}

SampleResult sample_conditional(Denoiser& denoiser, const LinearMeasurement& measurement,
                                const Eigen::Ref<const Eigen::VectorXd>& xc, const SamplerParams& params,
                                RngStream& rng, const AscentObserver& observer) {
  params.validate();
  check_conditional(measurement, xc);
  const auto n = static_cast<Eigen::Index>(measurement.signal_dim());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd mean = params.init_mean * (ones - measurement.project(ones));
  mean += measurement.embed(xc);
  Eigen::VectorXd y0 = mean + params.sigma0.value() * rng.normal_vector(n);
  return run_ascent(conditional_direction(denoiser, measurement, xc), std::move(y0), measurement.shape(), params,
                    rng, ConstraintView{&measurement, &xc}, observer);
}

SampleResult ascend_from(Denoiser& denoiser, const LinearMeasurement& measurement,
                         const Eigen::Ref<const Eigen::VectorXd>& xc, const SignalVector& y0,
                         const SamplerParams& params, RngStream& rng, const AscentObserver& observer) {
  params.validate();
  check_conditional(measurement, xc);
  if (y0.size() != measurement.signal_dim()) {
    throw ArgumentError(fmt::format("start point has {} values, measurement expects {}", y0.size(),
                                    measurement.signal_dim()));
  }
  return run_ascent(conditional_direction(denoiser, measurement, xc), y0.data(), y0.shape(), params, rng,
                    ConstraintView{&measurement, &xc}, observer);
}

void write_trace_csv(const IterationTrace& trace, std::ostream& out) {
  out << "t,h_t,sigma_observed,sigma_expected,gamma_t,constraint_rms\n";
  for (const IterationRecord& r : trace.records) {
    out << fmt::format("{},{},{},{},{},", r.t, r.h, r.sigma_observed, r.sigma_expected, r.gamma);
    if (r.constraint_rms) out << fmt::format("{}", *r.constraint_rms);
    out << '\n';
  }
}

std::string trace_csv(const IterationTrace& trace) {
  std::ostringstream s;
  write_trace_csv(trace, s);
  return s.str();
}

}  // namespace uis
