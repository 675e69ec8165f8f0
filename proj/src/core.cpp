#include "uis/core.hpp"

#include <cmath>

#include <fmt/format.h>

namespace uis {

std::string to_string(const ImageShape& shape) {
  return fmt::format("{}x{}x{}", shape.height, shape.width, shape.channels);
}

bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

SignalVector::SignalVector(Eigen::VectorXd data) : data_(std::move(data)) {
  if (!all_finite(data_)) throw NumericError("signal contains non-finite entries");
}

SignalVector::SignalVector(Eigen::VectorXd data, ImageShape shape)
    : SignalVector(std::move(data), std::optional<ImageShape>(shape)) {}

SignalVector::SignalVector(Eigen::VectorXd data, std::optional<ImageShape> shape)
    : data_(std::move(data)), shape_(shape) {
  if (shape_ && shape_->size() != size()) {
    throw ArgumentError(fmt::format("shape {} does not match signal length {}",
                                    to_string(*shape_), size()));
  }
  if (!all_finite(data_)) throw NumericError("signal contains non-finite entries");
}

SignalVector SignalVector::constant(std::size_t n, double value) {
  return SignalVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value));
}

SignalVector SignalVector::constant(const ImageShape& shape, double value) {
  return SignalVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(shape.size()), value),
                      shape);
}

SignalVector SignalVector::with_data(Eigen::VectorXd data) const {
  if (static_cast<std::size_t>(data.size()) != size()) {
    throw ArgumentError(fmt::format("payload length {} does not match signal length {}",
                                    data.size(), size()));
  }
  return SignalVector(std::move(data), shape_);
}

NoiseLevel::NoiseLevel(double sigma) : sigma_(sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw ArgumentError(fmt::format("noise level must be finite and nonnegative, got {}", sigma));
  }
}

SignalVector FunctionDenoiser::denoise(const SignalVector& y, std::optional<NoiseLevel> sigma_hint) {
  std::optional<double> hint;
  if (sigma_hint) hint = sigma_hint->value();
  Eigen::VectorXd out = fn_(y.data(), hint);
  if (static_cast<std::size_t>(out.size()) != y.size()) {
    throw ContractViolation(fmt::format("denoiser returned {} values for a signal of length {}",
                                        out.size(), y.size()));
  }
  return y.with_data(std::move(out));
}

SignalVector residual(Denoiser& denoiser, const SignalVector& y,
                      std::optional<NoiseLevel> sigma_hint) {
  SignalVector denoised = denoiser.denoise(y, sigma_hint);
  if (!denoised.same_layout(y)) {
    throw ContractViolation(fmt::format("denoiser changed the signal layout ({} values in, {} out)",
                                        y.size(), denoised.size()));
  }
  Eigen::VectorXd d = denoised.data() - y.data();
  if (!all_finite(d)) throw NumericError("denoiser residual is not finite");
  return y.with_data(std::move(d));
}

NoiseLevel effective_sigma(const Eigen::Ref<const Eigen::VectorXd>& d) {
  if (d.size() == 0) throw ArgumentError("effective_sigma of an empty vector");
  return NoiseLevel(d.norm() / std::sqrt(static_cast<double>(d.size())));
}

}  // namespace uis
