#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "uis/errors.hpp"

namespace uis {

/// Image layout attached to a flat signal. Data is stored planar:
/// channel-major, then row-major within each channel.
struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;

  std::size_t size() const { return height * width * channels; }
  std::size_t plane_size() const { return height * width; }
  std::size_t index(std::size_t c, std::size_t r, std::size_t col) const {
    return (c * height + r) * width + col;
  }

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

std::string to_string(const ImageShape& shape);

/// Flat real vector of dimension N with optional image-shape metadata.
///
/// All entries are finite; construction with a NaN or infinity throws
/// NumericError. When a shape is attached, height * width * channels == N.
class SignalVector {
 public:
  SignalVector() = default;
  explicit SignalVector(Eigen::VectorXd data);
  SignalVector(Eigen::VectorXd data, ImageShape shape);
  SignalVector(Eigen::VectorXd data, std::optional<ImageShape> shape);

  static SignalVector constant(std::size_t n, double value);
  static SignalVector constant(const ImageShape& shape, double value);

  const Eigen::VectorXd& data() const { return data_; }
  const std::optional<ImageShape>& shape() const { return shape_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }
  double operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }

  // Same metadata, new payload. Throws ArgumentError on length mismatch.
  SignalVector with_data(Eigen::VectorXd data) const;

  bool same_layout(const SignalVector& other) const {
    return size() == other.size() && shape_ == other.shape_;
  }

 private:
  Eigen::VectorXd data_;
  std::optional<ImageShape> shape_;
};

/// Standard deviation of Gaussian noise, in intensity units.
class NoiseLevel {
 public:
  NoiseLevel() = default;
  explicit NoiseLevel(double sigma);

  double value() const { return sigma_; }
  double variance() const { return sigma_ * sigma_; }

  friend auto operator<=>(const NoiseLevel&, const NoiseLevel&) = default;

 private:
  double sigma_ = 0.0;
};

/// A least-squares Gaussian denoiser x̂(y).
///
/// Blind denoisers ignore the hint. Analytic oracles evaluate the posterior
/// mean at the hinted noise level. The output must have the same layout as
/// the input.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual SignalVector denoise(const SignalVector& y,
                               std::optional<NoiseLevel> sigma_hint) = 0;

  // True when denoise() may be called from several threads at once.
  virtual bool concurrency_safe() const { return false; }
};

/// x̂(y) = y.
class IdentityDenoiser final : public Denoiser {
 public:
  SignalVector denoise(const SignalVector& y, std::optional<NoiseLevel>) override { return y; }
  bool concurrency_safe() const override { return true; }
};

/// Adapts a plain function to the Denoiser contract.
class FunctionDenoiser final : public Denoiser {
 public:
  using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, std::optional<double>)>;

  explicit FunctionDenoiser(Fn fn, bool concurrency_safe = false)
      : fn_(std::move(fn)), concurrency_safe_(concurrency_safe) {}

  SignalVector denoise(const SignalVector& y, std::optional<NoiseLevel> sigma_hint) override;
  bool concurrency_safe() const override { return concurrency_safe_; }

 private:
  Fn fn_;
  bool concurrency_safe_;
};

/// Denoiser residual f(y) = x̂(y) - y.
///
/// Throws ContractViolation if the denoiser changes the layout and
/// NumericError if its output is not finite.
SignalVector residual(Denoiser& denoiser, const SignalVector& y,
                      std::optional<NoiseLevel> sigma_hint = std::nullopt);

/// ||d|| / sqrt(N). Throws ArgumentError for an empty vector.
NoiseLevel effective_sigma(const Eigen::Ref<const Eigen::VectorXd>& d);
inline NoiseLevel effective_sigma(const SignalVector& d) { return effective_sigma(d.data()); }

bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace uis
