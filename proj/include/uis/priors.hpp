#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "uis/core.hpp"
#include "uis/curve.hpp"
#include "uis/rng.hpp"

namespace uis {

/// A prior p(x) whose Gaussian-blurred density p_sigma(y) = (p * N(0, sigma^2 I))(y)
/// has a closed form. Used as an exact oracle for the denoiser identities.
class AnalyticPrior {
 public:
  virtual ~AnalyticPrior() = default;

  virtual std::size_t dim() const = 0;

  /// log p_sigma(y). sigma must be positive.
  virtual double noisy_log_density(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const = 0;
  /// grad_y log p_sigma(y).
  virtual Eigen::VectorXd score(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const = 0;
  /// Posterior mean E[x | y] under y = x + sigma z.
  virtual Eigen::VectorXd mmse_denoise(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const = 0;

  /// Mean of the prior.
  virtual Eigen::VectorXd mean() const = 0;

  virtual nlohmann::json to_json() const = 0;
};

/// Covariance of a mixture component: either c * I or a full symmetric PSD matrix.
struct Covariance {
  std::optional<double> isotropic;
  Eigen::MatrixXd full;

  static Covariance scaled_identity(double c) { return {c, {}}; }
  static Covariance matrix(Eigen::MatrixXd m) { return {std::nullopt, std::move(m)}; }
};

struct GmmComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Covariance covariance;
};

/// Gaussian mixture prior. Blurring by sigma adds sigma^2 I to every covariance.
class GmmPrior final : public AnalyticPrior {
 public:
  // Weights must be positive and sum to 1 within 1e-12; full covariances must
  // be symmetric within 1e-12 and positive semidefinite.
  explicit GmmPrior(std::vector<GmmComponent> components);

  // Single component N(mean, c I): the Wiener oracle.
  static GmmPrior isotropic_gaussian(Eigen::VectorXd mean, double c);

  const std::vector<GmmComponent>& components() const { return components_; }

  std::size_t dim() const override { return dim_; }
  double noisy_log_density(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const override;
  Eigen::VectorXd score(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const override;
  Eigen::VectorXd mmse_denoise(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const override;
  Eigen::VectorXd mean() const override;
  nlohmann::json to_json() const override;

 private:
  struct Blurred;
  std::vector<Blurred> blur(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const;

  std::vector<GmmComponent> components_;
  std::size_t dim_ = 0;
};

/// Discrete prior on a finite set of atoms (columns of an N x K matrix).
class AtomPrior final : public AnalyticPrior {
 public:
  // Weights default to uniform; given weights must be positive and are normalized.
  explicit AtomPrior(Eigen::MatrixXd atoms, std::optional<Eigen::VectorXd> weights = std::nullopt);

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t count() const { return static_cast<std::size_t>(atoms_.cols()); }

  std::size_t dim() const override { return static_cast<std::size_t>(atoms_.rows()); }
  double noisy_log_density(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const override;
  Eigen::VectorXd score(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const override;
  Eigen::VectorXd mmse_denoise(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const override;
  Eigen::VectorXd mean() const override;
  nlohmann::json to_json() const override;

  // Posterior responsibilities of each atom given y.
  Eigen::VectorXd responsibilities(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const;

 private:
  Eigen::VectorXd logits(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const;

  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_weights_;
};

/// K atoms evenly spaced in arclength: i/(K-1) on open curves, i/K on closed ones.
AtomPrior manifold_atoms(const Curve& curve, std::size_t count);
/// K atoms drawn uniformly in arclength.
AtomPrior manifold_atoms(const Curve& curve, std::size_t count, RngStream& rng);

/// K smooth synthetic images in [0, 1] (a flat level plus random Gaussian blobs).
AtomPrior synthetic_image_atoms(const ImageShape& shape, std::size_t count, RngStream& rng);

/// Builds a prior from its JSON description. Recognised "type" tags:
/// gaussian, gmm, atoms, manifold_atoms, synthetic_images.
std::shared_ptr<const AnalyticPrior> prior_from_json(const nlohmann::json& j);

/// Posterior-mean denoiser of an analytic prior.
///
/// Uses the fixed noise level when one is given, otherwise the caller's hint.
/// Throws ArgumentError when neither is available.
class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(std::shared_ptr<const AnalyticPrior> prior,
                          std::optional<NoiseLevel> fixed_sigma = std::nullopt);

  SignalVector denoise(const SignalVector& y, std::optional<NoiseLevel> sigma_hint) override;
  bool concurrency_safe() const override { return true; }

  const AnalyticPrior& prior() const { return *prior_; }

 private:
  std::shared_ptr<const AnalyticPrior> prior_;
  std::optional<NoiseLevel> fixed_sigma_;
};

}  // namespace uis
