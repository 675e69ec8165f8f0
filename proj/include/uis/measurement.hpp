#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "uis/core.hpp"
#include "uis/rng.hpp"

namespace uis {

namespace detail {

// Backing representation of a measurement operator with orthonormal columns.
class MeasurementImpl {
 public:
  virtual ~MeasurementImpl() = default;
  virtual std::size_t rank() const = 0;
  virtual void measure(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> out) const = 0;
  virtual void embed(const Eigen::Ref<const Eigen::VectorXd>& c, Eigen::Ref<Eigen::VectorXd> out) const = 0;
};

}  // namespace detail

/// Linear measurement x_c = M^T x with orthonormal columns (M^T M = I).
///
/// measure() applies M^T, embed() applies M, project() applies M M^T.
/// Instances are immutable and cheap to copy; the operator itself is shared.
class LinearMeasurement {
 public:
  // Rank-0 operator on R^n.
  static LinearMeasurement empty(std::size_t signal_dim);

  std::size_t signal_dim() const { return signal_dim_; }
  std::size_t rank() const { return impl_ ? impl_->rank() : 0; }
  bool is_empty() const { return rank() == 0; }
  const std::optional<ImageShape>& shape() const { return shape_; }

  Eigen::VectorXd measure(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& y) const;

  Eigen::VectorXd measure(const SignalVector& x) const { return measure(x.data()); }
  Eigen::VectorXd project(const SignalVector& y) const { return project(y.data()); }

  // Dense N x n realization. Test and small-problem use only.
  Eigen::MatrixXd dense() const;

  // Reproducible description (type tag + parameters + seed).
  const nlohmann::json& descriptor() const { return descriptor_; }

  LinearMeasurement(std::size_t signal_dim, std::shared_ptr<const detail::MeasurementImpl> impl,
                    std::optional<ImageShape> shape, nlohmann::json descriptor);

 private:
  std::size_t signal_dim_ = 0;
  std::shared_ptr<const detail::MeasurementImpl> impl_;
  std::optional<ImageShape> shape_;
  nlohmann::json descriptor_;
};

/// Columns are the identity vectors of the kept indices (sorted, deduplicated).
LinearMeasurement pixel_subset(std::size_t signal_dim, std::vector<std::size_t> kept,
                               std::optional<ImageShape> shape = std::nullopt);

/// Keeps everything except a height x width box at (top, left), in every channel.
LinearMeasurement inpaint_box(const ImageShape& shape, std::size_t top, std::size_t left,
                              std::size_t height, std::size_t width);

/// Keeps round(fraction * N) indices chosen uniformly at random.
LinearMeasurement random_pixel_mask(std::size_t signal_dim, double fraction, RngStream& rng,
                                    std::optional<ImageShape> shape = std::nullopt);

/// Non-overlapping block x block averages per channel. Each column has
/// block^2 entries equal to 1/block, so a measured value is block times the
/// plain block mean. Height and width must be multiples of block.
LinearMeasurement block_average(const ImageShape& shape, std::size_t block);

/// Lowest-frequency vectors of the real orthonormal 2-D Fourier basis, per
/// channel. Frequencies are ranked by squared radial index, ties by signed
/// (vertical, horizontal) index; each non-self-conjugate frequency contributes
/// a cosine then a sine vector. round(fraction * H * W) vectors per channel,
/// at least one (DC).
LinearMeasurement fourier_lowpass(const ImageShape& shape, double fraction);

/// n orthonormal columns from the thin QR factor of a seeded Gaussian N x n matrix.
LinearMeasurement random_orthonormal(std::size_t signal_dim, std::size_t rank, RngStream& rng,
                                     std::optional<ImageShape> shape = std::nullopt);

/// Wraps an explicit N x n matrix. Throws ArgumentError unless M^T M = I within tol.
LinearMeasurement dense_measurement(Eigen::MatrixXd columns, std::optional<ImageShape> shape = std::nullopt,
                                    double tol = 1e-10);

/// Re-expresses W^T x = x_w as M^T x = x_c with M orthonormal, via the thin SVD.
///
/// Singular values below 1e-10 * sigma_max count as rank deficiency; if x_w
/// then has a component outside the row space of W the constraint is
/// infeasible and InfeasibleConstraint is thrown.
std::pair<LinearMeasurement, Eigen::VectorXd> from_arbitrary(
    const Eigen::Ref<const Eigen::MatrixXd>& w, const Eigen::Ref<const Eigen::VectorXd>& xw,
    std::optional<ImageShape> shape = std::nullopt);

/// Builds an operator from its JSON descriptor. `shape` supplies the signal
/// layout when the descriptor omits it.
///
/// Recognised "type" tags: empty, pixel_subset, inpaint_box, random_mask,
/// block_average, fourier_lowpass, random_orthonormal, arbitrary. The
/// arbitrary type also yields x_c; for the others the second member is empty.
std::pair<LinearMeasurement, std::optional<Eigen::VectorXd>> measurement_from_json(
    const nlohmann::json& descriptor, std::optional<ImageShape> shape);

namespace detail {
std::shared_ptr<const MeasurementImpl> make_fourier_impl(const ImageShape& shape, std::size_t per_channel);

// Canonical frequencies kept by fourier_lowpass, in order, as (k, l) DFT indices.
std::vector<std::pair<std::size_t, std::size_t>> lowpass_frequencies(std::size_t height, std::size_t width);
}  // namespace detail

}  // namespace uis
