#include "uis/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace uis {
namespace {

using nlohmann::json;

json shape_json(const std::optional<ImageShape>& shape) {
  if (!shape) return nullptr;
  return json::array({shape->height, shape->width, shape->channels});
}

void check_shape(std::size_t signal_dim, const std::optional<ImageShape>& shape) {
  if (shape && shape->size() != signal_dim) {
    throw ArgumentError(fmt::format("shape {} does not match signal dimension {}",
                                    to_string(*shape), signal_dim));
  }
}

class SubsetImpl final : public detail::MeasurementImpl {
 public:
  explicit SubsetImpl(std::vector<std::size_t> kept) : kept_(std::move(kept)) {}

  std::size_t rank() const override { return kept_.size(); }

  void measure(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> out) const override {
    for (std::size_t i = 0; i < kept_.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(kept_[i])];
    }
  }

  void embed(const Eigen::Ref<const Eigen::VectorXd>& c, Eigen::Ref<Eigen::VectorXd> out) const override {
    out.setZero();
    for (std::size_t i = 0; i < kept_.size(); ++i) {
      out[static_cast<Eigen::Index>(kept_[i])] = c[static_cast<Eigen::Index>(i)];
    }
  }

 private:
  std::vector<std::size_t> kept_;
};

// Coordinates ordered channel, block row, block column.
class BlockAverageImpl final : public detail::MeasurementImpl {
 public:
  BlockAverageImpl(ImageShape shape, std::size_t block)
      : shape_(shape), block_(block), rows_(shape.height / block), cols_(shape.width / block) {}

  std::size_t rank() const override { return shape_.channels * rows_ * cols_; }

  void measure(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> out) const override {
    const double scale = 1.0 / static_cast<double>(block_);
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < shape_.channels; ++c) {
      for (std::size_t br = 0; br < rows_; ++br) {
        for (std::size_t bc = 0; bc < cols_; ++bc) {
          double sum = 0.0;
          for (std::size_t r = br * block_; r < (br + 1) * block_; ++r) {
            for (std::size_t col = bc * block_; col < (bc + 1) * block_; ++col) {
              sum += x[static_cast<Eigen::Index>(shape_.index(c, r, col))];
            }
          }
          out[k++] = sum * scale;
        }
      }
    }
  }

  void embed(const Eigen::Ref<const Eigen::VectorXd>& coeffs, Eigen::Ref<Eigen::VectorXd> out) const override {
    const double scale = 1.0 / static_cast<double>(block_);
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < shape_.channels; ++c) {
      for (std::size_t br = 0; br < rows_; ++br) {
        for (std::size_t bc = 0; bc < cols_; ++bc) {
          const double v = coeffs[k++] * scale;
          for (std::size_t r = br * block_; r < (br + 1) * block_; ++r) {
            for (std::size_t col = bc * block_; col < (bc + 1) * block_; ++col) {
              out[static_cast<Eigen::Index>(shape_.index(c, r, col))] = v;
            }
          }
        }
      }
    }
  }

 private:
  ImageShape shape_;
  std::size_t block_;
  std::size_t rows_;
  std::size_t cols_;
};

class DenseImpl final : public detail::MeasurementImpl {
 public:
  explicit DenseImpl(Eigen::MatrixXd columns) : columns_(std::move(columns)) {}

  std::size_t rank() const override { return static_cast<std::size_t>(columns_.cols()); }

  void measure(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> out) const override {
    out.noalias() = columns_.transpose() * x;
  }

  void embed(const Eigen::Ref<const Eigen::VectorXd>& c, Eigen::Ref<Eigen::VectorXd> out) const override {
    out.noalias() = columns_ * c;
  }

 private:
  Eigen::MatrixXd columns_;
};

std::size_t fraction_count(std::size_t total, double fraction, const char* what) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError(fmt::format("{} fraction must lie in (0, 1], got {}", what, fraction));
  }
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  return std::clamp<std::size_t>(n, 1, total);
}

ImageShape shape_from_json(const json& j) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) {
    throw ConfigError("shape must be [height, width] or [height, width, channels]");
  }
  ImageShape s;
  s.height = j.at(0).get<std::size_t>();
  s.width = j.at(1).get<std::size_t>();
  s.channels = j.size() == 3 ? j.at(2).get<std::size_t>() : 1;
  return s;
}

}  // namespace

LinearMeasurement::LinearMeasurement(std::size_t signal_dim,
                                     std::shared_ptr<const detail::MeasurementImpl> impl,
                                     std::optional<ImageShape> shape, nlohmann::json descriptor)
    : signal_dim_(signal_dim), impl_(std::move(impl)), shape_(shape), descriptor_(std::move(descriptor)) {
  check_shape(signal_dim_, shape_);
  if (rank() > signal_dim_) {
    throw ArgumentError(fmt::format("rank {} exceeds signal dimension {}", rank(), signal_dim_));
  }
}

LinearMeasurement LinearMeasurement::empty(std::size_t signal_dim) {
  return LinearMeasurement(signal_dim, nullptr, std::nullopt,
                           json{{"type", "empty"}, {"signal_dim", signal_dim}});
}

Eigen::VectorXd LinearMeasurement::measure(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != signal_dim_) {
    throw ArgumentError(fmt::format("measure: expected {} values, got {}", signal_dim_, x.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(rank()));
  if (impl_) impl_->measure(x, out);
  return out;
}

Eigen::VectorXd LinearMeasurement::embed(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (static_cast<std::size_t>(c.size()) != rank()) {
    throw ArgumentError(fmt::format("embed: expected {} coefficients, got {}", rank(), c.size()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(signal_dim_));
  if (impl_) impl_->embed(c, out);
  return out;
}

Eigen::VectorXd LinearMeasurement::project(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  return embed(measure(y));
}

Eigen::MatrixXd LinearMeasurement::dense() const {
  const auto n = static_cast<Eigen::Index>(rank());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(signal_dim_), n);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    unit[j] = 1.0;
    m.col(j) = embed(unit);
    unit[j] = 0.0;
  }
  return m;
}

LinearMeasurement pixel_subset(std::size_t signal_dim, std::vector<std::size_t> kept,
                               std::optional<ImageShape> shape) {
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (!kept.empty() && kept.back() >= signal_dim) {
    throw ArgumentError(fmt::format("kept index {} out of range for dimension {}", kept.back(), signal_dim));
  }
  json desc{{"type", "pixel_subset"}, {"signal_dim", signal_dim}, {"kept", kept}, {"shape", shape_json(shape)}};
  return LinearMeasurement(signal_dim, std::make_shared<SubsetImpl>(std::move(kept)), shape, std::move(desc));
}

LinearMeasurement inpaint_box(const ImageShape& shape, std::size_t top, std::size_t left,
                              std::size_t height, std::size_t width) {
  if (top + height > shape.height || left + width > shape.width) {
    throw ArgumentError(fmt::format("inpainting box {}x{} at ({}, {}) exceeds image {}", height, width,
                                    top, left, to_string(shape)));
  }
  std::vector<std::size_t> kept;
  kept.reserve(shape.size());
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t r = 0; r < shape.height; ++r) {
      for (std::size_t col = 0; col < shape.width; ++col) {
        const bool blanked = r >= top && r < top + height && col >= left && col < left + width;
        if (!blanked) kept.push_back(shape.index(c, r, col));
      }
    }
  }
  json desc{{"type", "inpaint_box"}, {"shape", shape_json(shape)}, {"top", top},
            {"left", left}, {"height", height}, {"width", width}};
  return LinearMeasurement(shape.size(), std::make_shared<SubsetImpl>(std::move(kept)), shape, std::move(desc));
}

LinearMeasurement random_pixel_mask(std::size_t signal_dim, double fraction, RngStream& rng,
                                    std::optional<ImageShape> shape) {
  const std::size_t seed = rng.seed();
  const std::size_t n = fraction_count(signal_dim, fraction, "random mask");
  std::vector<std::size_t> order(signal_dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates with explicit draws so the result does not depend on
  // the standard library's shuffle.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t remaining = signal_dim - i;
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % remaining);
    std::swap(order[i], order[j]);
  }
  order.resize(n);
  std::sort(order.begin(), order.end());
  json desc{{"type", "random_mask"}, {"signal_dim", signal_dim}, {"fraction", fraction},
            {"seed", seed}, {"shape", shape_json(shape)}};
  return LinearMeasurement(signal_dim, std::make_shared<SubsetImpl>(std::move(order)), shape, std::move(desc));
}

LinearMeasurement block_average(const ImageShape& shape, std::size_t block) {
  if (block == 0 || shape.height % block != 0 || shape.width % block != 0) {
    throw ArgumentError(fmt::format("block size {} must divide image {}", block, to_string(shape)));
  }
  json desc{{"type", "block_average"}, {"shape", shape_json(shape)}, {"block", block}};
  return LinearMeasurement(shape.size(), std::make_shared<BlockAverageImpl>(shape, block), shape,
                           std::move(desc));
}

LinearMeasurement fourier_lowpass(const ImageShape& shape, double fraction) {
  if (shape.size() == 0) throw ArgumentError("fourier_lowpass on an empty image");
  const std::size_t per_channel = fraction_count(shape.plane_size(), fraction, "low-pass");
  json desc{{"type", "fourier_lowpass"}, {"shape", shape_json(shape)}, {"fraction", fraction}};
  return LinearMeasurement(shape.size(), detail::make_fourier_impl(shape, per_channel), shape,
                           std::move(desc));
}

LinearMeasurement random_orthonormal(std::size_t signal_dim, std::size_t rank, RngStream& rng,
                                     std::optional<ImageShape> shape) {
  if (rank > signal_dim) {
    throw ArgumentError(fmt::format("rank {} exceeds signal dimension {}", rank, signal_dim));
  }
  const std::uint64_t seed = rng.seed();
  const auto rows = static_cast<Eigen::Index>(signal_dim);
  const auto cols = static_cast<Eigen::Index>(rank);
  Eigen::MatrixXd gaussian(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  json desc{{"type", "random_orthonormal"}, {"signal_dim", signal_dim}, {"rank", rank},
            {"seed", seed}, {"shape", shape_json(shape)}};
  return LinearMeasurement(signal_dim, std::make_shared<DenseImpl>(std::move(q)), shape, std::move(desc));
}

LinearMeasurement dense_measurement(Eigen::MatrixXd columns, std::optional<ImageShape> shape, double tol) {
  const Eigen::MatrixXd gram = columns.transpose() * columns;
  const double err = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (gram.size() > 0 && !(err <= tol)) {
    throw ArgumentError(fmt::format("columns are not orthonormal (max |M^T M - I| = {})", err));
  }
  const auto signal_dim = static_cast<std::size_t>(columns.rows());
  json desc{{"type", "dense"}, {"signal_dim", signal_dim}, {"rank", columns.cols()}};
  return LinearMeasurement(signal_dim, std::make_shared<DenseImpl>(std::move(columns)), shape, std::move(desc));
}

std::pair<LinearMeasurement, Eigen::VectorXd> from_arbitrary(
    const Eigen::Ref<const Eigen::MatrixXd>& w, const Eigen::Ref<const Eigen::VectorXd>& xw,
    std::optional<ImageShape> shape) {
  if (xw.size() != w.cols()) {
    throw ArgumentError(fmt::format("constraint has {} columns but {} values", w.cols(), xw.size()));
  }
  const auto signal_dim = static_cast<std::size_t>(w.rows());
  if (w.cols() == 0) return {LinearMeasurement::empty(signal_dim), Eigen::VectorXd()};

  Eigen::BDCSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = 1e-10 * s[0];
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > cutoff) ++r;

  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  if (r < w.cols()) {
    const Eigen::VectorXd outside = xw - v * (v.transpose() * xw);
    const double scale = std::max(xw.norm(), 1.0);
    if (outside.norm() > 1e-8 * scale) {
      throw InfeasibleConstraint(fmt::format(
          "rank-deficient constraint (rank {} of {}) with values outside its row space", r, w.cols()));
    }
  }
  Eigen::VectorXd xc = (v.transpose() * xw).cwiseQuotient(s.head(r));
  Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  json desc{{"type", "dense"}, {"signal_dim", signal_dim}, {"rank", r}, {"source", "svd"}};
  LinearMeasurement m(signal_dim, std::make_shared<DenseImpl>(std::move(u)), shape, std::move(desc));
  return {std::move(m), std::move(xc)};
}

std::pair<LinearMeasurement, std::optional<Eigen::VectorXd>> measurement_from_json(
    const nlohmann::json& d, std::optional<ImageShape> shape) {
  const std::string type = d.at("type").get<std::string>();
  if (d.contains("shape") && !d.at("shape").is_null()) shape = shape_from_json(d.at("shape"));

  auto dim = [&]() -> std::size_t {
    if (d.contains("signal_dim")) return d.at("signal_dim").get<std::size_t>();
    if (shape) return shape->size();
    throw ConfigError(fmt::format("measurement '{}' needs signal_dim or shape", type));
  };
  auto need_shape = [&]() -> ImageShape {
    if (!shape) throw ConfigError(fmt::format("measurement '{}' needs an image shape", type));
    return *shape;
  };
  auto rng = [&]() { return RngStream(d.value("seed", std::uint64_t{0})); };

  if (type == "empty") {
    LinearMeasurement m = LinearMeasurement::empty(dim());
    return {std::move(m), std::nullopt};
  }
  if (type == "pixel_subset") {
    return {pixel_subset(dim(), d.at("kept").get<std::vector<std::size_t>>(), shape), std::nullopt};
  }
  if (type == "inpaint_box") {
    const ImageShape s = need_shape();
    const auto h = d.value("height", s.height / 2);
    const auto w = d.value("width", s.width / 2);
    const auto top = d.value("top", (s.height - std::min(h, s.height)) / 2);
    const auto left = d.value("left", (s.width - std::min(w, s.width)) / 2);
    return {inpaint_box(s, top, left, h, w), std::nullopt};
  }
  if (type == "random_mask") {
    RngStream r = rng();
    return {random_pixel_mask(dim(), d.at("fraction").get<double>(), r, shape), std::nullopt};
  }
  if (type == "block_average") {
    return {block_average(need_shape(), d.value("block", std::size_t{4})), std::nullopt};
  }
  if (type == "fourier_lowpass") {
    return {fourier_lowpass(need_shape(), d.at("fraction").get<double>()), std::nullopt};
  }
  if (type == "random_orthonormal") {
    const std::size_t n = dim();
    std::size_t rank = 0;
    if (d.contains("rank")) {
      rank = d.at("rank").get<std::size_t>();
    } else {
      rank = fraction_count(n, d.at("fraction").get<double>(), "random_orthonormal");
    }
    RngStream r = rng();
    return {random_orthonormal(n, rank, r, shape), std::nullopt};
  }
  if (type == "arbitrary") {
    const auto cols = d.at("W").get<std::vector<std::vector<double>>>();
    const auto xw = d.at("xw").get<std::vector<double>>();
    const std::size_t n = cols.empty() ? dim() : cols.front().size();
    Eigen::MatrixXd w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != n) throw ConfigError("arbitrary measurement columns differ in length");
      for (std::size_t i = 0; i < n; ++i) {
        w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
      }
    }
    auto [m, xc] = from_arbitrary(w, Eigen::Map<const Eigen::VectorXd>(xw.data(), static_cast<Eigen::Index>(xw.size())),
                                  shape);
    return {std::move(m), std::move(xc)};
  }
  throw ConfigError(fmt::format("unknown measurement type '{}'", type));
}

}  // namespace uis
