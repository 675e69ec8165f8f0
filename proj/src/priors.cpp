#include "uis/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace uis {
namespace {

using nlohmann::json;

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

double positive_sigma(NoiseLevel sigma) {
  if (!(sigma.value() > 0.0)) throw ArgumentError("noisy density requires sigma > 0");
  return sigma.value();
}

void check_dim(const Eigen::Ref<const Eigen::VectorXd>& y, std::size_t dim) {
  if (static_cast<std::size_t>(y.size()) != dim) {
    throw ArgumentError(fmt::format("prior has dimension {} but the signal has {}", dim, y.size()));
  }
}

double log_sum_exp(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  return top + std::log((logits.array() - top).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd w = (logits.array() - top).exp();
  return w / w.sum();
}

json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

// Component blurred by sigma, evaluated at one y.
struct GmmPrior::Blurred {
  double log_weighted_density;  // log pi_k + log N(y; mu_k, C_k + sigma^2 I)
  Eigen::VectorXd alpha;        // (C_k + sigma^2 I)^-1 (y - mu_k)
};

GmmPrior::GmmPrior(std::vector<GmmComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw ArgumentError("GMM prior needs at least one component");
  dim_ = static_cast<std::size_t>(components_.front().mean.size());
  if (dim_ == 0) throw ArgumentError("GMM prior has zero dimension");
  double total = 0.0;
  for (const GmmComponent& c : components_) {
    if (static_cast<std::size_t>(c.mean.size()) != dim_) throw ArgumentError("GMM component means differ in dimension");
    if (!(c.weight > 0.0)) throw ArgumentError("GMM weights must be positive");
    if (!c.mean.allFinite()) throw ArgumentError("GMM mean is not finite");
    total += c.weight;
    if (c.covariance.isotropic) {
      if (!(*c.covariance.isotropic >= 0.0) || !std::isfinite(*c.covariance.isotropic)) {
        throw ArgumentError("isotropic variance must be finite and nonnegative");
      }
      continue;
    }
    const Eigen::MatrixXd& m = c.covariance.full;
    if (static_cast<std::size_t>(m.rows()) != dim_ || static_cast<std::size_t>(m.cols()) != dim_) {
      throw ArgumentError("GMM covariance has the wrong size");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ArgumentError("GMM covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      throw ArgumentError("GMM covariance is not positive semidefinite");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ArgumentError(fmt::format("GMM weights sum to {}, expected 1", total));
  }
}

GmmPrior GmmPrior::isotropic_gaussian(Eigen::VectorXd mean, double c) {
  return GmmPrior({GmmComponent{1.0, std::move(mean), Covariance::scaled_identity(c)}});
}

std::vector<GmmPrior::Blurred> GmmPrior::blur(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const double var = positive_sigma(sigma) * sigma.value();
  check_dim(y, dim_);
  const double n = static_cast<double>(dim_);
  std::vector<Blurred> out;
  out.reserve(components_.size());
  for (const GmmComponent& c : components_) {
    const Eigen::VectorXd r = y - c.mean;
    Blurred b;
    double log_det = 0.0;
    if (c.covariance.isotropic) {
      const double total = *c.covariance.isotropic + var;
      b.alpha = r / total;
      log_det = n * std::log(total);
    } else {
      Eigen::MatrixXd a = c.covariance.full;
      a.diagonal().array() += var;
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      b.alpha = llt.solve(r);
      log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    b.log_weighted_density = std::log(c.weight) - 0.5 * (n * kLog2Pi + log_det + r.dot(b.alpha));
    out.push_back(std::move(b));
  }
  return out;
}

double GmmPrior::noisy_log_density(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const auto parts = blur(y, sigma);
  Eigen::VectorXd logits(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) logits[static_cast<Eigen::Index>(k)] = parts[k].log_weighted_density;
  return log_sum_exp(logits);
}

Eigen::VectorXd GmmPrior::score(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const auto parts = blur(y, sigma);
  Eigen::VectorXd logits(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) logits[static_cast<Eigen::Index>(k)] = parts[k].log_weighted_density;
  const Eigen::VectorXd resp = softmax(logits);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t k = 0; k < parts.size(); ++k) g -= resp[static_cast<Eigen::Index>(k)] * parts[k].alpha;
  return g;
}

Eigen::VectorXd GmmPrior::mmse_denoise(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const auto parts = blur(y, sigma);
  Eigen::VectorXd logits(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) logits[static_cast<Eigen::Index>(k)] = parts[k].log_weighted_density;
  const Eigen::VectorXd resp = softmax(logits);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const GmmComponent& c = components_[k];
    // Component posterior mean mu + C (C + sigma^2 I)^-1 (y - mu).
    Eigen::VectorXd post = c.covariance.isotropic
                               ? Eigen::VectorXd(c.mean + *c.covariance.isotropic * parts[k].alpha)
                               : Eigen::VectorXd(c.mean + c.covariance.full * parts[k].alpha);
    x += resp[static_cast<Eigen::Index>(k)] * post;
  }
  return x;
}

Eigen::VectorXd GmmPrior::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (const GmmComponent& c : components_) m += c.weight * c.mean;
  return m;
}

json GmmPrior::to_json() const {
  json comps = json::array();
  for (const GmmComponent& c : components_) {
    json item{{"weight", c.weight}, {"mean", vector_json(c.mean)}};
    if (c.covariance.isotropic) {
      item["variance"] = *c.covariance.isotropic;
    } else {
      json rows = json::array();
      for (Eigen::Index i = 0; i < c.covariance.full.rows(); ++i) rows.push_back(vector_json(c.covariance.full.row(i)));
      item["covariance"] = rows;
    }
    comps.push_back(std::move(item));
  }
  return {{"type", "gmm"}, {"components", comps}};
}

AtomPrior::AtomPrior(Eigen::MatrixXd atoms, std::optional<Eigen::VectorXd> weights) : atoms_(std::move(atoms)) {
  if (atoms_.cols() < 1) throw ArgumentError("atom prior needs at least one atom");
  if (atoms_.rows() < 1) throw ArgumentError("atom prior has zero dimension");
  if (!atoms_.allFinite()) throw ArgumentError("atoms must be finite");
  if (weights) {
    if (weights->size() != atoms_.cols()) throw ArgumentError("one weight per atom is required");
    if (!(weights->array() > 0.0).all()) throw ArgumentError("atom weights must be positive");
    weights_ = *weights / weights->sum();
  } else {
    weights_ = Eigen::VectorXd::Constant(atoms_.cols(), 1.0 / static_cast<double>(atoms_.cols()));
  }
  log_weights_ = weights_.array().log();
}

Eigen::VectorXd AtomPrior::logits(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const double s = positive_sigma(sigma);
  check_dim(y, dim());
  const Eigen::VectorXd dist2 = (atoms_.colwise() - y).colwise().squaredNorm().transpose();
  return log_weights_ - dist2 / (2.0 * s * s);
}

Eigen::VectorXd AtomPrior::responsibilities(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  return softmax(logits(y, sigma));
}

double AtomPrior::noisy_log_density(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const double s = positive_sigma(sigma);
  const double n = static_cast<double>(dim());
  return log_sum_exp(logits(y, sigma)) - 0.5 * n * (kLog2Pi + 2.0 * std::log(s));
}

Eigen::VectorXd AtomPrior::score(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  const Eigen::VectorXd resp = responsibilities(y, sigma);
  const double var = sigma.variance();
  return ((atoms_.colwise() - y) * resp) / var;
}

Eigen::VectorXd AtomPrior::mmse_denoise(const Eigen::Ref<const Eigen::VectorXd>& y, NoiseLevel sigma) const {
  return atoms_ * responsibilities(y, sigma);
}

Eigen::VectorXd AtomPrior::mean() const { return atoms_ * weights_; }

json AtomPrior::to_json() const {
  json atoms = json::array();
  for (Eigen::Index k = 0; k < atoms_.cols(); ++k) atoms.push_back(vector_json(atoms_.col(k)));
  return {{"type", "atoms"}, {"atoms", atoms}, {"weights", vector_json(weights_)}};
}

AtomPrior manifold_atoms(const Curve& curve, std::size_t count) {
  if (count < 2) throw ArgumentError("manifold_atoms needs at least two atoms");
  curve.length();
  Eigen::MatrixXd atoms(2, static_cast<Eigen::Index>(count));
  const double denom = static_cast<double>(curve.closed() ? count : count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    atoms.col(static_cast<Eigen::Index>(i)) = curve.at_arclength(static_cast<double>(i) / denom);
  }
  return AtomPrior(std::move(atoms));
}

AtomPrior manifold_atoms(const Curve& curve, std::size_t count, RngStream& rng) {
  if (count < 2) throw ArgumentError("manifold_atoms needs at least two atoms");
  curve.length();
  Eigen::MatrixXd atoms(2, static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) atoms.col(static_cast<Eigen::Index>(i)) = curve.at_arclength(rng.uniform());
  return AtomPrior(std::move(atoms));
}

AtomPrior synthetic_image_atoms(const ImageShape& shape, std::size_t count, RngStream& rng) {
  if (count < 1 || shape.size() == 0) throw ArgumentError("synthetic_image_atoms needs a nonempty shape and count");
  const double h = static_cast<double>(shape.height);
  const double w = static_cast<double>(shape.width);
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(shape.size()), static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const int blobs = 3 + static_cast<int>(rng.next_u64() % 4);
    struct Blob { double r, c, radius, amp; };
    std::vector<Blob> spec;
    for (int b = 0; b < blobs; ++b) {
      spec.push_back({rng.uniform() * h, rng.uniform() * w, (0.08 + 0.2 * rng.uniform()) * std::max(h, w),
                      0.8 * rng.uniform() - 0.4});
    }
    for (std::size_t c = 0; c < shape.channels; ++c) {
      const double base = 0.3 + 0.4 * rng.uniform();
      const double tint = 0.7 + 0.6 * rng.uniform();
      for (std::size_t r = 0; r < shape.height; ++r) {
        for (std::size_t col = 0; col < shape.width; ++col) {
          double v = base;
          for (const Blob& b : spec) {
            const double dr = static_cast<double>(r) - b.r;
            const double dc = static_cast<double>(col) - b.c;
            v += tint * b.amp * std::exp(-(dr * dr + dc * dc) / (2.0 * b.radius * b.radius));
          }
          atoms(static_cast<Eigen::Index>(shape.index(c, r, col)), static_cast<Eigen::Index>(k)) =
              std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return AtomPrior(std::move(atoms));
}

std::shared_ptr<const AnalyticPrior> prior_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    const double c = j.value("variance", 1.0);
    Eigen::VectorXd mean;
    if (j.at("mean").is_array()) {
      mean = vector_from_json(j.at("mean"));
    } else {
      mean = Eigen::VectorXd::Constant(j.at("dim").get<Eigen::Index>(), j.at("mean").get<double>());
    }
    return std::make_shared<GmmPrior>(GmmPrior::isotropic_gaussian(std::move(mean), c));
  }
  if (type == "gmm") {
    std::vector<GmmComponent> comps;
    for (const json& item : j.at("components")) {
      GmmComponent c;
      c.weight = item.value("weight", 1.0);
      c.mean = vector_from_json(item.at("mean"));
      if (item.contains("covariance")) {
        const auto rows = item.at("covariance").get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows.size()) throw ConfigError("GMM covariance must be square");
          for (std::size_t c2 = 0; c2 < rows.size(); ++c2) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c2)) = rows[r][c2];
          }
        }
        c.covariance = Covariance::matrix(std::move(m));
      } else {
        c.covariance = Covariance::scaled_identity(item.value("variance", 0.0));
      }
      comps.push_back(std::move(c));
    }
    return std::make_shared<GmmPrior>(std::move(comps));
  }
  if (type == "atoms") {
    const auto rows = j.at("atoms").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ConfigError("atom prior needs at least one atom");
    Eigen::MatrixXd atoms(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != rows.front().size()) throw ConfigError("atoms differ in dimension");
      atoms.col(static_cast<Eigen::Index>(k)) =
          Eigen::Map<const Eigen::VectorXd>(rows[k].data(), static_cast<Eigen::Index>(rows[k].size()));
    }
    std::optional<Eigen::VectorXd> weights;
    if (j.contains("weights")) weights = vector_from_json(j.at("weights"));
    return std::make_shared<AtomPrior>(std::move(atoms), std::move(weights));
  }
  if (type == "manifold_atoms") {
    const Curve curve = Curve::from_json(j.at("curve"));
    const auto count = j.value("count", std::size_t{50});
    if (j.value("placement", std::string("random")) == "stratified") {
      return std::make_shared<AtomPrior>(manifold_atoms(curve, count));
    }
    RngStream rng(j.value("seed", std::uint64_t{0}));
    return std::make_shared<AtomPrior>(manifold_atoms(curve, count, rng));
  }
  if (type == "synthetic_images") {
    const auto s = j.at("shape").get<std::vector<std::size_t>>();
    if (s.size() < 2 || s.size() > 3) throw ConfigError("synthetic_images shape must be [H, W] or [H, W, C]");
    const ImageShape shape{s[0], s[1], s.size() == 3 ? s[2] : 1};
    RngStream rng(j.value("seed", std::uint64_t{0}));
    return std::make_shared<AtomPrior>(synthetic_image_atoms(shape, j.value("count", std::size_t{8}), rng));
  }
  throw ConfigError(fmt::format("unknown prior type '{}'", type));
}

OracleDenoiser::OracleDenoiser(std::shared_ptr<const AnalyticPrior> prior, std::optional<NoiseLevel> fixed_sigma)
    : prior_(std::move(prior)), fixed_sigma_(fixed_sigma) {
  if (!prior_) throw ArgumentError("oracle denoiser needs a prior");
}

SignalVector OracleDenoiser::denoise(const SignalVector& y, std::optional<NoiseLevel> sigma_hint) {
  const std::optional<NoiseLevel> sigma = fixed_sigma_ ? fixed_sigma_ : sigma_hint;
  if (!sigma) throw ArgumentError("oracle denoiser needs a noise level (fixed or hinted)");
  return y.with_data(prior_->mmse_denoise(y.data(), *sigma));
}

}  // namespace uis
