#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "uis/curve.hpp"
#include "uis/priors.hpp"
#include "uis/schedules.hpp"

namespace uis {

/// Two-dimensional picture of the sampler: signals drawn uniformly on a
/// curve, corrupted by Gaussian noise, then pulled back by deterministic
/// ascent on a discrete-atom approximation of the curve prior.
struct Demo2dConfig {
  Curve curve = Curve::sine(-1.0, 1.0, 0.5, 1.0);
  std::size_t prior_atoms = 50;
  std::size_t points = 50;
  double start_sigma = 0.25;  // noise added to the signals; also sigma0
  double sigmaL = 0.01;
  double h0 = 0.05;
  double beta = 1.0;
  std::size_t max_iters = 10000;
  std::uint64_t seed = 0;

  static Demo2dConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Demo2dTrajectory {
  Eigen::Vector2d signal;
  std::vector<Eigen::Vector2d> path;  // y_0 ... y_T
  bool converged = false;
  double distance_to_curve = 0.0;
  double path_length = 0.0;
  double chord = 0.0;  // |y_T - y_0|

  bool curved() const { return path_length > chord; }
};

struct Demo2dResult {
  AtomPrior prior;
  std::vector<Demo2dTrajectory> trajectories;

  double max_distance() const;
  double curved_fraction() const;
  nlohmann::json summary() const;
};

Demo2dResult run_demo2d(const Demo2dConfig& config);

}  // namespace uis
