#include "uis/demo2d.hpp"

#include <algorithm>
#include <memory>

#include "uis/metrics.hpp"
#include "uis/sampler.hpp"

namespace uis {

Demo2dConfig Demo2dConfig::from_json(const nlohmann::json& j) {
  Demo2dConfig c;
  if (j.contains("curve")) c.curve = Curve::from_json(j.at("curve"));
  c.prior_atoms = j.value("prior_atoms", c.prior_atoms);
  c.points = j.value("points", c.points);
  c.start_sigma = j.value("start_sigma", c.start_sigma);
  c.sigmaL = j.value("sigmaL", c.sigmaL);
  c.h0 = j.value("h0", c.h0);
  c.beta = j.value("beta", c.beta);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json Demo2dConfig::to_json() const {
  return {{"curve", curve.to_json()}, {"prior_atoms", prior_atoms}, {"points", points},
          {"start_sigma", start_sigma}, {"sigmaL", sigmaL}, {"h0", h0},
          {"beta", beta}, {"max_iters", max_iters}, {"seed", seed}};
}

Demo2dResult run_demo2d(const Demo2dConfig& config) {
  RngStream prior_rng(config.seed);
  auto prior = std::make_shared<AtomPrior>(manifold_atoms(config.curve, config.prior_atoms, prior_rng));
  OracleDenoiser denoiser(prior);

  SamplerParams params;
  params.sigma0 = NoiseLevel(config.start_sigma);
  params.sigmaL = NoiseLevel(config.sigmaL);
  params.h0 = config.h0;
  params.beta = config.beta;
  params.max_iters = config.max_iters;
  params.seed = config.seed;

  RngStream signal_rng(config.seed + 1);
  const LinearMeasurement none = LinearMeasurement::empty(2);
  const Eigen::VectorXd no_values;

  Demo2dResult result{*prior, {}};
  for (std::size_t i = 0; i < config.points; ++i) {
    Demo2dTrajectory traj;
    traj.signal = config.curve.at_arclength(signal_rng.uniform());
    const Eigen::Vector2d start = traj.signal + config.start_sigma * Eigen::Vector2d(signal_rng.normal(), signal_rng.normal());
    traj.path.push_back(start);

    RngStream chain_rng(config.seed + 2 + i);
    const SampleResult run = ascend_from(denoiser, none, no_values, SignalVector(Eigen::VectorXd(start)), params,
                                         chain_rng, [&traj](std::size_t, const Eigen::VectorXd& y) {
                                           traj.path.emplace_back(y[0], y[1]);
                                         });
    traj.converged = run.converged;
    for (std::size_t k = 1; k < traj.path.size(); ++k) traj.path_length += (traj.path[k] - traj.path[k - 1]).norm();
    traj.chord = (traj.path.back() - traj.path.front()).norm();
    traj.distance_to_curve = manifold_distance(traj.path.back(), config.curve);
    result.trajectories.push_back(std::move(traj));
  }
  return result;
}

double Demo2dResult::max_distance() const {
  double m = 0.0;
  for (const auto& t : trajectories) m = std::max(m, t.distance_to_curve);
  return m;
}

double Demo2dResult::curved_fraction() const {
  if (trajectories.empty()) return 0.0;
  const auto curved = std::count_if(trajectories.begin(), trajectories.end(), [](const auto& t) { return t.curved(); });
  return static_cast<double>(curved) / static_cast<double>(trajectories.size());
}

nlohmann::json Demo2dResult::summary() const {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& t : trajectories) {
    points.push_back({{"converged", t.converged},
                      {"iterations", t.path.size() - 1},
                      {"distance_to_curve", t.distance_to_curve},
                      {"path_length", t.path_length},
                      {"chord", t.chord}});
  }
  return {{"max_distance_to_curve", max_distance()}, {"curved_fraction", curved_fraction()}, {"points", points}};
}

}  // namespace uis
