#include "uis/run.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "uis/bridge.hpp"
#include "uis/image_io.hpp"
#include "uis/measurement.hpp"
#include "uis/metrics.hpp"
#include "uis/sampler.hpp"

namespace uis {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Task, const char*> kTaskNames[] = {
    {Task::kSample, "sample"}, {Task::kInpaint, "inpaint"}, {Task::kPixels, "pixels"},
    {Task::kSr, "sr"},         {Task::kDeblur, "deblur"},   {Task::kCs, "cs"},
    {Task::kDemo2d, "demo2d"}, {Task::kDiagnose, "diagnose"},
};

json shape_json(const ImageShape& s) { return json::array({s.height, s.width, s.channels}); }

ImageShape parse_shape(const json& j) {
  const auto v = j.get<std::vector<std::size_t>>();
  if (v.size() < 2 || v.size() > 3) throw ConfigError("shape must be [height, width] or [height, width, channels]");
  return {v[0], v[1], v.size() == 3 ? v[2] : 1};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

void write_signal(const fs::path& stem, const SignalVector& s) {
  write_raw(fs::path(stem).concat(".raw"), s);
  if (s.shape() && (s.shape()->channels == 1 || s.shape()->channels == 3)) {
    write_png(fs::path(stem).concat(".png"), s);
  }
}

json quality(const SignalVector& truth, const SignalVector& estimate) {
  json q;
  const double p = psnr(truth, estimate);
  q["psnr"] = std::isinf(p) ? json("inf") : json(p);
  if (truth.shape() && truth.shape()->height >= 8 && truth.shape()->width >= 8 &&
      (truth.shape()->channels == 1 || truth.shape()->channels == 3)) {
    q["ssim"] = ssim(truth, estimate);
  }
  return q;
}

// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SamplerParams params_for_seed(const SamplerParams& base, std::size_t i) {
  SamplerParams p = base;
  p.seed = base.seed + i;
  return p;
}

struct ChainOutput {
  json metrics;
  bool converged = false;
  bool failed = false;
};

ChainOutput finish_chain(const fs::path& dir, std::size_t i, const SampleResult& r,
                         const std::optional<SignalVector>& truth) {
  ChainOutput out;
  write_signal(dir / fmt::format("sample_{}", i), r.sample);
  write_text(dir / fmt::format("trace_{}.csv", i), trace_csv(r.trace));
  out.converged = r.converged;
  out.metrics = {{"index", i}, {"converged", r.converged}, {"iterations", r.iterations()},
                 {"final_sigma", r.trace.records.back().sigma_observed}};
  if (r.trace.records.back().constraint_rms) out.metrics["constraint_rms"] = *r.trace.records.back().constraint_rms;
  if (truth) out.metrics.update(quality(*truth, r.sample));
  return out;
}

ChainOutput aborted_chain(const fs::path& dir, std::size_t i, const SamplerAborted& e) {
  write_text(dir / fmt::format("trace_{}.csv", i), trace_csv(e.trace()));
  ChainOutput out;
  out.failed = true;
  out.metrics = {{"index", i}, {"error", e.what()}, {"iterations", e.trace().size()}};
  return out;
}

RunOutcome collect(json metrics, const std::vector<ChainOutput>& chains, const fs::path& dir) {
  RunOutcome outcome;
  json samples = json::array();
  bool all_converged = true;
  bool any_failed = false;
  for (const auto& c : chains) {
    samples.push_back(c.metrics);
    all_converged = all_converged && c.converged;
    any_failed = any_failed || c.failed;
  }
  metrics["samples"] = samples;
  metrics["all_converged"] = all_converged;
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  outcome.metrics = std::move(metrics);
  outcome.exit_code = any_failed ? kExitFailure : (all_converged ? kExitSuccess : kExitNotConverged);
  return outcome;
}

RunOutcome run_sample(const RunConfig& cfg, const DenoiserFactory& factory) {
  const ImageShape shape = *cfg.shape;
  std::vector<ChainOutput> chains(cfg.num_samples);
  parallel_for(cfg.num_samples, cfg.threads, [&](std::size_t i) {
    auto denoiser = factory();
    const SamplerParams p = params_for_seed(cfg.params, i);
    RngStream rng(p.seed);
    try {
      chains[i] = finish_chain(cfg.output_dir, i, sample_prior(*denoiser, shape, p, rng), std::nullopt);
    } catch (const SamplerAborted& e) {
      chains[i] = aborted_chain(cfg.output_dir, i, e);
    }
  });
  return collect({{"task", "sample"}, {"config", cfg.to_json()}}, chains, cfg.output_dir);
}

RunOutcome run_inverse(const RunConfig& cfg, const DenoiserFactory& factory,
                       const std::shared_ptr<const AnalyticPrior>& prior) {
  std::optional<SignalVector> truth;
  if (cfg.input) {
    truth = read_image(*cfg.input);
  } else if (auto atoms = std::dynamic_pointer_cast<const AtomPrior>(prior)) {
    if (cfg.truth_atom >= atoms->count()) throw ConfigError("truth_atom is out of range");
    truth = SignalVector(Eigen::VectorXd(atoms->atoms().col(static_cast<Eigen::Index>(cfg.truth_atom))), cfg.shape);
  }
  std::optional<ImageShape> shape = cfg.shape;
  if (truth && truth->shape()) {
    if (shape && *shape != *truth->shape()) throw ConfigError("configured shape does not match the input image");
    shape = truth->shape();
  }

  const json descriptor = cfg.measurement.value_or(default_measurement(cfg.task));
  auto [measurement, given_xc] = measurement_from_json(descriptor, shape);
  Eigen::VectorXd xc;
  if (given_xc) {
    xc = *given_xc;
  } else if (truth) {
    xc = measurement.measure(*truth);
  } else {
    throw ConfigError("inverse tasks need an input image, an atom prior, or explicit constraint values");
  }
  if (!shape) shape = measurement.shape();

  const fs::path& dir = cfg.output_dir;
  json metrics{{"task", to_string(cfg.task)}, {"config", cfg.to_json()},
               {"measurement", measurement.descriptor()}, {"rank", measurement.rank()}};
  const SignalVector direct(measurement.embed(xc), shape);
  write_signal(dir / "direct", direct);
  if (truth) {
    write_signal(dir / "original", *truth);
    metrics["direct"] = quality(*truth, direct);
  }
  if (descriptor.at("type") == "block_average" && shape) {
    const auto block = descriptor.value("block", std::size_t{4});
    const ImageShape low{shape->height / block, shape->width / block, shape->channels};
    write_signal(dir / "lowres", SignalVector(xc / static_cast<double>(block), low));
  }

  std::vector<ChainOutput> chains(cfg.num_samples);
  parallel_for(cfg.num_samples, cfg.threads, [&](std::size_t i) {
    auto denoiser = factory();
    const SamplerParams p = params_for_seed(cfg.params, i);
    RngStream rng(p.seed);
    try {
      chains[i] = finish_chain(dir, i, sample_conditional(*denoiser, measurement, xc, p, rng), truth);
    } catch (const SamplerAborted& e) {
      chains[i] = aborted_chain(dir, i, e);
    }
  });
  return collect(std::move(metrics), chains, dir);
}

RunOutcome run_demo(const RunConfig& cfg) {
  const Demo2dResult result = run_demo2d(cfg.demo2d);
  const fs::path& dir = cfg.output_dir;
  std::string atoms = "x,y\n";
  for (Eigen::Index k = 0; k < result.prior.atoms().cols(); ++k) {
    atoms += fmt::format("{},{}\n", result.prior.atoms()(0, k), result.prior.atoms()(1, k));
  }
  write_text(dir / "atoms.csv", atoms);
  std::string paths = "point,t,x,y\n";
  bool all_converged = true;
  for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
    const auto& traj = result.trajectories[i];
    all_converged = all_converged && traj.converged;
    for (std::size_t t = 0; t < traj.path.size(); ++t) {
      paths += fmt::format("{},{},{},{}\n", i, t, traj.path[t].x(), traj.path[t].y());
    }
  }
  write_text(dir / "trajectories.csv", paths);
  json metrics = result.summary();
  metrics["task"] = "demo2d";
  metrics["config"] = cfg.to_json();
  metrics["all_converged"] = all_converged;
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  return {all_converged ? kExitSuccess : kExitNotConverged, std::move(metrics)};
}

RunOutcome run_diagnose(const RunConfig& cfg, const DenoiserFactory& factory) {
  const ImageShape shape = *cfg.shape;
  json reports = json::array();
  std::string csv = "beta,iterations,mean_observed_ratio,mean_expected_ratio,faster_than_expected,converged\n";
  bool all_converged = true;
  for (double beta : cfg.diagnose_betas) {
    SamplerParams p = cfg.params;
    p.beta = beta;
    auto denoiser = factory();
    RngStream rng(p.seed);
    const SampleResult r = sample_prior(*denoiser, shape, p, rng);
    const ConvergenceReport report = convergence_report(r.trace, beta, p.h0);
    write_text(cfg.output_dir / fmt::format("trace_beta_{}.csv", beta), trace_csv(r.trace));
    json j = report.to_json();
    j["converged"] = r.converged;
    reports.push_back(j);
    csv += fmt::format("{},{},{},{},{},{}\n", beta, report.iterations, report.mean_observed_ratio,
                       report.mean_expected_ratio, report.faster_than_expected ? 1 : 0, r.converged ? 1 : 0);
    all_converged = all_converged && r.converged;
  }
  write_text(cfg.output_dir / "diagnose.csv", csv);
  json metrics{{"task", "diagnose"}, {"config", cfg.to_json()}, {"reports", reports}, {"all_converged", all_converged}};
  write_text(cfg.output_dir / "metrics.json", metrics.dump(2) + "\n");
  return {all_converged ? kExitSuccess : kExitNotConverged, std::move(metrics)};
}

}  // namespace

Task task_from_string(const std::string& name) {
  for (const auto& [task, n] : kTaskNames) {
    if (name == n) return task;
  }
  throw ConfigError(fmt::format("unknown task '{}'", name));
}

std::string to_string(Task task) {
  for (const auto& [t, n] : kTaskNames) {
    if (t == task) return n;
  }
  return "unknown";
}

bool is_inverse_task(Task task) {
  return task == Task::kInpaint || task == Task::kPixels || task == Task::kSr || task == Task::kDeblur ||
         task == Task::kCs;
}

json default_measurement(Task task) {
  switch (task) {
    case Task::kInpaint: return {{"type", "inpaint_box"}};
    case Task::kPixels: return {{"type", "random_mask"}, {"fraction", 0.1}, {"seed", 0}};
    case Task::kSr: return {{"type", "block_average"}, {"block", 4}};
    case Task::kDeblur: return {{"type", "fourier_lowpass"}, {"fraction", 0.1}};
    case Task::kCs: return {{"type", "random_orthonormal"}, {"fraction", 0.1}, {"seed", 0}};
    default: return {{"type", "empty"}};
  }
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
  if (j.contains("params")) {
    const json& p = j.at("params");
    c.params.sigma0 = NoiseLevel(p.value("sigma0", c.params.sigma0.value()));
    c.params.sigmaL = NoiseLevel(p.value("sigmaL", c.params.sigmaL.value()));
    c.params.h0 = p.value("h0", c.params.h0);
    c.params.beta = p.value("beta", c.params.beta);
    c.params.max_iters = p.value("max_iters", c.params.max_iters);
    c.params.seed = p.value("seed", c.params.seed);
    c.params.init_mean = p.value("init_mean", c.params.init_mean);
  }
  if (j.contains("shape") && !j.at("shape").is_null()) c.shape = parse_shape(j.at("shape"));
  if (j.contains("measurement") && !j.at("measurement").is_null()) c.measurement = j.at("measurement");
  if (j.contains("denoiser")) c.denoiser = j.at("denoiser");
  if (j.contains("input") && !j.at("input").is_null()) c.input = j.at("input").get<std::string>();
  c.truth_atom = j.value("truth_atom", c.truth_atom);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  c.num_samples = j.value("num_samples", c.num_samples);
  c.threads = j.value("threads", c.threads);
  if (j.contains("demo2d")) c.demo2d = Demo2dConfig::from_json(j.at("demo2d"));
  if (j.contains("diagnose_betas")) c.diagnose_betas = j.at("diagnose_betas").get<std::vector<double>>();
  return c;
}

json RunConfig::to_json() const {
  json j{{"task", to_string(task)},
         {"params",
          {{"sigma0", params.sigma0.value()}, {"sigmaL", params.sigmaL.value()}, {"h0", params.h0},
           {"beta", params.beta}, {"max_iters", params.max_iters}, {"seed", params.seed},
           {"init_mean", params.init_mean}}},
         {"denoiser", denoiser},
         {"truth_atom", truth_atom},
         {"output_dir", output_dir.string()},
         {"num_samples", num_samples},
         {"threads", threads}};
  j["shape"] = shape ? shape_json(*shape) : json(nullptr);
  j["measurement"] = measurement ? *measurement : json(nullptr);
  j["input"] = input ? json(input->string()) : json(nullptr);
  if (task == Task::kDemo2d) j["demo2d"] = demo2d.to_json();
  if (task == Task::kDiagnose) j["diagnose_betas"] = diagnose_betas;
  return j;
}

void RunConfig::validate() const {
  if (task != Task::kDemo2d) {
    try {
      params.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }
  if (num_samples < 1) throw ConfigError("num_samples must be at least 1");
  if (input && !fs::exists(*input)) throw ConfigError(fmt::format("input file '{}' does not exist", input->string()));
  if ((task == Task::kSample || task == Task::kDiagnose) && !shape) {
    throw ConfigError(fmt::format("task '{}' needs a signal shape", to_string(task)));
  }
  if (task == Task::kDiagnose && diagnose_betas.empty()) throw ConfigError("diagnose needs at least one beta");
  if (!denoiser.is_object() || !denoiser.contains("type")) throw ConfigError("denoiser selector needs a type");
}

DenoiserFactory make_denoiser_factory(const json& selector, std::shared_ptr<const AnalyticPrior>* prior_out) {
  const std::string type = selector.at("type").get<std::string>();
  if (type == "identity") {
    return [] { return std::make_unique<IdentityDenoiser>(); };
  }
  if (type == "analytic") {
    std::shared_ptr<const AnalyticPrior> prior = prior_from_json(selector.at("prior"));
    if (prior_out) *prior_out = prior;
    std::optional<NoiseLevel> fixed;
    if (selector.contains("sigma")) fixed = NoiseLevel(selector.at("sigma").get<double>());
    return [prior, fixed] { return std::make_unique<OracleDenoiser>(prior, fixed); };
  }
  if (type == "bridge") {
    const BridgeConfig bridge = BridgeConfig::from_json(selector);
    return [bridge] { return std::make_unique<BridgeDenoiser>(bridge); };
  }
  throw ConfigError(fmt::format("unknown denoiser type '{}'", type));
}

RunOutcome run(const RunConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);
  if (config.task == Task::kDemo2d) return run_demo(config);

  std::shared_ptr<const AnalyticPrior> prior;
  const DenoiserFactory factory = make_denoiser_factory(config.denoiser, &prior);
  if (prior && config.shape && prior->dim() != config.shape->size()) {
    throw ConfigError(fmt::format("prior dimension {} does not match shape {}", prior->dim(),
                                  to_string(*config.shape)));
  }
  switch (config.task) {
    case Task::kSample: return run_sample(config, factory);
    case Task::kDiagnose: return run_diagnose(config, factory);
    default: return run_inverse(config, factory, prior);
  }
}

}  // namespace uis
