// uis: command-line front end for the universal inverse sampler.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uis/errors.hpp"
#include "uis/run.hpp"

namespace {

using nlohmann::json;

// A JSON argument is either an inline document or @path to a file.
json parse_json_arg(const std::string& text, const char* what) {
  std::string body = text;
  if (!text.empty() && text.front() == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw uis::ConfigError(fmt::format("cannot read {} file '{}'", what, text.substr(1)));
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw uis::ConfigError(fmt::format("{} is not valid JSON: {}", what, e.what()));
  }
}

std::optional<uis::ImageShape> parse_shape(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<std::size_t> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      dims.push_back(std::stoul(part));
    } catch (const std::exception&) {
      throw uis::ConfigError(fmt::format("bad shape '{}', expected HxW or HxWxC", text));
    }
  }
  if (dims.size() < 2 || dims.size() > 3) throw uis::ConfigError(fmt::format("bad shape '{}', expected HxW or HxWxC", text));
  return uis::ImageShape{dims[0], dims[1], dims.size() == 3 ? dims[2] : 1};
}

struct Flags {
  double sigma0 = 1.0;
  double sigmaL = 0.01;
  double h0 = 0.01;
  double beta = 0.01;
  std::size_t max_iters = 10000;
  std::uint64_t seed = 0;
  double init_mean = 0.5;
  std::string shape;
  std::string measurement;
  std::string denoiser;
  std::string prior;
  std::string bridge;
  double bridge_timeout = 30.0;
  double fixed_sigma = -1.0;
  std::string input;
  std::size_t truth_atom = 0;
  std::string output = "uis_out";
  std::size_t num_samples = 1;
  std::size_t threads = 1;
  std::vector<double> betas = {1.0, 0.5, 0.1};
  std::string config;
  std::string save_config;
  // demo2d
  std::string curve;
  std::size_t atoms = 50;
  std::size_t points = 50;
  double start_sigma = 0.25;
};

void add_sampler_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--sigma0", f.sigma0, "Initial noise level")->capture_default_str();
  cmd->add_option("--sigmaL", f.sigmaL, "Stopping noise level")->capture_default_str();
  cmd->add_option("--h0", f.h0, "Initial step size in (0, 1]")->capture_default_str();
  cmd->add_option("--beta", f.beta, "Noise injection control in (0, 1]; 1 means no injected noise")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Base seed; sample i uses seed+i")->capture_default_str();
  cmd->add_option("--init-mean", f.init_mean, "Mean intensity of the initial draw")->capture_default_str();
}

void add_denoiser_flags(CLI::App* cmd, Flags& f) {
  auto* group = cmd->add_option_group("denoiser", "Denoiser selection (default: identity)");
  group->add_option("--denoiser", f.denoiser, "Denoiser selector JSON or @file");
  group->add_option("--prior", f.prior, "Analytic prior JSON or @file; its MMSE denoiser is used");
  group->add_option("--bridge", f.bridge, "Shell command of an external denoiser speaking the UIS1 frame protocol");
  group->require_option(0, 1);
  cmd->add_option("--denoiser-sigma", f.fixed_sigma, "Give the analytic denoiser this fixed noise level instead of the sampler's estimate");
  cmd->add_option("--bridge-timeout", f.bridge_timeout, "Seconds per bridge request")->capture_default_str();
}

void add_output_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-o,--output", f.output, "Output directory")->capture_default_str();
  cmd->add_option("--save-config", f.save_config, "Also write the resolved config JSON to this path");
}

uis::RunConfig config_from_flags(uis::Task task, const Flags& f) {
  uis::RunConfig c;
  c.task = task;
  c.params.sigma0 = uis::NoiseLevel(f.sigma0);
  c.params.sigmaL = uis::NoiseLevel(f.sigmaL);
  c.params.h0 = f.h0;
  c.params.beta = f.beta;
  c.params.max_iters = f.max_iters;
  c.params.seed = f.seed;
  c.params.init_mean = f.init_mean;
  c.shape = parse_shape(f.shape);
  if (!f.measurement.empty()) c.measurement = parse_json_arg(f.measurement, "measurement");
  if (!f.denoiser.empty()) {
    c.denoiser = parse_json_arg(f.denoiser, "denoiser");
  } else if (!f.prior.empty()) {
    c.denoiser = {{"type", "analytic"}, {"prior", parse_json_arg(f.prior, "prior")}};
  } else if (!f.bridge.empty()) {
    c.denoiser = {{"type", "bridge"}, {"command", f.bridge}, {"timeout", f.bridge_timeout}};
  }
  if (f.fixed_sigma >= 0.0 && c.denoiser.value("type", "") == "analytic") c.denoiser["sigma"] = f.fixed_sigma;
  if (!f.input.empty()) c.input = f.input;
  c.truth_atom = f.truth_atom;
  c.output_dir = f.output;
  c.num_samples = f.num_samples;
  c.threads = f.threads;
  c.diagnose_betas = f.betas;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal inverse sampler: draws samples from the prior implicit in a denoiser and solves "
               "linear inverse problems by constrained sampling."};
  app.require_subcommand(1);
  Flags f;

  auto* sample = app.add_subcommand("sample", "Draw unconditional samples");
  add_sampler_flags(sample, f);
  add_denoiser_flags(sample, f);
  add_output_flags(sample, f);
  sample->add_option("--shape", f.shape, "Signal shape HxW or HxWxC")->required();
  sample->add_option("-n,--num-samples", f.num_samples, "Number of chains")->capture_default_str();
  sample->add_option("-j,--threads", f.threads, "Chains run in parallel")->capture_default_str();

  const std::map<std::string, std::pair<uis::Task, std::string>> inverse = {
      {"inpaint", {uis::Task::kInpaint, "Fill a missing rectangle (default: centered half-size box)"}},
      {"pixels", {uis::Task::kPixels, "Recover from a random subset of pixels (default: 10%)"}},
      {"sr", {uis::Task::kSr,
              "Super-resolution from block averages (default: 4x4 blocks). Block rows are unit-normalized "
              "with entries 1/B, so each measured value is B times the block mean; lowres.png divides by B."}},
      {"deblur", {uis::Task::kDeblur, "Recover from the lowest spatial frequencies (default: 10%)"}},
      {"cs", {uis::Task::kCs, "Compressive sensing with a random orthonormal basis (default: 10%)"}},
  };
  std::map<std::string, CLI::App*> inverse_cmds;
  for (const auto& [name, entry] : inverse) {
    auto* cmd = app.add_subcommand(name, entry.second);
    add_sampler_flags(cmd, f);
    add_denoiser_flags(cmd, f);
    add_output_flags(cmd, f);
    cmd->add_option("-i,--input", f.input, "Ground-truth image (.png or raw float32)");
    cmd->add_option("--shape", f.shape, "Signal shape HxW or HxWxC when no input image is given");
    cmd->add_option("--truth-atom", f.truth_atom, "Use this atom of an atom prior as the ground truth")->capture_default_str();
    cmd->add_option("--measurement", f.measurement, "Measurement descriptor JSON or @file")->capture_default_str();
    cmd->add_option("-n,--num-samples", f.num_samples, "Restorations from different random initializations")->capture_default_str();
    cmd->add_option("-j,--threads", f.threads, "Chains run in parallel")->capture_default_str();
    inverse_cmds[name] = cmd;
  }

  Flags demo;
  demo.h0 = 0.05;
  demo.beta = 1.0;
  auto* demo2d = app.add_subcommand("demo2d", "Two-dimensional curved-manifold demonstration");
  demo2d->add_option("--curve", demo.curve, "Curve JSON or @file (default: one sine cycle)");
  demo2d->add_option("--atoms", demo.atoms, "Prior atoms sampled along the curve")->capture_default_str();
  demo2d->add_option("--points", demo.points, "Trajectories")->capture_default_str();
  demo2d->add_option("--start-sigma", demo.start_sigma, "Noise of the starting points and initial sigma")->capture_default_str();
  demo2d->add_option("--sigmaL", demo.sigmaL, "Stopping noise level")->capture_default_str();
  demo2d->add_option("--h0", demo.h0, "Initial step size")->capture_default_str();
  demo2d->add_option("--beta", demo.beta, "Noise injection control")->capture_default_str();
  demo2d->add_option("--max-iters", demo.max_iters, "Iteration cap")->capture_default_str();
  demo2d->add_option("--seed", demo.seed, "Seed")->capture_default_str();
  add_output_flags(demo2d, demo);

  Flags diag = f;
  diag.beta = 1.0;
  auto* diagnose = app.add_subcommand("diagnose", "Compare observed and expected noise decay for several betas");
  add_sampler_flags(diagnose, diag);
  add_denoiser_flags(diagnose, diag);
  add_output_flags(diagnose, diag);
  diagnose->add_option("--shape", diag.shape, "Signal shape HxW or HxWxC")->required();
  diagnose->add_option("--betas", diag.betas, "Betas to compare")->delimiter(',')->capture_default_str();

  std::string config_path;
  std::string config_output;
  auto* run_cmd = app.add_subcommand("run", "Execute a JSON config file");
  run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", config_output, "Override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    uis::RunConfig config;
    std::string save_path;
    if (*run_cmd) {
      config = uis::RunConfig::from_json(parse_json_arg("@" + config_path, "config"));
      if (!config_output.empty()) config.output_dir = config_output;
    } else if (*sample) {
      config = config_from_flags(uis::Task::kSample, f);
      save_path = f.save_config;
    } else if (*demo2d) {
      config.task = uis::Task::kDemo2d;
      if (!demo.curve.empty()) config.demo2d.curve = uis::Curve::from_json(parse_json_arg(demo.curve, "curve"));
      config.demo2d.prior_atoms = demo.atoms;
      config.demo2d.points = demo.points;
      config.demo2d.start_sigma = demo.start_sigma;
      config.demo2d.sigmaL = demo.sigmaL;
      config.demo2d.h0 = demo.h0;
      config.demo2d.beta = demo.beta;
      config.demo2d.max_iters = demo.max_iters;
      config.demo2d.seed = demo.seed;
      config.output_dir = demo.output;
      save_path = demo.save_config;
    } else if (*diagnose) {
      config = config_from_flags(uis::Task::kDiagnose, diag);
      save_path = diag.save_config;
    } else {
      for (const auto& [name, cmd] : inverse_cmds) {
        if (*cmd) {
          config = config_from_flags(inverse.at(name).first, f);
          save_path = f.save_config;
        }
      }
    }

    const uis::RunOutcome outcome = uis::run(config);
    if (!save_path.empty()) {
      std::ofstream out(save_path);
      out << config.to_json().dump(2) << "\n";
    }
    if (outcome.exit_code == uis::kExitNotConverged) {
      std::cerr << "uis: warning: at least one chain stopped at max_iters before reaching sigmaL\n";
    } else if (outcome.exit_code == uis::kExitFailure) {
      std::cerr << "uis: error: at least one chain aborted; see metrics.json\n";
    }
    std::cout << fmt::format("{} -> {}\n", uis::to_string(config.task), config.output_dir.string());
    return outcome.exit_code;
  } catch (const uis::Error& e) {
    std::cerr << "uis: error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    std::cerr << "uis: error: malformed config: " << e.what() << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "uis: error: " << e.what() << "\n";
  }
  return uis::kExitFailure;
}
