#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uis/core.hpp"
#include "uis/demo2d.hpp"
#include "uis/priors.hpp"
#include "uis/schedules.hpp"

namespace uis {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;
// Artifacts were written but at least one chain hit max_iters.
inline constexpr int kExitNotConverged = 3;

enum class Task { kSample, kInpaint, kPixels, kSr, kDeblur, kCs, kDemo2d, kDiagnose };

Task task_from_string(const std::string& name);
std::string to_string(Task task);
bool is_inverse_task(Task task);

/// Everything needed to reproduce a run. Serializes to the JSON config format.
struct RunConfig {
  Task task = Task::kSample;
  SamplerParams params;
  std::optional<ImageShape> shape;
  // Measurement descriptor; when absent the task's default operator is used.
  std::optional<nlohmann::json> measurement;
  // {"type": "identity"} | {"type": "analytic", "prior": {...}, "sigma": s?}
  // | {"type": "bridge", "command": ..., "timeout": s, "max_restarts": k}
  nlohmann::json denoiser = {{"type", "identity"}};
  std::optional<std::filesystem::path> input;
  // Ground-truth atom of an atom prior when no input image is given.
  std::size_t truth_atom = 0;
  std::filesystem::path output_dir = "uis_out";
  std::size_t num_samples = 1;
  std::size_t threads = 1;
  Demo2dConfig demo2d;
  std::vector<double> diagnose_betas = {1.0, 0.5, 0.1};

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // Throws ConfigError when a task-required field is missing or a file is absent.
  void validate() const;
};

/// Default measurement descriptor of an inverse task.
nlohmann::json default_measurement(Task task);

using DenoiserFactory = std::function<std::unique_ptr<Denoiser>()>;

/// Builds a per-chain denoiser factory. For analytic denoisers the prior is
/// also returned.
DenoiserFactory make_denoiser_factory(const nlohmann::json& selector,
                                      std::shared_ptr<const AnalyticPrior>* prior_out = nullptr);

struct RunOutcome {
  int exit_code = kExitSuccess;
  nlohmann::json metrics;
};

/// Executes the task and writes its artifacts under config.output_dir:
/// sample_<i>.{png,raw}, trace_<i>.csv, metrics.json, and for inverse tasks
/// original.png and direct.png (M M^T x).
RunOutcome run(const RunConfig& config);

}  // namespace uis
