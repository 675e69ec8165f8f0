#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uis/core.hpp"

namespace uis {

struct BridgeConfig {
  // argv of the child process (argv[0] is looked up on PATH). Ignored when
  // socket_path is set.
  std::vector<std::string> command;
  // Connect to a listening AF_UNIX stream socket instead of spawning a child.
  std::optional<std::string> socket_path;
  double timeout_seconds = 30.0;
  // How many times a dead child is relaunched over the bridge's lifetime.
  int max_restarts = 1;
  // Round-trip a 1x1x1 probe frame right after connecting.
  bool handshake = true;

  void validate() const;
  static BridgeConfig from_json(const nlohmann::json& j);
};

/// Denoiser served by an external process over the UIS1 frame protocol.
///
/// Blind by construction: the noise-level hint is never transmitted. One
/// request is in flight at a time. Values cross the wire as float32.
class BridgeDenoiser final : public Denoiser {
 public:
  explicit BridgeDenoiser(BridgeConfig config);
  ~BridgeDenoiser() override;

  BridgeDenoiser(const BridgeDenoiser&) = delete;
  BridgeDenoiser& operator=(const BridgeDenoiser&) = delete;

  SignalVector denoise(const SignalVector& y, std::optional<NoiseLevel> sigma_hint) override;

  const BridgeConfig& config() const { return config_; }
  int restarts() const { return restarts_; }

 private:
  class Connection;

  void connect();
  SignalVector round_trip(const SignalVector& y);

  BridgeConfig config_;
  std::unique_ptr<Connection> conn_;
  int restarts_ = 0;
};

}  // namespace uis
