#include "uis/bridge.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <pthread.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "uis/wire.hpp"

extern char** environ;

namespace uis {
namespace {

using Clock = std::chrono::steady_clock;

// The peer went away (EOF, EPIPE, reset). Triggers the restart policy.
struct ConnectionLost : Error {
  using Error::Error;
};

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

void wait_ready(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return;
    if (rc == 0) throw BridgeTimeout("external denoiser did not respond in time");
    if (errno != EINTR) throw BridgeProcessError(fmt::format("poll failed: {}", std::strerror(errno)));
  }
}

// Writes with SIGPIPE blocked so a dead reader surfaces as EPIPE.
void write_all(int fd, std::span<const std::byte> bytes, Clock::time_point deadline) {
  sigset_t pipe_set, old_set;
  sigemptyset(&pipe_set);
  sigaddset(&pipe_set, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);
  bool lost = false;
  std::size_t done = 0;
  try {
    while (done < bytes.size()) {
      wait_ready(fd, POLLOUT, deadline);
      const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
      if (n > 0) {
        done += static_cast<std::size_t>(n);
      } else if (n < 0 && errno != EINTR && errno != EAGAIN) {
        lost = true;
        break;
      }
    }
  } catch (...) {
    pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
    throw;
  }
  if (lost) {
    const timespec zero{0, 0};
    sigtimedwait(&pipe_set, nullptr, &zero);
  }
  pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
  if (lost) throw ConnectionLost("external denoiser closed its input");
}

void read_exact(int fd, std::span<std::byte> out, Clock::time_point deadline) {
  std::size_t done = 0;
  while (done < out.size()) {
    wait_ready(fd, POLLIN, deadline);
    const ssize_t n = ::read(fd, out.data() + done, out.size() - done);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
    } else if (n == 0) {
      throw ConnectionLost("external denoiser closed its output");
    } else if (errno != EINTR && errno != EAGAIN) {
      throw ConnectionLost(fmt::format("read from external denoiser failed: {}", std::strerror(errno)));
    }
  }
}

}  // namespace

void BridgeConfig::validate() const {
  if (!(timeout_seconds > 0.0)) throw ArgumentError("bridge timeout must be positive");
  if (max_restarts < 0) throw ArgumentError("max_restarts must be nonnegative");
  if (!socket_path && command.empty()) throw ArgumentError("bridge needs a command or a socket path");
}

BridgeConfig BridgeConfig::from_json(const nlohmann::json& j) {
  BridgeConfig cfg;
  if (j.contains("command")) {
    if (j.at("command").is_string()) {
      cfg.command = {"/bin/sh", "-c", j.at("command").get<std::string>()};
    } else {
      cfg.command = j.at("command").get<std::vector<std::string>>();
    }
  }
  if (j.contains("socket")) cfg.socket_path = j.at("socket").get<std::string>();
  cfg.timeout_seconds = j.value("timeout", cfg.timeout_seconds);
  cfg.max_restarts = j.value("max_restarts", cfg.max_restarts);
  cfg.handshake = j.value("handshake", cfg.handshake);
  cfg.validate();
  return cfg;
}

class BridgeDenoiser::Connection {
 public:
  static std::unique_ptr<Connection> spawn(const std::vector<std::string>& command) {
    int to_child[2], from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw BridgeProcessError("pipe2 failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw BridgeProcessError("pipe2 failed");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

    std::vector<char*> argv;
    for (const std::string& a : command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      throw BridgeProcessError(fmt::format("cannot launch '{}': {}", command.front(), std::strerror(rc)));
    }
    return std::unique_ptr<Connection>(new Connection(to_child[1], from_child[0], pid));
  }

  static std::unique_ptr<Connection> dial(const std::string& path) {
    const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw BridgeProcessError("socket() failed");
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof(addr.sun_path)) {
      ::close(fd);
      throw ArgumentError("socket path too long");
    }
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      const int err = errno;
      ::close(fd);
      throw BridgeProcessError(fmt::format("cannot connect to '{}': {}", path, std::strerror(err)));
    }
    const int write_fd = ::dup(fd);
    return std::unique_ptr<Connection>(new Connection(write_fd, fd, -1));
  }

  ~Connection() {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) reap();
  }

  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  void send(std::span<const std::byte> bytes, Clock::time_point deadline) { write_all(write_fd_, bytes, deadline); }
  void receive(std::span<std::byte> out, Clock::time_point deadline) { read_exact(read_fd_, out, deadline); }

  // Forces the child down; used when its stream state is unknown.
  void kill() {
    if (pid_ > 0) ::kill(pid_, SIGKILL);
  }

 private:
  Connection(int write_fd, int read_fd, pid_t pid) : write_fd_(write_fd), read_fd_(read_fd), pid_(pid) {}

  // Closing stdin asks the child to exit; escalate after a short grace period.
  void reap() {
    for (int i = 0; i < 50; ++i) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || (r < 0 && errno == ECHILD)) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }

  int write_fd_;
  int read_fd_;
  pid_t pid_;
};

BridgeDenoiser::BridgeDenoiser(BridgeConfig config) : config_(std::move(config)) {
  config_.validate();
  try {
    connect();
  } catch (const ConnectionLost& e) {
    throw BridgeProcessError(fmt::format("external denoiser failed the handshake: {}", e.what()));
  }
}

BridgeDenoiser::~BridgeDenoiser() = default;

void BridgeDenoiser::connect() {
  conn_ = config_.socket_path ? Connection::dial(*config_.socket_path) : Connection::spawn(config_.command);
  if (config_.handshake) {
    const SignalVector probe = SignalVector::constant(ImageShape{1, 1, 1}, 0.5);
    round_trip(probe);
  }
}

SignalVector BridgeDenoiser::round_trip(const SignalVector& y) {
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(config_.timeout_seconds));
  const std::vector<std::byte> request = wire::encode_frame(y);
  const wire::FrameHeader sent = wire::header_for(y);
  try {
    conn_->send(request, deadline);
    std::vector<std::byte> header(wire::kHeaderBytes);
    conn_->receive(header, deadline);
    const wire::FrameHeader got = wire::decode_header(header);
    if (!(got == sent)) {
      throw ProtocolError(fmt::format("response shape {}x{}x{} does not match request {}x{}x{}", got.height,
                                      got.width, got.channels, sent.height, sent.width, sent.channels));
    }
    std::vector<std::byte> payload(got.payload_bytes());
    conn_->receive(payload, deadline);
    return y.with_data(wire::decode_payload(got, payload).data());
  } catch (const ConnectionLost&) {
    throw;
  } catch (const Error&) {
    // Stream position is unknown after a timeout or a malformed frame.
    conn_->kill();
    conn_.reset();
    throw;
  }
}

SignalVector BridgeDenoiser::denoise(const SignalVector& y, std::optional<NoiseLevel>) {
  for (;;) {
    try {
      if (!conn_) {
        if (restarts_ >= config_.max_restarts) throw BridgeProcessError("external denoiser is not running");
        ++restarts_;
        connect();
      }
      return round_trip(y);
    } catch (const ConnectionLost& e) {
      conn_.reset();
      if (restarts_ >= config_.max_restarts) {
        throw BridgeProcessError(fmt::format("external denoiser failed after {} restart(s): {}", restarts_,
                                             e.what()));
      }
    }
  }
}

}  // namespace uis
