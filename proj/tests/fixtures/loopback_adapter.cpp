// Test double for an external denoiser. Speaks the frame protocol on
// stdin/stdout (or one accepted AF_UNIX connection with --socket PATH) and
// answers according to a mode:
//
//   identity                 echo the payload
//   wiener MU C SIGMA        x = MU + C / (C + SIGMA^2) (y - MU), per value
//   nan                      answer with a NaN payload
//   exit-after N             serve N frames, then exit
//   sleep MS                 sleep MS milliseconds before every answer
//   sleep-after N MS         serve N frames promptly, then sleep before answers
//   bad-magic                answer with a corrupted magic
//   wrong-shape              answer with the width and height swapped plus one
//   truncate                 write half an answer, then exit
//
// Frames are encoded by hand here, independent of the library codec.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

namespace {

int in_fd = STDIN_FILENO;
int out_fd = STDOUT_FILENO;

bool read_exact(void* dst, size_t n) {
  auto* p = static_cast<unsigned char*>(dst);
  while (n > 0) {
    const ssize_t r = ::read(in_fd, p, n);
    if (r <= 0) return false;
    p += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

void write_all(const void* src, size_t n) {
  const auto* p = static_cast<const unsigned char*>(src);
  while (n > 0) {
    const ssize_t w = ::write(out_fd, p, n);
    if (w <= 0) std::exit(3);
    p += w;
    n -= static_cast<size_t>(w);
  }
}

uint32_t get_u32(const unsigned char* b) {
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void put_u32(unsigned char* b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
}

float get_f32(const unsigned char* b) {
  const uint32_t bits = get_u32(b);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

void put_f32(unsigned char* b, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(b, bits);
}

int listen_once(const char* path) {
  const int srv = ::socket(AF_UNIX, SOCK_STREAM, 0);
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::strncpy(addr.sun_path, path, sizeof(addr.sun_path) - 1);
  ::unlink(path);
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(srv, 1) != 0) std::exit(4);
  const int fd = ::accept(srv, nullptr, nullptr);
  ::close(srv);
  ::unlink(path);
  return fd;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() >= 2 && args[0] == "--socket") {
    const int fd = listen_once(args[1].c_str());
    in_fd = out_fd = fd;
    args.erase(args.begin(), args.begin() + 2);
  }
  if (args.empty()) {
    std::fprintf(stderr, "usage: loopback_adapter [--socket PATH] MODE [ARGS]\n");
    return 2;
  }
  const std::string mode = args[0];
  auto num = [&](size_t i) { return i < args.size() ? std::atof(args[i].c_str()) : 0.0; };

  long served = 0;
  for (;;) {
    unsigned char header[16];
    if (!read_exact(header, 16)) return 0;
    if (std::memcmp(header, "UIS1", 4) != 0) return 5;
    const uint32_t h = get_u32(header + 4), w = get_u32(header + 8), c = get_u32(header + 12);
    const size_t count = size_t(h) * w * c;
    std::vector<unsigned char> payload(count * 4);
    if (!read_exact(payload.data(), payload.size())) return 6;

    if (mode == "exit-after" && served >= static_cast<long>(num(1))) return 0;
    if (mode == "sleep") std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(num(1))));
    if (mode == "sleep-after" && served >= static_cast<long>(num(1))) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(num(2))));
    }

    for (size_t i = 0; i < count; ++i) {
      float v = get_f32(payload.data() + 4 * i);
      if (mode == "wiener") {
        const double mu = num(1), cvar = num(2), sigma = num(3);
        v = static_cast<float>(mu + cvar / (cvar + sigma * sigma) * (v - mu));
      } else if (mode == "nan") {
        v = std::numeric_limits<float>::quiet_NaN();
      }
      put_f32(payload.data() + 4 * i, v);
    }
    if (mode == "bad-magic") header[0] = 'X';
    if (mode == "wrong-shape") {
      put_u32(header + 4, w + 1);
      put_u32(header + 8, h);
    }
    if (mode == "truncate") {
      write_all(header, 16);
      write_all(payload.data(), payload.size() / 2);
      return 0;
    }
    write_all(header, 16);
    write_all(payload.data(), payload.size());
    ++served;
  }
}
