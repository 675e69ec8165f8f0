#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "uis/core.hpp"

namespace uis::wire {

// Frame layout, all little-endian:
//   "UIS1" | uint32 height | uint32 width | uint32 channels | float32 payload
// The payload is planar (channel-major, row-major), height*width*channels values.
inline constexpr std::string_view kMagic = "UIS1";
inline constexpr std::size_t kHeaderBytes = 16;

struct FrameHeader {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;

  std::size_t value_count() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  std::size_t payload_bytes() const { return value_count() * 4; }

  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

// Shape sent for a signal; shape-less signals travel as 1 x N x 1.
FrameHeader header_for(const SignalVector& signal);

// Encodes the signal, narrowing each value to float32.
std::vector<std::byte> encode_frame(const SignalVector& signal);

// Parses the 16-byte header. Throws ProtocolError on bad magic.
FrameHeader decode_header(std::span<const std::byte> bytes);

// Decodes a complete frame. Throws ProtocolError on bad magic, wrong length
// or non-finite payload values.
SignalVector decode_frame(std::span<const std::byte> bytes);

// Decodes a payload for an already-parsed header.
SignalVector decode_payload(const FrameHeader& header, std::span<const std::byte> payload);

}  // namespace uis::wire
