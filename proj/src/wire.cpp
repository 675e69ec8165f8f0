#include "uis/wire.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace uis::wire {
namespace {

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::byte> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(in[offset + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::uint32_t narrow_dim(std::size_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("dimension does not fit the wire header");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

FrameHeader header_for(const SignalVector& signal) {
  if (signal.shape()) {
    const ImageShape& s = *signal.shape();
    return {narrow_dim(s.height), narrow_dim(s.width), narrow_dim(s.channels)};
  }
  return {1, narrow_dim(signal.size()), 1};
}

std::vector<std::byte> encode_frame(const SignalVector& signal) {
  const FrameHeader h = header_for(signal);
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + h.payload_bytes());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, h.height);
  put_u32(out, h.width);
  put_u32(out, h.channels);
  for (std::size_t i = 0; i < signal.size(); ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(signal[i])));
  }
  return out;
}

FrameHeader decode_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderBytes) throw ProtocolError("frame shorter than its header");
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (bytes[i] != static_cast<std::byte>(kMagic[i])) throw ProtocolError("bad frame magic");
  }
  return {get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12)};
}

SignalVector decode_payload(const FrameHeader& header, std::span<const std::byte> payload) {
  if (payload.size() != header.payload_bytes()) {
    throw ProtocolError(fmt::format("payload has {} bytes, header announces {}", payload.size(),
                                    header.payload_bytes()));
  }
  const std::size_t n = header.value_count();
  Eigen::VectorXd data(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const float v = std::bit_cast<float>(get_u32(payload, 4 * i));
    if (!std::isfinite(v)) throw ProtocolError(fmt::format("non-finite value at payload index {}", i));
    data[static_cast<Eigen::Index>(i)] = v;
  }
  return SignalVector(std::move(data), ImageShape{header.height, header.width, header.channels});
}

SignalVector decode_frame(std::span<const std::byte> bytes) {
  const FrameHeader h = decode_header(bytes);
  return decode_payload(h, bytes.subspan(kHeaderBytes));
}

}  // namespace uis::wire
