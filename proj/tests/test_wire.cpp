#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include <gtest/gtest.h>

#include "uis/wire.hpp"

using namespace uis;

namespace {

std::vector<std::byte> load(const std::string& name) {
  std::ifstream in(std::filesystem::path(UIS_TEST_DATA) / "frames" / name, std::ios::binary);
  EXPECT_TRUE(in) << name;
  std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(chars.size());
  std::memcpy(out.data(), chars.data(), chars.size());
  return out;
}

std::vector<std::byte> bytes(std::initializer_list<int> v) {
  std::vector<std::byte> out;
  for (int b : v) out.push_back(static_cast<std::byte>(b));
  return out;
}

}  // namespace

TEST(Wire, PairFrameBytes) {
  const SignalVector s(Eigen::Vector2d(2.0, 0.0));
  const auto want = bytes({'U', 'I', 'S', '1', 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0,
                           0x00, 0x00, 0x00, 0x40, 0x00, 0x00, 0x00, 0x00});
  EXPECT_EQ(wire::encode_frame(s), want);
  EXPECT_EQ(wire::encode_frame(s), load("pair_2_0.bin"));
}

TEST(Wire, GoldenCorpus) {
  struct Case {
    const char* file;
    ImageShape shape;
    std::vector<double> values;
  };
  const std::vector<Case> cases = {
      {"pair_2_0.bin", {1, 2, 1}, {2.0, 0.0}},
      {"wiener_1_0.bin", {1, 2, 1}, {1.0, 0.0}},
      {"probe.bin", {1, 1, 1}, {0.5}},
      {"ramp_2x2.bin", {2, 2, 1}, {0.0, 0.25, 0.5, 0.75}},
      {"rgb_1x2.bin", {1, 2, 3}, {1.0, 0.0, 0.5, 0.5, -1.0, 0.125}},
  };
  for (const Case& c : cases) {
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size()));
    const SignalVector s(v, c.shape);
    const auto golden = load(c.file);
    EXPECT_EQ(wire::encode_frame(s), golden) << c.file;
    const SignalVector back = wire::decode_frame(golden);
    EXPECT_EQ(back.data(), v) << c.file;
    EXPECT_EQ(*back.shape(), c.shape) << c.file;
  }
}

TEST(Wire, ShapelessTravelsAsRow) {
  const SignalVector s(Eigen::Vector3d(1, 2, 3));
  const wire::FrameHeader h = wire::header_for(s);
  EXPECT_EQ(h.height, 1u);
  EXPECT_EQ(h.width, 3u);
  EXPECT_EQ(h.channels, 1u);
}

TEST(Wire, NarrowsToFloat) {
  const SignalVector s(Eigen::VectorXd::Constant(1, 0.1));
  const SignalVector back = wire::decode_frame(wire::encode_frame(s));
  EXPECT_EQ(back[0], static_cast<double>(0.1f));
}

TEST(Wire, RejectsMalformedFrames) {
  auto frame = load("pair_2_0.bin");
  auto bad_magic = frame;
  bad_magic[0] = std::byte{'X'};
  EXPECT_THROW(wire::decode_frame(bad_magic), ProtocolError);

  auto short_frame = frame;
  short_frame.pop_back();
  EXPECT_THROW(wire::decode_frame(short_frame), ProtocolError);
  auto long_frame = frame;
  long_frame.push_back(std::byte{0});
  EXPECT_THROW(wire::decode_frame(long_frame), ProtocolError);
  EXPECT_THROW(wire::decode_header(std::span<const std::byte>(frame.data(), 8)), ProtocolError);

  auto nan = frame;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 16, &q, 4);
  EXPECT_THROW(wire::decode_frame(nan), ProtocolError);
}
