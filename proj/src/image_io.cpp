#include "uis/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <vector>

#include <fmt/format.h>
#include <png.h>

#include "uis/wire.hpp"

namespace uis {

SignalVector read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ArgumentError(fmt::format("cannot read PNG '{}': {}", path.string(), image.message));
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ArgumentError(fmt::format("cannot decode PNG '{}': {}", path.string(), image.message));
  }
  const ImageShape shape{image.height, image.width, channels};
  Eigen::VectorXd data(static_cast<Eigen::Index>(shape.size()));
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        data[static_cast<Eigen::Index>(shape.index(ch, r, c))] =
            buffer[(r * shape.width + c) * channels + ch] / 255.0;
      }
    }
  }
  return SignalVector(std::move(data), shape);
}

void write_png(const std::filesystem::path& path, const SignalVector& signal) {
  if (!signal.shape()) throw ArgumentError("write_png needs an image shape");
  const ImageShape& shape = *signal.shape();
  if (shape.channels != 1 && shape.channels != 3) {
    throw ArgumentError(fmt::format("write_png supports 1 or 3 channels, got {}", shape.channels));
  }
  std::vector<png_byte> buffer(shape.size());
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      for (std::size_t ch = 0; ch < shape.channels; ++ch) {
        const double v = std::clamp(signal[shape.index(ch, r, c)], 0.0, 1.0);
        buffer[(r * shape.width + c) * shape.channels + ch] = static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(shape.width);
  image.height = static_cast<png_uint_32>(shape.height);
  image.format = shape.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw ArgumentError(fmt::format("cannot write PNG '{}': {}", path.string(), image.message));
  }
}

SignalVector read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError(fmt::format("cannot open '{}'", path.string()));
  std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(chars.size());
  std::transform(chars.begin(), chars.end(), bytes.begin(), [](char c) { return static_cast<std::byte>(c); });
  return wire::decode_frame(bytes);
}

void write_raw(const std::filesystem::path& path, const SignalVector& image) {
  const std::vector<std::byte> bytes = wire::encode_frame(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

SignalVector read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" ? read_png(path) : read_raw(path);
}

}  // namespace uis
