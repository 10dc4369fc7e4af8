#include "vista/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "vista/error.hpp"

namespace vista {

namespace {

// Decodes into either 8-bit samples or, for 16-bit sources, linear 16-bit samples.
struct Decoded {
  int width = 0;
  int height = 0;
  bool sixteen_bit = false;
  std::vector<std::uint8_t> bytes8;
  std::vector<std::uint16_t> words16;

  double sample(std::size_t i) const {
    return sixteen_bit ? words16[i] / 65535.0 : bytes8[i] / 255.0;
  }
};

Decoded decode(const std::vector<std::uint8_t>& bytes, const std::string& name, bool rgb) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (bytes.empty() || !png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    png_image_free(&image);
    fail(ErrorKind::kUnreadableImage, name);
  }
  if (image.width == 0 || image.height == 0 || image.width > (1u << 15) ||
      image.height > (1u << 15)) {
    png_image_free(&image);
    fail(ErrorKind::kUnreadableImage, name + " (bad dimensions)");
  }
  Decoded out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.sixteen_bit = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  if (out.sixteen_bit) {
    image.format = rgb ? PNG_FORMAT_LINEAR_RGB : PNG_FORMAT_LINEAR_Y;
    out.words16.resize(PNG_IMAGE_SIZE(image) / 2);
    if (!png_image_finish_read(&image, nullptr, out.words16.data(), 0, nullptr)) {
      png_image_free(&image);
      fail(ErrorKind::kUnreadableImage, name);
    }
  } else {
    image.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    out.bytes8.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.bytes8.data(), 0, nullptr)) {
      png_image_free(&image);
      fail(ErrorKind::kUnreadableImage, name);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode(int width, int height, png_uint_32 format, const void* pixels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
    fail(ErrorKind::kIoError, "png size query failed");
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
    fail(ErrorKind::kIoError, "png encoding failed");
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kUnreadableImage, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ImageBuffer decode_png_rgb(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  const Decoded d = decode(bytes, name, true);
  ImageBuffer img(d.width, d.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = d.sample(i);
  return img;
}

ImageBuffer read_png_rgb(const std::filesystem::path& path) {
  return decode_png_rgb(read_image_file(path), path.string());
}

GrayMap decode_png_gray(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  const Decoded d = decode(bytes, name, false);
  GrayMap map(d.width, d.height);
  for (std::size_t i = 0; i < map.data.size(); ++i) map.data[i] = d.sample(i);
  return map;
}

GrayMap read_png_gray(const std::filesystem::path& path) {
  return decode_png_gray(read_image_file(path), path.string());
}

GrayMap read_png_gray16_raw(const std::filesystem::path& path) {
  const Decoded d = decode(read_image_file(path), path.string(), false);
  GrayMap map(d.width, d.height);
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    map.data[i] = d.sixteen_bit ? d.words16[i] : d.bytes8[i];
  }
  return map;
}

std::uint8_t to_byte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

std::vector<std::uint8_t> encode_png_rgb8(const ImageBuffer& image) {
  std::vector<std::uint8_t> packed(image.data.size());
  std::transform(image.data.begin(), image.data.end(), packed.begin(), to_byte);
  return encode(image.width, image.height, PNG_FORMAT_RGB, packed.data());
}

std::vector<std::uint8_t> encode_png_gray8(const GrayMap& map) {
  std::vector<std::uint8_t> packed(map.data.size());
  std::transform(map.data.begin(), map.data.end(), packed.begin(), to_byte);
  return encode(map.width, map.height, PNG_FORMAT_GRAY, packed.data());
}

void write_png_rgb8(const std::filesystem::path& path, const ImageBuffer& image) {
  write_file_bytes(path, encode_png_rgb8(image));
}

void write_png_gray8(const std::filesystem::path& path, const GrayMap& map) {
  write_file_bytes(path, encode_png_gray8(map));
}

void write_png_gray16(const std::filesystem::path& path, const GrayMap& values) {
  std::vector<std::uint16_t> packed(values.data.size());
  for (std::size_t i = 0; i < values.data.size(); ++i) {
    packed[i] = static_cast<std::uint16_t>(std::clamp(std::round(values.data[i]), 0.0, 65535.0));
  }
  write_file_bytes(path, encode(values.width, values.height, PNG_FORMAT_LINEAR_Y, packed.data()));
}

}  // namespace vista
