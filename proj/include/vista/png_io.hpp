#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vista/image.hpp"

namespace vista {

/// RGB image in [0,1]; grey inputs are replicated, alpha is dropped.
ImageBuffer read_png_rgb(const std::filesystem::path& path);
ImageBuffer decode_png_rgb(const std::vector<std::uint8_t>& bytes, const std::string& name);

/// Single-channel map in [0,1]; colour inputs are converted to luminance.
GrayMap read_png_gray(const std::filesystem::path& path);
GrayMap decode_png_gray(const std::vector<std::uint8_t>& bytes, const std::string& name);

/// Raw stored sample values (0..65535 for 16-bit files, 0..255 for 8-bit).
GrayMap read_png_gray16_raw(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png_rgb8(const ImageBuffer& image);
std::vector<std::uint8_t> encode_png_gray8(const GrayMap& map);

void write_png_rgb8(const std::filesystem::path& path, const ImageBuffer& image);
void write_png_gray8(const std::filesystem::path& path, const GrayMap& map);
/// 16-bit grey, values stored verbatim after rounding and clamping to [0, 65535].
void write_png_gray16(const std::filesystem::path& path, const GrayMap& values);

std::uint8_t to_byte(double v);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace vista
