#pragma once

#include <cstddef>
#include <filesystem>

#include "vista/gaussian_cloud.hpp"

namespace vista {

inline constexpr int kCloudFormatVersion = 1;

/// Bytes per splat in files written by save_cloud.
std::size_t cloud_record_size(int sh_degree);

/// Binary little-endian PLY with double-precision properties; exact round trip.
void save_cloud(const std::filesystem::path& path, const GaussianCloud& cloud);

/// Accepts float or double properties. Throws kCorruptHeader or kVersionMismatch.
GaussianCloud load_cloud(const std::filesystem::path& path);

}  // namespace vista
