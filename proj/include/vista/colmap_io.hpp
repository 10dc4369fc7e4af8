#pragma once

#include <filesystem>

#include "vista/scene_io.hpp"

namespace vista {

/// Reads a COLMAP text model (cameras.txt, images.txt, points3D.txt) plus images/ beside it.
/// PINHOLE and SIMPLE_PINHOLE only. COLMAP places pixel centres at +0.5, so cx and cy shift by 0.5.
SceneDataset import_colmap(const std::filesystem::path& dir);

/// Writes the text model and images/ so that import_colmap reproduces `dataset`.
void export_colmap(const std::filesystem::path& dir, const SceneDataset& dataset);

}  // namespace vista
