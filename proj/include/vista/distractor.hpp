#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vista/image.hpp"
#include "vista/scene_io.hpp"

namespace vista {

struct TrackMaskSet {
  std::string source;
  std::vector<MaskMap> masks;  // one per dataset view, same order
  std::vector<std::string> missing;  // image names without a mask file
};

/// Reads masks named like the dataset images. Missing files become all-zero masks with a warning.
TrackMaskSet ingest_track_masks(const std::filesystem::path& dir, const SceneDataset& dataset,
                                const std::string& source = "tracker");

/// Per-pixel maximum. Throws kCountMismatch or kDimensionMismatch.
MaskStack union_masks(const MaskStack& static_masks, const TrackMaskSet& dynamic);

/// Intersection over union of the > 0.5 regions; 1 when both are empty.
double mask_iou(const MaskMap& a, const MaskMap& b);

}  // namespace vista
