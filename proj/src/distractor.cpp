#include "vista/distractor.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "vista/error.hpp"
#include "vista/png_io.hpp"

namespace vista {

TrackMaskSet ingest_track_masks(const std::filesystem::path& dir, const SceneDataset& dataset,
                                const std::string& source) {
  TrackMaskSet set;
  set.source = source;
  for (const auto& v : dataset.views) {
    const auto path = dir / v.image_name;
    if (!std::filesystem::exists(path)) {
      spdlog::warn("no track mask for {}, using an empty mask", v.image_name);
      set.missing.push_back(v.image_name);
      set.masks.emplace_back(v.image.width, v.image.height, 0.0);
      continue;
    }
    MaskMap m = read_png_gray(path);
    if (!same_size(v.image, m)) fail(ErrorKind::kDimensionMismatch, path.filename().string());
    set.masks.push_back(std::move(m));
  }
  return set;
}

MaskStack union_masks(const MaskStack& static_masks, const TrackMaskSet& dynamic) {
  if (static_masks.size() != dynamic.masks.size()) {
    fail(ErrorKind::kCountMismatch, std::to_string(static_masks.size()) + " static vs " +
                                        std::to_string(dynamic.masks.size()) + " dynamic masks");
  }
  MaskStack out;
  for (std::size_t i = 0; i < static_masks.size(); ++i) {
    require_same_size(static_masks[i], dynamic.masks[i], "union_masks");
    MaskMap m = static_masks[i];
    for (std::size_t k = 0; k < m.data.size(); ++k) m.data[k] = std::max(m.data[k], dynamic.masks[i].data[k]);
    out.push_back(std::move(m));
  }
  return out;
}

double mask_iou(const MaskMap& a, const MaskMap& b) {
  require_same_size(a, b, "mask_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const bool pa = a.data[k] > 0.5, pb = b.data[k] > 0.5;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace vista
