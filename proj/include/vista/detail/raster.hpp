#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vista/renderer.hpp"

namespace vista::detail {

/// One blended splat at one pixel, as seen by the forward pass.
struct BlendEntry {
  std::uint32_t splat;
  double alpha;          // opacity * gaussian
  double gaussian;
  double transmittance;  // before this splat
};

struct RasterTrace {
  std::vector<std::optional<Projected2D>> projected;
  std::vector<std::uint32_t> offsets;  // pixel p owns entries[offsets[p], offsets[p + 1])
  std::vector<BlendEntry> entries;
};

/// Tiled forward pass; fills `trace` when non-null.
RenderOutput rasterize(const GaussianCloud& cloud, const CameraView& camera, const Rgb& background,
                       RasterTrace* trace);

}  // namespace vista::detail
