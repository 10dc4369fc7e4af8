#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vista/scene_io.hpp"

namespace vista {

enum class FixtureKind { kPlane24, kRing34, kDistractor };

FixtureKind parse_fixture_kind(const std::string& name);
std::string to_string(FixtureKind kind);

struct Fixture {
  FixtureKind kind = FixtureKind::kPlane24;
  SceneDataset dataset;
  std::vector<ImageBuffer> clean;       // renders without the moving blob
  std::vector<MaskMap> footprints;      // blob coverage >= 0.5
  std::vector<MaskMap> track_masks;     // looser tracker-style masks
  std::vector<int> blob_views;          // view indices that contain the blob
};

struct FixtureOptions {
  int width = 0;   // 0 picks the kind's default
  int height = 0;
  double focal = 0.0;
  int points = 4096;
  int supersample = 4;
};

/// Ray-traced synthetic scene: a textured plane z = 0 over [-1,1]^2 seen from a camera ring,
/// plus shaded ellipsoids (ring34) or a moving blob in 8 consecutive views (distractor).
Fixture generate_fixture(FixtureKind kind, std::uint64_t seed, const FixtureOptions& options = {});

/// Writes the dataset layout plus clean/, footprints/, track_masks/ and fixture.json when present.
void write_fixture(const std::filesystem::path& dir, const Fixture& fixture);

}  // namespace vista
