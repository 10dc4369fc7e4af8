#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vista::detail {

enum class PlyType { kChar, kUChar, kShort, kUShort, kInt, kUInt, kFloat, kDouble };

struct PlyProperty {
  std::string name;
  PlyType type;
};

/// Vertex-only binary little-endian PLY table, values widened to double.
struct PlyTable {
  std::vector<std::string> comments;
  std::vector<PlyProperty> properties;
  std::vector<double> values;  // row-major, properties.size() per row
  std::size_t rows = 0;

  int column(const std::string& name) const;
};

/// Throws kCorruptHeader on malformed headers or truncated bodies.
PlyTable read_ply(const std::filesystem::path& path);
PlyTable parse_ply(const std::vector<std::uint8_t>& bytes, const std::string& name);

/// Writes `table`, encoding each property with its declared type.
void write_ply(const std::filesystem::path& path, const PlyTable& table);

}  // namespace vista::detail
