#include "vista/cloud_ply.hpp"

#include <cmath>
#include <string>

#include "vista/detail/ply.hpp"
#include "vista/error.hpp"

namespace vista {

namespace {

std::vector<std::string> property_names(int sh_degree) {
  std::vector<std::string> names = {"x", "y", "z", "scale_0", "scale_1", "scale_2",
                                    "rot_0", "rot_1", "rot_2", "rot_3", "opacity",
                                    "f_dc_0", "f_dc_1", "f_dc_2"};
  const int rest = (sh_coeff_count(sh_degree) - 1) * 3;
  for (int i = 0; i < rest; ++i) names.push_back("f_rest_" + std::to_string(i));
  return names;
}

}  // namespace

std::size_t cloud_record_size(int sh_degree) { return property_names(sh_degree).size() * 8; }

void save_cloud(const std::filesystem::path& path, const GaussianCloud& cloud) {
  cloud.validate();
  detail::PlyTable table;
  table.comments = {"vista_cloud_version " + std::to_string(kCloudFormatVersion),
                    "sh_degree " + std::to_string(cloud.sh_degree)};
  for (const auto& n : property_names(cloud.sh_degree)) {
    table.properties.push_back({n, detail::PlyType::kDouble});
  }
  const int k = sh_coeff_count(cloud.sh_degree);
  table.rows = cloud.size();
  table.values.reserve(table.rows * table.properties.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    auto& v = table.values;
    for (int i = 0; i < 3; ++i) v.push_back(cloud.means[j][i]);
    for (int i = 0; i < 3; ++i) v.push_back(cloud.log_scales[j][i]);
    for (int i = 0; i < 4; ++i) v.push_back(cloud.rotations[j][i]);
    v.push_back(cloud.opacity_logits[j]);
    const double* sh = cloud.sh_of(j);
    for (int c = 0; c < 3; ++c) v.push_back(sh[c]);
    // f_rest is channel-major: all coefficients of R, then G, then B.
    for (int c = 0; c < 3; ++c) {
      for (int b = 1; b < k; ++b) v.push_back(sh[b * 3 + c]);
    }
  }
  detail::write_ply(path, table);
}

GaussianCloud load_cloud(const std::filesystem::path& path) {
  const detail::PlyTable table = detail::read_ply(path);
  int degree = -1;
  for (const auto& c : table.comments) {
    if (c.rfind("vista_cloud_version ", 0) == 0) {
      const std::string v = c.substr(20);
      if (v != std::to_string(kCloudFormatVersion)) {
        fail(ErrorKind::kVersionMismatch, path.string() + ": cloud version " + v);
      }
    } else if (c.rfind("sh_degree ", 0) == 0) {
      try {
        degree = std::stoi(c.substr(10));
      } catch (const std::exception&) {
        fail(ErrorKind::kCorruptHeader, path.string() + ": bad sh_degree comment");
      }
    }
  }
  int rest = 0;
  while (table.column("f_rest_" + std::to_string(rest)) >= 0) ++rest;
  if (degree < 0) {
    degree = static_cast<int>(std::lround(std::sqrt(rest / 3 + 1))) - 1;
  }
  if (degree < 0 || degree > 3 || rest != (sh_coeff_count(degree) - 1) * 3) {
    fail(ErrorKind::kCorruptHeader, path.string() + ": SH coefficients do not match degree");
  }
  std::vector<int> cols;
  for (const auto& n : property_names(degree)) {
    const int c = table.column(n);
    if (c < 0) fail(ErrorKind::kCorruptHeader, path.string() + ": missing property " + n);
    cols.push_back(c);
  }

  GaussianCloud cloud;
  cloud.sh_degree = degree;
  cloud.resize(table.rows, degree);
  const std::size_t width = table.properties.size();
  const int k = sh_coeff_count(degree);
  for (std::size_t j = 0; j < table.rows; ++j) {
    const double* row = table.values.data() + j * width;
    auto at = [&](int i) { return row[cols[i]]; };
    cloud.means[j] = {at(0), at(1), at(2)};
    cloud.log_scales[j] = {at(3), at(4), at(5)};
    cloud.rotations[j] = {at(6), at(7), at(8), at(9)};
    cloud.opacity_logits[j] = at(10);
    double* sh = cloud.sh_of(j);
    for (int c = 0; c < 3; ++c) sh[c] = at(11 + c);
    int i = 14;
    for (int c = 0; c < 3; ++c) {
      for (int b = 1; b < k; ++b) sh[b * 3 + c] = at(i++);
    }
  }
  return cloud;
}

}  // namespace vista
