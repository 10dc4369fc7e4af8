#include "vista/scene_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "vista/detail/ply.hpp"
#include "vista/error.hpp"
#include "vista/png_io.hpp"

namespace fs = std::filesystem;

namespace vista {

std::vector<CameraView> SceneDataset::cameras() const {
  std::vector<CameraView> out;
  for (const auto& v : views) out.push_back(v.camera);
  return out;
}

int SceneDataset::index_of(int camera_id) const {
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].camera.id == camera_id) return static_cast<int>(i);
  }
  return -1;
}

void validate(const SceneDataset& dataset) {
  if (dataset.views.size() < 2) fail(ErrorKind::kTooFewViews, "dataset needs at least 2 views");
  for (const auto& v : dataset.views) {
    validate_camera(v.camera);
    if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
      fail(ErrorKind::kDimensionMismatch, v.image_name + ": image size differs from camera");
    }
    require_same_size(v.image, v.mask, v.image_name.c_str());
    if (!all_finite_in_unit_range(v.image)) {
      fail(ErrorKind::kInvalidArgument, v.image_name + ": values outside [0,1]");
    }
    for (double m : v.mask.data) {
      if (!(m >= 0.0 && m <= 1.0)) fail(ErrorKind::kInvalidArgument, v.image_name + ": bad mask");
    }
  }
}

std::string image_file_name(int camera_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03d.png", camera_id);
  return buf;
}

std::vector<CameraView> read_cameras_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  if (!doc.is_array()) fail(ErrorKind::kParseError, path.string() + ": expected an array");
  std::vector<CameraView> cams;
  for (const auto& e : doc) {
    try {
      CameraView c;
      c.id = e.at("id").get<int>();
      c.fx = e.at("fx").get<double>();
      c.fy = e.at("fy").get<double>();
      c.cx = e.at("cx").get<double>();
      c.cy = e.at("cy").get<double>();
      c.width = e.at("width").get<int>();
      c.height = e.at("height").get<int>();
      c.rotation = Eigen::Quaterniond(e.at("qw").get<double>(), e.at("qx").get<double>(),
                                      e.at("qy").get<double>(), e.at("qz").get<double>());
      c.translation = {e.at("tx").get<double>(), e.at("ty").get<double>(), e.at("tz").get<double>()};
      cams.push_back(c);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::kParseError, path.string() + ": " + ex.what());
    }
  }
  return cams;
}

void write_cameras_json(const fs::path& path, const std::vector<CameraView>& cameras) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : cameras) {
    doc.push_back({{"id", c.id},
                   {"fx", c.fx},
                   {"fy", c.fy},
                   {"cx", c.cx},
                   {"cy", c.cy},
                   {"width", c.width},
                   {"height", c.height},
                   {"qw", c.rotation.w()},
                   {"qx", c.rotation.x()},
                   {"qy", c.rotation.y()},
                   {"qz", c.rotation.z()},
                   {"tx", c.translation.x()},
                   {"ty", c.translation.y()},
                   {"tz", c.translation.z()}});
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

std::vector<SfmPoint> read_points_ply(const fs::path& path) {
  const detail::PlyTable t = detail::read_ply(path);
  const int x = t.column("x"), y = t.column("y"), z = t.column("z");
  const int r = t.column("red"), g = t.column("green"), b = t.column("blue");
  if (x < 0 || y < 0 || z < 0) fail(ErrorKind::kCorruptHeader, path.string() + ": missing x/y/z");
  std::vector<SfmPoint> pts(t.rows);
  const std::size_t w = t.properties.size();
  for (std::size_t i = 0; i < t.rows; ++i) {
    const double* row = t.values.data() + i * w;
    pts[i].position = {row[x], row[y], row[z]};
    pts[i].color = (r >= 0 && g >= 0 && b >= 0) ? Rgb(row[r], row[g], row[b]) / 255.0 : Rgb(0.5, 0.5, 0.5);
  }
  return pts;
}

void write_points_ply(const fs::path& path, const std::vector<SfmPoint>& points) {
  detail::PlyTable t;
  using detail::PlyType;
  t.properties = {{"x", PlyType::kDouble},    {"y", PlyType::kDouble},     {"z", PlyType::kDouble},
                  {"red", PlyType::kUChar}, {"green", PlyType::kUChar}, {"blue", PlyType::kUChar}};
  t.rows = points.size();
  for (const auto& p : points) {
    t.values.insert(t.values.end(), {p.position.x(), p.position.y(), p.position.z()});
    for (int c = 0; c < 3; ++c) t.values.push_back(to_byte(p.color[c]));
  }
  detail::write_ply(path, t);
}

SceneDataset load_dataset(const fs::path& dir) {
  SceneDataset ds;
  ds.name = dir.filename().string();
  if (ds.name.empty()) ds.name = dir.parent_path().filename().string();
  const auto cams = read_cameras_json(dir / "cameras.json");
  std::map<int, CameraView> by_id;
  for (const auto& c : cams) by_id[c.id] = c;

  const fs::path images = dir / "images";
  if (!fs::is_directory(images)) fail(ErrorKind::kIoError, images.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(images)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    int id = -1;
    try {
      std::size_t used = 0;
      id = std::stoi(stem, &used);
      if (used != stem.size()) id = -1;
    } catch (const std::exception&) {
      id = -1;
    }
    const auto it = by_id.find(id);
    if (id < 0 || it == by_id.end()) {
      fail(ErrorKind::kMissingCameraEntry, f.filename().string());
    }
    SceneView v;
    v.camera = it->second;
    v.image_name = f.filename().string();
    v.image = read_png_rgb(f);
    if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
      fail(ErrorKind::kDimensionMismatch, v.image_name + ": image size differs from camera entry");
    }
    const fs::path mask_path = dir / "masks" / f.filename();
    if (fs::exists(mask_path)) {
      v.mask = read_png_gray(mask_path);
      if (!same_size(v.image, v.mask)) {
        fail(ErrorKind::kDimensionMismatch, mask_path.filename().string());
      }
    } else {
      v.mask = MaskMap(v.image.width, v.image.height, 0.0);
    }
    ds.views.push_back(std::move(v));
  }
  std::sort(ds.views.begin(), ds.views.end(),
            [](const SceneView& a, const SceneView& b) { return a.camera.id < b.camera.id; });
  if (fs::exists(dir / "points3d.ply")) ds.points = read_points_ply(dir / "points3d.ply");
  validate(ds);
  spdlog::debug("loaded {}: {} views, {} points", ds.name, ds.views.size(), ds.points.size());
  return ds;
}

void save_dataset(const fs::path& dir, const SceneDataset& dataset, bool with_masks) {
  fs::create_directories(dir / "images");
  if (with_masks) fs::create_directories(dir / "masks");
  for (const auto& v : dataset.views) {
    const std::string name = image_file_name(v.camera.id);
    write_png_rgb8(dir / "images" / name, v.image);
    if (with_masks) write_png_gray8(dir / "masks" / name, v.mask);
  }
  write_cameras_json(dir / "cameras.json", dataset.cameras());
  write_points_ply(dir / "points3d.ply", dataset.points);
}

GaussianCloud init_cloud(const std::vector<SfmPoint>& points, const InitConfig& config) {
  if (points.empty()) fail(ErrorKind::kEmptyPointSet, "init_cloud needs at least one point");
  GaussianCloud cloud;
  cloud.sh_degree = config.sh_degree;
  const std::size_t n = points.size();
  // Uniform grid buckets keep the 3-NN search near-linear.
  Eigen::Vector3d lo = points[0].position, hi = points[0].position;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
  const double span = std::max((hi - lo).maxCoeff(), 1e-9);
  const double cell = std::max(span / std::max(1.0, std::cbrt(static_cast<double>(n))), 1e-9);
  auto key = [&](const Eigen::Vector3d& p) {
    const Eigen::Vector3d q = ((p - lo) / cell).array().floor();
    return std::array<long, 3>{static_cast<long>(q.x()), static_cast<long>(q.y()),
                               static_cast<long>(q.z())};
  };
  std::map<std::array<long, 3>, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < n; ++i) grid[key(points[i].position)].push_back(i);

  for (std::size_t i = 0; i < n; ++i) {
    const auto k = key(points[i].position);
    std::vector<double> best;
    for (long ring = 1;; ++ring) {
      best.clear();
      for (long dx = -ring; dx <= ring; ++dx)
        for (long dy = -ring; dy <= ring; ++dy)
          for (long dz = -ring; dz <= ring; ++dz) {
            const auto it = grid.find({k[0] + dx, k[1] + dy, k[2] + dz});
            if (it == grid.end()) continue;
            for (std::size_t o : it->second) {
              if (o != i) best.push_back((points[o].position - points[i].position).norm());
            }
          }
      // Neighbours within ring * cell are exact once 3 are found or the grid is exhausted.
      std::sort(best.begin(), best.end());
      const bool exhausted = ring * cell > 2.0 * span;
      if ((best.size() >= 3 && best[2] <= ring * cell) || exhausted) break;
    }
    const std::size_t m = std::min<std::size_t>(3, best.size());
    double mean = 0.0;
    for (std::size_t t = 0; t < m; ++t) mean += best[t];
    mean = m > 0 ? mean / m : 0.0;
    const double s = std::log(std::max(mean, config.min_spacing));
    cloud.add_splat(points[i].position, Eigen::Vector3d::Constant(s), Eigen::Vector4d(1, 0, 0, 0),
                    logit(config.initial_opacity), points[i].color);
  }
  return cloud;
}

}  // namespace vista
