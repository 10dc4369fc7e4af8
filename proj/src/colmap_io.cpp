#include "vista/colmap_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "vista/error.hpp"
#include "vista/png_io.hpp"

namespace fs = std::filesystem;

namespace vista {

namespace {

struct Intrinsics {
  double fx, fy, cx, cy;
  int width, height;
};

// Calls fn(line, line_number) for each non-comment, non-blank line.
template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    fn(line, number);
  }
}

[[noreturn]] void parse_fail(const fs::path& path, int line, const std::string& what) {
  fail(ErrorKind::kParseError, path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

std::map<int, Intrinsics> read_cameras(const fs::path& path) {
  std::map<int, Intrinsics> cams;
  for_each_line(path, [&](const std::string& line, int n) {
    std::istringstream ls(line);
    int id, w, h;
    std::string model;
    if (!(ls >> id >> model >> w >> h)) parse_fail(path, n, "expected CAMERA_ID MODEL WIDTH HEIGHT");
    Intrinsics k{};
    k.width = w;
    k.height = h;
    if (model == "SIMPLE_PINHOLE") {
      double f;
      if (!(ls >> f >> k.cx >> k.cy)) parse_fail(path, n, "SIMPLE_PINHOLE needs f cx cy");
      k.fx = k.fy = f;
    } else if (model == "PINHOLE") {
      if (!(ls >> k.fx >> k.fy >> k.cx >> k.cy)) parse_fail(path, n, "PINHOLE needs fx fy cx cy");
    } else {
      fail(ErrorKind::kUnsupportedCameraModel,
           path.filename().string() + ":" + std::to_string(n) + ": " + model);
    }
    k.cx -= 0.5;
    k.cy -= 0.5;
    cams[id] = k;
  });
  return cams;
}

}  // namespace

SceneDataset import_colmap(const fs::path& dir) {
  const auto intrinsics = read_cameras(dir / "cameras.txt");
  SceneDataset ds;
  ds.name = dir.filename().string();

  const fs::path images_txt = dir / "images.txt";
  bool expect_points_line = false;
  // images.txt alternates pose lines and 2D point lines; the latter may be blank, so read raw.
  std::ifstream in(images_txt);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + images_txt.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    if (expect_points_line) {
      expect_points_line = false;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(line);
    int image_id, camera_id;
    double qw, qx, qy, qz, tx, ty, tz;
    std::string name;
    if (!(ls >> image_id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >> camera_id >> name)) {
      parse_fail(images_txt, number, "expected IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME");
    }
    const auto it = intrinsics.find(camera_id);
    if (it == intrinsics.end()) {
      fail(ErrorKind::kMissingCameraEntry,
           images_txt.filename().string() + ":" + std::to_string(number) + ": camera " +
               std::to_string(camera_id));
    }
    SceneView v;
    v.camera.id = image_id;
    v.camera.fx = it->second.fx;
    v.camera.fy = it->second.fy;
    v.camera.cx = it->second.cx;
    v.camera.cy = it->second.cy;
    v.camera.width = it->second.width;
    v.camera.height = it->second.height;
    v.camera.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    v.camera.translation = {tx, ty, tz};
    v.image_name = name;
    const fs::path img = dir / "images" / name;
    v.image = read_png_rgb(img);
    if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
      fail(ErrorKind::kDimensionMismatch, name + ": image size differs from camera model");
    }
    v.mask = MaskMap(v.image.width, v.image.height, 0.0);
    ds.views.push_back(std::move(v));
    expect_points_line = true;
  }
  std::sort(ds.views.begin(), ds.views.end(),
            [](const SceneView& a, const SceneView& b) { return a.camera.id < b.camera.id; });

  const fs::path points_txt = dir / "points3D.txt";
  if (fs::exists(points_txt)) {
    for_each_line(points_txt, [&](const std::string& l, int n) {
      std::istringstream ls(l);
      long id;
      double x, y, z;
      int r, g, b;
      if (!(ls >> id >> x >> y >> z >> r >> g >> b)) {
        parse_fail(points_txt, n, "expected POINT3D_ID X Y Z R G B");
      }
      ds.points.push_back({Eigen::Vector3d(x, y, z), Rgb(r, g, b) / 255.0});
    });
  }
  validate(ds);
  return ds;
}

void export_colmap(const fs::path& dir, const SceneDataset& dataset) {
  fs::create_directories(dir / "images");
  std::ofstream cams(dir / "cameras.txt"), imgs(dir / "images.txt"), pts(dir / "points3D.txt");
  if (!cams || !imgs || !pts) fail(ErrorKind::kIoError, "cannot write COLMAP model in " + dir.string());
  cams.precision(17);
  imgs.precision(17);
  pts.precision(17);
  cams << "# CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n";
  imgs << "# IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n# POINTS2D[] as (X, Y, POINT3D_ID)\n";
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    const SceneView& v = dataset.views[i];
    const CameraView& c = v.camera;
    const int cam_id = static_cast<int>(i) + 1;
    cams << cam_id << " PINHOLE " << c.width << " " << c.height << " " << c.fx << " " << c.fy << " "
         << c.cx + 0.5 << " " << c.cy + 0.5 << "\n";
    const std::string name = v.image_name.empty() ? image_file_name(c.id) : v.image_name;
    imgs << c.id << " " << c.rotation.w() << " " << c.rotation.x() << " " << c.rotation.y() << " "
         << c.rotation.z() << " " << c.translation.x() << " " << c.translation.y() << " "
         << c.translation.z() << " " << cam_id << " " << name << "\n\n";
    write_png_rgb8(dir / "images" / name, v.image);
  }
  pts << "# POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[]\n";
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    const SfmPoint& p = dataset.points[i];
    pts << i + 1 << " " << p.position.x() << " " << p.position.y() << " " << p.position.z() << " "
        << int(to_byte(p.color[0])) << " " << int(to_byte(p.color[1])) << " "
        << int(to_byte(p.color[2])) << " 0\n";
  }
}

}  // namespace vista
