#include "vista/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

#include <json.hpp>

#include "vista/error.hpp"
#include "vista/png_io.hpp"

namespace fs = std::filesystem;

namespace vista {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipsoid {
  Eigen::Vector3d center;
  Eigen::Vector3d radii;
  Rgb albedo;
};

struct Texture {
  double freq[3][2];
  double phase[3][2];

  explicit Texture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> f(0.4, 1.2), p(0.0, 1.0);
    for (auto& row : freq)
      for (double& v : row) v = f(rng);
    for (auto& row : phase)
      for (double& v : row) v = p(rng);
  }

  Rgb operator()(double x, double y) const {
    const double e = std::max(std::abs(x), std::abs(y));
    const double s = std::clamp((1.0 - e) / 0.25, 0.0, 1.0);
    const double vignette = s * s * (3.0 - 2.0 * s);
    Rgb c;
    for (int ch = 0; ch < 3; ++ch) {
      c[ch] = 0.5 + 0.22 * std::sin(2 * kPi * (freq[ch][0] * x + phase[ch][0])) +
              0.18 * std::cos(2 * kPi * (freq[ch][1] * y + 0.5 * freq[ch][0] * x + phase[ch][1]));
    }
    return vignette * c;
  }
};

struct Scene {
  Texture texture;
  std::vector<Ellipsoid> ellipsoids;
};

struct Hit {
  double t;
  Rgb color;
  bool blob;
};

std::optional<double> intersect(const Ellipsoid& e, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const Eigen::Vector3d oc = (o - e.center).cwiseQuotient(e.radii);
  const Eigen::Vector3d dd = d.cwiseQuotient(e.radii);
  const double a = dd.squaredNorm(), b = 2.0 * oc.dot(dd), c = oc.squaredNorm() - 1.0;
  const double disc = b * b - 4 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / (2 * a);
  if (t <= 1e-9) return std::nullopt;
  return t;
}

Rgb shade(const Ellipsoid& e, const Eigen::Vector3d& p) {
  const Eigen::Vector3d n = (p - e.center).cwiseQuotient(e.radii.cwiseProduct(e.radii)).normalized();
  const Eigen::Vector3d l = Eigen::Vector3d(0.3, 0.5, 1.0).normalized();
  return e.albedo * (0.35 + 0.65 * std::max(0.0, n.dot(l)));
}

// Nearest surface along the ray; `blob` marks ellipsoids appended as distractors.
std::optional<Hit> trace(const Scene& scene, const std::vector<Ellipsoid>& extra,
                         const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  std::optional<Hit> best;
  if (std::abs(d.z()) > 1e-12) {
    const double t = -o.z() / d.z();
    const Eigen::Vector3d p = o + t * d;
    if (t > 0 && std::abs(p.x()) <= 1.0 && std::abs(p.y()) <= 1.0) {
      best = Hit{t, scene.texture(p.x(), p.y()), false};
    }
  }
  auto consider = [&](const Ellipsoid& e, bool blob) {
    const auto t = intersect(e, o, d);
    if (t && (!best || *t < best->t)) best = Hit{*t, shade(e, o + *t * d), blob};
  };
  for (const auto& e : scene.ellipsoids) consider(e, false);
  for (const auto& e : extra) consider(e, true);
  return best;
}

struct RayImage {
  ImageBuffer color;
  MaskMap coverage;  // fraction of subsamples that hit a distractor
};

RayImage raytrace(const Scene& scene, const std::vector<Ellipsoid>& extra, const CameraView& cam,
                  int ss) {
  RayImage out{ImageBuffer(cam.width, cam.height), MaskMap(cam.width, cam.height)};
  const Eigen::Matrix3d rt = cam.rotation_matrix().transpose();
  const Eigen::Vector3d o = cam.center();
  const double inv = 1.0 / (ss * ss);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      Rgb acc = Rgb::Zero();
      double cover = 0.0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double u = x + (sx + 0.5) / ss - 0.5, v = y + (sy + 0.5) / ss - 0.5;
          const Eigen::Vector3d d =
              (rt * Eigen::Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0)).normalized();
          const auto hit = trace(scene, extra, o, d);
          if (!hit) continue;
          acc += hit->color;
          cover += hit->blob ? 1.0 : 0.0;
        }
      }
      out.color.set_pixel(x, y, (acc * inv).cwiseMax(0.0).cwiseMin(1.0));
      out.coverage.at(x, y) = cover * inv;
    }
  }
  return out;
}

MaskMap threshold(const MaskMap& m, double t) {
  MaskMap out(m.width, m.height);
  for (std::size_t k = 0; k < m.data.size(); ++k) out.data[k] = m.data[k] >= t ? 1.0 : 0.0;
  return out;
}

}  // namespace

FixtureKind parse_fixture_kind(const std::string& name) {
  if (name == "plane24") return FixtureKind::kPlane24;
  if (name == "ring34") return FixtureKind::kRing34;
  if (name == "distractor") return FixtureKind::kDistractor;
  fail(ErrorKind::kInvalidArgument, "unknown fixture kind '" + name + "'");
}

std::string to_string(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::kPlane24: return "plane24";
    case FixtureKind::kRing34: return "ring34";
    case FixtureKind::kDistractor: return "distractor";
  }
  return "";
}

Fixture generate_fixture(FixtureKind kind, std::uint64_t seed, const FixtureOptions& options) {
  const bool ring = kind == FixtureKind::kRing34;
  const int n_views = ring ? 34 : 24;
  const int w = options.width > 0 ? options.width : (ring ? 48 : 64);
  const int h = options.height > 0 ? options.height : (ring ? 48 : 64);
  const double focal = options.focal > 0.0 ? options.focal : (ring ? 52.0 : 70.0) * w / (ring ? 48.0 : 64.0);
  const double radius = 3.0, height = ring ? 1.6 : 2.0;

  Scene scene{Texture(seed), {}};
  if (ring) {
    scene.ellipsoids = {{{0.35, 0.2, 0.25}, {0.22, 0.22, 0.25}, {0.85, 0.35, 0.25}},
                        {{-0.4, -0.3, 0.2}, {0.3, 0.16, 0.2}, {0.25, 0.55, 0.85}},
                        {{-0.2, 0.5, 0.15}, {0.15, 0.15, 0.15}, {0.9, 0.85, 0.3}}};
  }

  Fixture fx;
  fx.kind = kind;
  fx.dataset.name = to_string(kind);
  for (int i = 0; i < n_views; ++i) {
    const double a = 2.0 * kPi * i / n_views;
    const Eigen::Vector3d eye(radius * std::cos(a), radius * std::sin(a), height);
    SceneView v;
    v.camera = look_at_camera(i, eye, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), focal, w, h);
    v.image_name = image_file_name(i);
    fx.dataset.views.push_back(std::move(v));
  }

  if (kind == FixtureKind::kDistractor) {
    for (int i = 3; i <= 10; ++i) fx.blob_views.push_back(i);
  }
  for (int i = 0; i < n_views; ++i) {
    SceneView& v = fx.dataset.views[i];
    std::vector<Ellipsoid> extra;
    const bool has_blob = std::find(fx.blob_views.begin(), fx.blob_views.end(), i) != fx.blob_views.end();
    if (has_blob) {
      const double s = (i - 3) / 7.0;
      extra.push_back({{-0.45 + 0.9 * s, 0.35 - 0.7 * s, 0.3}, {0.24, 0.24, 0.24}, {0.95, 0.2, 0.6}});
    }
    const RayImage img = raytrace(scene, extra, v.camera, options.supersample);
    v.image = img.color;
    v.mask = MaskMap(w, h, 0.0);
    if (kind == FixtureKind::kDistractor) {
      fx.clean.push_back(has_blob ? raytrace(scene, {}, v.camera, options.supersample).color : img.color);
      fx.footprints.push_back(threshold(img.coverage, 0.5));
      fx.track_masks.push_back(threshold(img.coverage, 0.3));
    }
  }

  std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < options.points; ++k) {
    const double x = uni(rng), y = uni(rng);
    Eigen::Vector3d p(x, y, 0.0);
    Rgb c = scene.texture(x, y);
    // Points inside an ellipsoid's footprint are lifted onto its top surface.
    for (const auto& e : scene.ellipsoids) {
      const Eigen::Vector2d q((x - e.center.x()) / e.radii.x(), (y - e.center.y()) / e.radii.y());
      if (q.squaredNorm() < 1.0) {
        p.z() = e.center.z() + e.radii.z() * std::sqrt(1.0 - q.squaredNorm());
        c = shade(e, p);
      }
    }
    fx.dataset.points.push_back({p, c});
  }
  return fx;
}

void write_fixture(const fs::path& dir, const Fixture& fixture) {
  save_dataset(dir, fixture.dataset, false);
  auto write_all = [&](const char* sub, auto&& items, auto&& writer) {
    if (items.empty()) return;
    fs::create_directories(dir / sub);
    for (std::size_t i = 0; i < items.size(); ++i) {
      writer(dir / sub / fixture.dataset.views[i].image_name, items[i]);
    }
  };
  write_all("clean", fixture.clean, [](const fs::path& p, const ImageBuffer& im) { write_png_rgb8(p, im); });
  write_all("footprints", fixture.footprints, [](const fs::path& p, const MaskMap& m) { write_png_gray8(p, m); });
  write_all("track_masks", fixture.track_masks, [](const fs::path& p, const MaskMap& m) { write_png_gray8(p, m); });
  nlohmann::json doc = {{"kind", to_string(fixture.kind)},
                        {"views", fixture.dataset.views.size()},
                        {"points", fixture.dataset.points.size()},
                        {"blob_views", fixture.blob_views}};
  std::ofstream(dir / "fixture.json") << doc.dump(2) << "\n";
}

}  // namespace vista
