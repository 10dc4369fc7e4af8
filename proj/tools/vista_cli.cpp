#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "vista/backend.hpp"
#include "vista/cloud_ply.hpp"
#include "vista/colmap_io.hpp"
#include "vista/distractor.hpp"
#include "vista/error.hpp"
#include "vista/metrics.hpp"
#include "vista/pipeline.hpp"
#include "vista/png_io.hpp"
#include "vista/remote_backend.hpp"
#include "vista/renderer.hpp"
#include "vista/runtime.hpp"
#include "vista/scene_io.hpp"
#include "vista/testgen.hpp"
#include "vista/trainer.hpp"
#include "vista/visibility.hpp"

namespace fs = std::filesystem;
using namespace vista;

namespace {

// Little-endian int32 width, int32 height, then float32 values in row-major order.
void write_f32(const fs::path& path, const GrayMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  const std::int32_t dims[2] = {map.width, map.height};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (double v : map.data) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  }
}

std::string stem_of(const std::string& image_name) { return fs::path(image_name).stem().string(); }

// Tracker masks are merged into the dataset's object masks.
void apply_track_masks(SceneDataset& ds, const std::string& dir) {
  if (dir.empty()) return;
  const TrackMaskSet tracks = ingest_track_masks(dir, ds);
  MaskStack masks;
  for (const auto& v : ds.views) masks.push_back(v.mask);
  masks = union_masks(masks, tracks);
  for (std::size_t i = 0; i < ds.views.size(); ++i) ds.views[i].mask = masks[i];
}

// Fixture scenes carry clean/ renders; the mock backend then inpaints towards them.
std::unique_ptr<InpaintBackend> make_backend(const std::string& target, const fs::path& scene,
                                             const SceneDataset& ds) {
  if (target != "mock") return std::make_unique<RemoteBackend>(target);
  const fs::path clean = scene / "clean";
  if (!fs::is_directory(clean)) {
    spdlog::info("mock backend: no clean/ directory, images pass through unchanged");
    return std::make_unique<IdentityBackend>();
  }
  std::map<int, ImageBuffer> refs;
  for (const auto& v : ds.views) refs[v.camera.id] = read_png_rgb(clean / v.image_name);
  spdlog::info("mock backend: oracle towards {} clean images", refs.size());
  return std::make_unique<OracleBackend>(std::move(refs), std::make_shared<AvgPoolCodec>(1));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

CameraView parse_pose(const std::string& text, CameraView cam) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 7) fail(ErrorKind::kInvalidArgument, "--pose wants qw,qx,qy,qz,tx,ty,tz");
  cam.rotation = Eigen::Quaterniond(v[0], v[1], v[2], v[3]).normalized();
  cam.translation = {v[4], v[5], v[6]};
  return cam;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"3D Gaussian splatting with uncertainty-guided inpainting"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  // testgen
  auto* testgen = app.add_subcommand("testgen", "write a synthetic fixture scene");
  std::string kind = "plane24", out_dir;
  std::uint64_t seed = 0;
  FixtureOptions fixture_options;
  testgen->add_option("--kind", kind, "plane24 | ring34 | distractor")->check(CLI::IsMember({"plane24", "ring34", "distractor"}));
  testgen->add_option("--seed", seed);
  testgen->add_option("--width", fixture_options.width);
  testgen->add_option("--height", fixture_options.height);
  testgen->add_option("--points", fixture_options.points);
  testgen->add_option("--out-dir", out_dir)->required();

  // import-colmap
  auto* import = app.add_subcommand("import-colmap", "convert a COLMAP text model to the dataset layout");
  std::string colmap_dir;
  import->add_option("--colmap-dir", colmap_dir)->required();
  import->add_option("--out-dir", out_dir)->required();

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "fit a cloud to a scene");
  std::string scene, weights_dir, out_path, log_path;
  int iters = 4000, sh_degree = 1, log_every = 100;
  reconstruct->add_option("--scene", scene)->required();
  reconstruct->add_option("--weights-dir", weights_dir, "grayscale PNG weight maps named like the images");
  reconstruct->add_option("--iters", iters);
  reconstruct->add_option("--sh-degree", sh_degree)->check(CLI::Range(0, 3));
  reconstruct->add_option("--seed", seed);
  reconstruct->add_option("--out", out_path)->required();
  reconstruct->add_option("--log", log_path, "CSV of iter,loss,psnr");
  reconstruct->add_option("--log-every", log_every)->check(CLI::PositiveNumber);

  // render
  auto* render_cmd = app.add_subcommand("render", "render a cloud from a scene camera");
  std::string cloud_path, pose, depth_out;
  int camera_id = 0;
  render_cmd->add_option("--cloud", cloud_path)->required();
  render_cmd->add_option("--scene", scene)->required();
  render_cmd->add_option("--camera-id", camera_id, "camera whose pose and intrinsics are used");
  render_cmd->add_option("--pose", pose, "qw,qx,qy,qz,tx,ty,tz world-to-camera, with the camera's intrinsics");
  render_cmd->add_option("--out", out_path)->required();
  render_cmd->add_option("--depth-out", depth_out, "16-bit PNG depth in millimetres");

  // uncertainty
  auto* uncertainty = app.add_subcommand("uncertainty", "visibility uncertainty and fused masks");
  UncertaintyOptions uopt;
  double theta = 0.0;
  int view_id = -1;
  bool all_views = false;
  std::string track_masks;
  uncertainty->add_option("--scene", scene)->required();
  uncertainty->add_option("--cloud", cloud_path)->required();
  auto* view_opt = uncertainty->add_option("--view-id", view_id);
  uncertainty->add_flag("--all", all_views)->excludes(view_opt);
  uncertainty->add_option("--V", uopt.adjacent);
  uncertainty->add_option("--tau-d", uopt.tau_d);
  uncertainty->add_option("--theta", theta);
  uncertainty->add_option("--min-alpha", uopt.min_alpha);
  uncertainty->add_option("--track-masks", track_masks);
  uncertainty->add_option("--out-dir", out_dir)->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "initial fit plus inpainting cycles");
  std::string config_path, backend_spec = "mock";
  pipeline->add_option("--scene", scene)->required();
  pipeline->add_option("--config", config_path, "JSON file with PipelineConfig keys");
  pipeline->add_option("--backend", backend_spec, "mock or the service URL");
  pipeline->add_option("--track-masks", track_masks);
  pipeline->add_option("--out-dir", out_dir)->required();

  // sparsity
  auto* sparsity = app.add_subcommand("sparsity", "viewpoint sparsity study");
  std::string intervals = "1,2,3,4,5,6,7";
  sparsity->add_option("--scene", scene)->required();
  sparsity->add_option("--config", config_path);
  sparsity->add_option("--backend", backend_spec);
  sparsity->add_option("--intervals", intervals);
  sparsity->add_option("--out", out_path)->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of test images against references");
  std::string ref_dir, test_dir, masks_dir;
  metrics->add_option("--ref-dir", ref_dir)->required();
  metrics->add_option("--test-dir", test_dir)->required();
  metrics->add_option("--masks-dir", masks_dir, "crop both images to each mask's bounding box");
  metrics->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*testgen) {
      const Fixture fx = generate_fixture(parse_fixture_kind(kind), seed, fixture_options);
      write_fixture(out_dir, fx);
      spdlog::info("{}: {} views, {} points -> {}", kind, fx.dataset.views.size(), fx.dataset.points.size(), out_dir);
    } else if (*import) {
      save_dataset(out_dir, import_colmap(colmap_dir), false);
    } else if (*reconstruct) {
      const SceneDataset ds = load_dataset(scene);
      std::vector<TrainView> views;
      for (const auto& v : ds.views) {
        GrayMap w(v.image.width, v.image.height, 1.0);
        if (!weights_dir.empty()) w = read_png_gray(fs::path(weights_dir) / v.image_name);
        views.push_back({v.camera, v.image, w});
      }
      TrainConfig tc;
      tc.iterations = iters;
      tc.seed = seed;
      InitConfig ic;
      ic.sh_degree = sh_degree;
      std::ofstream log;
      if (!log_path.empty()) {
        log.open(log_path);
        log << "iter,loss,psnr\n";
      }
      const auto cb = [&](int it, const GaussianCloud& cloud, double loss) {
        if (it % log_every != 0 && it != iters) return;
        const double p = psnr(render(cloud, views[0].camera, tc.background).color, views[0].image);
        if (log) log << it << ',' << loss << ',' << p << '\n';
        spdlog::info("iter {}: loss {:.5f}, view 0 PSNR {:.2f} dB, {} splats", it, loss, p, cloud.size());
      };
      const TrainResult res = train(init_cloud(ds.points, ic), views, tc, cb);
      save_cloud(out_path, res.cloud);
    } else if (*render_cmd) {
      const GaussianCloud cloud = load_cloud(cloud_path);
      const SceneDataset ds = load_dataset(scene);
      const int idx = ds.index_of(camera_id);
      if (idx < 0) fail(ErrorKind::kOutOfRange, "no camera " + std::to_string(camera_id));
      CameraView cam = ds.views[idx].camera;
      if (!pose.empty()) cam = parse_pose(pose, cam);
      RenderOutput out = render(cloud, cam);
      write_png_rgb8(out_path, out.color);
      if (!depth_out.empty()) {
        for (double& d : out.depth.data) d *= 1000.0;
        write_png_gray16(depth_out, out.depth);
      }
    } else if (*uncertainty) {
      SceneDataset ds = load_dataset(scene);
      apply_track_masks(ds, track_masks);
      const GaussianCloud cloud = load_cloud(cloud_path);
      std::vector<int> targets;
      if (all_views) {
        for (std::size_t i = 0; i < ds.views.size(); ++i) targets.push_back(static_cast<int>(i));
      } else {
        const int idx = ds.index_of(view_id < 0 ? ds.views.front().camera.id : view_id);
        if (idx < 0) fail(ErrorKind::kOutOfRange, "no camera " + std::to_string(view_id));
        targets.push_back(idx);
      }
      fs::create_directories(out_dir);
      const auto maps = uncertainty_maps(cloud, ds, uopt);
      for (int i : targets) {
        const std::string stem = stem_of(ds.views[i].image_name);
        const MaskMap fused = fuse_mask(maps[i], ds.views[i].mask, theta);
        write_png_gray8(fs::path(out_dir) / (stem + "_U.png"), maps[i]);
        write_png_gray8(fs::path(out_dir) / (stem + "_M.png"), fused);
        write_f32(fs::path(out_dir) / (stem + "_U.f32"), maps[i]);
        write_f32(fs::path(out_dir) / (stem + "_M.f32"), fused);
      }
    } else if (*pipeline) {
      SceneDataset ds = load_dataset(scene);
      apply_track_masks(ds, track_masks);
      const PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
      auto backend = make_backend(backend_spec, scene, ds);
      vista_run(ds, cfg, *backend, {}, out_dir);
    } else if (*sparsity) {
      const SceneDataset ds = load_dataset(scene);
      const PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
      auto backend = make_backend(backend_spec, scene, ds);
      write_sparsity_csv(out_path, viewpoint_sparsity_study(ds, parse_int_list(intervals), cfg, *backend));
    } else if (*metrics) {
      std::vector<MetricRow> rows;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(ref_dir)) {
        if (e.path().extension() == ".png") files.push_back(e.path().filename());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        ImageBuffer ref = read_png_rgb(fs::path(ref_dir) / f);
        ImageBuffer test = read_png_rgb(fs::path(test_dir) / f);
        require_same_size(ref, test, f.string().c_str());
        if (!masks_dir.empty()) {
          const GrayMap mask = read_png_gray(fs::path(masks_dir) / f);
          if (std::none_of(mask.data.begin(), mask.data.end(), [](double v) { return v > 0.5; })) {
            spdlog::warn("{}: empty mask, skipped", f.string());
            continue;
          }
          ref = masked_bbox_crop(ref, mask);
          test = masked_bbox_crop(test, mask);
        }
        rows.push_back({f.string(), psnr(test, ref), ssim(test, ref)});
      }
      write_metrics_csv(out_path, rows);
    }
  } catch (const VistaError& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
