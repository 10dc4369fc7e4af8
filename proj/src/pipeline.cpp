#include "vista/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "vista/cloud_ply.hpp"
#include "vista/error.hpp"
#include "vista/metrics.hpp"
#include "vista/png_io.hpp"
#include "vista/renderer.hpp"

namespace fs = std::filesystem;

namespace vista {

void validate(const PipelineConfig& config) {
  if (config.cycles < 1) fail(ErrorKind::kInvalidArgument, "cycles must be at least 1");
  if (!(config.strength_ratio > 0.0 && config.strength_ratio < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "strength ratio must be in (0,1)");
  }
  if (config.theta_increment < 0.0 || (config.cycles - 1) * config.theta_increment > 1.0 + 1e-12) {
    fail(ErrorKind::kInvalidArgument, "theta schedule leaves [0,1]");
  }
  if (config.inpaint_steps < 1) fail(ErrorKind::kInvalidArgument, "inpaint steps must be positive");
  validate(config.initial_train);
  validate(config.cycle_train);
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  PipelineConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("cycles", c.cycles);
    get("theta_increment", c.theta_increment);
    get("strength_ratio", c.strength_ratio);
    get("multiplicative_strength", c.multiplicative_strength);
    get("anchor_raw", c.anchor_raw);
    get("early_stop_db", c.early_stop_db);
    get("holdout", c.holdout);
    get("inpaint_steps", c.inpaint_steps);
    get("max_in_flight", c.max_in_flight);
    get("seed", c.seed);
    get("sh_degree", c.init.sh_degree);
    get("initial_iterations", c.initial_train.iterations);
    get("cycle_iterations", c.cycle_train.iterations);
    get("adjacent_views", c.uncertainty.adjacent);
    get("tau_d", c.uncertainty.tau_d);
    get("min_alpha", c.uncertainty.min_alpha);
    get("include_reference", c.uncertainty.include_reference);
    for (TrainConfig* t : {&c.initial_train, &c.cycle_train}) {
      get("lambda_l1", t->lambda.l1);
      get("lambda_dssim", t->lambda.dssim);
      get("densify_until", t->densify_until);
      get("densify_interval", t->densify_interval);
      get("densify_grad_threshold", t->densify.grad_threshold);
    }
    if (j.contains("background")) {
      const auto b = j.at("background").get<std::vector<double>>();
      if (b.size() != 3) fail(ErrorKind::kParseError, "background needs 3 values");
      c.uncertainty.background = c.initial_train.background = c.cycle_train.background =
          Rgb(b[0], b[1], b[2]);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  c.initial_train.seed = c.seed;
  c.cycle_train.seed = c.seed + 1;
  validate(c);
  return c;
}

double theta_schedule(int k, const PipelineConfig& config) { return (k - 1) * config.theta_increment; }

double strength_schedule(int k, const PipelineConfig& config) {
  const double r = config.strength_ratio;
  if (config.multiplicative_strength) return std::max(r, std::pow(1.0 - r, k - 1));
  return std::max(r, 1.0 - r * (k - 1));
}

void holdout_split(std::size_t n, std::vector<int>& train, std::vector<int>& test) {
  train.clear();
  test.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int m = static_cast<int>(i % 5);
    (m == 0 || m == 2 || m == 4 ? train : test).push_back(static_cast<int>(i));
  }
}

double weighted_psnr(const ImageBuffer& a, const ImageBuffer& b, const GrayMap& w) {
  require_same_size(a, b, "weighted psnr");
  require_same_size(a, w, "weighted psnr weights");
  double se = 0.0, total = 0.0;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      const double d = a.data[p * 3 + c] - b.data[p * 3 + c];
      se += w.data[p] * d * d;
    }
    total += 3.0 * w.data[p];
  }
  if (total <= 0.0 || se == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(total / se);
}

namespace {

SceneDataset subset(const SceneDataset& ds, const std::vector<int>& idx) {
  SceneDataset out;
  out.name = ds.name;
  out.points = ds.points;
  for (int i : idx) out.views.push_back(ds.views[i]);
  return out;
}

double mean_weighted_psnr(const GaussianCloud& cloud, const SceneDataset& ds,
                          const std::vector<GrayMap>& weights, const Rgb& bg) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.views.size(); ++i) {
    acc += weighted_psnr(render(cloud, ds.views[i].camera, bg).color, ds.views[i].image, weights[i]);
  }
  return acc / std::max<std::size_t>(1, ds.views.size());
}

void write_cycle_artifacts(const fs::path& dir, int k, const SceneDataset& ds,
                           const GaussianCloud& cloud, const std::vector<UncertaintyMap>& u,
                           const std::vector<MaskMap>& fused, const std::vector<ImageBuffer>& inpainted) {
  const fs::path c = dir / ("cycle_" + std::to_string(k));
  fs::create_directories(c / "uncertainty");
  fs::create_directories(c / "fused_masks");
  fs::create_directories(c / "inpainted");
  save_cloud(c / "cloud.ply", cloud);
  for (std::size_t i = 0; i < ds.views.size(); ++i) {
    const std::string name = ds.views[i].image_name;
    write_png_gray8(c / "uncertainty" / name, u[i]);
    write_png_gray8(c / "fused_masks" / name, fused[i]);
    if (i < inpainted.size()) write_png_rgb8(c / "inpainted" / name, inpainted[i]);
  }
}

}  // namespace

PipelineResult vista_run(const SceneDataset& dataset, const PipelineConfig& config,
                         InpaintBackend& backend, const CycleEvaluator& evaluator,
                         const fs::path& out_dir) {
  validate(config);
  if (dataset.views.size() < 3) fail(ErrorKind::kTooFewViews, "pipeline needs at least 3 views");
  PipelineResult result;
  if (config.holdout) {
    holdout_split(dataset.views.size(), result.train_views, result.test_views);
  } else {
    for (std::size_t i = 0; i < dataset.views.size(); ++i) result.train_views.push_back(static_cast<int>(i));
  }
  const SceneDataset train_ds = subset(dataset, result.train_views);
  const SceneDataset test_ds = subset(dataset, result.test_views);
  const std::size_t n = train_ds.views.size();
  const Rgb bg = config.cycle_train.background;

  // (0) plain fit on the raw images.
  std::vector<TrainView> views;
  for (const auto& v : train_ds.views) {
    views.push_back({v.camera, v.image, GrayMap(v.image.width, v.image.height, 1.0)});
  }
  GaussianCloud cloud = train(init_cloud(train_ds.points, config.init), views, config.initial_train).cloud;
  {
    std::vector<GrayMap> ones;
    for (const auto& v : views) ones.push_back(v.weights);
    result.report.initial_train_psnr = mean_weighted_psnr(cloud, train_ds, ones, bg);
  }
  spdlog::info("initial fit: {} splats, train PSNR {:.2f} dB", cloud.size(),
               result.report.initial_train_psnr);

  std::vector<ImageBuffer> inpainted;
  double previous_psnr = std::numeric_limits<double>::quiet_NaN();
  for (int k = 1; k <= config.cycles; ++k) {
    CycleRecord rec;
    rec.k = k;
    rec.theta = theta_schedule(k, config);
    rec.strength = strength_schedule(k, config);

    // GI: uncertainty, fusion, masked retraining.
    result.uncertainty = uncertainty_maps(cloud, train_ds, config.uncertainty);
    result.fused_masks.clear();
    for (std::size_t i = 0; i < n; ++i) {
      result.fused_masks.push_back(fuse_mask(result.uncertainty[i], train_ds.views[i].mask, rec.theta));
    }
    std::vector<GrayMap> weights;
    views.clear();
    for (std::size_t i = 0; i < n; ++i) {
      GrayMap w(result.fused_masks[i].width, result.fused_masks[i].height);
      for (std::size_t p = 0; p < w.data.size(); ++p) w.data[p] = 1.0 - result.fused_masks[i].data[p];
      weights.push_back(w);
      if (config.anchor_raw || inpainted.empty()) {
        views.push_back({train_ds.views[i].camera, train_ds.views[i].image, w});
      }
    }
    for (std::size_t i = 0; i < inpainted.size(); ++i) {
      views.push_back({train_ds.views[i].camera, inpainted[i],
                       GrayMap(inpainted[i].width, inpainted[i].height, 1.0)});
    }
    TrainConfig tc = config.cycle_train;
    tc.seed = config.cycle_train.seed + static_cast<std::uint64_t>(k) * 7919;
    cloud = train(std::move(cloud), views, tc).cloud;

    rec.train_psnr = mean_weighted_psnr(cloud, train_ds, weights, bg);
    rec.heldout_psnr = std::numeric_limits<double>::quiet_NaN();
    if (!test_ds.views.empty()) {
      double acc = 0.0;
      for (const auto& v : test_ds.views) acc += psnr(render(cloud, v.camera, bg).color, v.image);
      rec.heldout_psnr = acc / test_ds.views.size();
    }
    rec.eval_psnr = evaluator ? evaluator(cloud, k) : std::numeric_limits<double>::quiet_NaN();

    // CL: learn the concept and inpaint every raw view.
    std::vector<ImageBuffer> raw;
    for (const auto& v : train_ds.views) raw.push_back(v.image);
    std::string concept_id;
    try {
      concept_id = backend.learn_concept(raw, result.fused_masks);
      std::vector<InpaintRequest> requests;
      for (std::size_t i = 0; i < n; ++i) {
        requests.push_back({raw[i], result.fused_masks[i], concept_id, rec.strength, config.inpaint_steps,
                            config.seed + static_cast<std::uint64_t>(k) * 100003 + i,
                            train_ds.views[i].camera.id});
      }
      inpainted = inpaint_all(backend, requests, config.max_in_flight);
    } catch (const VistaError& e) {
      fail(e.kind(), "cycle " + std::to_string(k) + ": " + e.what());
    }
    spdlog::info("cycle {}: theta {:.2f} strength {:.2f} train PSNR {:.2f} eval {:.2f}", k, rec.theta,
                 rec.strength, rec.train_psnr, rec.eval_psnr);
    result.report.cycles.push_back(rec);
    if (!out_dir.empty()) {
      write_cycle_artifacts(out_dir, k, train_ds, cloud, result.uncertainty, result.fused_masks, inpainted);
    }

    if (config.early_stop_db > 0.0 && !std::isnan(previous_psnr) &&
        std::abs(rec.train_psnr - previous_psnr) < config.early_stop_db && k < config.cycles) {
      result.report.stopped_early = true;
      spdlog::info("training PSNR settled after cycle {}", k);
      break;
    }
    previous_psnr = rec.train_psnr;
  }
  result.inpainted = std::move(inpainted);
  result.cloud = std::move(cloud);
  if (!out_dir.empty()) {
    save_cloud(out_dir / "cloud.ply", result.cloud);
    write_report_csv(out_dir / "report.csv", result.report);
  }
  return result;
}

void write_report_csv(const fs::path& path, const PipelineReport& report) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out.precision(8);
  out << "cycle,theta,strength,train_psnr,heldout_psnr,eval_psnr\n";
  out << "0,,," << report.initial_train_psnr << ",,\n";
  for (const auto& c : report.cycles) {
    out << c.k << "," << c.theta << "," << c.strength << "," << c.train_psnr << ",";
    if (!std::isnan(c.heldout_psnr)) out << c.heldout_psnr;
    out << ",";
    if (!std::isnan(c.eval_psnr)) out << c.eval_psnr;
    out << "\n";
  }
}

std::vector<SparsityRow> viewpoint_sparsity_study(const SceneDataset& dataset,
                                                  const std::vector<int>& intervals,
                                                  const PipelineConfig& config, InpaintBackend& backend) {
  for (int interval : intervals) {
    if (interval < 1) fail(ErrorKind::kInvalidArgument, "interval must be positive");
    const std::size_t kept = (dataset.views.size() + interval - 1) / interval;
    if (kept < 3) {
      fail(ErrorKind::kTooFewViews, "interval " + std::to_string(interval) + " leaves " +
                                        std::to_string(kept) + " views");
    }
  }
  PipelineConfig cfg = config;
  cfg.holdout = false;
  const Rgb bg = cfg.cycle_train.background;
  const GaussianCloud reference = vista_run(dataset, cfg, backend).cloud;
  std::vector<ImageBuffer> ref_renders;
  for (const auto& v : dataset.views) ref_renders.push_back(render(reference, v.camera, bg).color);

  std::vector<SparsityRow> rows;
  for (int interval : intervals) {
    SparsityRow row;
    row.interval = interval;
    if (interval == 1) {
      row.views = static_cast<int>(dataset.views.size());
      row.psnr = kPsnrIdentical;
      row.ssim = 1.0;
      rows.push_back(row);
      continue;
    }
    std::vector<int> idx;
    for (std::size_t i = 0; i < dataset.views.size(); i += interval) idx.push_back(static_cast<int>(i));
    row.views = static_cast<int>(idx.size());
    const GaussianCloud cloud = vista_run(subset(dataset, idx), cfg, backend).cloud;
    for (std::size_t i = 0; i < dataset.views.size(); ++i) {
      const ImageBuffer img = render(cloud, dataset.views[i].camera, bg).color;
      row.psnr += psnr(img, ref_renders[i]);
      row.ssim += ssim(img, ref_renders[i]);
    }
    row.psnr /= dataset.views.size();
    row.ssim /= dataset.views.size();
    spdlog::info("sparsity interval {} ({} views): PSNR {:.2f} SSIM {:.4f}", interval, row.views, row.psnr,
                 row.ssim);
    rows.push_back(row);
  }
  return rows;
}

void write_sparsity_csv(const fs::path& path, const std::vector<SparsityRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out.precision(8);
  out << "interval,psnr,ssim\n";
  for (const auto& r : rows) out << r.interval << "," << r.psnr << "," << r.ssim << "\n";
}

}  // namespace vista
