#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vista/backend.hpp"
#include "vista/scene_io.hpp"
#include "vista/trainer.hpp"
#include "vista/visibility.hpp"

namespace vista {

struct PipelineConfig {
  int cycles = 3;
  double theta_increment = 0.1;
  double strength_ratio = 0.2;
  bool multiplicative_strength = false;
  InitConfig init;
  TrainConfig initial_train;
  TrainConfig cycle_train;
  UncertaintyOptions uncertainty;
  bool anchor_raw = true;
  /// Stop when the weighted training PSNR changes by less than this between cycles; <= 0 disables.
  double early_stop_db = 0.1;
  bool holdout = false;  // 60/40 train/test split
  int inpaint_steps = 50;
  int max_in_flight = 2;
  std::uint64_t seed = 0;
};

/// Throws kInvalidArgument when a schedule or count is out of range.
void validate(const PipelineConfig& config);

/// Reads a JSON object whose keys mirror PipelineConfig; absent keys keep their defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// (k - 1) * increment.
double theta_schedule(int k, const PipelineConfig& config);
/// max(r, 1 - r (k - 1)), or max(r, (1 - r)^(k - 1)) with the multiplicative option.
double strength_schedule(int k, const PipelineConfig& config);

struct CycleRecord {
  int k = 0;
  double theta = 0.0;
  double strength = 0.0;
  double train_psnr = 0.0;    // weighted by 1 - M'
  double heldout_psnr = 0.0;  // NaN without a held-out split
  double eval_psnr = 0.0;     // NaN without an evaluator
};

struct PipelineReport {
  double initial_train_psnr = 0.0;
  std::vector<CycleRecord> cycles;
  bool stopped_early = false;
};

struct PipelineResult {
  GaussianCloud cloud;
  PipelineReport report;
  std::vector<int> train_views;  // dataset indices used for training
  std::vector<int> test_views;
  std::vector<UncertaintyMap> uncertainty;  // last cycle, per training view
  std::vector<MaskMap> fused_masks;
  std::vector<ImageBuffer> inpainted;
};

/// Called after each cycle's retraining with the current cloud; returns a PSNR to log.
using CycleEvaluator = std::function<double(const GaussianCloud&, int k)>;

/// Initial fit, then K alternations of uncertainty-weighted retraining and backend inpainting.
/// Dataset masks are the prior object masks. Artifacts go to `out_dir` when it is non-empty.
PipelineResult vista_run(const SceneDataset& dataset, const PipelineConfig& config,
                         InpaintBackend& backend, const CycleEvaluator& evaluator = {},
                         const std::filesystem::path& out_dir = {});

void write_report_csv(const std::filesystem::path& path, const PipelineReport& report);

struct SparsityRow {
  int interval = 1;
  int views = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

/// Every `interval`-th view is kept; each model is scored by its renders at all dataset cameras
/// against the renders of a model fitted on all views. Throws kTooFewViews below 3 views.
std::vector<SparsityRow> viewpoint_sparsity_study(const SceneDataset& dataset,
                                                  const std::vector<int>& intervals,
                                                  const PipelineConfig& config, InpaintBackend& backend);

void write_sparsity_csv(const std::filesystem::path& path, const std::vector<SparsityRow>& rows);

/// Views whose index is 0, 2 or 4 mod 5 train; the rest test.
void holdout_split(std::size_t n, std::vector<int>& train, std::vector<int>& test);

/// PSNR from the W-weighted mean squared error.
double weighted_psnr(const ImageBuffer& a, const ImageBuffer& b, const GrayMap& w);

}  // namespace vista
