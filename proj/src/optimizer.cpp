#include "vista/optimizer.hpp"

#include <cmath>
#include <random>

namespace vista {

void AdamState::reset(const GaussianCloud& cloud) {
  m.resize(0, cloud.sh_degree);
  v.resize(0, cloud.sh_degree);
  m.resize(cloud.size(), cloud.sh_degree);
  v.resize(cloud.size(), cloud.sh_degree);
  m.set_zero();
  v.set_zero();
  step = 0;
}

namespace {

struct AdamScalars {
  double c1, c2;
};

template <typename Vec>
void update(Vec& param, const Vec& g, Vec& m, Vec& v, double lr, const AdamScalars& s, bool apply) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
  if (!apply) return;
  const Vec mhat = m / s.c1;
  const Vec vhat = v / s.c2;
  param -= lr * mhat.cwiseQuotient((vhat.array().sqrt() + kAdamEps).matrix());
}

void update_scalar(double& param, double g, double& m, double& v, double lr, const AdamScalars& s,
                   bool apply) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
  if (apply) param -= lr * (m / s.c1) / (std::sqrt(v / s.c2) + kAdamEps);
}

}  // namespace

void adam_step(GaussianCloud& cloud, const SplatArrays& grads, AdamState& state,
               const LearningRates& lr) {
  ++state.step;
  const AdamScalars s{1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step)),
                      1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step))};
  const std::size_t stride = cloud.sh_stride();
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    bool any = !grads.means[j].isZero(0.0) || !grads.log_scales[j].isZero(0.0) ||
               !grads.rotations[j].isZero(0.0) || grads.opacity_logits[j] != 0.0;
    for (std::size_t k = 0; !any && k < stride; ++k) any = grads.sh[j * stride + k] != 0.0;

    update(cloud.means[j], grads.means[j], state.m.means[j], state.v.means[j], lr.means, s, any);
    update(cloud.log_scales[j], grads.log_scales[j], state.m.log_scales[j], state.v.log_scales[j],
           lr.scale, s, any);
    update(cloud.rotations[j], grads.rotations[j], state.m.rotations[j], state.v.rotations[j],
           lr.rotation, s, any);
    update_scalar(cloud.opacity_logits[j], grads.opacity_logits[j], state.m.opacity_logits[j],
                  state.v.opacity_logits[j], lr.opacity, s, any);
    for (std::size_t k = 0; k < stride; ++k) {
      const std::size_t i = j * stride + k;
      update_scalar(cloud.sh[i], grads.sh[i], state.m.sh[i], state.v.sh[i],
                    k < 3 ? lr.sh_dc : lr.sh_rest, s, any);
    }
    cloud.rotations[j].normalize();
  }
}

void DensifyStats::reset(std::size_t n) {
  grad_sum.assign(n, 0.0);
  count.assign(n, 0);
}

void DensifyStats::add(const GradientSet& grads) {
  if (grad_sum.size() != grads.size()) reset(grads.size());
  for (std::size_t j = 0; j < grads.size(); ++j) {
    if (!grads.visible[j]) continue;
    grad_sum[j] += grads.screen_grad[j];
    ++count[j];
  }
}

DensifyReport densify_prune(GaussianCloud& cloud, DensifyStats& stats, AdamState& state,
                            const DensifyConfig& config) {
  DensifyReport report;
  const std::size_t n = cloud.size();
  if (stats.grad_sum.size() != n) stats.reset(n);
  const int deg = cloud.sh_degree;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  GaussianCloud grown;
  grown.sh_degree = deg;
  std::vector<bool> keep(n, true);
  for (std::size_t j = 0; j < n; ++j) {
    if (stats.count[j] == 0) continue;
    if (n + grown.size() >= config.max_splats) break;
    const double avg = stats.grad_sum[j] / stats.count[j];
    if (avg < config.grad_threshold) continue;
    const double max_scale = std::exp(cloud.log_scales[j].maxCoeff());
    if (max_scale <= config.percent_dense * config.scene_extent) {
      grown.append_from(cloud, j, deg);
      ++report.cloned;
      continue;
    }
    const Eigen::Matrix3d r = cloud.rotation_matrix(j);
    const Eigen::Vector3d scale = cloud.log_scales[j].array().exp();
    for (int child = 0; child < 2; ++child) {
      Eigen::Vector3d u;
      for (int k = 0; k < 3; ++k) {
        do {
          u[k] = normal(rng);
        } while (std::abs(u[k]) > 3.0);
      }
      grown.append_from(cloud, j, deg);
      grown.means.back() = cloud.means[j] + r * scale.cwiseProduct(u);
      grown.log_scales.back() = cloud.log_scales[j].array() - std::log(1.6);
    }
    keep[j] = false;
    ++report.split;
  }

  // Prune applies to the survivors and to the new splats alike.
  std::vector<bool> keep_all(keep);
  for (std::size_t j = 0; j < grown.size(); ++j) keep_all.push_back(true);

  for (std::size_t j = 0; j < grown.size(); ++j) {
    cloud.append_from(grown, j, deg);
  }
  SplatArrays zeros;
  zeros.resize(grown.size(), deg);
  zeros.set_zero();
  for (std::size_t j = 0; j < grown.size(); ++j) {
    state.m.append_from(zeros, j, deg);
    state.v.append_from(zeros, j, deg);
  }
  for (std::size_t j = 0; j < keep_all.size(); ++j) {
    if (keep_all[j] && cloud.opacity(j) < config.prune_opacity) {
      keep_all[j] = false;
      ++report.pruned;
    }
  }
  cloud.keep(keep_all, deg);
  state.m.keep(keep_all, deg);
  state.v.keep(keep_all, deg);
  stats.reset(cloud.size());
  return report;
}

}  // namespace vista
