#include "vista/ssim.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "vista/error.hpp"

namespace vista {

namespace {

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> g{};
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// out(p) = sum over in-frame q of g(p - q) f(q). The kernel is symmetric, so this is also its adjoint.
class Window {
 public:
  Window(int w, int h) : w_(w), h_(h), g_(gaussian_taps()), tmp_(static_cast<std::size_t>(w) * h) {}

  void apply(const std::vector<double>& f, std::vector<double>& out) {
    const int r = kSsimWindow / 2;
    out.assign(f.size(), 0.0);
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int xx = x + k;
          if (xx >= 0 && xx < w_) s += g_[k + r] * f[static_cast<std::size_t>(y) * w_ + xx];
        }
        tmp_[static_cast<std::size_t>(y) * w_ + x] = s;
      }
    }
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int yy = y + k;
          if (yy >= 0 && yy < h_) s += g_[k + r] * tmp_[static_cast<std::size_t>(yy) * w_ + x];
        }
        out[static_cast<std::size_t>(y) * w_ + x] = s;
      }
    }
  }

 private:
  int w_, h_;
  std::array<double, kSsimWindow> g_;
  std::vector<double> tmp_;
};

}  // namespace

double ssim_weighted(const ImageBuffer& x, const ImageBuffer& y, const GrayMap& weights,
                     ImageBuffer* grad_x) {
  require_same_size(x, y, "ssim");
  require_same_size(x, weights, "ssim weights");
  const double total_w = std::accumulate(weights.data.begin(), weights.data.end(), 0.0);
  if (!(total_w > 0.0)) fail(ErrorKind::kInvalidArgument, "ssim weights sum to zero");

  const std::size_t n = x.pixel_count();
  Window win(x.width, x.height);
  std::vector<double> norm;
  win.apply(weights.data, norm);

  std::vector<double> fx(n), fy(n), fxx(n), fyy(n), fxy(n);
  std::vector<double> mx, my, mxx, myy, mxy;
  std::vector<double> cp(n), cq(n), cr(n), op, oq, orr;
  if (grad_x) *grad_x = ImageBuffer(x.width, x.height);

  const double scale = 1.0 / (3.0 * total_w);
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights.data[i], a = x.data[i * 3 + c], b = y.data[i * 3 + c];
      fx[i] = w * a;
      fy[i] = w * b;
      fxx[i] = w * a * a;
      fyy[i] = w * b * b;
      fxy[i] = w * a * b;
    }
    win.apply(fx, mx);
    win.apply(fy, my);
    win.apply(fxx, mxx);
    win.apply(fyy, myy);
    win.apply(fxy, mxy);
    for (std::size_t i = 0; i < n; ++i) {
      cp[i] = cq[i] = cr[i] = 0.0;
      const double wp = weights.data[i];
      if (wp == 0.0 || norm[i] <= 0.0) continue;
      const double inv = 1.0 / norm[i];
      const double ux = mx[i] * inv, uy = my[i] * inv;
      const double vx = mxx[i] * inv - ux * ux;
      const double vy = myy[i] * inv - uy * uy;
      const double cxy = mxy[i] * inv - ux * uy;
      const double a1 = 2.0 * ux * uy + kSsimC1, a2 = 2.0 * cxy + kSsimC2;
      const double b1 = ux * ux + uy * uy + kSsimC1, b2 = vx + vy + kSsimC2;
      const double s = a1 * a2 / (b1 * b2);
      acc += wp * s;
      if (!grad_x) continue;
      const double d_mu = 2.0 * uy * a2 / (b1 * b2) - s * 2.0 * ux / b1;
      const double d_var = -s / b2;
      const double d_cov = 2.0 * a1 / (b1 * b2);
      const double k = wp * scale * inv;
      cp[i] = k * (d_mu - 2.0 * ux * d_var - uy * d_cov);
      cq[i] = k * d_var;
      cr[i] = k * d_cov;
    }
    if (!grad_x) continue;
    win.apply(cp, op);
    win.apply(cq, oq);
    win.apply(cr, orr);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = x.data[i * 3 + c], b = y.data[i * 3 + c];
      grad_x->data[i * 3 + c] = weights.data[i] * (op[i] + 2.0 * a * oq[i] + b * orr[i]);
    }
  }
  return acc * scale;
}

}  // namespace vista
