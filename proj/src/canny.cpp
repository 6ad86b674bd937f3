#include "umt/loss/canny.hpp"

#include <cmath>
#include <vector>

#include "umt/core/error.hpp"

namespace umt::loss {

using nn::Tensor;

namespace {

inline int mirr(int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); }

Tensor gauss_kernel(int k, double sigma) {
  const int r = k / 2;
  Tensor kw({k, k});
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kw.data[std::size_t(dy + r) * std::size_t(k) + std::size_t(dx + r)] = v;
      sum += v;
    }
  for (double& v : kw.data) v /= sum;
  return kw;
}

/// Reflect-padded convolution, row-major kernel accumulation. The 2-D (not
/// separated) accumulation order is load-bearing for golden bit-equality.
Tensor conv_reflect(const Tensor& x, const Tensor& kw) {
  const int h = x.dim(0), w = x.dim(1), k = kw.dim(0), r = k / 2;
  Tensor y({h, w});
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          s += kw.data[std::size_t(dy + r) * std::size_t(k) + std::size_t(dx + r)] *
               x.data[std::size_t(mirr(yy + dy, h)) * std::size_t(w) +
                      std::size_t(mirr(xx + dx, w))];
      y.data[std::size_t(yy) * std::size_t(w) + std::size_t(xx)] = s;
    }
  return y;
}

struct Gradients {
  Tensor mag;               // (H,W)
  std::vector<int> sector;  // 0: x, 1: x+y diagonal, 2: y, 3: x-y diagonal
  double max_mag = 0.0;
};

Gradients sobel_gradients(const Tensor& blur) {
  static const double kx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static const double ky[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  const int h = blur.dim(0), w = blur.dim(1);
  Gradients g{Tensor({h, w}), std::vector<int>(std::size_t(h) * std::size_t(w)), 0.0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double gx = 0.0, gy = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double p = blur.data[std::size_t(mirr(y + dy, h)) * std::size_t(w) +
                                     std::size_t(mirr(x + dx, w))];
          gx += kx[(dy + 1) * 3 + dx + 1] * p;
          gy += ky[(dy + 1) * 3 + dx + 1] * p;
        }
      const std::size_t i = std::size_t(y) * std::size_t(w) + std::size_t(x);
      const double m = std::sqrt(gx * gx + gy * gy);
      g.mag.data[i] = m;
      if (m > g.max_mag) g.max_mag = m;
      double th = std::atan2(gy, gx);
      if (th < 0.0) th += M_PI;
      // Half-open sectors split at pi/8, 3pi/8, 5pi/8, 7pi/8.
      g.sector[i] = (th < M_PI / 8.0 || th >= 7.0 * M_PI / 8.0) ? 0
                    : th < 3.0 * M_PI / 8.0                     ? 1
                    : th < 5.0 * M_PI / 8.0                     ? 2
                                                                : 3;
    }
  return g;
}

}  // namespace

Tensor canny(const Tensor& gray, const CannyParams& p) {
  if (gray.ndim() != 2) throw ShapeError("canny: expected (H,W) grayscale");
  if (p.kernel < 3 || p.kernel % 2 == 0 || p.sigma <= 0.0)
    throw ConfigError("canny: kernel must be odd >= 3, sigma positive");
  const int h = gray.dim(0), w = gray.dim(1);
  const Gradients g = sobel_gradients(conv_reflect(gray, gauss_kernel(p.kernel, p.sigma)));

  Tensor out({h, w});
  // Below 1e-12 the magnitudes are rounding residue of a flat image; scaling
  // thresholds relative to residue would turn the whole image into edges.
  if (g.max_mag <= 1e-12) return out;

  static const int offs[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  auto mag_at = [&](int y, int x) {
    return (y < 0 || y >= h || x < 0 || x >= w)
               ? 0.0
               : g.mag.data[std::size_t(y) * std::size_t(w) + std::size_t(x)];
  };
  std::vector<std::uint8_t> kept(std::size_t(h) * std::size_t(w), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * std::size_t(w) + std::size_t(x);
      const int dx = offs[g.sector[i]][0], dy = offs[g.sector[i]][1];
      kept[i] = g.mag.data[i] >= mag_at(y + dy, x + dx) &&
                g.mag.data[i] >= mag_at(y - dy, x - dx);
    }

  const double t_low = p.low * g.max_mag, t_high = p.high * g.max_mag;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (kept[i] && g.mag.data[i] >= t_high) {
      out.data[i] = 1.0;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int y = int(i) / w, x = int(i) % w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const std::size_t j = std::size_t(ny) * std::size_t(w) + std::size_t(nx);
        if (out.data[j] == 0.0 && kept[j] && g.mag.data[j] >= t_low) {
          out.data[j] = 1.0;
          stack.push_back(j);
        }
      }
  }
  return out;
}

Tensor canny(const Image& img, const CannyParams& p) {
  const Image gray = img.c == 1 ? img : luminance(img);
  Tensor t({gray.h, gray.w});
  t.data.assign(gray.data.begin(), gray.data.end());
  return canny(t, p);
}

}  // namespace umt::loss
