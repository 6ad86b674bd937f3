#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace umt {

/// Row-major H×W×C raster with values in [0,1]. C is 1 (grayscale / mask)
/// or 3 (RGB). Corpus files round-trip through 8-bit PPM/PGM, so anything
/// written to disk is expected to sit on the k/255 grid.
struct Image {
  int h = 0, w = 0, c = 1;
  std::vector<double> data;

  Image() = default;
  Image(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), c(c_), data(std::size_t(h_) * w_ * c_, fill) {}

  double& at(int y, int x, int ch = 0) {
    return data[(std::size_t(y) * w + std::size_t(x)) * c + std::size_t(ch)];
  }
  double at(int y, int x, int ch = 0) const {
    return data[(std::size_t(y) * w + std::size_t(x)) * c + std::size_t(ch)];
  }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }
};

/// Snap to the 8-bit grid k/255 (round-half-up); keeps in-memory pixels
/// identical to what a PPM round-trip yields.
double quantize8(double v);
void quantize8_inplace(Image& img);

Image luminance(const Image& rgb);          // 0.299 R + 0.587 G + 0.114 B
Image resize_bilinear(const Image& src, int out_h, int out_w);
Image crop(const Image& src, int y, int x, int h, int w);

/// Binary morphological dilation with a (2r+1)×(2r+1) box element.
Image dilate(const Image& mask, int radius);

/// Lossless raster IO. RGB images use binary PPM (P6), single-channel use
/// binary PGM (P5). Writes are atomic: temp file + rename.
void write_raster(const std::string& path, const Image& img);
Image read_raster(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace umt
