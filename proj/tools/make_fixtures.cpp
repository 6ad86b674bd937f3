// Writes the golden test fixtures. Run once from the repository root:
//   build/make_fixtures tests/fixtures
// The images are 8-bit quantized before saving so the on-disk values are the
// exact values the tests recompute from. Edge goldens come from the
// reference detector in tests/oracles, not from the library.
#include <cmath>
#include <cstdio>
#include <string>

#include "oracles/canny_ref.hpp"
#include "umt/core/image.hpp"
#include "umt/glyph/corpus.hpp"

using namespace umt;

namespace {

Image gray_image(int h, int w) { return Image(h, w, 1); }

Image glyph_scene_luma() {
  glyph::CorpusConfig cfg;
  cfg.canvas = 64;
  cfg.seed = 7;
  return luminance(glyph::sample_scene(cfg, 3).image);
}

Image vertical_step() {
  Image img = gray_image(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(y, x, 0) = x < 32 ? 0.2 : 0.8;
  return img;
}

Image ramp_with_disc() {
  Image img = gray_image(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      double v = (x + y) / 126.0 * 0.7;
      const double dx = x - 40.5, dy = y - 22.5;
      if (dx * dx + dy * dy < 13.0 * 13.0) v = 0.95 - v;
      img.at(y, x, 0) = v;
    }
  return img;
}

Image checkerboard() {
  Image img = gray_image(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      img.at(y, x, 0) = ((x / 8 + y / 8) % 2) ? 0.85 : 0.15;
  return img;
}

Image sinusoid() {
  Image img = gray_image(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      img.at(y, x, 0) =
          0.5 + 0.45 * std::sin(x * 0.31) * std::cos(y * 0.23 + 0.7);
  return img;
}

void emit(const std::string& dir, const std::string& name, Image img) {
  quantize8_inplace(img);
  write_raster(dir + "/" + name + ".pgm", img);

  std::vector<double> gray(img.data.begin(), img.data.end());
  const auto edges = test::canny_reference(gray, img.h, img.w);
  Image em(img.h, img.w, 1);
  for (std::size_t i = 0; i < edges.size(); ++i) em.data[i] = edges[i] ? 1.0 : 0.0;
  write_raster(dir + "/" + name + ".edges.pgm", em);
  std::printf("wrote %s (+ edges)\n", name.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "tests/fixtures";
  emit(dir, "canny_scene", glyph_scene_luma());
  emit(dir, "canny_step", vertical_step());
  emit(dir, "canny_ramp_disc", ramp_with_disc());
  emit(dir, "canny_checker", checkerboard());
  emit(dir, "canny_sinusoid", sinusoid());
  return 0;
}
