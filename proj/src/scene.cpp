#include "umt/glyph/scene.hpp"

#include <cmath>

#include "umt/core/error.hpp"
#include "umt/core/rng.hpp"
#include "umt/glyph/render.hpp"

namespace umt::glyph {

const char* pattern_name(Pattern p) {
  switch (p) {
    case Pattern::full_spec: return "FULL_SPEC";
    case Pattern::auto_layout: return "AUTO_LAYOUT";
    case Pattern::auto_text: return "AUTO_TEXT";
    case Pattern::auto_all: return "AUTO_ALL";
  }
  return "FULL_SPEC";
}

Pattern pattern_from_name(const std::string& name) {
  if (name == "FULL_SPEC") return Pattern::full_spec;
  if (name == "AUTO_LAYOUT") return Pattern::auto_layout;
  if (name == "AUTO_TEXT") return Pattern::auto_text;
  if (name == "AUTO_ALL") return Pattern::auto_all;
  throw CorpusError("unknown pattern name: " + name);
}

const std::array<std::array<double, 3>, kPaletteSize>& text_palette() {
  // Dark inks; backgrounds are kept light so every palette entry reads.
  static const std::array<std::array<double, 3>, kPaletteSize> kPalette = {{
      {0.05, 0.05, 0.05},  // black
      {0.55, 0.08, 0.08},  // red
      {0.05, 0.40, 0.10},  // green
      {0.08, 0.10, 0.55},  // blue
      {0.40, 0.10, 0.45},  // purple
      {0.05, 0.38, 0.40},  // teal
      {0.35, 0.22, 0.08},  // brown
      {0.55, 0.30, 0.05},  // orange
  }};
  return kPalette;
}

void validate_line(const TextLine& l, int canvas_h, int canvas_w) {
  if (l.text.empty()) throw LayoutError("line text is empty");
  if (static_cast<int>(l.text.size()) > kMaxCharsPerLine)
    throw LayoutError("line text longer than " + std::to_string(kMaxCharsPerLine));
  if (!text_in_alphabet(l.text))
    throw AlphabetError("line text outside alphabet: " + l.text);
  if (l.x < 0 || l.y < 0 || l.w <= 0 || l.h <= 0 || l.x + l.w > canvas_w ||
      l.y + l.h > canvas_h)
    throw LayoutError("line bbox outside canvas");
  if (l.w < static_cast<int>(l.text.size()) * kMinCellW)
    throw LayoutError("line bbox narrower than text at minimum cell width");
  if (l.h < kMinCellH) throw LayoutError("line bbox shorter than glyph minimum");
  if (l.font_id < 0 || l.font_id >= kNumFonts) throw LayoutError("font id");
  if (l.color_id < 0 || l.color_id >= kPaletteSize) throw LayoutError("color id");
  if (l.size_bucket < 0 || l.size_bucket >= kNumSizeBuckets)
    throw LayoutError("size bucket");
}

bool boxes_overlap(const TextLine& a, const TextLine& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

int cell_left(int w, int n, int i) {
  return static_cast<int>(std::llround(double(i) * w / n));
}

namespace {

std::array<double, 3> light_color(Rng& rng) {
  // luminance stays well above every palette ink
  return {rng.uniform(0.70, 0.97), rng.uniform(0.70, 0.97), rng.uniform(0.70, 0.97)};
}

Image make_background(int h, int w, const BackgroundSpec& spec, Rng& rng) {
  Image bg(h, w, 3);
  switch (spec.kind) {
    case BgKind::solid: {
      const auto c = light_color(rng);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int ch = 0; ch < 3; ++ch) bg.at(y, x, ch) = c[std::size_t(ch)];
      break;
    }
    case BgKind::gradient: {
      const auto c0 = light_color(rng);
      const auto c1 = light_color(rng);
      const int dir = int(rng.below(3));  // 0 horizontal, 1 vertical, 2 diagonal
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double t = 0.0;
          if (dir == 0)
            t = w > 1 ? double(x) / (w - 1) : 0.0;
          else if (dir == 1)
            t = h > 1 ? double(y) / (h - 1) : 0.0;
          else
            t = (h + w > 2) ? double(x + y) / (h + w - 2) : 0.0;
          for (int ch = 0; ch < 3; ++ch)
            bg.at(y, x, ch) =
                c0[std::size_t(ch)] + t * (c1[std::size_t(ch)] - c0[std::size_t(ch)]);
        }
      break;
    }
    case BgKind::noise: {
      // low-frequency: a 4x4 color lattice upsampled bilinearly
      Image lattice(4, 4, 3);
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
          const auto c = light_color(rng);
          for (int ch = 0; ch < 3; ++ch) lattice.at(y, x, ch) = c[std::size_t(ch)];
        }
      bg = resize_bilinear(lattice, h, w);
      break;
    }
  }
  return bg;
}

}  // namespace

SceneSample compose_scene(const DesignPlan& plan, const BackgroundSpec& spec,
                          std::uint64_t seed) {
  const int h = plan.canvas_h, w = plan.canvas_w;
  if (h < 32 || w < 32) throw LayoutError("canvas smaller than 32x32");
  for (const auto& l : plan.lines) validate_line(l, h, w);
  for (std::size_t i = 0; i < plan.lines.size(); ++i)
    for (std::size_t j = i + 1; j < plan.lines.size(); ++j)
      if (boxes_overlap(plan.lines[i], plan.lines[j]))
        throw LayoutError("line bboxes overlap");

  Rng rng(seed);
  SceneSample s;
  s.erased = make_background(h, w, spec, rng);
  s.image = s.erased;
  s.lines = plan.lines;

  for (const auto& l : plan.lines) {
    const int n = static_cast<int>(l.text.size());
    const auto& ink = text_palette()[std::size_t(l.color_id)];
    for (int i = 0; i < n; ++i) {
      const int x0 = l.x + cell_left(l.w, n, i);
      const int x1 = l.x + cell_left(l.w, n, i + 1);
      if (x1 <= x0) continue;
      const Image cell =
          render_glyph_rect(char_to_id(l.text[std::size_t(i)]), l.font_id, l.h, x1 - x0);
      for (int y = 0; y < l.h; ++y)
        for (int x = 0; x < x1 - x0; ++x)
          if (cell.at(y, x) != 0.0)
            for (int ch = 0; ch < 3; ++ch)
              s.image.at(l.y + y, x0 + x, ch) = ink[std::size_t(ch)];
    }
  }

  quantize8_inplace(s.image);
  quantize8_inplace(s.erased);

  // mask: union of boxes, then dilation (equals union of dilated boxes)
  s.mask = Image(h, w, 1);
  for (const auto& l : plan.lines)
    for (int y = l.y; y < l.y + l.h; ++y)
      for (int x = l.x; x < l.x + l.w; ++x) s.mask.at(y, x) = 1.0;
  s.mask = dilate(s.mask, kMaskDilationPx);

  s.condition = Image(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < 3; ++ch)
        s.condition.at(y, x, ch) = s.image.at(y, x, ch) * s.mask.at(y, x);
  return s;
}

}  // namespace umt::glyph
