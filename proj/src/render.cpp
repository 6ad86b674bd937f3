#include "umt/glyph/render.hpp"

#include "umt/core/error.hpp"

namespace umt::glyph {

namespace {

// The bitmap sits inside a one-cell border so adjacent cells never touch.
constexpr int kGridW = kAtlasW + 2;
constexpr int kGridH = kAtlasH + 2;

}  // namespace

Image render_glyph_rect(int char_id, int font_id, int h, int w) {
  if (font_id != 0 && font_id != 1)
    throw AlphabetError("font id out of range: " + std::to_string(font_id));
  if (h < 8 || w < 4) throw AlphabetError("glyph cell too small");
  if (char_id != kSpaceId && (char_id < 0 || char_id >= kNumInkChars))
    throw AlphabetError("char id out of range: " + std::to_string(char_id));
  Image img(h, w, 1);
  if (char_id == kSpaceId) return img;
  for (int y = 0; y < h; ++y) {
    const int gy = y * kGridH / h;
    for (int x = 0; x < w; ++x) {
      const int gx = x * kGridW / w;
      if (atlas_bit(char_id, gy - 1, gx - 1)) img.at(y, x) = 1.0;
    }
  }
  if (font_id == 1) img = dilate(img, 1);
  return img;
}

GlyphImage render_glyph(int char_id, int font_id, int cell_px) {
  if (cell_px < 8) throw AlphabetError("glyph cell too small");
  GlyphImage g;
  g.pixels = render_glyph_rect(char_id, font_id, cell_px, cell_px);
  g.char_id = char_id;
  g.font_id = font_id;
  return g;
}

}  // namespace umt::glyph
