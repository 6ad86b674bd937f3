#pragma once
#include <cstdint>

#include "umt/core/image.hpp"
#include "umt/glyph/atlas.hpp"

namespace umt::glyph {

inline constexpr int kEncoderGlyphPx = 80;  // character-encoder input size

struct GlyphImage {
  Image pixels;  // cell_px x cell_px x 1, ink = 1
  int char_id = 0;
  int font_id = 0;
  std::uint64_t provenance_seed = 0;
};

/// Square grayscale render; bold (font_id 1) is a 1-pixel dilation of regular.
GlyphImage render_glyph(int char_id, int font_id, int cell_px);

/// Rectangular cell variant used by scene composition.
Image render_glyph_rect(int char_id, int font_id, int h, int w);

}  // namespace umt::glyph
