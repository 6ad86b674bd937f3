#include "umt/eval/ocr.hpp"

#include "umt/core/error.hpp"
#include "umt/glyph/atlas.hpp"
#include "umt/glyph/render.hpp"

namespace umt::eval {

nn::Tensor line_cell_crops(const Image& image, const glyph::TextLine& line) {
  const int n = static_cast<int>(line.text.size());
  const int px = glyph::kEncoderGlyphPx;
  if (line.w < 1 || line.h < 1 || line.x < 0 || line.y < 0 ||
      line.x + line.w > image.w || line.y + line.h > image.h)
    throw ShapeError("ocr: line bbox outside the image");
  nn::Tensor crops({n, 1, px, px});
  for (int i = 0; i < n; ++i) {
    const int l = glyph::cell_left(line.w, n, i);
    const int r = glyph::cell_left(line.w, n, i + 1);
    if (r - l < 1) throw ShapeError("ocr: cell narrower than one pixel");
    Image cell = crop(image, line.y, line.x + l, line.h, r - l);
    if (cell.c == 3) cell = luminance(cell);
    cell = resize_bilinear(cell, px, px);
    std::copy(cell.data.begin(), cell.data.end(),
              crops.data.begin() + static_cast<std::size_t>(i) * px * px);
  }
  return crops;
}

std::string ocr_recognize(const Image& image, const glyph::TextLine& line,
                          const enc::CharEncoder& ce) {
  if (line.text.empty()) return "";
  const std::vector<int> ids = ce.classify_chars(line_cell_crops(image, line));
  std::string out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(glyph::id_to_char(id));
  return out;
}

std::vector<std::string> ocr_recognize_lines(const Image& image,
                                             const std::vector<glyph::TextLine>& lines,
                                             const enc::CharEncoder& ce) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const glyph::TextLine& l : lines) out.push_back(ocr_recognize(image, l, ce));
  return out;
}

}  // namespace umt::eval
