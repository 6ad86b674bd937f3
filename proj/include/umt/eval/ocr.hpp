#pragma once
#include <string>
#include <vector>

#include "umt/core/image.hpp"
#include "umt/enc/char_encoder.hpp"
#include "umt/glyph/scene.hpp"

namespace umt::eval {

/// Cut one 80x80 grayscale crop per expected character: the line bbox is
/// split into len(text) equal-width cells. Rows are cell order. The bbox
/// must lie inside the image -> ShapeError.
nn::Tensor line_cell_crops(const Image& image, const glyph::TextLine& line);

/// Read a line back by classifying each cell independently; the result
/// always has exactly len(line.text) characters (no rejection class).
std::string ocr_recognize(const Image& image, const glyph::TextLine& line,
                          const enc::CharEncoder& ce);

std::vector<std::string> ocr_recognize_lines(const Image& image,
                                             const std::vector<glyph::TextLine>& lines,
                                             const enc::CharEncoder& ce);

}  // namespace umt::eval
