#pragma once
#include <string>

namespace umt::glyph {

// Committed bitmap font: 16 uppercase letters + 4 digits on a 5x7 grid.
// Space renders blank but is a real alphabet member (and classifier class)
// so background cells have a label.
inline constexpr int kAtlasW = 5;
inline constexpr int kAtlasH = 7;
inline constexpr int kNumInkChars = 20;
inline constexpr int kSpaceId = 20;
inline constexpr int kNumCharClasses = 21;
inline constexpr int kNumFonts = 2;

const std::string& alphabet();  // ink characters only, id order

int char_to_id(char c);  // AlphabetError on characters outside alphabet+space
char id_to_char(int id);
bool atlas_bit(int char_id, int y, int x);
bool text_in_alphabet(const std::string& s);

}  // namespace umt::glyph
