#include "umt/glyph/atlas.hpp"

#include <array>

#include "umt/core/error.hpp"

namespace umt::glyph {

namespace {

// 5x7 bitmaps, one string per row, '#' = ink. Index order matches alphabet().
constexpr const char* kBitmaps[kNumInkChars][kAtlasH] = {
    // A
    {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},
    // B
    {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},
    // C
    {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},
    // D
    {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."},
    // E
    {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},
    // H
    {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},
    // I
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"},
    // L
    {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},
    // M
    {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},
    // N
    {"#...#", "##..#", "##..#", "#.#.#", "#..##", "#..##", "#...#"},
    // O
    {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},
    // P
    {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},
    // R
    {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},
    // S
    {".####", "#....", "#....", ".###.", "....#", "....#", "####."},
    // T
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},
    // U
    {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},
    // 0
    {".###.", "#..##", "#.#.#", "#.#.#", "##..#", "#...#", ".###."},
    // 1
    {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", "#####"},
    // 2
    {".###.", "#...#", "....#", "..##.", ".#...", "#....", "#####"},
    // 3
    {"####.", "....#", "....#", ".###.", "....#", "....#", "####."},
};

const std::string kAlphabet = "ABCDEHILMNOPRSTU0123";

}  // namespace

const std::string& alphabet() { return kAlphabet; }

int char_to_id(char c) {
  if (c == ' ') return kSpaceId;
  const auto pos = kAlphabet.find(c);
  if (pos == std::string::npos)
    throw AlphabetError(std::string("character not in alphabet: '") + c + "'");
  return static_cast<int>(pos);
}

char id_to_char(int id) {
  if (id == kSpaceId) return ' ';
  if (id < 0 || id >= kNumInkChars)
    throw AlphabetError("char id out of range: " + std::to_string(id));
  return kAlphabet[std::size_t(id)];
}

bool atlas_bit(int char_id, int y, int x) {
  if (char_id == kSpaceId) return false;
  if (char_id < 0 || char_id >= kNumInkChars)
    throw AlphabetError("char id out of range: " + std::to_string(char_id));
  if (y < 0 || y >= kAtlasH || x < 0 || x >= kAtlasW) return false;
  return kBitmaps[char_id][y][x] == '#';
}

bool text_in_alphabet(const std::string& s) {
  for (char c : s)
    if (c != ' ' && kAlphabet.find(c) == std::string::npos) return false;
  return true;
}

}  // namespace umt::glyph
