#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "umt/glyph/scene.hpp"

namespace umt::design {

using glyph::Pattern;

enum class Verb { add, edit, translate };
const char* verb_name(Verb v);

/// One `verb [line "TEXT"] [at (x,y,w,h)] [font=N] [color=N] [size=N]
/// [theme=WORD]` statement, fields in that order, statements ';'-separated.
struct LineRequest {
  Verb verb = Verb::add;
  std::optional<std::string> text;
  std::optional<std::array<int, 4>> bbox;  // x, y, w, h
  std::optional<int> font_id;
  std::optional<int> color_id;
  std::optional<int> size_bucket;
  std::optional<std::string> theme;
};

struct Instruction {
  Pattern pattern = Pattern::auto_all;
  std::vector<LineRequest> lines;
  std::optional<std::string> theme_word;  // first theme across statements
  std::string raw;
  std::vector<int> tokens;
};

inline constexpr int kMaxRawLen = 512;
inline constexpr int kMaxTokens = 64;

Instruction parse_instruction(const std::string& raw);

/// Canonical serialization; parse(unparse(i)) reproduces i for any valid i.
std::string unparse(const Instruction& instr);

/// Token id table for the instruction encoder.
int vocab_size();
const std::vector<std::string>& vocab();

}  // namespace umt::design
