#include "umt/design/parser.hpp"

#include <cctype>

#include "umt/core/error.hpp"
#include "umt/glyph/atlas.hpp"

namespace umt::design {

namespace {

// Token ids. Numbers and text are spelled character-by-character so the
// vocabulary stays fixed no matter what coordinates or words appear.
enum TokId : int {
  kUnk = 0,
  kEdit = 1,
  kAdd = 2,
  kTranslate = 3,
  kLine = 4,
  kAt = 5,
  kFont = 6,
  kColor = 7,
  kSize = 8,
  kTheme = 9,
  kQuote = 10,
  kLParen = 11,
  kRParen = 12,
  kComma = 13,
  kSemi = 14,
  kEq = 15,
  kDigit0 = 16,  // ..25
  kLetterA = 26,  // ..51
  kSpace = 52,
};

constexpr int kVocabSize = 53;

int char_token(char c) {
  if (c >= '0' && c <= '9') return kDigit0 + (c - '0');
  if (c >= 'A' && c <= 'Z') return kLetterA + (c - 'A');
  if (c == ' ') return kSpace;
  return kUnk;
}

struct Lexeme {
  enum Kind { word, number, str, punct, end } kind = end;
  std::string text;
  std::size_t off = 0;
};

std::vector<Lexeme> lex(const std::string& raw) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == ' ' || c == '\t' || c == '\n') {
      ++i;
      continue;
    }
    if (c == '(' || c == ')' || c == ',' || c == ';' || c == '=') {
      out.push_back({Lexeme::punct, std::string(1, c), i});
      ++i;
      continue;
    }
    if (c == '"') {
      const std::size_t start = i++;
      std::string s;
      while (i < raw.size() && raw[i] != '"') s += raw[i++];
      if (i >= raw.size()) throw ParseError("unterminated string", start);
      ++i;
      out.push_back({Lexeme::str, s, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = i;
      std::string s;
      while (i < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i])))
        s += raw[i++];
      if (s.size() > 6) throw ParseError("number too long", start);
      out.push_back({Lexeme::number, s, start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = i;
      std::string s;
      while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i])))
        s += raw[i++];
      out.push_back({Lexeme::word, s, start});
      continue;
    }
    throw ParseError("unexpected character", i);
  }
  out.push_back({Lexeme::end, "", raw.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& raw) : raw_(raw), lx_(lex(raw)) {}

  Instruction run() {
    Instruction ins;
    ins.raw = raw_;
    ins.lines.push_back(statement());
    while (peek().kind == Lexeme::punct && peek().text == ";") {
      emit(kSemi);
      advance();
      ins.lines.push_back(statement());
    }
    if (peek().kind != Lexeme::end)
      throw ParseError("trailing input after statement", peek().off);

    bool all_text = true, any_text = false, all_box = true, any_box = false;
    for (const auto& l : ins.lines) {
      all_text = all_text && l.text.has_value();
      any_text = any_text || l.text.has_value();
      all_box = all_box && l.bbox.has_value();
      any_box = any_box || l.bbox.has_value();
      if (!ins.theme_word && l.theme) ins.theme_word = l.theme;
    }
    if (any_text != all_text || any_box != all_box)
      throw ParseError("mixed text/bbox presence across statements", 0);
    ins.pattern = all_text ? (all_box ? Pattern::full_spec : Pattern::auto_layout)
                           : (all_box ? Pattern::auto_text : Pattern::auto_all);
    if (static_cast<int>(tokens_.size()) > kMaxTokens)
      throw ParseError("instruction exceeds token budget", raw_.size());
    ins.tokens = std::move(tokens_);
    return ins;
  }

 private:
  const Lexeme& peek() const { return lx_[pos_]; }
  void advance() { ++pos_; }
  void emit(int id) { tokens_.push_back(id); }
  void emit_chars(const std::string& s) {
    for (char c : s) emit(char_token(c));
  }

  int expect_number(const char* what) {
    if (peek().kind != Lexeme::number)
      throw ParseError(std::string("expected number for ") + what, peek().off);
    emit_chars(peek().text);
    const int v = std::stoi(peek().text);
    advance();
    return v;
  }

  void expect_punct(const char* p, int tok) {
    if (peek().kind != Lexeme::punct || peek().text != p)
      throw ParseError(std::string("expected '") + p + "'", peek().off);
    emit(tok);
    advance();
  }

  LineRequest statement() {
    LineRequest req;
    if (peek().kind != Lexeme::word)
      throw ParseError("expected verb (edit|add|translate)", peek().off);
    if (peek().text == "add") {
      req.verb = Verb::add;
      emit(kAdd);
    } else if (peek().text == "edit") {
      req.verb = Verb::edit;
      emit(kEdit);
    } else if (peek().text == "translate") {
      req.verb = Verb::translate;
      emit(kTranslate);
    } else {
      throw ParseError("unknown verb: " + peek().text, peek().off);
    }
    advance();

    int rank = -1;  // enforces the fixed field order, one use per field
    while (peek().kind == Lexeme::word) {
      const std::string kw = peek().text;
      const std::size_t off = peek().off;
      int this_rank;
      if (kw == "line")
        this_rank = 0;
      else if (kw == "at")
        this_rank = 1;
      else if (kw == "font")
        this_rank = 2;
      else if (kw == "color")
        this_rank = 3;
      else if (kw == "size")
        this_rank = 4;
      else if (kw == "theme")
        this_rank = 5;
      else
        throw ParseError("unknown field: " + kw, off);
      if (this_rank <= rank)
        throw ParseError("field out of order or repeated: " + kw, off);
      rank = this_rank;
      advance();

      if (kw == "line") {
        emit(kLine);
        if (peek().kind != Lexeme::str)
          throw ParseError("expected quoted text after 'line'", peek().off);
        const std::string text = peek().text;
        if (!glyph::text_in_alphabet(text))
          throw AlphabetError("text outside alphabet: " + text);
        emit(kQuote);
        emit_chars(text);
        emit(kQuote);
        advance();
        req.text = text;
      } else if (kw == "at") {
        emit(kAt);
        expect_punct("(", kLParen);
        std::array<int, 4> b{};
        b[0] = expect_number("x");
        expect_punct(",", kComma);
        b[1] = expect_number("y");
        expect_punct(",", kComma);
        b[2] = expect_number("w");
        expect_punct(",", kComma);
        b[3] = expect_number("h");
        expect_punct(")", kRParen);
        req.bbox = b;
      } else if (kw == "theme") {
        emit(kTheme);
        expect_punct("=", kEq);
        if (peek().kind != Lexeme::word)
          throw ParseError("expected word after 'theme='", peek().off);
        const std::string w = peek().text;
        if (!glyph::text_in_alphabet(w))
          throw AlphabetError("theme word outside alphabet: " + w);
        emit_chars(w);
        advance();
        req.theme = w;
      } else {
        emit(kw == "font" ? kFont : kw == "color" ? kColor : kSize);
        expect_punct("=", kEq);
        const int v = expect_number(kw.c_str());
        if (kw == "font")
          req.font_id = v;
        else if (kw == "color")
          req.color_id = v;
        else
          req.size_bucket = v;
      }
    }
    if (peek().kind != Lexeme::end &&
        !(peek().kind == Lexeme::punct && peek().text == ";"))
      throw ParseError("expected field, ';' or end of input", peek().off);
    return req;
  }

  const std::string& raw_;
  std::vector<Lexeme> lx_;
  std::size_t pos_ = 0;
  std::vector<int> tokens_;
};

}  // namespace

const char* verb_name(Verb v) {
  switch (v) {
    case Verb::add: return "add";
    case Verb::edit: return "edit";
    case Verb::translate: return "translate";
  }
  return "add";
}

Instruction parse_instruction(const std::string& raw) {
  if (static_cast<int>(raw.size()) > kMaxRawLen)
    throw ParseError("instruction longer than 512 bytes", kMaxRawLen);
  return Parser(raw).run();
}

std::string unparse(const Instruction& instr) {
  std::string out;
  for (std::size_t i = 0; i < instr.lines.size(); ++i) {
    const auto& l = instr.lines[i];
    if (i) out += " ; ";
    out += verb_name(l.verb);
    if (l.text) out += " line \"" + *l.text + "\"";
    if (l.bbox)
      out += " at (" + std::to_string((*l.bbox)[0]) + "," +
             std::to_string((*l.bbox)[1]) + "," + std::to_string((*l.bbox)[2]) +
             "," + std::to_string((*l.bbox)[3]) + ")";
    if (l.font_id) out += " font=" + std::to_string(*l.font_id);
    if (l.color_id) out += " color=" + std::to_string(*l.color_id);
    if (l.size_bucket) out += " size=" + std::to_string(*l.size_bucket);
    if (l.theme) out += " theme=" + *l.theme;
  }
  return out;
}

int vocab_size() { return kVocabSize; }

const std::vector<std::string>& vocab() {
  static const std::vector<std::string> kVocab = [] {
    std::vector<std::string> v = {"<unk>", "edit", "add",   "translate", "line",
                                  "at",    "font", "color", "size",      "theme",
                                  "\"",    "(",    ")",     ",",         ";",
                                  "="};
    for (char c = '0'; c <= '9'; ++c) v.emplace_back(1, c);
    for (char c = 'A'; c <= 'Z'; ++c) v.emplace_back(1, c);
    v.emplace_back("<sp>");
    return v;
  }();
  return kVocab;
}

}  // namespace umt::design
