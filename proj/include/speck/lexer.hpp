#pragma once

// Tokenizer for specification source files. Unicode glyphs and their ASCII
// aliases yield identical tokens, so sources may be written in plain ASCII:
//   forall => <=> /\ \/ ~ ~= def undef Theta # -> ->> ! <= elem prefixeq
//   prefixlt <> ^
// Comments run from `--` to end of line.

#include <cctype>
#include <string>
#include <vector>

#include "speck/diag.hpp"

namespace speck {

enum class TokKind { Ident, Number, Keyword, Sym, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  Span span;

  bool is_kw(const char* k) const { return kind == TokKind::Keyword && text == k; }
  bool is_sym(const char* s) const { return kind == TokKind::Sym && text == s; }
};

namespace detail {

inline bool is_keyword(const std::string& s) {
  static const char* kws[] = {"sort",  "data",    "generated", "by",     "axioms", "endaxioms",
                              "forall", "in",     "enrich",    "rename", "to",     "class",
                              "inherit", "hidden", "op",        "strict", "partial", "prio",
                              "left",   "right",  "def",       "undef"};
  for (const char* k : kws) {
    if (s == k) return true;
  }
  return false;
}

}  // namespace detail

class Lexer {
 public:
  explicit Lexer(std::string source) : src_(std::move(source)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      out.push_back(next_token());
    }
    Token end;
    end.kind = TokKind::End;
    end.span = {line_, col_, line_, col_};
    out.push_back(end);
    return out;
  }

 private:
  std::string src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  char cur() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char peek(size_t k = 1) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_trivia() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(cur()))) advance();
      if (cur() == '-' && peek() == '-') {
        while (pos_ < src_.size() && cur() != '\n') advance();
        continue;
      }
      // U+22D4 (pitchfork) shows up inside empty-sequence brackets in some
      // sources; it carries no meaning of its own.
      if (starts_with("\xE2\x8B\x94")) {
        advance(3);
        continue;
      }
      break;
    }
  }

  bool starts_with(const char* s) const {
    size_t n = std::char_traits<char>::length(s);
    return src_.compare(pos_, n, s) == 0;
  }

  Token make(TokKind kind, std::string text, int start_line, int start_col) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.span = {start_line, start_col, line_, col_};
    return t;
  }

  Token next_token() {
    int sl = line_, sc = col_;
    unsigned char c = static_cast<unsigned char>(cur());

    if (c < 0x80) {
      if (std::isalpha(c)) {
        std::string word;
        while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_') {
          word += cur();
          advance();
        }
        return make(detail::is_keyword(word) ? TokKind::Keyword : TokKind::Ident, word, sl, sc);
      }
      if (std::isdigit(c)) {
        std::string num;
        while (std::isdigit(static_cast<unsigned char>(cur()))) {
          num += cur();
          advance();
        }
        return make(TokKind::Number, num, sl, sc);
      }
      // Maximal munch over multi-character symbols.
      static const char* multi[] = {"<=>", "->>", "->", "=>", "<=", "<>", "~=", "/\\", "\\/"};
      for (const char* m : multi) {
        if (starts_with(m)) {
          advance(std::char_traits<char>::length(m));
          return make(TokKind::Sym, m, sl, sc);
        }
      }
      static const char singles[] = "(){}[]<>,;:.|!#^+~=";
      if (std::char_traits<char>::find(singles, sizeof(singles) - 1, cur())) {
        std::string s(1, cur());
        advance();
        if (s == "<") return angle_open(sl, sc);
        return make(TokKind::Sym, s, sl, sc);
      }
      fail("lex-error", std::string("unrecognized character '") + cur() + "'", {sl, sc, sl, sc + 1});
    }

    return glyph_token(sl, sc);
  }

  // `<` immediately followed by `>` (glyph noise aside) is the empty
  // sequence; it must tokenize the same as the two-character form `<>`.
  Token angle_open(int sl, int sc) {
    size_t save_pos = pos_;
    int save_line = line_, save_col = col_;
    while (starts_with("\xE2\x8B\x94")) advance(3);
    if (cur() == '>') {
      advance();
      return make(TokKind::Sym, "<>", sl, sc);
    }
    if (starts_with("\xE2\x89\xBB")) {  // U+227B
      advance(3);
      return make(TokKind::Sym, "<>", sl, sc);
    }
    pos_ = save_pos;
    line_ = save_line;
    col_ = save_col;
    return make(TokKind::Sym, "<", sl, sc);
  }

  Token glyph_token(int sl, int sc) {
    struct Alias {
      const char* utf8;
      TokKind kind;
      const char* text;
    };
    static const Alias table[] = {
        {"\xE2\x88\x80", TokKind::Keyword, "forall"},    // U+2200
        {"\xCE\xB4", TokKind::Keyword, "def"},           // U+03B4 delta
        {"\xE2\x8A\xA5", TokKind::Keyword, "undef"},     // U+22A5
        {"\xCE\x98", TokKind::Ident, "Theta"},           // U+0398
        {"\xE2\x88\x88", TokKind::Ident, "elem"},        // U+2208
        {"\xE2\x8A\x86", TokKind::Ident, "prefixeq"},    // U+2286
        {"\xE2\x8A\x91", TokKind::Ident, "prefixeq"},    // U+2291
        {"\xE2\x8A\x82", TokKind::Ident, "prefixlt"},    // U+2282
        {"\xE2\x8A\x8F", TokKind::Ident, "prefixlt"},    // U+228F
        {"\xC3\x97", TokKind::Sym, "#"},                 // U+00D7 times
        {"\xE2\x86\x92", TokKind::Sym, "->"},            // U+2192
        {"\xE2\x86\xA0", TokKind::Sym, "->>"},           // U+21A0
        {"\xE2\x86\x91", TokKind::Sym, "!"},             // U+2191
        {"\xE2\x89\xA4", TokKind::Sym, "<="},            // U+2264
        {"\xE2\x88\xA7", TokKind::Sym, "/\\"},           // U+2227
        {"\xE2\x88\xA8", TokKind::Sym, "\\/"},           // U+2228
        {"\xC2\xAC", TokKind::Sym, "~"},                 // U+00AC
        {"\xE2\x89\xA0", TokKind::Sym, "~="},            // U+2260
        {"\xE2\x87\x92", TokKind::Sym, "=>"},            // U+21D2
        {"\xE2\x87\x94", TokKind::Sym, "<=>"},           // U+21D4
        {"\xE2\x89\xBB", TokKind::Sym, ">"},             // U+227B
    };
    for (const auto& a : table) {
      if (starts_with(a.utf8)) {
        advance(std::char_traits<char>::length(a.utf8));
        return make(a.kind, a.text, sl, sc);
      }
    }
    if (starts_with("\xE2\x89\xBA")) {  // U+227A, opening sequence bracket
      advance(3);
      return angle_open(sl, sc);
    }
    fail("lex-error", "unrecognized character", {sl, sc, sl, sc + 1});
  }
};

inline std::vector<Token> tokenize(const std::string& source) { return Lexer(source).run(); }

}  // namespace speck
