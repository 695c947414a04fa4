#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace raresplit {

struct SourceLoc {
  int line = 1;
  int column = 1;

  std::string to_string() const { return std::to_string(line) + ":" + std::to_string(column); }

  // Locations never take part in structural equality of syntax trees.
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

/// Diagnostic raised for malformed model, formula or score text.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& message)
      : std::runtime_error(loc.to_string() + ": " + message), loc_(loc), detail_(message) {}

  SourceLoc loc() const { return loc_; }
  const std::string& detail() const { return detail_; }

 private:
  SourceLoc loc_;
  std::string detail_;
};

enum class Tok {
  End,
  Ident,
  Int,
  Decimal,
  String,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Semi,
  Colon,
  Comma,
  DotDot,
  Prime,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  Bang,
  Amp,
  Bar,
  Implies,
  Arrow,
  Question,
};

std::string_view token_name(Tok kind);

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

/// Splits source text into tokens. Comments run from `//` to end of line.
/// Identifiers may contain interior dots (`obs.root.0.w`).
std::vector<Token> tokenize(std::string_view source);

/// Cursor over a token vector with the small set of helpers every parser here needs.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_ident(std::string_view word) const { return peek().kind == Tok::Ident && peek().text == word; }
  Token next() {
    Token t = peek();
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(Tok kind) {
    if (!at(kind)) return false;
    next();
    return true;
  }
  bool accept_ident(std::string_view word) {
    if (!at_ident(word)) return false;
    next();
    return true;
  }
  Token expect(Tok kind, std::string_view what);
  void expect_ident(std::string_view word);
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(peek().loc, message); }

  std::size_t position() const { return pos_; }
  void rewind(std::size_t pos) { pos_ = pos; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace raresplit
