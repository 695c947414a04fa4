#include "raresplit/syntax.hpp"

#include <cctype>

namespace raresplit {

std::string_view token_name(Tok kind) {
  switch (kind) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Decimal: return "decimal";
    case Tok::String: return "quoted label";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::DotDot: return "'..'";
    case Tok::Prime: return "'''";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Bang: return "'!'";
    case Tok::Amp: return "'&'";
    case Tok::Bar: return "'|'";
    case Tok::Implies: return "'=>'";
    case Tok::Arrow: return "'->'";
    case Tok::Question: return "'?'";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.loc = {line, col};
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && (is_ident_char(src[j]) || (src[j] == '.' && j + 1 < src.size() && is_ident_char(src[j + 1]) && src[j - 1] != '.'))) ++j;
      tok.kind = Tok::Ident;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tok.kind = Tok::Int;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        tok.kind = Tok::Decimal;
      }
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw ParseError(tok.loc, "unterminated quoted label");
      tok.kind = Tok::String;
      tok.text = std::string(src.substr(i + 1, j - i - 1));
      advance(j - i + 1);
      out.push_back(std::move(tok));
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    std::size_t len = 1;
    if (two('.', '.')) {
      tok.kind = Tok::DotDot;
      len = 2;
    } else if (two('!', '=')) {
      tok.kind = Tok::Ne;
      len = 2;
    } else if (two('<', '=')) {
      tok.kind = Tok::Le;
      len = 2;
    } else if (two('>', '=')) {
      tok.kind = Tok::Ge;
      len = 2;
    } else if (two('=', '>')) {
      tok.kind = Tok::Implies;
      len = 2;
    } else if (two('-', '>')) {
      tok.kind = Tok::Arrow;
      len = 2;
    } else {
      switch (c) {
        case '(': tok.kind = Tok::LParen; break;
        case ')': tok.kind = Tok::RParen; break;
        case '[': tok.kind = Tok::LBracket; break;
        case ']': tok.kind = Tok::RBracket; break;
        case ';': tok.kind = Tok::Semi; break;
        case ':': tok.kind = Tok::Colon; break;
        case ',': tok.kind = Tok::Comma; break;
        case '\'': tok.kind = Tok::Prime; break;
        case '=': tok.kind = Tok::Eq; break;
        case '<': tok.kind = Tok::Lt; break;
        case '>': tok.kind = Tok::Gt; break;
        case '+': tok.kind = Tok::Plus; break;
        case '-': tok.kind = Tok::Minus; break;
        case '*': tok.kind = Tok::Star; break;
        case '/': tok.kind = Tok::Slash; break;
        case '!': tok.kind = Tok::Bang; break;
        case '&': tok.kind = Tok::Amp; break;
        case '|': tok.kind = Tok::Bar; break;
        case '?': tok.kind = Tok::Question; break;
        default: throw ParseError(tok.loc, std::string("unexpected character '") + c + "'");
      }
    }
    tok.text = std::string(src.substr(i, len));
    advance(len);
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Tok::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

Token TokenStream::expect(Tok kind, std::string_view what) {
  if (!at(kind)) {
    fail("expected " + std::string(what) + ", found " + (peek().kind == Tok::End ? std::string("end of input") : "'" + peek().text + "'"));
  }
  return next();
}

void TokenStream::expect_ident(std::string_view word) {
  if (!at_ident(word)) {
    fail("expected '" + std::string(word) + "', found " + (peek().kind == Tok::End ? std::string("end of input") : "'" + peek().text + "'"));
  }
  next();
}

}  // namespace raresplit
