#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "weldmill/error.hpp"

namespace weldmill {

enum class Tok : std::uint8_t {
  End,
  Ident,
  Int,    // text holds digits; suffix in `suffix`
  Float,  // text holds the literal; suffix in `suffix`
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi, Colon, Assign /* := */, Arrow /* => */, Dot, Question,
  Plus, Minus, Star, Slash, Percent,
  EqEq, NotEq, Lt, Le, Gt, Ge,
  AndAnd, OrOr, Amp, Pipe, Bang,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::string suffix;
  Span span;
};

inline const char* tokName(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Float: return "float";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Assign: return "':='";
    case Tok::Arrow: return "'=>'";
    case Tok::Dot: return "'.'";
    case Tok::Question: return "'?'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Amp: return "'&'";
    case Tok::Pipe: return "'|'";
    case Tok::Bang: return "'!'";
  }
  return "token";
}

// Splits source text into tokens. Digits directly after a '.' always lex as a
// bare integer so that `x.0.1` reads as two field accesses.
inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  auto at = [&](std::size_t k) -> char { return k < n ? src[k] : '\0'; };
  auto isIdentStart = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto isIdentChar = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto isDigit = [](char c) { return c >= '0' && c <= '9'; };

  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '/' && at(i + 1) == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    Token t;
    auto begin = static_cast<std::uint32_t>(i);
    bool afterDot = !out.empty() && out.back().kind == Tok::Dot;
    if (isIdentStart(c)) {
      std::size_t j = i;
      while (j < n && isIdentChar(src[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (isDigit(c) && afterDot) {
      std::size_t j = i;
      while (j < n && isDigit(src[j])) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (isDigit(c)) {
      std::size_t j = i;
      while (j < n && isDigit(src[j])) ++j;
      bool isFloat = false;
      if (at(j) == '.' && isDigit(at(j + 1))) {
        isFloat = true;
        ++j;
        while (j < n && isDigit(src[j])) ++j;
      }
      if ((at(j) == 'e' || at(j) == 'E') &&
          (isDigit(at(j + 1)) || ((at(j + 1) == '+' || at(j + 1) == '-') && isDigit(at(j + 2))))) {
        isFloat = true;
        j += 2;
        while (j < n && isDigit(src[j])) ++j;
      }
      t.text = std::string(src.substr(i, j - i));
      std::size_t k = j;
      while (k < n && isIdentChar(src[k])) ++k;
      t.suffix = std::string(src.substr(j, k - j));
      if (t.suffix == "f" || t.suffix == "f32" || t.suffix == "f64") isFloat = true;
      t.kind = isFloat ? Tok::Float : Tok::Int;
      i = k;
    } else {
      auto two = [&](char a, char b) { return c == a && at(i + 1) == b; };
      std::size_t len = 2;
      if (two(':', '=')) t.kind = Tok::Assign;
      else if (two('=', '>')) t.kind = Tok::Arrow;
      else if (two('=', '=')) t.kind = Tok::EqEq;
      else if (two('!', '=')) t.kind = Tok::NotEq;
      else if (two('<', '=')) t.kind = Tok::Le;
      else if (two('>', '=')) t.kind = Tok::Ge;
      else if (two('&', '&')) t.kind = Tok::AndAnd;
      else if (two('|', '|')) t.kind = Tok::OrOr;
      else {
        len = 1;
        switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '{': t.kind = Tok::LBrace; break;
          case '}': t.kind = Tok::RBrace; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case ',': t.kind = Tok::Comma; break;
          case ';': t.kind = Tok::Semi; break;
          case ':': t.kind = Tok::Colon; break;
          case '.': t.kind = Tok::Dot; break;
          case '?': t.kind = Tok::Question; break;
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          case '%': t.kind = Tok::Percent; break;
          case '<': t.kind = Tok::Lt; break;
          case '>': t.kind = Tok::Gt; break;
          case '&': t.kind = Tok::Amp; break;
          case '|': t.kind = Tok::Pipe; break;
          case '!': t.kind = Tok::Bang; break;
          default: {
            std::string shown = std::isprint(static_cast<unsigned char>(c))
                                    ? std::string(1, c)
                                    : "byte " + std::to_string(static_cast<unsigned char>(c));
            throw ParseError("unexpected character " + shown, {begin, begin + 1});
          }
        }
      }
      i += len;
    }
    t.span = {begin, static_cast<std::uint32_t>(i)};
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.span = {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n)};
  out.push_back(end);
  return out;
}

}  // namespace weldmill
