#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cohere/program.hpp"

namespace cohere {

struct ParseError : std::runtime_error {
  ParseError(SourcePos pos, const std::string& msg)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.col) +
                           ": " + msg),
        pos(pos) {}
  SourcePos pos;
};

namespace detail {

struct Token {
  enum class Kind : uint8_t {
    Ident, Int, LParen, RParen, LBrace, RBrace, LBracket, RBracket,
    Semi, Comma, Eq, Colon, Caret, Shadow, Eof,
  };
  Kind kind = Kind::Eof;
  std::string text;
  long value = 0;
  SourcePos pos;
};

// Identifiers are [A-Za-z_][A-Za-z0-9_]*. A '^' may follow a name inside
// valid()/gvalid() to test the flag pair directly; it is not legal in any
// other position. '//' comments run to end of line; '/* ... */' comments
// are skipped, except that the exact marker '/*shadow*/' is a token of
// its own.
inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto step = [&](size_t n = 1) {
    while (n-- && i < src.size()) {
      if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { step(); continue; }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') step();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      SourcePos pos{line, col};
      size_t start = i + 2;
      size_t end = src.find("*/", start);
      if (end == std::string_view::npos) throw ParseError(pos, "unterminated comment");
      std::string_view body = src.substr(start, end - start);
      step(end + 2 - i);
      size_t b = body.find_first_not_of(" \t");
      size_t e = body.find_last_not_of(" \t");
      if (b != std::string_view::npos && body.substr(b, e - b + 1) == "shadow")
        out.push_back({Token::Kind::Shadow, "shadow", 0, pos});
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t start = i;
      while (i < src.size() && (std::isalnum((unsigned char)src[i]) || src[i] == '_')) step();
      out.push_back({Token::Kind::Ident, std::string(src.substr(start, i - start)), 0, pos});
      continue;
    }
    if (std::isdigit((unsigned char)c)) {
      size_t start = i;
      while (i < src.size() && std::isdigit((unsigned char)src[i])) step();
      std::string text(src.substr(start, i - start));
      out.push_back({Token::Kind::Int, text, std::stol(text), pos});
      continue;
    }
    Token::Kind kind;
    switch (c) {
      case '(': kind = Token::Kind::LParen; break;
      case ')': kind = Token::Kind::RParen; break;
      case '{': kind = Token::Kind::LBrace; break;
      case '}': kind = Token::Kind::RBrace; break;
      case '[': kind = Token::Kind::LBracket; break;
      case ']': kind = Token::Kind::RBracket; break;
      case ';': kind = Token::Kind::Semi; break;
      case ',': kind = Token::Kind::Comma; break;
      case '=': kind = Token::Kind::Eq; break;
      case ':': kind = Token::Kind::Colon; break;
      case '^': kind = Token::Kind::Caret; break;
      default:
        throw ParseError(pos, std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, std::string(1, c), 0, pos});
    step();
  }
  out.push_back({Token::Kind::Eof, "", 0, {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(lex(src)) {}

  AnnotatedProgram annotated() {
    AnnotatedProgram p;
    p.decls = decls();
    while (!at(Token::Kind::Eof)) p.blocks.push_back(block(p.decls));
    return p;
  }

  RawProgram raw() {
    RawProgram p;
    p.decls = decls();
    std::vector<Stmt> stmts;
    while (!at(Token::Kind::Eof)) stmts.push_back(stmt(p.decls));
    p.body = normalize(Stmt::seq(stmts));
    return p;
  }

 private:
  static bool is_keyword(const std::string& s) {
    static const char* words[] = {"scalar", "buffer", "view",  "if",   "else",
                                  "while",  "valid",  "gvalid", "opaque", "push",
                                  "pull",   "r",      "w",     "gr",   "gw",
                                  "R",      "W",      "RW",    "GR",   "GW", "GRW"};
    for (const char* k : words)
      if (s == k) return true;
    return false;
  }

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(Token::Kind k) const { return peek().kind == k; }
  bool at_word(const char* w) const {
    return peek().kind == Token::Kind::Ident && peek().text == w;
  }
  const Token& take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  const Token& expect(Token::Kind k, const char* what) {
    if (!at(k)) throw ParseError(peek().pos, std::string("expected ") + what);
    return take();
  }
  std::string name(const char* what) {
    const Token& t = expect(Token::Kind::Ident, what);
    if (is_keyword(t.text))
      throw ParseError(t.pos, "'" + t.text + "' is reserved and cannot name a variable");
    return t.text;
  }
  int integer(const char* what) {
    const Token& t = expect(Token::Kind::Int, what);
    return (int)t.value;
  }

  Declarations decls() {
    Declarations out;
    for (;;) {
      if (at_word("scalar")) {
        SourcePos pos = take().pos;
        rethrow_here(pos, [&] { out.add_scalar({name("scalar name"), pos}); });
      } else if (at_word("buffer")) {
        SourcePos pos = take().pos;
        std::string id = name("buffer name");
        expect(Token::Kind::LBracket, "'['");
        int length = integer("buffer length");
        expect(Token::Kind::RBracket, "']'");
        rethrow_here(pos, [&] { out.add_buffer({id, length, pos}); });
      } else if (at_word("view")) {
        SourcePos pos = take().pos;
        std::string vname = name("view name");
        expect(Token::Kind::Eq, "'='");
        std::string buffer = name("buffer name");
        expect(Token::Kind::LBracket, "'['");
        int lo = integer("range start");
        expect(Token::Kind::Colon, "':'");
        int hi = integer("range end");
        expect(Token::Kind::RBracket, "']'");
        rethrow_here(pos, [&] { out.add_view({vname, buffer, lo, hi, pos}); });
      } else {
        return out;
      }
    }
  }

  static bool mode_word(const std::string& s, AccessMode::Kind& kind, Site& site) {
    std::string base = s;
    site = Site::Local;
    if (!base.empty() && base[0] == 'G') {
      site = Site::Remote;
      base = base.substr(1);
    }
    if (base == "R") kind = AccessMode::Kind::R;
    else if (base == "W") kind = AccessMode::Kind::W;
    else if (base == "RW") kind = AccessMode::Kind::RW;
    else return false;
    return true;
  }

  DeclBlock block(const Declarations& d) {
    std::vector<AccessMode> modes;
    SourcePos block_pos = peek().pos;
    auto one_mode = [&] {
      AccessMode::Kind kind;
      Site site;
      if (peek().kind != Token::Kind::Ident || !mode_word(peek().text, kind, site))
        throw ParseError(peek().pos, "expected an access mode");
      SourcePos pos = take().pos;
      expect(Token::Kind::LParen, "'('");
      std::string view = name("variable name");
      expect(Token::Kind::RParen, "')'");
      if (!d.find_scalar(view) && !d.find_view(view))
        throw ParseError(pos, "mode names undeclared variable '" + view + "'");
      AccessMode m{kind, site, view, false, pos};
      if (at(Token::Kind::Shadow)) {
        take();
        m.shadow = true;
      }
      for (const auto& seen : modes)
        if (seen.view == view)
          throw ParseError(pos, "variable '" + view + "' declared twice in one block");
      modes.push_back(std::move(m));
    };
    AccessMode::Kind kind;
    Site site;
    if (peek().kind == Token::Kind::Ident && mode_word(peek().text, kind, site)) {
      one_mode();
      while (at(Token::Kind::Comma)) {
        take();
        one_mode();
      }
    }
    if (at_word("scalar") || at_word("buffer") || at_word("view"))
      throw ParseError(peek().pos, "declarations must precede all blocks");
    expect(Token::Kind::LBrace, "mode list or '{'");
    std::vector<Stmt> stmts;
    while (!at(Token::Kind::RBrace)) stmts.push_back(stmt(d));
    take();
    return DeclBlock(std::move(modes), normalize(Stmt::seq(stmts)), block_pos);
  }

  Condition cond(const Declarations& d) {
    if (at_word("opaque")) { take(); return Condition::opaque(); }
    bool remote;
    if (at_word("valid")) remote = false;
    else if (at_word("gvalid")) remote = true;
    else throw ParseError(peek().pos, "expected valid(...), gvalid(...) or opaque");
    take();
    expect(Token::Kind::LParen, "'('");
    SourcePos pos = peek().pos;
    std::string n = name("variable name");
    bool hat = at(Token::Kind::Caret);
    if (hat) take();
    expect(Token::Kind::RParen, "')'");
    if (!d.find_scalar(n) && !d.find_view(n))
      throw ParseError(pos, "condition names undeclared variable '" + n + "'");
    // A view is summarised by its flag pair, so a bare view name already
    // means the hatted key. The explicit hat also works for scalars.
    VarKey key = (hat || d.find_view(n)) ? VarKey::abstract(n) : VarKey::scalar(n);
    return remote ? Condition::rem_is_valid(key) : Condition::is_valid(key);
  }

  Stmt stmt(const Declarations& d) {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(t.pos, "expected a statement");

    if (t.text == "if") {
      SourcePos pos = take().pos;
      expect(Token::Kind::LParen, "'('");
      Condition c = cond(d);
      expect(Token::Kind::RParen, "')'");
      Stmt then_s = braced(d);
      Stmt else_s = Stmt::noop();
      if (at_word("else")) {
        take();
        else_s = braced(d);
      }
      return Stmt::if_else(std::move(c), std::move(then_s), std::move(else_s), pos);
    }
    if (t.text == "while") {
      SourcePos pos = take().pos;
      expect(Token::Kind::LParen, "'('");
      Condition c = cond(d);
      expect(Token::Kind::RParen, "')'");
      return Stmt::while_loop(std::move(c), braced(d), pos);
    }

    EffectKind kind = EffectKind::Noop;
    Site site = Site::Local;
    bool sync = false;
    if (t.text == "r") kind = EffectKind::Read;
    else if (t.text == "w") kind = EffectKind::Write;
    else if (t.text == "gr") { kind = EffectKind::Read; site = Site::Remote; }
    else if (t.text == "gw") { kind = EffectKind::Write; site = Site::Remote; }
    else if (t.text == "push") { kind = EffectKind::Push; sync = true; }
    else if (t.text == "pull") { kind = EffectKind::Pull; sync = true; }
    else throw ParseError(t.pos, "expected a statement");
    SourcePos pos = take().pos;

    SourcePos name_pos = peek().pos;
    std::string n = name("variable name");
    Target target;
    if (at(Token::Kind::LBracket)) {
      take();
      int offset = integer("element index");
      expect(Token::Kind::RBracket, "']'");
      if (sync) throw ParseError(name_pos, "push/pull take a whole variable, not an element");
      if (d.find_scalar(n)) throw ParseError(name_pos, "scalar '" + n + "' takes no index");
      rethrow_here(name_pos, [&] { target = d.element_target(n, offset); });
    } else if (d.find_scalar(n)) {
      target = Target::scalar(n);
    } else if (d.find_view(n)) {
      if (!sync)
        throw ParseError(name_pos, "view '" + n + "' needs an element index here");
      target = d.whole_view_target(n);
    } else {
      throw ParseError(name_pos, "undeclared variable '" + n + "'");
    }
    expect(Token::Kind::Semi, "';'");
    return Stmt::effect(kind, std::move(target), site, pos);
  }

  Stmt braced(const Declarations& d) {
    expect(Token::Kind::LBrace, "'{'");
    std::vector<Stmt> stmts;
    while (!at(Token::Kind::RBrace)) stmts.push_back(stmt(d));
    take();
    return normalize(Stmt::seq(stmts));
  }

  template <class F>
  static void rethrow_here(SourcePos pos, F&& f) {
    try {
      f();
    } catch (const ConstructionError& e) {
      throw ParseError(pos, e.what());
    }
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace detail

inline AnnotatedProgram parse_program(std::string_view src) {
  return detail::Parser(src).annotated();
}

inline RawProgram parse_raw(std::string_view src) {
  return detail::Parser(src).raw();
}

}  // namespace cohere
