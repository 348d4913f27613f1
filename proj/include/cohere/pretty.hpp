#pragma once

#include <string>
#include <vector>

#include "cohere/program.hpp"

namespace cohere {

inline std::string to_string(const Target& t) {
  switch (t.kind) {
    case Target::Kind::Scalar: return t.name;
    case Target::Kind::Abstract: return t.name + "^";
    case Target::Kind::Element: return t.name + "[" + std::to_string(t.offset) + "]";
    case Target::Kind::WholeView: return t.name;
  }
  return "?";
}

inline std::string to_string(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::IsValid: return "valid(" + to_string(c.key) + ")";
    case Condition::Kind::RemIsValid: return "gvalid(" + to_string(c.key) + ")";
    case Condition::Kind::Opaque: return "opaque";
  }
  return "?";
}

inline std::string to_string(const AccessMode& m) {
  std::string out = name_of(m.kind, m.site) + ("(" + m.view + ")");
  if (m.shadow) out += " /*shadow*/";
  return out;
}

namespace detail {

inline std::string effect_word(EffectKind kind, Site site) {
  return (site == Site::Remote ? "g" : "") + std::string(name_of(kind));
}

inline void stmt_one_line(const Stmt& s, std::string& out) {
  switch (s.op()) {
    case Stmt::Op::Noop:
      return;
    case Stmt::Op::Effect: {
      const auto& n = s.node();
      if (!out.empty()) out += ' ';
      out += effect_word(n.effect, n.site) + " " + to_string(n.target) + ";";
      return;
    }
    case Stmt::Op::Seq:
      stmt_one_line(s.seq_a(), out);
      stmt_one_line(s.seq_b(), out);
      return;
    case Stmt::Op::If: {
      std::string then_s, else_s;
      stmt_one_line(s.then_branch(), then_s);
      stmt_one_line(s.else_branch(), else_s);
      if (!out.empty()) out += ' ';
      out += "if (" + to_string(s.node().cond) + ") { " + then_s + (then_s.empty() ? "}" : " }");
      if (!s.else_branch().is_noop()) out += " else { " + else_s + " }";
      return;
    }
    case Stmt::Op::While: {
      std::string body_s;
      stmt_one_line(s.body(), body_s);
      if (!out.empty()) out += ' ';
      out += "while (" + to_string(s.node().cond) + ") { " + body_s +
             (body_s.empty() ? "}" : " }");
      return;
    }
  }
}

inline void stmt_lines(const Stmt& s, int indent, std::string& out) {
  const std::string pad(2 * (size_t)indent, ' ');
  switch (s.op()) {
    case Stmt::Op::Noop:
      return;
    case Stmt::Op::Effect: {
      const auto& n = s.node();
      out += pad + effect_word(n.effect, n.site) + " " + to_string(n.target) + ";\n";
      return;
    }
    case Stmt::Op::Seq:
      stmt_lines(s.seq_a(), indent, out);
      stmt_lines(s.seq_b(), indent, out);
      return;
    case Stmt::Op::If:
      out += pad + "if (" + to_string(s.node().cond) + ") {\n";
      stmt_lines(s.then_branch(), indent + 1, out);
      if (!s.else_branch().is_noop()) {
        out += pad + "} else {\n";
        stmt_lines(s.else_branch(), indent + 1, out);
      }
      out += pad + "}\n";
      return;
    case Stmt::Op::While:
      out += pad + "while (" + to_string(s.node().cond) + ") {\n";
      stmt_lines(s.body(), indent + 1, out);
      out += pad + "}\n";
      return;
  }
}

inline std::string decl_lines(const Declarations& decls) {
  std::string out;
  for (const auto& s : decls.scalars()) out += "scalar " + s.name + "\n";
  for (const auto& b : decls.buffers())
    out += "buffer " + b.id + "[" + std::to_string(b.length) + "]\n";
  for (const auto& v : decls.views())
    out += "view " + v.name + " = " + v.buffer + "[" + std::to_string(v.lo) + ":" +
           std::to_string(v.hi) + "]\n";
  return out;
}

}  // namespace detail

// Compact single-line rendering; the empty program renders empty.
inline std::string to_string(const Stmt& s) {
  std::string out;
  detail::stmt_one_line(s, out);
  return out;
}

// Canonical source form; parsing it back yields an equal program.
inline std::string pretty(const AnnotatedProgram& p) {
  std::string out = detail::decl_lines(p.decls);
  for (const auto& block : p.blocks) {
    if (!out.empty()) out += "\n";
    std::string header;
    for (const auto& m : block.modes) {
      if (!header.empty()) header += ", ";
      header += to_string(m);
    }
    out += header + (header.empty() ? "{\n" : " {\n");
    detail::stmt_lines(block.body, 1, out);
    out += "}\n";
  }
  return out;
}

inline std::string pretty(const RawProgram& p) {
  std::string out = detail::decl_lines(p.decls);
  if (!out.empty() && !p.body.is_noop()) out += "\n";
  detail::stmt_lines(p.body, 0, out);
  return out;
}

}  // namespace cohere
