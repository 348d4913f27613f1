#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cohere/validity.hpp"

namespace cohere {

struct SourcePos {
  int line = 0;  // 1-based; 0 means unknown
  int col = 0;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

// Where an effect acts: on the local copy or (bracketed form) the remote one.
enum class Site : uint8_t { Local, Remote };

inline const char* name_of(Site s) { return s == Site::Local ? "local" : "remote"; }

// A store key. Every declared name owns keys that never collide:
//   Scalar  - the concrete copy of a scalar
//   Element - one cell of a buffer, by absolute index
//   Abstract - the block-level status of a scalar or view (printed "name^")
struct VarKey {
  enum class Kind : uint8_t { Scalar, Element, Abstract };
  Kind kind = Kind::Scalar;
  std::string name;  // scalar name, buffer id, or view/scalar name for Abstract
  int index = -1;    // Element only

  static VarKey scalar(std::string n) { return {Kind::Scalar, std::move(n), -1}; }
  static VarKey element(std::string buffer, int i) {
    return {Kind::Element, std::move(buffer), i};
  }
  static VarKey abstract(std::string n) { return {Kind::Abstract, std::move(n), -1}; }

  friend bool operator==(const VarKey&, const VarKey&) = default;
  friend bool operator<(const VarKey& a, const VarKey& b) {
    return std::tie(a.name, a.kind, a.index) < std::tie(b.name, b.kind, b.index);
  }
};

inline std::string to_string(const VarKey& k) {
  switch (k.kind) {
    case VarKey::Kind::Scalar: return k.name;
    case VarKey::Kind::Element: return k.name + "[" + std::to_string(k.index) + "]";
    case VarKey::Kind::Abstract: return k.name + "^";
  }
  return "?";
}

// Target of an effect statement. Element targets remember the view they
// were written through (checking is per-view) as well as the resolved
// absolute cell. WholeView is the element-wise sync form (push/pull only).
struct Target {
  enum class Kind : uint8_t { Scalar, Abstract, Element, WholeView };
  Kind kind = Kind::Scalar;
  std::string name;    // scalar name or view name
  std::string buffer;  // Element/WholeView: owning buffer id
  int offset = -1;     // Element: view-relative index
  int abs_index = -1;  // Element: absolute index in buffer
  int lo = -1, hi = -1;  // WholeView: absolute element range, inclusive

  static Target scalar(std::string n) {
    Target t; t.kind = Kind::Scalar; t.name = std::move(n); return t;
  }
  static Target abstract(std::string n) {
    Target t; t.kind = Kind::Abstract; t.name = std::move(n); return t;
  }
  static Target element(std::string view, int offset, std::string buffer, int abs) {
    Target t; t.kind = Kind::Element; t.name = std::move(view); t.offset = offset;
    t.buffer = std::move(buffer); t.abs_index = abs; return t;
  }
  static Target whole_view(std::string view, std::string buffer, int lo, int hi) {
    Target t; t.kind = Kind::WholeView; t.name = std::move(view);
    t.buffer = std::move(buffer); t.lo = lo; t.hi = hi; return t;
  }

  // Store key for the three single-cell forms; not meaningful for WholeView.
  VarKey store_key() const {
    switch (kind) {
      case Kind::Scalar: return VarKey::scalar(name);
      case Kind::Abstract: return VarKey::abstract(name);
      case Kind::Element: return VarKey::element(buffer, abs_index);
      case Kind::WholeView: break;
    }
    throw std::logic_error("whole-view target has no single store key");
  }

  friend bool operator==(const Target&, const Target&) = default;
};

// Branch/loop condition. Conditions always evaluate; they never get stuck.
struct Condition {
  enum class Kind : uint8_t { IsValid, RemIsValid, Opaque };
  Kind kind = Kind::Opaque;
  VarKey key;       // IsValid / RemIsValid
  std::string tag;  // optional label for Opaque, not rendered

  static Condition is_valid(VarKey k) { return {Kind::IsValid, std::move(k), {}}; }
  static Condition rem_is_valid(VarKey k) { return {Kind::RemIsValid, std::move(k), {}}; }
  static Condition opaque(std::string tag = {}) {
    return {Kind::Opaque, VarKey{}, std::move(tag)};
  }

  friend bool operator==(const Condition&, const Condition&) = default;
};

// Statements form an immutable tree; copies share structure. Normal form
// (see normalize) is a right-nested Seq chain whose heads are primitive,
// with Noop only as the empty program or an empty branch.
class Stmt {
 public:
  enum class Op : uint8_t { Noop, Effect, Seq, If, While };

  struct Node {
    Op op = Op::Noop;
    // Effect
    EffectKind effect = EffectKind::Noop;
    Site site = Site::Local;
    Target target;
    // Seq
    std::shared_ptr<const Node> a, b;
    // If / While
    Condition cond;
    std::shared_ptr<const Node> then_branch, else_branch, body;
    SourcePos pos;
  };

  Stmt() : node_(noop_node()) {}

  Op op() const { return node_->op; }
  bool is_noop() const { return node_->op == Op::Noop; }
  const Node& node() const { return *node_; }
  SourcePos pos() const { return node_->pos; }

  // Builders.
  static Stmt noop() { return Stmt(noop_node()); }
  static Stmt effect(EffectKind kind, Target target, Site site = Site::Local,
                     SourcePos pos = {}) {
    auto n = std::make_shared<Node>();
    n->op = Op::Effect;
    n->effect = kind;
    n->site = site;
    n->target = std::move(target);
    n->pos = pos;
    return Stmt(std::move(n));
  }
  static Stmt seq(Stmt a, Stmt b) {
    auto n = std::make_shared<Node>();
    n->op = Op::Seq;
    n->a = a.node_;
    n->b = b.node_;
    return Stmt(std::move(n));
  }
  static Stmt seq(const std::vector<Stmt>& stmts) {
    if (stmts.empty()) return noop();
    Stmt out = stmts.back();
    for (size_t i = stmts.size() - 1; i-- > 0;) out = seq(stmts[i], out);
    return out;
  }
  static Stmt if_else(Condition cond, Stmt then_s, Stmt else_s, SourcePos pos = {}) {
    auto n = std::make_shared<Node>();
    n->op = Op::If;
    n->cond = std::move(cond);
    n->then_branch = then_s.node_;
    n->else_branch = else_s.node_;
    n->pos = pos;
    return Stmt(std::move(n));
  }
  static Stmt while_loop(Condition cond, Stmt body, SourcePos pos = {}) {
    auto n = std::make_shared<Node>();
    n->op = Op::While;
    n->cond = std::move(cond);
    n->body = body.node_;
    n->pos = pos;
    return Stmt(std::move(n));
  }

  Stmt seq_a() const { return Stmt(node_->a); }
  Stmt seq_b() const { return Stmt(node_->b); }
  Stmt then_branch() const { return Stmt(node_->then_branch); }
  Stmt else_branch() const { return Stmt(node_->else_branch); }
  Stmt body() const { return Stmt(node_->body); }

  // Structural equality; source positions are ignored.
  friend bool operator==(const Stmt& x, const Stmt& y) { return equal(*x.node_, *y.node_); }
  friend bool operator!=(const Stmt& x, const Stmt& y) { return !(x == y); }

 private:
  explicit Stmt(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static const std::shared_ptr<const Node>& noop_node() {
    static const std::shared_ptr<const Node> n = std::make_shared<Node>();
    return n;
  }

  static bool equal(const Node& x, const Node& y) {
    if (x.op != y.op) return false;
    switch (x.op) {
      case Op::Noop: return true;
      case Op::Effect:
        return x.effect == y.effect && x.site == y.site && x.target == y.target;
      case Op::Seq: return equal(*x.a, *y.a) && equal(*x.b, *y.b);
      case Op::If:
        return x.cond == y.cond && equal(*x.then_branch, *y.then_branch) &&
               equal(*x.else_branch, *y.else_branch);
      case Op::While: return x.cond == y.cond && equal(*x.body, *y.body);
    }
    return false;
  }

  std::shared_ptr<const Node> node_;
};

// Appends b to normalized chain a, keeping the chain right-nested.
inline Stmt seq_concat(const Stmt& a, const Stmt& b) {
  if (a.is_noop()) return b;
  if (b.is_noop()) return a;
  if (a.op() == Stmt::Op::Seq) return Stmt::seq(a.seq_a(), seq_concat(a.seq_b(), b));
  return Stmt::seq(a, b);
}

// Canonical form: sequencing is associative with Noop neutral, so every
// program flattens to a right-nested chain of primitive statements (or the
// single Noop). Branch and loop bodies are normalized independently; an
// empty branch stays Noop.
inline Stmt normalize(const Stmt& s) {
  switch (s.op()) {
    case Stmt::Op::Noop:
    case Stmt::Op::Effect:
      return s;
    case Stmt::Op::Seq:
      return seq_concat(normalize(s.seq_a()), normalize(s.seq_b()));
    case Stmt::Op::If:
      return Stmt::if_else(s.node().cond, normalize(s.then_branch()),
                           normalize(s.else_branch()), s.pos());
    case Stmt::Op::While:
      return Stmt::while_loop(s.node().cond, normalize(s.body()), s.pos());
  }
  return s;
}

}  // namespace cohere
