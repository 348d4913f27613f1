#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cohere/ast.hpp"

namespace cohere {

// A defect in program construction (unknown names, bad ranges, duplicate
// declarations). Distinct from getting stuck, which is a run outcome.
struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ScalarDecl {
  std::string name;
  SourcePos pos;
};

struct BufferDecl {
  std::string id;
  int length = 0;
  SourcePos pos;
};

// A named window into a buffer; the interval is inclusive and absolute.
// Statements index a view relatively: x[i] is the buffer cell lo + i.
// A full-range view plays the role of the whole vector; scalars are kept
// apart as degenerate length-1 variables with no buffer.
struct ViewDecl {
  std::string name;
  std::string buffer;
  int lo = 0, hi = 0;
  SourcePos pos;

  int length() const { return hi - lo + 1; }

  friend bool operator==(const ViewDecl& a, const ViewDecl& b) {
    return a.name == b.name && a.buffer == b.buffer && a.lo == b.lo && a.hi == b.hi;
  }
};

// Declaration table for one program. Names of scalars and views share one
// namespace (each owns an abstract key); buffer ids live in their own.
class Declarations {
 public:
  void add_scalar(ScalarDecl d) {
    require_fresh_name(d.name);
    scalars_.push_back(std::move(d));
  }
  void add_buffer(BufferDecl d) {
    if (d.length < 1) throw ConstructionError("buffer '" + d.id + "' needs length >= 1");
    if (find_buffer(d.id)) throw ConstructionError("duplicate buffer '" + d.id + "'");
    buffers_.push_back(std::move(d));
  }
  void add_view(ViewDecl d) {
    require_fresh_name(d.name);
    const BufferDecl* buf = find_buffer(d.buffer);
    if (!buf) throw ConstructionError("view '" + d.name + "' names unknown buffer '" + d.buffer + "'");
    if (d.lo < 0 || d.hi >= buf->length || d.lo > d.hi)
      throw ConstructionError("view '" + d.name + "' range [" + std::to_string(d.lo) +
                              ":" + std::to_string(d.hi) + "] does not fit buffer '" +
                              buf->id + "[" + std::to_string(buf->length) + "]'");
    views_.push_back(std::move(d));
  }

  const std::vector<ScalarDecl>& scalars() const { return scalars_; }
  const std::vector<BufferDecl>& buffers() const { return buffers_; }
  const std::vector<ViewDecl>& views() const { return views_; }

  const ScalarDecl* find_scalar(const std::string& name) const {
    for (const auto& s : scalars_) if (s.name == name) return &s;
    return nullptr;
  }
  const BufferDecl* find_buffer(const std::string& id) const {
    for (const auto& b : buffers_) if (b.id == id) return &b;
    return nullptr;
  }
  const ViewDecl* find_view(const std::string& name) const {
    for (const auto& v : views_) if (v.name == name) return &v;
    return nullptr;
  }

  // Target builders resolving names against this table.
  Target scalar_target(const std::string& name) const {
    if (!find_scalar(name)) throw ConstructionError("unknown scalar '" + name + "'");
    return Target::scalar(name);
  }
  Target element_target(const std::string& view, int offset) const {
    const ViewDecl* v = find_view(view);
    if (!v) throw ConstructionError("unknown view '" + view + "'");
    if (offset < 0 || offset >= v->length())
      throw ConstructionError("index " + std::to_string(offset) + " outside view '" +
                              view + "' of length " + std::to_string(v->length()));
    return Target::element(view, offset, v->buffer, v->lo + offset);
  }
  Target whole_view_target(const std::string& view) const {
    const ViewDecl* v = find_view(view);
    if (!v) throw ConstructionError("unknown view '" + view + "'");
    return Target::whole_view(view, v->buffer, v->lo, v->hi);
  }
  Target abstract_target(const std::string& name) const {
    if (!find_scalar(name) && !find_view(name))
      throw ConstructionError("unknown variable '" + name + "'");
    return Target::abstract(name);
  }

  friend bool operator==(const Declarations& a, const Declarations& b) {
    auto scalar_names = [](const Declarations& d) {
      std::vector<std::string> out;
      for (const auto& s : d.scalars_) out.push_back(s.name);
      return out;
    };
    auto buffer_sigs = [](const Declarations& d) {
      std::vector<std::pair<std::string, int>> out;
      for (const auto& b : d.buffers_) out.emplace_back(b.id, b.length);
      return out;
    };
    return scalar_names(a) == scalar_names(b) && buffer_sigs(a) == buffer_sigs(b) &&
           a.views_ == b.views_;
  }

 private:
  void require_fresh_name(const std::string& name) const {
    if (find_scalar(name) || find_view(name))
      throw ConstructionError("duplicate declaration of '" + name + "'");
  }

  std::vector<ScalarDecl> scalars_;
  std::vector<BufferDecl> buffers_;
  std::vector<ViewDecl> views_;
};

// Finite map from keys to statuses. Lookup of an absent key is a defect,
// never a stuck run: every declared key is present from the start.
class Store {
 public:
  using Map = std::map<VarKey, ValidityPair>;

  void put(VarKey k, ValidityPair p) { map_[std::move(k)] = p; }

  const ValidityPair& at(const VarKey& k) const {
    auto it = map_.find(k);
    if (it == map_.end())
      throw std::logic_error("store has no key '" + to_string(k) + "'");
    return it->second;
  }
  bool contains(const VarKey& k) const { return map_.count(k) != 0; }
  size_t size() const { return map_.size(); }

  Map::const_iterator begin() const { return map_.begin(); }
  Map::const_iterator end() const { return map_.end(); }

  friend bool operator==(const Store&, const Store&) = default;

 private:
  Map map_;
};

// Both copies invalid: the data is lost. Safe executions never reach this.
inline bool is_unsafe(const Store& store) {
  for (const auto& [key, pair] : store)
    if (pair == kBothInvalid) return true;
  return false;
}

// Fresh store: every concrete cell and every abstract key starts (V,I) --
// data begins on the local side only.
inline Store initial_store(const Declarations& decls) {
  Store s;
  for (const auto& sc : decls.scalars()) {
    s.put(VarKey::scalar(sc.name), kLocalOnly);
    s.put(VarKey::abstract(sc.name), kLocalOnly);
  }
  for (const auto& b : decls.buffers())
    for (int i = 0; i < b.length; ++i) s.put(VarKey::element(b.id, i), kLocalOnly);
  for (const auto& v : decls.views()) s.put(VarKey::abstract(v.name), kLocalOnly);
  return s;
}

// Declared access kind of one variable within a block.
struct AccessMode {
  enum class Kind : uint8_t { R, W, RW };
  Kind kind = Kind::R;
  Site site = Site::Local;
  std::string view;    // scalar or view name
  bool shadow = false; // inserted by overlap inference, not written by the user
  SourcePos pos;

  friend bool operator==(const AccessMode& a, const AccessMode& b) {
    return a.kind == b.kind && a.site == b.site && a.view == b.view && a.shadow == b.shadow;
  }
};

inline std::string name_of(AccessMode::Kind k, Site s) {
  std::string out = s == Site::Remote ? "G" : "";
  switch (k) {
    case AccessMode::Kind::R: return out + "R";
    case AccessMode::Kind::W: return out + "W";
    case AccessMode::Kind::RW: return out + "RW";
  }
  return out + "?";
}

// One declared block: modes plus body. A variable appears at most once in
// the mode list, whichever the site.
struct DeclBlock {
  std::vector<AccessMode> modes;
  Stmt body;
  SourcePos pos;

  DeclBlock() = default;
  DeclBlock(std::vector<AccessMode> m, Stmt b, SourcePos p = {})
      : modes(std::move(m)), body(std::move(b)), pos(p) {
    for (size_t i = 0; i < modes.size(); ++i)
      for (size_t j = i + 1; j < modes.size(); ++j)
        if (modes[i].view == modes[j].view)
          throw ConstructionError("variable '" + modes[i].view +
                                  "' declared twice in one block");
  }

  const AccessMode* mode_for(const std::string& view) const {
    for (const auto& m : modes) if (m.view == view) return &m;
    return nullptr;
  }

  friend bool operator==(const DeclBlock& a, const DeclBlock& b) {
    return a.modes == b.modes && a.body == b.body;
  }
};

// A whole program: declarations first, then the block sequence.
struct AnnotatedProgram {
  Declarations decls;
  std::vector<DeclBlock> blocks;

  friend bool operator==(const AnnotatedProgram& a, const AnnotatedProgram& b) {
    return a.decls == b.decls && a.blocks == b.blocks;
  }
};

// Raw core-calculus program: declarations plus one bare statement list.
struct RawProgram {
  Declarations decls;
  Stmt body;
};

}  // namespace cohere
