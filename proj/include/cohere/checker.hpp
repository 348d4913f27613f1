#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cohere/overlap.hpp"

namespace cohere {

// Rule identifiers, from the catalog in the CLI reference:
//   D2-NO-SYNC             body performs push/pull
//   D2-UNDECLARED-WRITE    body writes a variable lacking W/RW at that site
//   D2-UNDECLARED-READ     body reads a variable lacking R/RW at that site
//   D2-W-NOT-ALL-PATHS     W-declared scalar not written on every path
//   D4-W-NOT-ALL-ELEMENTS  W-declared view not fully written on every path
//   OVL-MISSING-RW         write into cells shared with a view lacking W/RW
//   P3-MIXED-SITE          one variable touched from both sites in one body
//   BODY-ABSTRACT-EFFECT   body names an abstract key directly
struct Diagnostic {
  std::string rule;
  std::string view;
  SourcePos pos;
  std::string message;
};

struct Note {
  std::string rule;  // NOTE-UNUSED-MODE
  std::string view;
  SourcePos pos;
  std::string message;
};

// Syntactic access facts for one variable at one site.
struct ViewAccess {
  bool reads = false;
  bool writes = false;
  bool touched = false;  // any effect, syncs included
  std::set<int> written_cells;  // absolute indices, element writes only
  bool written_unknown = false; // reserved: set when an index is not a literal
  SourcePos first_read, first_write, first_touch;
};

struct AccessSummary {
  std::map<std::pair<std::string, Site>, ViewAccess> per_site;
  bool sync_present = false;
  std::string first_sync_view;
  SourcePos first_sync;
  bool abstract_effect = false;
  std::string first_abstract_name;
  SourcePos first_abstract;

  const ViewAccess* find(const std::string& name, Site site) const {
    auto it = per_site.find({name, site});
    return it == per_site.end() ? nullptr : &it->second;
  }
};

// Walks every sub-statement and marks which effects occur anywhere in the
// body. Conditions are not accesses. Stable under normalization.
inline void collect_accesses(const Stmt& s, AccessSummary& out) {
  switch (s.op()) {
    case Stmt::Op::Noop:
      return;
    case Stmt::Op::Seq:
      collect_accesses(s.seq_a(), out);
      collect_accesses(s.seq_b(), out);
      return;
    case Stmt::Op::If:
      collect_accesses(s.then_branch(), out);
      collect_accesses(s.else_branch(), out);
      return;
    case Stmt::Op::While:
      collect_accesses(s.body(), out);
      return;
    case Stmt::Op::Effect:
      break;
  }
  const auto& n = s.node();
  if (n.target.kind == Target::Kind::Abstract) {
    if (!out.abstract_effect) {
      out.abstract_effect = true;
      out.first_abstract_name = n.target.name;
      out.first_abstract = n.pos;
    }
    return;
  }
  ViewAccess& acc = out.per_site[{n.target.name, n.site}];
  if (!acc.touched) {
    acc.touched = true;
    acc.first_touch = n.pos;
  }
  switch (n.effect) {
    case EffectKind::Read:
      if (!acc.reads) acc.first_read = n.pos;
      acc.reads = true;
      break;
    case EffectKind::Write:
      if (!acc.writes) acc.first_write = n.pos;
      acc.writes = true;
      if (n.target.kind == Target::Kind::Element)
        acc.written_cells.insert(n.target.abs_index);
      break;
    case EffectKind::Push:
    case EffectKind::Pull:
      if (!out.sync_present) {
        out.sync_present = true;
        out.first_sync_view = n.target.name;
        out.first_sync = n.pos;
      }
      break;
    case EffectKind::Noop:
      break;
  }
}

inline AccessSummary collect_accesses(const Stmt& body) {
  AccessSummary out;
  collect_accesses(body, out);
  return out;
}

namespace detail {

// Must-analysis: facts guaranteed on every execution path. Sequencing
// accumulates, branches meet, loops contribute nothing (the zero-iteration
// path), and a single write settles its own target.
inline bool must_write_scalar(const Stmt& s, const std::string& name, Site site) {
  switch (s.op()) {
    case Stmt::Op::Noop: return false;
    case Stmt::Op::Effect: {
      const auto& n = s.node();
      return n.effect == EffectKind::Write && n.site == site &&
             n.target.kind == Target::Kind::Scalar && n.target.name == name;
    }
    case Stmt::Op::Seq:
      return must_write_scalar(s.seq_a(), name, site) ||
             must_write_scalar(s.seq_b(), name, site);
    case Stmt::Op::If:
      return must_write_scalar(s.then_branch(), name, site) &&
             must_write_scalar(s.else_branch(), name, site);
    case Stmt::Op::While: return false;
  }
  return false;
}

inline std::set<int> must_write_cells(const Stmt& s, const std::string& view, Site site) {
  switch (s.op()) {
    case Stmt::Op::Noop: return {};
    case Stmt::Op::Effect: {
      const auto& n = s.node();
      if (n.effect == EffectKind::Write && n.site == site &&
          n.target.kind == Target::Kind::Element && n.target.name == view)
        return {n.target.abs_index};
      return {};
    }
    case Stmt::Op::Seq: {
      std::set<int> a = must_write_cells(s.seq_a(), view, site);
      std::set<int> b = must_write_cells(s.seq_b(), view, site);
      a.insert(b.begin(), b.end());
      return a;
    }
    case Stmt::Op::If: {
      std::set<int> a = must_write_cells(s.then_branch(), view, site);
      std::set<int> b = must_write_cells(s.else_branch(), view, site);
      std::set<int> both;
      for (int i : a)
        if (b.count(i)) both.insert(i);
      return both;
    }
    case Stmt::Op::While: return {};
  }
  return {};
}

}  // namespace detail

// Does the body write the whole of the mode's variable on every path?
// Scalars need one guaranteed write; views need every cell of their range.
inline bool must_write(const Stmt& body, const AccessMode& mode,
                       const Declarations& decls) {
  if (decls.find_scalar(mode.view))
    return detail::must_write_scalar(body, mode.view, mode.site);
  const ViewDecl* v = decls.find_view(mode.view);
  if (!v) throw ConstructionError("mode names unknown variable '" + mode.view + "'");
  std::set<int> cells = detail::must_write_cells(body, mode.view, mode.site);
  for (int i = v->lo; i <= v->hi; ++i)
    if (!cells.count(i)) return false;
  return true;
}

// Site-consistency lint: a body may address one variable from one site
// only. Mixed-site access defeats per-call reasoning about where data
// lives, whatever the declared modes say.
inline std::vector<Diagnostic> check_localised(const DeclBlock& block) {
  std::vector<Diagnostic> out;
  AccessSummary summary = collect_accesses(block.body);
  std::set<std::string> reported;
  for (const auto& [key, acc] : summary.per_site) {
    const auto& [name, site] = key;
    if (!acc.touched || site != Site::Local) continue;
    const ViewAccess* remote = summary.find(name, Site::Remote);
    if (remote && remote->touched && !reported.count(name)) {
      reported.insert(name);
      out.push_back({"P3-MIXED-SITE", name, acc.first_touch,
                     "'" + name + "' is accessed from both sites in one body"});
    }
  }
  return out;
}

// Checks one block against its declared modes (after any overlap rewrite
// the caller chose to apply). Returns every violated rule; empty means the
// block passes.
inline std::vector<Diagnostic> check_block(const DeclBlock& block,
                                           const Declarations& decls,
                                           const OverlapRegistry& registry) {
  std::vector<Diagnostic> out;
  AccessSummary summary = collect_accesses(block.body);

  if (summary.sync_present)
    out.push_back({"D2-NO-SYNC", summary.first_sync_view, summary.first_sync,
                   "declared blocks may not push or pull; declare a mode instead"});
  if (summary.abstract_effect)
    out.push_back({"BODY-ABSTRACT-EFFECT", summary.first_abstract_name,
                   summary.first_abstract,
                   "abstract key '" + summary.first_abstract_name +
                       "^' cannot be addressed from a body"});

  for (const auto& [key, acc] : summary.per_site) {
    const auto& [name, site] = key;
    const AccessMode* mode = block.mode_for(name);
    const bool declared_here = mode && mode->site == site;
    if (acc.reads &&
        !(declared_here && (mode->kind == AccessMode::Kind::R ||
                            mode->kind == AccessMode::Kind::RW)))
      out.push_back({"D2-UNDECLARED-READ", name, acc.first_read,
                     "'" + name + "' is read " + name_of(site) +
                         "ly but has no R or RW declaration there"});
    if (acc.writes &&
        !(declared_here && (mode->kind == AccessMode::Kind::W ||
                            mode->kind == AccessMode::Kind::RW)))
      out.push_back({"D2-UNDECLARED-WRITE", name, acc.first_write,
                     "'" + name + "' is written " + name_of(site) +
                         "ly but has no W or RW declaration there"});
  }

  for (const auto& mode : block.modes) {
    if (mode.kind != AccessMode::Kind::W) continue;
    if (must_write(block.body, mode, decls)) continue;
    if (decls.find_scalar(mode.view)) {
      out.push_back({"D2-W-NOT-ALL-PATHS", mode.view, mode.pos,
                     "'" + mode.view + "' is declared W but not written on every path"});
    } else {
      out.push_back({"D4-W-NOT-ALL-ELEMENTS", mode.view, mode.pos,
                     "'" + mode.view +
                         "' is declared W but some cells are not written on every path"});
    }
  }

  for (const auto& [key, acc] : summary.per_site) {
    const auto& [name, site] = key;
    if (!acc.writes) continue;
    const ViewDecl* view = decls.find_view(name);
    if (!view) continue;
    for (const auto& other_name : registry.query(*view)) {
      const ViewDecl* other = registry.find(other_name);
      int shared_lo = std::max(view->lo, other->lo);
      int shared_hi = std::min(view->hi, other->hi);
      bool hits_shared = acc.written_unknown;
      for (int c : acc.written_cells)
        if (c >= shared_lo && c <= shared_hi) hits_shared = true;
      if (!hits_shared) continue;
      const AccessMode* other_mode = block.mode_for(other_name);
      if (other_mode && other_mode->site == site &&
          (other_mode->kind == AccessMode::Kind::W ||
           other_mode->kind == AccessMode::Kind::RW))
        continue;
      out.push_back({"OVL-MISSING-RW", other_name, acc.first_write,
                     "writes through '" + name + "' reach cells shared with '" +
                         other_name + "', which needs W or RW at the same site"});
    }
  }

  return out;
}

inline std::vector<Diagnostic> check_program(const AnnotatedProgram& p,
                                             const OverlapRegistry& registry) {
  std::vector<Diagnostic> out;
  for (const auto& block : p.blocks) {
    auto block_diags = check_block(block, p.decls, registry);
    out.insert(out.end(), block_diags.begin(), block_diags.end());
    auto lint = check_localised(block);
    out.insert(out.end(), lint.begin(), lint.end());
  }
  return out;
}

// Advisory only: R entries the body never exercises. Shadow entries are
// exempt; they exist precisely to cover accesses made elsewhere.
inline std::vector<Note> check_notes(const AnnotatedProgram& p) {
  std::vector<Note> out;
  for (const auto& block : p.blocks) {
    AccessSummary summary = collect_accesses(block.body);
    for (const auto& mode : block.modes) {
      if (mode.kind != AccessMode::Kind::R || mode.shadow) continue;
      const ViewAccess* acc = summary.find(mode.view, mode.site);
      if (!acc || !acc->reads)
        out.push_back({"NOTE-UNUSED-MODE", mode.view, mode.pos,
                       "'" + mode.view + "' is declared " +
                           name_of(mode.kind, mode.site) + " but never read"});
    }
  }
  return out;
}

}  // namespace cohere
