#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cohere/program.hpp"

namespace cohere {

// Two views overlap when they window the same buffer and their absolute
// ranges intersect. A view never overlaps itself.
inline bool overlaps(const ViewDecl& a, const ViewDecl& b) {
  if (a.name == b.name) return false;
  return a.buffer == b.buffer && a.lo <= b.hi && b.lo <= a.hi;
}

// Raised when mode inference would give one variable entries on both
// sites, which no single block can honour.
struct OverlapInferenceError : std::runtime_error {
  explicit OverlapInferenceError(const std::string& view)
      : std::runtime_error("inferred modes put '" + view +
                           "' on both sites in one block"),
        view(view) {}
  std::string view;
};

// Dynamic index of registered views, queryable for overlaps. Two
// interchangeable backends honour the same contract: a per-buffer list
// kept sorted by interval start, and a segment tree with an interval-start
// index (update O(log n), query O(k + log n)). Results are name-sorted and
// always exclude the probe.
class OverlapRegistry {
 public:
  enum class Backend { SortedList, SegmentTree };

  explicit OverlapRegistry(Backend backend = Backend::SortedList)
      : backend_(backend) {}

  Backend backend() const { return backend_; }

  void add_buffer(const BufferDecl& b) {
    if (buffers_.count(b.id)) throw ConstructionError("buffer '" + b.id + "' already indexed");
    BufferIndex idx;
    idx.length = b.length;
    if (backend_ == Backend::SegmentTree) idx.tree.assign(4 * (size_t)b.length, {});
    buffers_.emplace(b.id, std::move(idx));
  }

  bool contains(const std::string& name) const { return views_.count(name) != 0; }

  void insert(const ViewDecl& v) {
    if (contains(v.name)) throw ConstructionError("view '" + v.name + "' already registered");
    BufferIndex& idx = buffer_index(v.buffer);
    if (v.lo < 0 || v.hi >= idx.length || v.lo > v.hi)
      throw ConstructionError("view '" + v.name + "' range does not fit its buffer");
    if (backend_ == Backend::SortedList) {
      idx.by_lo.emplace(v.lo, v.name);
    } else {
      tree_update(idx, 1, 0, idx.length - 1, v.lo, v.hi, v.name, /*add=*/true);
      idx.by_lo.emplace(v.lo, v.name);
    }
    views_.emplace(v.name, v);
  }

  void remove(const std::string& name) {
    auto it = views_.find(name);
    if (it == views_.end()) throw ConstructionError("view '" + name + "' is not registered");
    const ViewDecl v = it->second;
    BufferIndex& idx = buffer_index(v.buffer);
    if (backend_ == Backend::SegmentTree)
      tree_update(idx, 1, 0, idx.length - 1, v.lo, v.hi, v.name, /*add=*/false);
    for (auto r = idx.by_lo.equal_range(v.lo); r.first != r.second; ++r.first) {
      if (r.first->second == name) {
        idx.by_lo.erase(r.first);
        break;
      }
    }
    views_.erase(it);
  }

  // Registered views overlapping the probe, name-sorted. The probe itself
  // need not be registered; its interval is used either way.
  std::vector<std::string> query(const ViewDecl& probe) const {
    auto bit = buffers_.find(probe.buffer);
    if (bit == buffers_.end()) return {};
    const BufferIndex& idx = bit->second;
    std::set<std::string> hits;
    if (backend_ == Backend::SortedList) {
      for (auto it = idx.by_lo.begin(); it != idx.by_lo.end() && it->first <= probe.hi; ++it) {
        const ViewDecl& v = views_.at(it->second);
        if (v.hi >= probe.lo) hits.insert(v.name);
      }
    } else {
      // Intervals holding the probe's start stab the tree; intervals
      // starting inside (lo, hi] come from the start index. The two sets
      // partition all overlaps.
      tree_stab(idx, 1, 0, idx.length - 1, probe.lo, hits);
      for (auto it = idx.by_lo.upper_bound(probe.lo);
           it != idx.by_lo.end() && it->first <= probe.hi; ++it)
        hits.insert(it->second);
    }
    hits.erase(probe.name);
    return {hits.begin(), hits.end()};
  }

  std::vector<std::string> query(const std::string& name) const {
    auto it = views_.find(name);
    if (it == views_.end()) throw ConstructionError("view '" + name + "' is not registered");
    return query(it->second);
  }

  const ViewDecl* find(const std::string& name) const {
    auto it = views_.find(name);
    return it == views_.end() ? nullptr : &it->second;
  }

  size_t size() const { return views_.size(); }

 private:
  struct BufferIndex {
    int length = 0;
    std::multimap<int, std::string> by_lo;       // interval start -> view name
    std::vector<std::set<std::string>> tree;     // segment tree node sets
  };

  BufferIndex& buffer_index(const std::string& id) {
    auto it = buffers_.find(id);
    if (it == buffers_.end()) throw ConstructionError("buffer '" + id + "' is not indexed");
    return it->second;
  }

  static void tree_update(BufferIndex& idx, size_t node, int node_lo, int node_hi,
                          int lo, int hi, const std::string& name, bool add) {
    if (hi < node_lo || node_hi < lo) return;
    if (lo <= node_lo && node_hi <= hi) {
      if (add) idx.tree[node].insert(name);
      else idx.tree[node].erase(name);
      return;
    }
    int mid = node_lo + (node_hi - node_lo) / 2;
    tree_update(idx, 2 * node, node_lo, mid, lo, hi, name, add);
    tree_update(idx, 2 * node + 1, mid + 1, node_hi, lo, hi, name, add);
  }

  static void tree_stab(const BufferIndex& idx, size_t node, int node_lo,
                        int node_hi, int q, std::set<std::string>& out) {
    if (q < node_lo || node_hi < q) return;
    out.insert(idx.tree[node].begin(), idx.tree[node].end());
    if (node_lo == node_hi) return;
    int mid = node_lo + (node_hi - node_lo) / 2;
    if (q <= mid) tree_stab(idx, 2 * node, node_lo, mid, q, out);
    else tree_stab(idx, 2 * node + 1, mid + 1, node_hi, q, out);
  }

  Backend backend_;
  std::map<std::string, BufferIndex> buffers_;
  std::map<std::string, ViewDecl> views_;
};

inline OverlapRegistry build_registry(
    const Declarations& decls,
    OverlapRegistry::Backend backend = OverlapRegistry::Backend::SortedList) {
  OverlapRegistry reg(backend);
  for (const auto& b : decls.buffers()) reg.add_buffer(b);
  for (const auto& v : decls.views()) reg.insert(v);
  return reg;
}

// Closes a block's mode set over view overlaps:
//   W x  declared -> every overlapping y without a same-site W gains RW y
//   RW x declared -> every overlapping y gains RW y
// at the declaring site. Inference runs over the declared set only; the
// entries it adds never feed further inference. A variable keeps a single
// entry: an inferred RW upgrades a declared R, leaves W and RW as they
// are, and otherwise lands as a new shadow entry appended in declaration
// order. Scalars never overlap anything.
inline std::vector<AccessMode> infer_overlap_closure(
    const std::vector<AccessMode>& modes, const OverlapRegistry& registry,
    const Declarations& decls) {
  std::vector<AccessMode> out = modes;
  std::map<std::string, Site> needed;  // view -> site needing RW

  for (const auto& m : modes) {
    if (m.kind == AccessMode::Kind::R || m.shadow) continue;
    const ViewDecl* view = decls.find_view(m.view);
    if (!view) continue;  // scalar
    for (const auto& y : registry.query(*view)) {
      if (m.kind == AccessMode::Kind::W) {
        bool y_has_same_site_w = false;
        for (const auto& other : modes)
          if (other.view == y && other.kind == AccessMode::Kind::W && other.site == m.site)
            y_has_same_site_w = true;
        if (y_has_same_site_w) continue;
      }
      auto [it, fresh] = needed.emplace(y, m.site);
      if (!fresh && it->second != m.site) throw OverlapInferenceError(y);
    }
  }

  std::vector<std::pair<std::string, Site>> shadows;
  for (const auto& [y, site] : needed) {
    AccessMode* existing = nullptr;
    for (auto& m : out)
      if (m.view == y) existing = &m;
    if (existing) {
      if (existing->site != site) throw OverlapInferenceError(y);
      if (existing->kind == AccessMode::Kind::R) existing->kind = AccessMode::Kind::RW;
    } else {
      shadows.emplace_back(y, site);
    }
  }
  // append new entries in declaration order of their views
  for (const auto& v : decls.views()) {
    for (const auto& [y, site] : shadows) {
      if (y != v.name) continue;
      AccessMode m;
      m.kind = AccessMode::Kind::RW;
      m.site = site;
      m.view = y;
      m.shadow = true;
      out.push_back(std::move(m));
    }
  }
  return out;
}

// Applies the closure block by block. Idempotent: a second pass finds
// nothing new to add.
inline AnnotatedProgram rewrite_program(const AnnotatedProgram& p,
                                        const OverlapRegistry& registry) {
  AnnotatedProgram out;
  out.decls = p.decls;
  out.blocks.reserve(p.blocks.size());
  for (const auto& b : p.blocks)
    out.blocks.emplace_back(infer_overlap_closure(b.modes, registry, p.decls), b.body, b.pos);
  return out;
}

}  // namespace cohere
