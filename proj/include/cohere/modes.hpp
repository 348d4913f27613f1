#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cohere/semantics.hpp"

namespace cohere {

namespace detail {

// push x / pull x for the concrete side of a variable: the scalar cell, or
// the element-wise sync over an array view's range.
inline Stmt concrete_sync(EffectKind kind, const std::string& name,
                          const Declarations& decls) {
  if (decls.find_scalar(name))
    return Stmt::effect(kind, decls.scalar_target(name));
  return Stmt::effect(kind, decls.whole_view_target(name));
}

}  // namespace detail

// Rewrites one declared mode into core statements guarding the block:
//   R x    ->  if (valid(x^)) {} else { pull x; pull x^; }
//   GR x   ->  if (gvalid(x^)) {} else { push x; push x^; }
//   RW x   ->  <R x>; w x^          GRW x  ->  <GR x>; gw x^
//   W x    ->  w x^                 GW x   ->  gw x^
// Sync statements come in concrete/abstract pairs; array views sync their
// whole range before the abstract key.
inline Stmt translate_mode(const AccessMode& mode, const Declarations& decls) {
  const bool remote = mode.site == Site::Remote;
  const EffectKind sync = remote ? EffectKind::Push : EffectKind::Pull;
  const Target abstract = decls.abstract_target(mode.view);

  Stmt ensure_valid = Stmt::if_else(
      remote ? Condition::rem_is_valid(abstract.store_key())
             : Condition::is_valid(abstract.store_key()),
      Stmt::noop(),
      Stmt::seq(detail::concrete_sync(sync, mode.view, decls),
                Stmt::effect(sync, abstract)));
  Stmt mark_written = Stmt::effect(EffectKind::Write, abstract, mode.site);

  switch (mode.kind) {
    case AccessMode::Kind::R: return ensure_valid;
    case AccessMode::Kind::W: return mark_written;
    case AccessMode::Kind::RW: return Stmt::seq(ensure_valid, mark_written);
  }
  return Stmt::noop();
}

// Mode guards in declaration order, then the body.
inline Stmt translate_block(const DeclBlock& block, const Declarations& decls) {
  std::vector<Stmt> parts;
  parts.reserve(block.modes.size() + 1);
  for (const auto& m : block.modes) parts.push_back(translate_mode(m, decls));
  parts.push_back(block.body);
  return normalize(Stmt::seq(parts));
}

inline Stmt translate_program(const AnnotatedProgram& p) {
  std::vector<Stmt> parts;
  parts.reserve(p.blocks.size());
  for (const auto& b : p.blocks) parts.push_back(translate_block(b, p.decls));
  return normalize(Stmt::seq(parts));
}

// Abstraction order on statuses: an abstract pair may under-report
// validity. (V,I) and (I,V) are both safe stand-ins for (V,V); everything
// else must match exactly.
inline bool leq(ValidityPair abstract_pair, ValidityPair concrete) {
  if (abstract_pair == concrete) return true;
  return concrete == kBothValid &&
         (abstract_pair == kLocalOnly || abstract_pair == kRemoteOnly);
}

// Block-boundary consistency: each scalar's abstract status bounds its
// cell, and each view's abstract status bounds every cell in its range.
inline bool abstraction_correct(const Store& store, const Declarations& decls) {
  for (const auto& s : decls.scalars()) {
    if (!leq(store.at(VarKey::abstract(s.name)), store.at(VarKey::scalar(s.name))))
      return false;
  }
  for (const auto& v : decls.views()) {
    ValidityPair a = store.at(VarKey::abstract(v.name));
    for (int i = v.lo; i <= v.hi; ++i)
      if (!leq(a, store.at(VarKey::element(v.buffer, i)))) return false;
  }
  return true;
}

// Result of running a block sequence with a boundary check after each
// completed block. Fuel and the schedule are shared across blocks, so the
// outcome matches running the whole translated program in one go.
struct AnnotatedRun {
  RunStatus status = RunStatus::Done;
  Store store;
  std::optional<StuckInfo> stuck;
  std::vector<bool> boundary_ok;  // one entry per completed block
  int steps = 0;
  size_t schedule_consumed = 0;
  bool schedule_overflowed = false;
};

inline AnnotatedRun run_annotated(const AnnotatedProgram& p, int fuel,
                                  Schedule schedule) {
  AnnotatedRun result;
  result.store = initial_store(p.decls);
  for (const auto& block : p.blocks) {
    RunResult r = run(translate_block(block, p.decls), std::move(result.store),
                      fuel - result.steps, schedule, TraceMode::None);
    result.store = std::move(r.store);
    result.steps += r.steps;
    result.status = r.status;
    result.schedule_consumed = r.schedule_consumed;
    result.schedule_overflowed = result.schedule_overflowed || r.schedule_overflowed;
    schedule.pos = r.schedule_consumed;  // cursor carries into the next block
    if (r.status != RunStatus::Done) {
      result.stuck = r.stuck;
      return result;
    }
    result.boundary_ok.push_back(abstraction_correct(result.store, p.decls));
  }
  return result;
}

}  // namespace cohere
