#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cohere/program.hpp"

namespace cohere {

// Cursor over a finite sequence of pre-decided booleans feeding opaque
// conditions. Once exhausted it answers false and counts the overflow.
struct Schedule {
  std::vector<bool> bits;
  size_t pos = 0;
  size_t overflow = 0;

  Schedule() = default;
  explicit Schedule(std::vector<bool> b) : bits(std::move(b)) {}

  static Schedule from_string(const std::string& s) {
    std::vector<bool> b;
    b.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1')
        throw ConstructionError("schedule must be a string of 0s and 1s");
      b.push_back(c == '1');
    }
    return Schedule(std::move(b));
  }

  bool next() {
    if (pos < bits.size()) return bits[pos++];
    ++overflow;
    return false;
  }
  size_t consumed() const { return pos; }
  bool overflowed() const { return overflow != 0; }
};

// Conditions always evaluate; validity tests read a flag that must exist.
inline bool eval_condition(const Condition& cond, const Store& store,
                           Schedule& schedule) {
  switch (cond.kind) {
    case Condition::Kind::IsValid:
      return store.at(cond.key).local == Validity::Valid;
    case Condition::Kind::RemIsValid:
      return store.at(cond.key).remote == Validity::Valid;
    case Condition::Kind::Opaque:
      return schedule.next();
  }
  return false;
}

struct Configuration {
  Stmt program;  // kept in normal form
  Store store;
};

// Why a head effect failed to unify.
struct StuckInfo {
  VarKey key;
  EffectKind effect = EffectKind::Noop;
  Site site = Site::Local;
  ValidityPair actual;  // status as stored, unswapped

  std::string describe() const {
    std::string out = std::string(site == Site::Remote ? "g" : "") + name_of(effect) +
                      " " + to_string(key) + ": have " + to_string(actual) +
                      ", need " + pre_to_string(effect_signature(effect));
    if (site == Site::Remote) out += " against the swapped pair";
    return out;
  }
};

enum class StepRule : uint8_t {
  Effect, RemoteEffect, WhileTrue, WhileFalse, IfTrue, IfFalse,
};

inline const char* name_of(StepRule r) {
  switch (r) {
    case StepRule::Effect: return "effect";
    case StepRule::RemoteEffect: return "remote-effect";
    case StepRule::WhileTrue: return "while-true";
    case StepRule::WhileFalse: return "while-false";
    case StepRule::IfTrue: return "if-true";
    case StepRule::IfFalse: return "if-false";
  }
  return "?";
}

using StoreDelta = std::vector<std::pair<VarKey, ValidityPair>>;

struct StepOutcome {
  enum class Kind : uint8_t { Done, Stepped, Stuck };
  Kind kind = Kind::Done;
  Configuration next;             // Stepped
  std::optional<StuckInfo> stuck; // Stuck
  StepRule rule = StepRule::Effect;
  StoreDelta delta;
};

namespace detail {

// Applies one effect to one key in place. Local effects unify directly;
// remote effects unify against the swapped pair and store the swapped
// postcondition, so a remote operation is the mirror image of a local one.
inline bool apply_effect_at(EffectKind kind, Site site, const VarKey& key,
                            Store& store, StoreDelta* delta,
                            std::optional<StuckInfo>& stuck) {
  const ValidityPair before = store.at(key);
  const EffectSignature& sig = effect_signature(kind);
  std::optional<ValidityPair> after;
  if (site == Site::Local) {
    after = apply_signature(sig, before);
  } else {
    auto swapped_post = apply_signature(sig, swapped(before));
    if (swapped_post) after = swapped(*swapped_post);
  }
  if (!after) {
    stuck = StuckInfo{key, kind, site, before};
    return false;
  }
  if (*after != before) {
    store.put(key, *after);
    if (delta) delta->emplace_back(key, *after);
  }
  return true;
}

enum class Status : uint8_t { Done, Stepped, Stuck };

// One reduction of the head of a normalized program, in place. Exactly one
// rule applies per call. Whole-view sync is a single effect application
// ranging over the view's cells in ascending index order; it fires
// atomically, so a mid-range unification failure leaves the store as it was.
inline Status step_inplace(Stmt& program, Store& store, Schedule& schedule,
                           StepRule* rule_out, StoreDelta* delta,
                           std::optional<StuckInfo>& stuck) {
  if (program.is_noop()) return Status::Done;

  Stmt head = program;
  Stmt rest = Stmt::noop();
  if (program.op() == Stmt::Op::Seq) {
    head = program.seq_a();
    rest = program.seq_b();
  }

  switch (head.op()) {
    case Stmt::Op::Effect: {
      const auto& n = head.node();
      if (rule_out)
        *rule_out = n.site == Site::Remote ? StepRule::RemoteEffect : StepRule::Effect;
      if (n.target.kind == Target::Kind::WholeView) {
        if (n.effect != EffectKind::Push && n.effect != EffectKind::Pull)
          throw std::logic_error("whole-view target requires push or pull");
        Store staged = store;
        for (int i = n.target.lo; i <= n.target.hi; ++i) {
          VarKey cell = VarKey::element(n.target.buffer, i);
          if (!apply_effect_at(n.effect, n.site, cell, staged, delta, stuck)) {
            if (delta) delta->clear();
            return Status::Stuck;
          }
        }
        store = std::move(staged);
      } else {
        if (!apply_effect_at(n.effect, n.site, n.target.store_key(), store, delta, stuck))
          return Status::Stuck;
      }
      program = rest;
      return Status::Stepped;
    }
    case Stmt::Op::If: {
      bool taken = eval_condition(head.node().cond, store, schedule);
      if (rule_out) *rule_out = taken ? StepRule::IfTrue : StepRule::IfFalse;
      program = seq_concat(taken ? head.then_branch() : head.else_branch(), rest);
      return Status::Stepped;
    }
    case Stmt::Op::While: {
      bool taken = eval_condition(head.node().cond, store, schedule);
      if (rule_out) *rule_out = taken ? StepRule::WhileTrue : StepRule::WhileFalse;
      program = taken ? seq_concat(head.body(), seq_concat(head, rest)) : rest;
      return Status::Stepped;
    }
    case Stmt::Op::Noop:
    case Stmt::Op::Seq:
      throw std::logic_error("program not in normal form");
  }
  return Status::Done;
}

}  // namespace detail

// Single reduction over value configurations.
inline StepOutcome step(const Configuration& config, Schedule& schedule) {
  StepOutcome out;
  Stmt program = config.program;
  Store store = config.store;
  std::optional<StuckInfo> stuck;
  auto status = detail::step_inplace(program, store, schedule, &out.rule, &out.delta, stuck);
  switch (status) {
    case detail::Status::Done:
      out.kind = StepOutcome::Kind::Done;
      out.next = {program, store};
      break;
    case detail::Status::Stepped:
      out.kind = StepOutcome::Kind::Stepped;
      out.next = {std::move(program), std::move(store)};
      break;
    case detail::Status::Stuck:
      out.kind = StepOutcome::Kind::Stuck;
      out.stuck = stuck;
      out.next = config;
      break;
  }
  return out;
}

enum class RunStatus : uint8_t { Done, Stuck, FuelExhausted };

inline const char* name_of(RunStatus s) {
  switch (s) {
    case RunStatus::Done: return "done";
    case RunStatus::Stuck: return "stuck";
    case RunStatus::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

struct TraceStep {
  StepRule rule;
  Stmt head;         // statement the rule fired on
  StoreDelta delta;  // changed keys only
};

struct RunResult {
  RunStatus status = RunStatus::Done;
  Store store;
  std::optional<StuckInfo> stuck;
  std::vector<TraceStep> trace;
  Stmt remaining;  // non-Noop when stuck or out of fuel
  int steps = 0;
  size_t schedule_consumed = 0;
  bool schedule_overflowed = false;
};

enum class TraceMode : uint8_t { None, Full };

// Runs to completion or until fuel runs out. Deterministic: identical
// inputs give identical results, traces included. The program is
// normalized on entry; each step costs one unit of fuel.
inline RunResult run(const Stmt& program, Store store, int fuel, Schedule schedule,
                     TraceMode trace_mode = TraceMode::Full) {
  RunResult result;
  Stmt current = normalize(program);
  while (true) {
    if (current.is_noop()) {
      result.status = RunStatus::Done;
      break;
    }
    if (result.steps >= fuel) {
      result.status = RunStatus::FuelExhausted;
      break;
    }
    Stmt head = current.op() == Stmt::Op::Seq ? current.seq_a() : current;
    StepRule rule;
    StoreDelta delta;
    std::optional<StuckInfo> stuck;
    auto status = detail::step_inplace(current, store, schedule,
                                       &rule, trace_mode == TraceMode::Full ? &delta : nullptr,
                                       stuck);
    if (status == detail::Status::Stuck) {
      result.status = RunStatus::Stuck;
      result.stuck = stuck;
      break;
    }
    ++result.steps;
    if (trace_mode == TraceMode::Full)
      result.trace.push_back({rule, head, std::move(delta)});
  }
  result.store = std::move(store);
  result.remaining = current;
  result.schedule_consumed = schedule.consumed();
  result.schedule_overflowed = schedule.overflowed();
  return result;
}

inline RunResult run(const RawProgram& p, int fuel, Schedule schedule,
                     TraceMode trace_mode = TraceMode::Full) {
  return run(p.body, initial_store(p.decls), fuel, std::move(schedule), trace_mode);
}

}  // namespace cohere
