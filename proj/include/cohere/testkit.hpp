#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cohere/checker.hpp"
#include "cohere/modes.hpp"
#include "cohere/overlap.hpp"
#include "cohere/pretty.hpp"

namespace cohere {

// ---------------------------------------------------------------------------
// Reference interpreter. A second, separate transcription of the reduction
// rules: the status tables are written out case by case rather than driven
// by signatures, and sequencing is handled by left-spine recursion on the
// raw tree instead of normalization. Production and reference must agree
// configuration by configuration; a divergence means one of them strayed.

namespace reference {

inline std::optional<ValidityPair> apply_local(EffectKind kind, ValidityPair p) {
  const Validity V = Validity::Valid, I = Validity::Invalid;
  switch (kind) {
    case EffectKind::Push:
      if (p.local != V) return std::nullopt;
      return ValidityPair{V, V};
    case EffectKind::Pull:
      if (p.remote != V) return std::nullopt;
      return ValidityPair{V, V};
    case EffectKind::Read:
      if (p.local != V) return std::nullopt;
      return p;
    case EffectKind::Write:
      return ValidityPair{V, I};
    case EffectKind::Noop:
      return p;
  }
  return std::nullopt;
}

// Remote case, derived by hand from the swap rule: precondition read on the
// mirrored pair, postcondition stored mirrored.
inline std::optional<ValidityPair> apply_remote(EffectKind kind, ValidityPair p) {
  const Validity V = Validity::Valid, I = Validity::Invalid;
  switch (kind) {
    case EffectKind::Push:  // needs the remote copy valid; both end valid
      if (p.remote != V) return std::nullopt;
      return ValidityPair{V, V};
    case EffectKind::Pull:  // mirror of pull: needs the local copy valid
      if (p.local != V) return std::nullopt;
      return ValidityPair{V, V};
    case EffectKind::Read:  // needs the remote copy valid; nothing changes
      if (p.remote != V) return std::nullopt;
      return p;
    case EffectKind::Write:  // remote copy freshly written, local dropped
      return ValidityPair{I, V};
    case EffectKind::Noop:
      return p;
  }
  return std::nullopt;
}

enum class Status : uint8_t { Done, Stepped, Stuck };

struct StepResult {
  Status status = Status::Done;
  Stmt next;
  std::optional<StuckInfo> stuck;
};

inline StepResult step(const Stmt& s, Store& store, Schedule& schedule) {
  switch (s.op()) {
    case Stmt::Op::Noop:
      return {Status::Done, s, {}};
    case Stmt::Op::Effect: {
      const auto& n = s.node();
      auto apply = n.site == Site::Remote ? apply_remote : apply_local;
      if (n.target.kind == Target::Kind::WholeView) {
        Store staged = store;
        for (int i = n.target.lo; i <= n.target.hi; ++i) {
          VarKey cell = VarKey::element(n.target.buffer, i);
          ValidityPair before = staged.at(cell);
          auto after = apply(n.effect, before);
          if (!after)
            return {Status::Stuck, s, StuckInfo{cell, n.effect, n.site, before}};
          staged.put(cell, *after);
        }
        store = std::move(staged);
        return {Status::Stepped, Stmt::noop(), {}};
      }
      VarKey key = n.target.store_key();
      ValidityPair before = store.at(key);
      auto after = apply(n.effect, before);
      if (!after)
        return {Status::Stuck, s, StuckInfo{key, n.effect, n.site, before}};
      store.put(key, *after);
      return {Status::Stepped, Stmt::noop(), {}};
    }
    case Stmt::Op::If: {
      bool taken = eval_condition(s.node().cond, store, schedule);
      return {Status::Stepped, taken ? s.then_branch() : s.else_branch(), {}};
    }
    case Stmt::Op::While: {
      bool taken = eval_condition(s.node().cond, store, schedule);
      return {Status::Stepped, taken ? Stmt::seq(s.body(), s) : Stmt::noop(), {}};
    }
    case Stmt::Op::Seq: {
      StepResult left = step(s.seq_a(), store, schedule);
      if (left.status == Status::Done) return step(s.seq_b(), store, schedule);
      if (left.status == Status::Stuck) return left;
      return {Status::Stepped, Stmt::seq(left.next, s.seq_b()), {}};
    }
  }
  return {Status::Done, s, {}};
}

struct RunOutcome {
  RunStatus status = RunStatus::Done;
  Store store;
  std::optional<StuckInfo> stuck;
  int steps = 0;
};

inline RunOutcome run(Stmt program, Store store, int fuel, Schedule schedule) {
  RunOutcome out;
  for (;;) {
    StepResult r = step(program, store, schedule);
    if (r.status == Status::Done) {
      out.status = RunStatus::Done;
      break;
    }
    if (out.steps >= fuel) {
      out.status = RunStatus::FuelExhausted;
      break;
    }
    if (r.status == Status::Stuck) {
      out.status = RunStatus::Stuck;
      out.stuck = r.stuck;
      break;
    }
    ++out.steps;
    program = r.next;
  }
  out.store = std::move(store);
  return out;
}

}  // namespace reference

// Runs the production and reference interpreters side by side, comparing
// configurations after every step: equal stores, equal programs up to
// normalization, equal schedule cursors, matching terminal outcomes. Also
// watches every intermediate store for a fully-invalid pair.
struct AgreeResult {
  bool ok = true;
  std::string why;
  RunStatus status = RunStatus::Done;
  bool unsafe_seen = false;
  int steps = 0;
};

inline AgreeResult agree_stepwise(const Stmt& program, const Store& initial,
                                  int fuel, const Schedule& schedule) {
  AgreeResult out;
  Stmt prod = normalize(program);
  Store prod_store = initial;
  Schedule prod_sched = schedule;
  Stmt ref = program;
  Store ref_store = initial;
  Schedule ref_sched = schedule;

  auto fail = [&](const std::string& why) {
    out.ok = false;
    out.why = why;
    return out;
  };
  if (is_unsafe(prod_store)) out.unsafe_seen = true;

  for (;;) {
    bool prod_done = prod.is_noop();
    // The reference interpreter discovers "done" by stepping, so probe it
    // on scratch state first to keep both sides in lock-step.
    Store probe_store = ref_store;
    Schedule probe_sched = ref_sched;
    reference::StepResult ref_probe = reference::step(ref, probe_store, probe_sched);
    bool ref_done = ref_probe.status == reference::Status::Done;
    if (prod_done != ref_done)
      return fail("one interpreter finished, the other did not");
    if (prod_done) {
      out.status = RunStatus::Done;
      break;
    }
    if (out.steps >= fuel) {
      out.status = RunStatus::FuelExhausted;
      break;
    }

    StepRule rule;
    std::optional<StuckInfo> prod_stuck;
    auto prod_status =
        detail::step_inplace(prod, prod_store, prod_sched, &rule, nullptr, prod_stuck);
    bool prod_is_stuck = prod_status == detail::Status::Stuck;
    bool ref_is_stuck = ref_probe.status == reference::Status::Stuck;
    if (prod_is_stuck != ref_is_stuck)
      return fail("interpreters disagree on getting stuck");
    if (prod_is_stuck) {
      const StuckInfo& a = *prod_stuck;
      const StuckInfo& b = *ref_probe.stuck;
      if (!(a.key == b.key && a.effect == b.effect && a.site == b.site &&
            a.actual == b.actual))
        return fail("interpreters blame different stuck effects");
      out.status = RunStatus::Stuck;
      break;
    }
    // commit the probed reference step
    ref = ref_probe.next;
    ref_store = std::move(probe_store);
    ref_sched = probe_sched;
    ++out.steps;

    if (!(prod_store == ref_store))
      return fail("stores diverge after step " + std::to_string(out.steps));
    if (normalize(ref) != prod)
      return fail("programs diverge after step " + std::to_string(out.steps));
    if (prod_sched.pos != ref_sched.pos)
      return fail("schedule cursors diverge after step " + std::to_string(out.steps));
    if (is_unsafe(prod_store)) out.unsafe_seen = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of straight-line raw programs: all sequences up to
// the length bound over the ten effect forms (five operations, two sites)
// applied to the given scalars.

struct EnumLimits {
  int max_len = 4;
  std::vector<std::string> scalars = {"x"};
};

inline std::vector<Stmt> enumerate_raw_programs(const EnumLimits& limits) {
  std::vector<Stmt> forms;
  for (const auto& name : limits.scalars)
    for (EffectKind kind : {EffectKind::Push, EffectKind::Pull, EffectKind::Read,
                            EffectKind::Write, EffectKind::Noop})
      for (Site site : {Site::Local, Site::Remote})
        forms.push_back(Stmt::effect(kind, Target::scalar(name), site));

  std::vector<Stmt> out;
  std::vector<Stmt> frontier = {Stmt::noop()};
  out.push_back(Stmt::noop());
  for (int len = 1; len <= limits.max_len; ++len) {
    std::vector<Stmt> next;
    next.reserve(frontier.size() * forms.size());
    for (const auto& prefix : frontier)
      for (const auto& form : forms) {
        Stmt p = seq_concat(prefix, form);
        next.push_back(p);
        out.push_back(std::move(p));
      }
    frontier = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random well-declared programs. Every output passes the checker: W-mode
// variables get unconditional full writes at the top of the body, other
// access respects the declared kinds and sites, loops are opaque-bounded,
// and overlapping declarations are closed with rewrite_program before the
// program is returned.

struct GenLimits {
  int max_blocks = 3;
  int max_body_depth = 2;
  int max_vars = 3;        // scalars and views each capped by this
  int max_buffer_len = 6;
  int max_loop_unroll = 2; // while statements per block
  bool allow_arrays = true;
  bool allow_overlaps = true;
};

namespace detail {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  // Modulo keeps draws identical across standard libraries; the bias is
  // irrelevant here.
  uint32_t pick(uint32_t n) { return n ? (uint32_t)(eng() % n) : 0; }
  bool percent(uint32_t p) { return pick(100) < p; }
};

struct GenVar {
  std::string name;
  bool is_view = false;
  int length = 1;
  AccessMode::Kind kind = AccessMode::Kind::R;
  Site site = Site::Local;
};

// One extra statement tree drawn from the granted permissions.
inline Stmt gen_extra(Rng& rng, const std::vector<GenVar>& vars,
                      const Declarations& decls, int depth, int& opaque_budget,
                      int& loops_left) {
  // candidate effect statements
  auto effect = [&]() -> Stmt {
    if (vars.empty()) return Stmt::noop();
    const GenVar& v = vars[rng.pick((uint32_t)vars.size())];
    bool can_read = v.kind != AccessMode::Kind::W;
    bool can_write = v.kind != AccessMode::Kind::R;
    bool write = can_write && (!can_read || rng.percent(40));
    EffectKind kind = write ? EffectKind::Write : EffectKind::Read;
    Target t = v.is_view ? decls.element_target(v.name, (int)rng.pick((uint32_t)v.length))
                         : decls.scalar_target(v.name);
    return Stmt::effect(kind, std::move(t), v.site);
  };
  auto condition = [&]() -> Condition {
    if (opaque_budget > 0 && rng.percent(60)) {
      --opaque_budget;
      return Condition::opaque();
    }
    if (!vars.empty()) {
      const GenVar& v = vars[rng.pick((uint32_t)vars.size())];
      VarKey key = v.is_view ? VarKey::abstract(v.name) : VarKey::scalar(v.name);
      return rng.percent(50) ? Condition::is_valid(key) : Condition::rem_is_valid(key);
    }
    if (opaque_budget > 0) {
      --opaque_budget;
      return Condition::opaque();
    }
    return Condition::is_valid(VarKey::scalar("?"));  // unreachable: vars nonempty
  };

  uint32_t roll = rng.pick(10);
  if (depth > 0 && roll < 2) {
    Stmt then_s = gen_extra(rng, vars, decls, depth - 1, opaque_budget, loops_left);
    Stmt else_s = rng.percent(60)
                      ? gen_extra(rng, vars, decls, depth - 1, opaque_budget, loops_left)
                      : Stmt::noop();
    return Stmt::if_else(condition(), std::move(then_s), std::move(else_s));
  }
  if (depth > 0 && roll < 4 && loops_left > 0 && opaque_budget > 0) {
    --loops_left;
    --opaque_budget;
    Stmt body = gen_extra(rng, vars, decls, depth - 1, opaque_budget, loops_left);
    return Stmt::while_loop(Condition::opaque(), std::move(body));
  }
  if (roll < 8) return effect();
  // short run of effects
  Stmt a = effect();
  Stmt b = effect();
  return Stmt::seq(std::move(a), std::move(b));
}

}  // namespace detail

inline AnnotatedProgram gen_well_declared(uint64_t seed, const GenLimits& limits) {
  detail::Rng rng(seed * 0x9E3779B97F4A7C15ull + 1);
  AnnotatedProgram p;

  int n_scalars = 1 + (int)rng.pick((uint32_t)limits.max_vars);
  for (int i = 0; i < n_scalars; ++i)
    p.decls.add_scalar({"s" + std::to_string(i), {}});

  std::vector<ViewDecl> views;
  if (limits.allow_arrays) {
    int len = 2 + (int)rng.pick((uint32_t)(limits.max_buffer_len - 1));
    p.decls.add_buffer({"b0", len, {}});
    int n_views = 1 + (int)rng.pick((uint32_t)limits.max_vars);
    for (int i = 0; i < n_views; ++i) {
      int lo, hi;
      if (limits.allow_overlaps) {
        lo = (int)rng.pick((uint32_t)len);
        hi = lo + (int)rng.pick((uint32_t)(len - lo));
      } else {
        // carve disjoint windows left to right
        int used = views.empty() ? 0 : views.back().hi + 1;
        if (used >= len) break;
        lo = used;
        hi = lo + (int)rng.pick((uint32_t)(len - lo));
      }
      ViewDecl v{"v" + std::to_string(i), "b0", lo, hi, {}};
      views.push_back(v);
      p.decls.add_view(v);
    }
  }

  int n_blocks = 1 + (int)rng.pick((uint32_t)limits.max_blocks);
  int opaque_budget = 3;
  for (int bi = 0; bi < n_blocks; ++bi) {
    Site buffer_site = rng.percent(50) ? Site::Local : Site::Remote;
    std::vector<detail::GenVar> chosen;
    std::vector<AccessMode> modes;
    for (const auto& s : p.decls.scalars()) {
      if (!rng.percent(60)) continue;
      detail::GenVar v;
      v.name = s.name;
      v.site = rng.percent(50) ? Site::Local : Site::Remote;
      v.kind = static_cast<AccessMode::Kind>(rng.pick(3));
      chosen.push_back(v);
      modes.push_back({v.kind, v.site, v.name, false, {}});
    }
    for (const auto& view : views) {
      if (!rng.percent(55)) continue;
      detail::GenVar v;
      v.name = view.name;
      v.is_view = true;
      v.length = view.length();
      v.site = buffer_site;  // one site per buffer per block
      v.kind = static_cast<AccessMode::Kind>(rng.pick(3));
      chosen.push_back(v);
      modes.push_back({v.kind, v.site, v.name, false, {}});
    }

    std::vector<Stmt> body;
    // W obligations first, unconditional and complete
    for (const auto& v : chosen) {
      if (v.kind != AccessMode::Kind::W) continue;
      if (v.is_view) {
        for (int i = 0; i < v.length; ++i)
          body.push_back(Stmt::effect(EffectKind::Write,
                                      p.decls.element_target(v.name, i), v.site));
      } else {
        body.push_back(
            Stmt::effect(EffectKind::Write, p.decls.scalar_target(v.name), v.site));
      }
    }
    int loops_left = limits.max_loop_unroll;
    int n_extras = (int)rng.pick(4);
    for (int i = 0; i < n_extras && !chosen.empty(); ++i)
      body.push_back(detail::gen_extra(rng, chosen, p.decls, limits.max_body_depth,
                                       opaque_budget, loops_left));

    p.blocks.emplace_back(std::move(modes), normalize(Stmt::seq(body)));
  }

  if (!views.empty())
    return rewrite_program(p, build_registry(p.decls));
  return p;
}

// ---------------------------------------------------------------------------
// Schedule sweep: runs the program under every boolean schedule of length
// at most `max_decisions`, deduplicating by consumed prefix, and folds the
// outcomes together. Optionally replays every leaf on the reference
// interpreter and compares final outcome and store.

struct ScheduleSweep {
  int runs = 0;
  std::map<RunStatus, int> outcomes;
  bool all_boundaries_ok = true;
  bool oracle_agreed = true;
  std::vector<std::string> failures;  // offending schedules, as 0/1 strings
};

namespace detail {

inline void sweep_explore(const AnnotatedProgram& p, const Stmt& translated,
                          std::vector<bool>& prefix, int max_decisions, int fuel,
                          bool with_oracle, ScheduleSweep& out) {
  AnnotatedRun r = run_annotated(p, fuel, Schedule(prefix));
  bool exhausted_prefix = r.schedule_consumed >= prefix.size() &&
                          r.schedule_overflowed;
  if (exhausted_prefix && (int)prefix.size() < max_decisions) {
    for (bool bit : {true, false}) {
      prefix.push_back(bit);
      sweep_explore(p, translated, prefix, max_decisions, fuel, with_oracle, out);
      prefix.pop_back();
    }
    return;
  }

  auto schedule_name = [&] {
    std::string s;
    for (bool b : prefix) s += b ? '1' : '0';
    return s.empty() ? std::string("(empty)") : s;
  };
  ++out.runs;
  ++out.outcomes[r.status];
  for (bool ok : r.boundary_ok)
    if (!ok) {
      out.all_boundaries_ok = false;
      out.failures.push_back("boundary check failed under schedule " + schedule_name());
      break;
    }
  if (with_oracle) {
    reference::RunOutcome ref = reference::run(translated, initial_store(p.decls),
                                               fuel, Schedule(prefix));
    bool same = ref.status == r.status && ref.store == r.store;
    if (same && r.status == RunStatus::Stuck && r.stuck && ref.stuck)
      same = r.stuck->key == ref.stuck->key && r.stuck->effect == ref.stuck->effect &&
             r.stuck->site == ref.stuck->site;
    if (!same) {
      out.oracle_agreed = false;
      out.failures.push_back("reference interpreter diverged under schedule " +
                             schedule_name());
    }
  }
}

}  // namespace detail

inline ScheduleSweep all_schedules_run(const AnnotatedProgram& p, int max_decisions,
                                       int fuel, bool with_oracle = false) {
  ScheduleSweep out;
  std::vector<bool> prefix;
  Stmt translated = with_oracle ? translate_program(p) : Stmt::noop();
  detail::sweep_explore(p, translated, prefix, max_decisions, fuel, with_oracle, out);
  return out;
}

}  // namespace cohere
