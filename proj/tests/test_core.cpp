#include <optional>
#include <vector>

#include "catch_amalgamated.hpp"
#include "cohere/pretty.hpp"
#include "cohere/semantics.hpp"

using namespace cohere;

namespace {

const ValidityPair VV = kBothValid;
const ValidityPair VI = kLocalOnly;
const ValidityPair IV = kRemoteOnly;
const ValidityPair II = kBothInvalid;

std::optional<ValidityPair> apply_one(EffectKind kind, Site site, ValidityPair p) {
  Declarations d;
  d.add_scalar({"x", {}});
  Store s = initial_store(d);
  s.put(VarKey::scalar("x"), p);
  Schedule sched;
  Configuration c{Stmt::effect(kind, Target::scalar("x"), site), s};
  StepOutcome out = step(c, sched);
  if (out.kind == StepOutcome::Kind::Stuck) return std::nullopt;
  REQUIRE(out.kind == StepOutcome::Kind::Stepped);
  return out.next.store.at(VarKey::scalar("x"));
}

}  // namespace

TEST_CASE("effect signatures match the rule table") {
  CHECK(pre_to_string(effect_signature(EffectKind::Push)) == "(V,*)");
  CHECK(pre_to_string(effect_signature(EffectKind::Pull)) == "(*,V)");
  CHECK(pre_to_string(effect_signature(EffectKind::Read)) == "(V,*)");
  CHECK(pre_to_string(effect_signature(EffectKind::Write)) == "(*,*)");
  CHECK(pre_to_string(effect_signature(EffectKind::Noop)) == "(*,*)");
}

TEST_CASE("local transitions, all twenty cases") {
  struct Row {
    EffectKind kind;
    ValidityPair before;
    std::optional<ValidityPair> after;
  };
  const std::vector<Row> table = {
      {EffectKind::Push, VV, VV},  {EffectKind::Push, VI, VV},
      {EffectKind::Push, IV, {}},  {EffectKind::Push, II, {}},
      {EffectKind::Pull, VV, VV},  {EffectKind::Pull, VI, {}},
      {EffectKind::Pull, IV, VV},  {EffectKind::Pull, II, {}},
      {EffectKind::Read, VV, VV},  {EffectKind::Read, VI, VI},
      {EffectKind::Read, IV, {}},  {EffectKind::Read, II, {}},
      {EffectKind::Write, VV, VI}, {EffectKind::Write, VI, VI},
      {EffectKind::Write, IV, VI}, {EffectKind::Write, II, VI},
      {EffectKind::Noop, VV, VV},  {EffectKind::Noop, VI, VI},
      {EffectKind::Noop, IV, IV},  {EffectKind::Noop, II, II},
  };
  for (const auto& row : table) {
    INFO(name_of(row.kind) << " on " << to_string(row.before));
    CHECK(apply_one(row.kind, Site::Local, row.before) == row.after);
  }
}

TEST_CASE("remote transitions mirror the local ones") {
  struct Row {
    EffectKind kind;
    ValidityPair before;
    std::optional<ValidityPair> after;
  };
  const std::vector<Row> table = {
      {EffectKind::Push, VV, VV},  {EffectKind::Push, VI, {}},
      {EffectKind::Push, IV, VV},  {EffectKind::Push, II, {}},
      {EffectKind::Pull, VV, VV},  {EffectKind::Pull, VI, VV},
      {EffectKind::Pull, IV, {}},  {EffectKind::Pull, II, {}},
      {EffectKind::Read, VV, VV},  {EffectKind::Read, VI, {}},
      {EffectKind::Read, IV, IV},  {EffectKind::Read, II, {}},
      {EffectKind::Write, VV, IV}, {EffectKind::Write, VI, IV},
      {EffectKind::Write, IV, IV}, {EffectKind::Write, II, IV},
      {EffectKind::Noop, VV, VV},  {EffectKind::Noop, VI, VI},
      {EffectKind::Noop, IV, IV},  {EffectKind::Noop, II, II},
  };
  for (const auto& row : table) {
    INFO(name_of(row.kind) << " on " << to_string(row.before));
    CHECK(apply_one(row.kind, Site::Remote, row.before) == row.after);
  }
}

TEST_CASE("remote write then remote read round-trips") {
  // After a remote write the pair is (I,V); a remote read of it succeeds
  // while a local read gets stuck.
  CHECK(apply_one(EffectKind::Write, Site::Remote, VI) == IV);
  CHECK(apply_one(EffectKind::Read, Site::Remote, IV) == IV);
  CHECK(apply_one(EffectKind::Read, Site::Local, IV) == std::nullopt);
}

TEST_CASE("swapped flips the two sides") {
  CHECK(swapped(VI) == IV);
  CHECK(swapped(IV) == VI);
  CHECK(swapped(VV) == VV);
  CHECK(swapped(II) == II);
}

TEST_CASE("validity pairs print as letters") {
  CHECK(to_string(VV) == "(V,V)");
  CHECK(to_string(VI) == "(V,I)");
  CHECK(to_string(IV) == "(I,V)");
  CHECK(to_string(II) == "(I,I)");
}

TEST_CASE("keys order scalars before elements before abstract flags") {
  CHECK(VarKey::scalar("x") < VarKey::abstract("x"));
  CHECK(VarKey::element("b", 0) < VarKey::element("b", 1));
  CHECK(VarKey::element("b", 9) < VarKey::scalar("x"));  // name first
  CHECK(to_string(VarKey::scalar("x")) == "x");
  CHECK(to_string(VarKey::element("b", 3)) == "b[3]");
  CHECK(to_string(VarKey::abstract("x")) == "x^");
}

TEST_CASE("fresh stores start local-only everywhere") {
  Declarations d;
  d.add_scalar({"x", {}});
  d.add_buffer({"b", 3, {}});
  d.add_view({"v", "b", 0, 2, {}});
  Store s = initial_store(d);
  CHECK(s.size() == 6);  // x, x^, b[0..2], v^
  for (const auto& [key, pair] : s) {
    CAPTURE(to_string(key));
    CHECK(pair == VI);
  }
  CHECK_THROWS_AS(s.at(VarKey::scalar("nope")), std::logic_error);
  CHECK_FALSE(is_unsafe(s));
  s.put(VarKey::element("b", 1), II);
  CHECK(is_unsafe(s));
}

TEST_CASE("declaration table rejects bad input") {
  Declarations d;
  d.add_scalar({"x", {}});
  CHECK_THROWS_AS(d.add_scalar({"x", {}}), ConstructionError);
  d.add_buffer({"b", 4, {}});
  CHECK_THROWS_AS(d.add_buffer({"b", 2, {}}), ConstructionError);
  CHECK_THROWS_AS(d.add_buffer({"z", 0, {}}), ConstructionError);
  CHECK_THROWS_AS(d.add_view({"v", "nope", 0, 1, {}}), ConstructionError);
  CHECK_THROWS_AS(d.add_view({"v", "b", 2, 4, {}}), ConstructionError);
  CHECK_THROWS_AS(d.add_view({"v", "b", 3, 2, {}}), ConstructionError);
  CHECK_THROWS_AS(d.add_view({"x", "b", 0, 1, {}}), ConstructionError);
  d.add_view({"b", "b", 0, 3, {}});  // a view may reuse its buffer's id
  CHECK(d.find_view("b") != nullptr);
  CHECK_THROWS_AS(d.element_target("b", 4), ConstructionError);
  CHECK(d.element_target("b", 3).abs_index == 3);
}

TEST_CASE("view targets translate relative offsets") {
  Declarations d;
  d.add_buffer({"b", 10, {}});
  d.add_view({"v", "b", 4, 7, {}});
  Target t = d.element_target("v", 2);
  CHECK(t.abs_index == 6);
  CHECK(t.store_key() == VarKey::element("b", 6));
  Target w = d.whole_view_target("v");
  CHECK(w.lo == 4);
  CHECK(w.hi == 7);
  CHECK_THROWS_AS(w.store_key(), std::logic_error);
}

TEST_CASE("normalization flattens and drops empties") {
  Stmt a = Stmt::effect(EffectKind::Write, Target::scalar("x"));
  Stmt b = Stmt::effect(EffectKind::Read, Target::scalar("x"));
  Stmt c = Stmt::effect(EffectKind::Push, Target::scalar("x"));

  Stmt left = Stmt::seq(Stmt::seq(a, b), c);
  Stmt right = Stmt::seq(a, Stmt::seq(b, c));
  CHECK(normalize(left) == normalize(right));

  CHECK(normalize(Stmt::seq(Stmt::noop(), a)) == a);
  CHECK(normalize(Stmt::seq(a, Stmt::noop())) == a);
  CHECK(normalize(Stmt::seq(Stmt::noop(), Stmt::noop())).is_noop());
  CHECK(normalize(normalize(left)) == normalize(left));

  Stmt branchy = Stmt::if_else(Condition::opaque(), Stmt::seq(Stmt::noop(), a), b);
  Stmt n = normalize(branchy);
  CHECK(n.then_branch() == a);
  CHECK(n.else_branch() == b);
}

TEST_CASE("statement equality ignores source positions") {
  Stmt a = Stmt::effect(EffectKind::Write, Target::scalar("x"), Site::Local, {1, 2});
  Stmt b = Stmt::effect(EffectKind::Write, Target::scalar("x"), Site::Local, {9, 9});
  CHECK(a == b);
  Stmt c = Stmt::effect(EffectKind::Write, Target::scalar("x"), Site::Remote);
  CHECK(a != c);
}

TEST_CASE("conditions read the store or the schedule") {
  Declarations d;
  d.add_scalar({"x", {}});
  Store s = initial_store(d);  // x = (V,I)
  Schedule sched = Schedule::from_string("10");
  CHECK(eval_condition(Condition::is_valid(VarKey::scalar("x")), s, sched));
  CHECK_FALSE(eval_condition(Condition::rem_is_valid(VarKey::scalar("x")), s, sched));
  CHECK(sched.consumed() == 0);  // validity tests never touch the schedule
  CHECK(eval_condition(Condition::opaque(), s, sched));
  CHECK_FALSE(eval_condition(Condition::opaque(), s, sched));
  CHECK(sched.consumed() == 2);
  CHECK_FALSE(sched.overflowed());
  CHECK_FALSE(eval_condition(Condition::opaque(), s, sched));  // exhausted: false
  CHECK(sched.overflowed());
}

TEST_CASE("schedule strings must be binary") {
  CHECK_THROWS_AS(Schedule::from_string("012"), ConstructionError);
  Schedule s = Schedule::from_string("101");
  CHECK(s.next());
  CHECK_FALSE(s.next());
  CHECK(s.next());
}

TEST_CASE("branching steps pick the right arm") {
  Declarations d;
  d.add_scalar({"x", {}});
  Store s0 = initial_store(d);
  Stmt w = Stmt::effect(EffectKind::Write, Target::scalar("x"));
  Stmt r = Stmt::effect(EffectKind::Read, Target::scalar("x"));

  Schedule sched;
  Configuration c{normalize(Stmt::if_else(Condition::is_valid(VarKey::scalar("x")), w, r)), s0};
  StepOutcome out = step(c, sched);
  CHECK(out.rule == StepRule::IfTrue);
  CHECK(out.next.program == w);

  Configuration c2{normalize(Stmt::if_else(Condition::rem_is_valid(VarKey::scalar("x")), w, r)), s0};
  out = step(c2, sched);
  CHECK(out.rule == StepRule::IfFalse);
  CHECK(out.next.program == r);
}

TEST_CASE("loops unfold one body copy per true answer") {
  Declarations d;
  d.add_scalar({"x", {}});
  Stmt body = Stmt::effect(EffectKind::Read, Target::scalar("x"));
  Stmt loop = Stmt::while_loop(Condition::opaque(), body);

  Schedule sched = Schedule::from_string("1");
  Configuration c{normalize(loop), initial_store(d)};
  StepOutcome out = step(c, sched);
  CHECK(out.rule == StepRule::WhileTrue);
  CHECK(out.next.program == normalize(Stmt::seq(body, loop)));

  Schedule sched2 = Schedule::from_string("0");
  out = step(c, sched2);
  CHECK(out.rule == StepRule::WhileFalse);
  CHECK(out.next.program.is_noop());
}

TEST_CASE("a stuck step leaves the configuration untouched") {
  Declarations d;
  d.add_scalar({"x", {}});
  Store s = initial_store(d);
  Schedule sched;
  Configuration c{Stmt::effect(EffectKind::Read, Target::scalar("x"), Site::Remote), s};
  StepOutcome out = step(c, sched);
  REQUIRE(out.kind == StepOutcome::Kind::Stuck);
  CHECK(out.next.store == s);
  REQUIRE(out.stuck.has_value());
  CHECK(out.stuck->key == VarKey::scalar("x"));
  CHECK(out.stuck->actual == VI);
  CHECK(out.stuck->describe() ==
        "gr x: have (V,I), need (V,*) against the swapped pair");
}

TEST_CASE("whole-view sync fires atomically or not at all") {
  Declarations d;
  d.add_buffer({"b", 3, {}});
  d.add_view({"v", "b", 0, 2, {}});
  Store s = initial_store(d);
  s.put(VarKey::element("b", 0), IV);
  s.put(VarKey::element("b", 1), VI);  // pull will fail here
  s.put(VarKey::element("b", 2), IV);

  Schedule sched;
  Configuration c{Stmt::effect(EffectKind::Pull, d.whole_view_target("v")), s};
  StepOutcome out = step(c, sched);
  REQUIRE(out.kind == StepOutcome::Kind::Stuck);
  CHECK(out.stuck->key == VarKey::element("b", 1));
  CHECK(out.next.store == s);  // first cell's change was rolled back
  CHECK(out.delta.empty());

  s.put(VarKey::element("b", 1), IV);
  Configuration c2{c.program, s};
  out = step(c2, sched);
  REQUIRE(out.kind == StepOutcome::Kind::Stepped);
  for (int i = 0; i < 3; ++i) CHECK(out.next.store.at(VarKey::element("b", i)) == VV);
  CHECK(out.delta.size() == 3);
}

TEST_CASE("deltas list only the keys that changed") {
  Declarations d;
  d.add_scalar({"x", {}});
  Store s = initial_store(d);
  s.put(VarKey::scalar("x"), VV);
  Schedule sched;
  Configuration c{Stmt::effect(EffectKind::Push, Target::scalar("x")), s};
  StepOutcome out = step(c, sched);
  REQUIRE(out.kind == StepOutcome::Kind::Stepped);
  CHECK(out.delta.empty());  // push on (V,V) keeps (V,V)
}

TEST_CASE("runs finish, get stuck, or run out of fuel") {
  Declarations d;
  d.add_scalar({"x", {}});

  SECTION("the empty program is done even with no fuel") {
    RunResult r = run(Stmt::noop(), initial_store(d), 0, Schedule());
    CHECK(r.status == RunStatus::Done);
    CHECK(r.steps == 0);
  }
  SECTION("write, sync, read remotely") {
    Stmt p = Stmt::seq({Stmt::effect(EffectKind::Write, Target::scalar("x")),
                        Stmt::effect(EffectKind::Push, Target::scalar("x")),
                        Stmt::effect(EffectKind::Read, Target::scalar("x"), Site::Remote)});
    RunResult r = run(p, initial_store(d), 100, Schedule());
    CHECK(r.status == RunStatus::Done);
    CHECK(r.steps == 3);
    CHECK(r.store.at(VarKey::scalar("x")) == VV);
  }
  SECTION("missing sync gets stuck with the remains intact") {
    Stmt p = Stmt::seq(Stmt::effect(EffectKind::Write, Target::scalar("x")),
                       Stmt::effect(EffectKind::Read, Target::scalar("x"), Site::Remote));
    RunResult r = run(p, initial_store(d), 100, Schedule());
    CHECK(r.status == RunStatus::Stuck);
    CHECK(r.steps == 1);
    REQUIRE(r.stuck.has_value());
    CHECK(r.stuck->key == VarKey::scalar("x"));
    CHECK_FALSE(r.remaining.is_noop());
  }
  SECTION("an always-true loop burns exactly the fuel") {
    Stmt p = Stmt::while_loop(Condition::opaque(),
                              Stmt::effect(EffectKind::Read, Target::scalar("x")));
    RunResult r = run(p, initial_store(d), 5, Schedule::from_string("1111111"));
    CHECK(r.status == RunStatus::FuelExhausted);
    CHECK(r.steps == 5);
  }
  SECTION("loop bounded by its schedule terminates") {
    Stmt p = Stmt::while_loop(Condition::opaque(),
                              Stmt::effect(EffectKind::Read, Target::scalar("x")));
    RunResult r = run(p, initial_store(d), 100, Schedule::from_string("110"));
    CHECK(r.status == RunStatus::Done);
    CHECK(r.steps == 5);  // two unfoldings, two body reads, one exit test
    CHECK(r.schedule_consumed == 3);
    CHECK_FALSE(r.schedule_overflowed);
  }
}

TEST_CASE("identical runs yield identical results") {
  Declarations d;
  d.add_scalar({"x", {}});
  d.add_buffer({"b", 4, {}});
  d.add_view({"v", "b", 1, 3, {}});
  Stmt p = Stmt::seq(
      {Stmt::effect(EffectKind::Write, Target::scalar("x")),
       Stmt::if_else(Condition::opaque(),
                     Stmt::effect(EffectKind::Push, Target::scalar("x")),
                     Stmt::effect(EffectKind::Read, Target::scalar("x"))),
       Stmt::effect(EffectKind::Pull, d.whole_view_target("v"), Site::Remote)});
  RunResult a = run(p, initial_store(d), 50, Schedule::from_string("1"));
  RunResult b = run(p, initial_store(d), 50, Schedule::from_string("1"));
  CHECK(a.status == b.status);
  CHECK(a.store == b.store);
  CHECK(a.steps == b.steps);
  CHECK(a.trace.size() == b.trace.size());
}
