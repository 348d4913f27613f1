#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace cohere {

// Validity flag of one copy (local or remote) of a variable.
enum class Validity : uint8_t { Valid, Invalid };

inline char to_char(Validity v) { return v == Validity::Valid ? 'V' : 'I'; }

// Status of a variable: validity of the local copy and of the remote copy.
struct ValidityPair {
  Validity local = Validity::Valid;
  Validity remote = Validity::Invalid;

  friend bool operator==(const ValidityPair&, const ValidityPair&) = default;
};

constexpr ValidityPair kBothValid{Validity::Valid, Validity::Valid};
constexpr ValidityPair kLocalOnly{Validity::Valid, Validity::Invalid};
constexpr ValidityPair kRemoteOnly{Validity::Invalid, Validity::Valid};
constexpr ValidityPair kBothInvalid{Validity::Invalid, Validity::Invalid};

inline ValidityPair swapped(ValidityPair p) { return {p.remote, p.local}; }

inline std::string to_string(ValidityPair p) {
  return std::string("(") + to_char(p.local) + "," + to_char(p.remote) + ")";
}

// The five primitive operations on a variable's status.
enum class EffectKind : uint8_t { Push, Pull, Read, Write, Noop };

inline const char* name_of(EffectKind k) {
  switch (k) {
    case EffectKind::Push: return "push";
    case EffectKind::Pull: return "pull";
    case EffectKind::Read: return "r";
    case EffectKind::Write: return "w";
    case EffectKind::Noop: return "noop";
  }
  return "?";
}

// One slot of a signature: a literal validity flag or a pattern variable.
// Variables are identified by slot index; a variable bound in the
// precondition may be referenced from the postcondition.
struct PatternTerm {
  bool is_var = false;
  Validity literal = Validity::Valid;  // meaningful when !is_var
  int var = 0;                         // meaningful when is_var

  static PatternTerm lit(Validity v) { return {false, v, 0}; }
  static PatternTerm variable(int slot) { return {true, Validity::Valid, slot}; }

  friend bool operator==(const PatternTerm&, const PatternTerm&) = default;
};

// Precondition/postcondition pattern pair of one operation. Each pattern
// variable occurs at most once in the precondition, so unification is a
// per-component match. Every variable used in the postcondition is bound
// by the precondition.
struct EffectSignature {
  PatternTerm pre_local, pre_remote;
  PatternTerm post_local, post_remote;

  friend bool operator==(const EffectSignature&, const EffectSignature&) = default;
};

// Fixed signature table:
//   push : (V,X) -> (V,V)
//   pull : (X,V) -> (V,V)
//   r    : (V,X) -> (V,X)
//   w    : (X,Y) -> (V,I)
//   noop : (X,Y) -> (X,Y)
inline const EffectSignature& effect_signature(EffectKind kind) {
  using PT = PatternTerm;
  static const std::array<EffectSignature, 5> table = {{
      // Push
      {PT::lit(Validity::Valid), PT::variable(0),
       PT::lit(Validity::Valid), PT::lit(Validity::Valid)},
      // Pull
      {PT::variable(0), PT::lit(Validity::Valid),
       PT::lit(Validity::Valid), PT::lit(Validity::Valid)},
      // Read
      {PT::lit(Validity::Valid), PT::variable(0),
       PT::lit(Validity::Valid), PT::variable(0)},
      // Write
      {PT::variable(0), PT::variable(1),
       PT::lit(Validity::Valid), PT::lit(Validity::Invalid)},
      // Noop
      {PT::variable(0), PT::variable(1),
       PT::variable(0), PT::variable(1)},
  }};
  return table[static_cast<size_t>(kind)];
}

// Unifies the precondition against a concrete status. Returns the
// instantiated postcondition, or nothing when unification fails.
// NoUnify is a value, not an error.
inline std::optional<ValidityPair> apply_signature(const EffectSignature& sig,
                                                   ValidityPair status) {
  std::array<Validity, 2> bound{};
  auto match = [&](const PatternTerm& t, Validity actual) {
    if (t.is_var) {
      bound[t.var] = actual;
      return true;
    }
    return t.literal == actual;
  };
  if (!match(sig.pre_local, status.local)) return std::nullopt;
  if (!match(sig.pre_remote, status.remote)) return std::nullopt;
  auto inst = [&](const PatternTerm& t) {
    return t.is_var ? bound[t.var] : t.literal;
  };
  return ValidityPair{inst(sig.post_local), inst(sig.post_remote)};
}

// Pattern rendering for messages: variables print as '*'.
inline std::string to_string(const PatternTerm& t) {
  return t.is_var ? "*" : std::string(1, to_char(t.literal));
}

inline std::string pre_to_string(const EffectSignature& sig) {
  return "(" + to_string(sig.pre_local) + "," + to_string(sig.pre_remote) + ")";
}

}  // namespace cohere
