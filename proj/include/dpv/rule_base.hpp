#pragma once

#include <string>
#include <vector>

#include "dpv/term.hpp"

namespace dpv {

// The fixed inference rule catalog driving backward resolution.
//
// Rule arguments use three slot styles:
//   * plain variables (EV, thV, TV, DD, K, PK),
//   * constructor-flexible record patterns (AnySchema): any non-crypto
//     constructor whose arguments contain the distinguished members in any
//     order, a rest variable absorbing the others,
//   * containment slots (ContainSlot): a data term containing the inner
//     pattern at any nesting depth, optionally crossing crypto layers.
//
// The decryption rules keep their containment non-crypto so every
// application peels exactly one crypto layer; the depth limit N then bounds
// the number of peels.

struct InferenceRule {
  std::string name;  // D1..D7, P1..P18, C1..C3, L0..L8(/b,/c,/d), U1..U8(/b,/c,/d)
  Fact head;
  std::vector<Fact> tail;
  bool crypto_guarded = false;  // depth guard applies (P8-P10, C1-C3)

  std::string str() const;
};

struct RuleSets {
  std::vector<InferenceRule> dpr_rules;          // D1..D7
  std::vector<InferenceRule> has_up_to_rules;    // P1, P2
  std::vector<InferenceRule> has_rules;          // P3..P18
  std::vector<InferenceRule> crypt_has_rules;    // C1..C3
  std::vector<InferenceRule> link_rules;         // L0..L8 incl. /b,/c,/d
  std::vector<InferenceRule> link_unique_rules;  // U1..U8 incl. /b,/c,/d

  // Catalog order: D, P1-P2, P3-P18, C, L, U.
  std::vector<const InferenceRule*> all() const;
};

RuleSets build_rulesets();

// Renames every variable, schema id and slot id with a globally fresh
// suffix; structure is otherwise identical.
InferenceRule freshen_rule(const InferenceRule& r, long& counter);

}  // namespace dpv
