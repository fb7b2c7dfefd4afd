#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpv/policy.hpp"
#include "dpv/term.hpp"

namespace dpv {

// Verification goals generated from a policy.  Each entry carries the atoms
// to prove (two alternatives for the timeless/timed action pairs), the
// sub-policy it came from and its polarity.

enum class SubPolicyKind {
  Collection,
  Usage,
  Storage,
  Deletion,
  Transfer,
  Possession,
  Connection,
};

const char* sub_policy_name(SubPolicyKind k);

enum class GoalPolarity { ExpectedProvable, ExpectedUnprovable };

enum class GoalKind {
  Consent,       // CCONSENTCOLLECTED / UCONSENTCOLLECTED / STRCONSENTCOLLECTED /
                 // FWCONSENTCOLLECTED
  Purpose,       // CPURPOSE / UPURPOSE / FWPURPOSE
  StorePlace,    // STORE + STOREAT alternatives
  HasUpTo,       // HASUPTO with a delay variable
  DeleteWithin,  // DELETEWITHIN with a delay variable
  Transfer,      // RECEIVE + RECEIVEAT alternatives
  Has,           // HAS
  Link,          // LINK
  LinkUnique,    // LINKUNIQUE
};

struct GoalEntry {
  GoalKind kind = GoalKind::Has;
  SubPolicyKind sub_policy = SubPolicyKind::Possession;
  std::string data_type;             // bundle the goal belongs to
  std::vector<Fact> alternatives;    // proving any alternative proves the goal
  GoalPolarity polarity = GoalPolarity::ExpectedProvable;
  // Deletion goals: the policy bound the proven delay is compared against.
  std::optional<TimeSpan> policy_delay;
  bool delay_nonspecific = false;

  const Fact& primary() const { return alternatives.front(); }
  std::string str() const;
};

struct GoalSet {
  std::vector<GoalEntry> goals;
};

// declared_entities drives the possession goals (one HAS goal per entity and
// data type).  Connection goals are emitted for the listed permit/forbid
// combinations with both LINK and LINKUNIQUE predicates.
GoalSet generate_goals(const Policy& p, const std::vector<std::string>& declared_entities);

}  // namespace dpv
