#pragma once

#include <vector>

#include "dpv/architecture.hpp"
#include "dpv/policy.hpp"
#include "dpv/term.hpp"

namespace dpv {

// Forward generation of the fact sets the engine consumes.  All functions
// are pure; outputs are deduplicated and ordered deterministically.

// HAS/LINK/LINKUNIQUE facts decomposing non-crypto compound payloads of
// OWN/RECEIVE(AT)/CREATE(AT)/CALCULATE(AT) actions.  STORE(AT) and DELETE*
// generate nothing; crypto-rooted payloads generate nothing.
std::vector<Fact> generate_trivial_facts(const Architecture& a);

struct PurposeFacts {
  std::vector<Fact> collection;  // CPURPOSE(type, action)
  std::vector<Fact> usage;       // UPURPOSE(type, action)
  std::vector<Fact> transfer;    // FWPURPOSE(type, action)
};

PurposeFacts generate_purpose_facts(const Architecture& a);

// One UNIQUE(group) fact per data group flagged unique.
std::vector<Fact> generate_unique_facts(const Policy& p);

}  // namespace dpv
