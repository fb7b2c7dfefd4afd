#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpv/parse_error.hpp"
#include "dpv/policy.hpp"
#include "dpv/term.hpp"

namespace dpv {

// Operational semantics executor and compliance auditor: policy events fold
// over service data states, architecture events over global states, and a
// concrete trace is audited against the compliance rules.

// ---- policy events ----------------------------------------------------------

struct PolicyEvent {
  // cconsentat | collectat | uconsentat | sconsentat | storeat | deleteat |
  // fwconsentat | forwardat, or any service-specific use action
  // (createat, calculateat, ...)
  std::string kind;
  long long time = 0;  // minutes since epoch
  std::string time_text;
  std::string e_from;
  std::string e_to;          // fwconsentat / forwardat
  std::string place;         // storeat / deleteat
  std::string data_type;     // θ
  std::string derived_type;  // θ' of a use event
  std::string value;         // v

  bool is_use_event() const;  // an Ev4 instance
  std::string str() const;
};

// One event per line: kind(timestamp,args...), timestamps yyyy.mm.dd.hh:mm.
std::vector<PolicyEvent> parse_trace(const std::string& source);
long long parse_timestamp(const std::string& text, int line = 0);

// Per-entity data state: (type-or-consent-slot, origin) -> value.
struct ServiceState {
  using Slot = std::pair<std::string, std::string>;
  std::map<std::string, std::map<Slot, std::optional<std::string>>> dstate;
  std::optional<std::string> tv;

  const std::optional<std::string>* slot(const std::string& entity, const Slot& s) const;
};

ServiceState apply_policy_event(const PolicyEvent& e, ServiceState state);
ServiceState run_trace(const std::vector<PolicyEvent>& trace, ServiceState state);

struct ComplianceViolation {
  std::string rule;  // C1..C11
  std::string data_type;
  std::string detail;
  std::string witness;  // offending event(s)
};

// Evaluates every applicable compliance rule of the policy over the trace;
// rules for absent sub-policies are skipped.
std::vector<ComplianceViolation> check_trace_compliance(
    const std::vector<PolicyEvent>& trace, const Policy& policy);

// ---- architecture events ----------------------------------------------------

struct ArchEvent {
  // own | createat | calculateat | receiveat | storeat | deletewithin
  std::string kind;
  std::string entity;
  Term slot;                         // the variable/data/consent being assigned
  std::optional<Term> expr;          // right-hand term of createat/calculateat
  std::optional<std::string> value;  // concrete value otherwise
  std::string time;
  std::optional<TimeSpan> delay;  // deletewithin
};

struct GlobalState {
  std::map<std::string, std::map<std::string, std::optional<std::string>>> locals;
  std::optional<std::string> tt;

  const std::optional<std::string>* slot(const std::string& entity,
                                         const std::string& key) const;
};

// Evaluates a term under an entity's local state; any unbound variable makes
// the result undefined.
std::optional<std::string> eval_term(const Term& t, const GlobalState& g,
                                     const std::string& entity);

GlobalState apply_arch_event(const ArchEvent& e, GlobalState g);

}  // namespace dpv
