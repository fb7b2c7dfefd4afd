#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpv/parse_error.hpp"
#include "dpv/term.hpp"

namespace dpv {

// Architecture model: the action set plus the HasAccessTo map.  Immutable
// after parse.

enum class ActionKind {
  Own,
  Receive,
  ReceiveAt,
  Create,
  CreateAt,
  Calculate,
  CalculateAt,
  Store,
  StoreAt,
  Delete,
  DeleteWithin,
};

const char* action_kind_name(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::Own;
  Term subject;               // acting component or storage place
  Term payload;               // data term
  Term origin = anon_entity();  // E_from where the form carries one
  std::optional<Term> time;   // Time(t) for *AT, Time(tvalue) for DELETEWITHIN

  // Canonical logic atom, e.g. RECEIVEAT(subject, payload, origin, time).
  Fact to_fact() const;
  std::string str() const;
  bool operator==(const Action& o) const;
};

struct Architecture {
  std::vector<Action> actions;
  std::vector<std::pair<std::string, std::vector<std::string>>> has_access_to;
  std::vector<std::string> warnings;

  // Components mentioned as subjects, origins or access entries.
  std::vector<std::string> component_names() const;
  const std::vector<std::string>* access_of(const std::string& component) const;
};

struct ArchViolation {
  std::string kind;  // store-without-source | deletewithin-without-store
  std::string detail;
};

struct ArchParseOptions {
  int nesting_bound = 3;  // deeper payloads parse with a warning
};

// One statement per line; '#' comments.  Space characters inside a statement
// are rejected.  Throws ParseError with the offending line.
Architecture parse_architecture(const std::string& source,
                                const ArchParseOptions& options = {});

std::string render_architecture(const Architecture& a);

// Flags STORE/STOREAT without a data source and DELETEWITHIN without a
// matching store.
std::vector<ArchViolation> check_well_formed_arch(const Architecture& a);

// Construct-based action subsets used by the engine.  An action lands in
// every subset whose construct it contains; actions with none land in plain.
struct ArchPartition {
  std::vector<Fact> with_time;
  std::vector<Fact> with_pseudo;
  std::vector<Fact> with_meta;
  std::vector<Fact> plain;
};

ArchPartition partition_architecture(const Architecture& a);

bool fact_mentions_time(const Fact& f);
bool fact_mentions_pseudo(const Fact& f);
bool fact_mentions_meta(const Fact& f);

}  // namespace dpv
