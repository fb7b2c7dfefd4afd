#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpv/parse_error.hpp"
#include "dpv/term.hpp"

namespace dpv {

// Data model for the policy DSL: entities, data groups and per-data-type
// bundles of the seven sub-policies.  Immutable after parse.

struct EntityDecl {
  std::string short_name;
  std::string description;
};

struct DataGroupDecl {
  std::string group_name;
  std::vector<std::string> member_types;
  bool is_unique = false;
};

// One purpose entry, e.g. createat:Account.
struct Purpose {
  std::string action;
  std::string result_type;
  bool operator==(const Purpose& o) const {
    return action == o.action && result_type == o.result_type;
  }
};

struct ConsentPurposes {  // collection and usage sub-policies
  bool consent_required = false;
  std::vector<Purpose> purposes;
};

struct StoragePolicy {
  bool consent_required = false;
  std::vector<std::string> where;
};

struct DeletionPolicy {
  std::vector<std::string> fromwhere;
  bool nonspecific_delay = false;  // delay written as tt: no concrete bound
  TimeSpan delay;
};

struct TransferPolicy {
  bool consent_required = false;
  std::vector<std::string> to;
  std::vector<Purpose> purposes;
};

// A connection stance for (entity, this-type, other-type).  In a permit list
// the flag says whether unique linkage is allowed as well; in a forbid list
// it says whether only unique linkage is forbidden (plain linkage stays
// unconstrained) or any linkage at all.
struct LinkRule {
  std::string entity;
  std::string other_type;
  bool unique_flag = false;
};

struct SubPolicyBundle {
  std::optional<ConsentPurposes> collection;
  std::optional<ConsentPurposes> usage;
  std::optional<StoragePolicy> storage;
  std::optional<DeletionPolicy> deletion;
  std::optional<TransferPolicy> transfer;
  std::optional<std::vector<std::string>> has;
  std::optional<std::vector<LinkRule>> link_permit;
  std::optional<std::vector<LinkRule>> link_forbid;

  bool empty() const {
    return !collection && !usage && !storage && !deletion && !transfer && !has &&
           !link_permit && !link_forbid;
  }
};

struct Policy {
  std::vector<EntityDecl> entities;  // sp is predeclared and always first
  std::vector<DataGroupDecl> groups;
  std::vector<std::pair<std::string, SubPolicyBundle>> bundles;

  const SubPolicyBundle* find_bundle(const std::string& group) const;
  const DataGroupDecl* find_group(const std::string& group) const;
  bool is_entity(const std::string& name) const;
};

struct Conflict {
  std::string kind;       // e.g. collection-vs-has, permit-vs-forbid
  std::string data_type;  // bundle the conflict belongs to
  std::string detail;
};

// Parses the sectioned policy text.  Throws ParseError with line/column on
// syntax errors, references to undeclared entities/groups and duplicate
// bundles.
Policy parse_policy(const std::string& source);

// Canonical rendering; parse(render(p)) reproduces p.
std::string render_policy(const Policy& p);

// Pairwise sub-policy conflicts.  Conflicts are data, not failures.
std::vector<Conflict> check_well_formed_policy(const Policy& p);

bool is_reserved_place(const std::string& name);

}  // namespace dpv
