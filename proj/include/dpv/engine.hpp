#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dpv/architecture.hpp"
#include "dpv/fact_gen.hpp"
#include "dpv/rule_base.hpp"
#include "dpv/term.hpp"

namespace dpv {

// Backward-resolution proof engine.  A goal is proved either directly
// against the architecture facts (action and purpose goals), or by resolving
// it through the rule catalog; in the latter case all witness substitutions
// of earlier tail sub-goals are threaded into later ones.  Proof search is
// deterministic: rules in catalog order, facts in file order.
//
// The inputs are immutable; an Engine instance keeps a private memo table,
// so share one instance per thread (goals can be verified in parallel with
// one engine each over the same inputs).

struct EngineInputs {
  RuleSets rules;
  ArchPartition partition;
  std::vector<Fact> trivial_facts;
  PurposeFacts purposes;
  std::vector<Fact> unique_types;
  std::vector<std::pair<std::string, std::vector<std::string>>> has_access_to;
  int max_crypto_depth = 3;
  // 0 derives a ceiling from the input sizes and the depth limit.
  long long step_ceiling = 0;
};

struct Derivation;
using DerivPtr = std::shared_ptr<const Derivation>;

struct Derivation {
  Fact goal;           // as attempted (may carry pattern slots)
  std::string rule;    // empty for fact leaves
  Substitution sigma;  // accumulated rule-application substitution
  Fact leaf;           // matched fact when rule is empty
  std::vector<DerivPtr> children;

  int depth() const;
  bool mentions_rule(const std::string& name) const;
  std::vector<Fact> leaves() const;
  std::string str(int indent = 0) const;
};

struct ProofResult {
  Fact goal;
  bool proved = false;
  DerivPtr derivation;                  // first derivation in search order
  Substitution witness;                 // its bindings of the goal variables
  std::vector<Substitution> witnesses;  // all distinct witnesses (capped)
  std::optional<std::string> via_access_fallback;
  long long steps = 0;
  bool step_limit_hit = false;
};

class Engine {
 public:
  explicit Engine(EngineInputs inputs);

  // The top-level check: action goals match the architecture directly,
  // purpose goals the purpose-fact sets, everything else resolves through
  // the rule catalog.  When all of that fails and the goal subject has a
  // HasAccessTo entry, the goal is re-attempted with the subject replaced by
  // each accessible component.  Throws std::invalid_argument for unknown
  // goal predicates.
  ProofResult conformance_check(const Fact& initgoal);

  long long ceiling() const { return ceiling_; }
  const EngineInputs& inputs() const { return inputs_; }

 private:
  struct Witness {
    Substitution sigma;
    DerivPtr tree;
  };
  struct ProveOutcome {
    bool proved = false;
    std::vector<Witness> witnesses;
    bool tentative = false;  // touched an in-progress goal; do not memoize
  };
  struct MemoEntry {
    ProveOutcome outcome;
    std::vector<std::string> vars;  // the goal's free variables at store time
  };

  ProveOutcome attempt(const Fact& goal);
  ProveOutcome prove_with_rules(const Fact& goal, int depth);
  ProveOutcome prove_subgoal(const Fact& goal, int depth);
  ProveOutcome match_architecture(const Fact& goal);
  ProveOutcome match_unique(const Fact& goal);
  ProveOutcome match_purposes(const Fact& goal);
  ProveOutcome match_fact_table(const Fact& goal, const std::vector<Fact>& table);
  std::vector<const Fact*> arch_candidates(const Fact& goal) const;
  bool step();  // counts a resolution step; false once the ceiling is hit

  static std::string canonical_key(const Fact& goal);

  EngineInputs inputs_;
  std::vector<const InferenceRule*> catalog_;
  std::vector<Fact> untimed_facts_;
  long long ceiling_ = 0;
  long long steps_ = 0;
  bool limit_hit_ = false;
  long fresh_counter_ = 0;
  std::map<std::string, MemoEntry> memo_;
  std::set<std::string> in_progress_;
};

bool is_action_predicate(const std::string& pred);
bool is_purpose_predicate(const std::string& pred);
bool is_consent_predicate(const std::string& pred);

}  // namespace dpv
