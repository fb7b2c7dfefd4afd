#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpv/architecture.hpp"
#include "dpv/engine.hpp"
#include "dpv/goal_gen.hpp"
#include "dpv/policy.hpp"

namespace dpv {

// Maps per-goal proof outcomes to functional / privacy / DPR verdicts and
// renders the report.  Classification is a pure function of polarity,
// outcome, sub-policy kind and the delay comparison.

enum class Classification {
  FunctionalConform,
  FunctionalViolation,
  PrivacyConform,
  PrivacyViolation,
  DprConform,
  DprViolation,
};

const char* classification_name(Classification c);
bool is_violation(Classification c);

struct Verdict {
  std::string goal_text;
  SubPolicyKind sub_policy = SubPolicyKind::Possession;
  std::string data_type;
  GoalPolarity polarity = GoalPolarity::ExpectedProvable;
  bool proved = false;
  Classification classification = Classification::FunctionalConform;
  std::string detail;
  DerivPtr derivation;
  std::optional<std::string> via_access;
};

struct ReportSummary {
  int functional_violations = 0;
  int privacy_violations = 0;
  int dpr_violations = 0;
  int total_violations() const {
    return functional_violations + privacy_violations + dpr_violations;
  }
};

struct ConformanceReport {
  std::string policy_id;
  std::string architecture_id;
  int max_crypto_depth = 3;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;             // skipped sub-policies
  std::vector<std::string> policy_conflicts;  // well-formedness findings
  std::vector<std::string> arch_findings;     // arch well-formedness + warnings

  ReportSummary summary() const;
};

struct ClassifyContext {
  const Policy& policy;
  const Architecture& architecture;
  std::string policy_id;
  std::string architecture_id;
  int max_crypto_depth = 3;
};

// results[i] is the proof outcome of goals.goals[i]; a size mismatch is an
// internal error.
ConformanceReport classify_results(const GoalSet& goals,
                                   const std::vector<ProofResult>& results,
                                   const ClassifyContext& ctx);

enum class ReportFormat { Text, Structured };

std::string render_report(const ConformanceReport& r, ReportFormat format);

}  // namespace dpv
