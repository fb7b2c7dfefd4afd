#include "dpv/report.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dpv {

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::FunctionalConform: return "functional-conform";
    case Classification::FunctionalViolation: return "functional-violation";
    case Classification::PrivacyConform: return "privacy-conform";
    case Classification::PrivacyViolation: return "privacy-violation";
    case Classification::DprConform: return "dpr-conform";
    case Classification::DprViolation: return "dpr-violation";
  }
  return "?";
}

bool is_violation(Classification c) {
  return c == Classification::FunctionalViolation ||
         c == Classification::PrivacyViolation || c == Classification::DprViolation;
}

ReportSummary ConformanceReport::summary() const {
  ReportSummary s;
  for (const auto& v : verdicts) {
    if (v.classification == Classification::FunctionalViolation) ++s.functional_violations;
    if (v.classification == Classification::PrivacyViolation) ++s.privacy_violations;
    if (v.classification == Classification::DprViolation) ++s.dpr_violations;
  }
  return s;
}

namespace {

std::string lowercased(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string root_name(const Term& t) {
  switch (t.kind) {
    case TermKind::Simple:
    case TermKind::Compound:
      return t.name;
    default:
      return t.str();
  }
}

// Does an architecture payload stand for the policy data type?  The group
// name itself or any of its member types counts.
bool payload_matches_type(const Term& payload, const std::string& group,
                          const Policy& policy) {
  std::string root = lowercased(root_name(payload));
  if (root == lowercased(group)) return true;
  const DataGroupDecl* g = policy.find_group(group);
  if (!g) return false;
  for (const auto& m : g->member_types)
    if (root == lowercased(m)) return true;
  return false;
}

// Minimum concrete delay bound across the proof witnesses.
std::optional<TimeSpan> bound_delay(const ProofResult& r) {
  std::optional<TimeSpan> best;
  auto consider = [&](const Substitution& s) {
    for (const auto& [var, value] : s.bindings) {
      if (value.kind != TermKind::TimeValue) continue;
      if (!best || value.span.minutes() < best->minutes()) best = value.span;
    }
  };
  for (const auto& w : r.witnesses) consider(w);
  if (!best) consider(r.witness);
  return best;
}

std::string via_chain(const DerivPtr& d) {
  if (!d) return "";
  if (d->rule.empty()) return d->leaf.pred;
  std::ostringstream out;
  out << d->rule;
  if (!d->children.empty()) {
    out << "[";
    for (size_t i = 0; i < d->children.size(); ++i)
      out << (i ? "," : "") << via_chain(d->children[i]);
    out << "]";
  }
  return out.str();
}

class Classifier {
 public:
  Classifier(const GoalSet& goals, const std::vector<ProofResult>& results,
             const ClassifyContext& ctx)
      : goals_(goals), results_(results), ctx_(ctx) {}

  ConformanceReport run() {
    if (goals_.goals.size() != results_.size())
      throw std::logic_error("classify_results: missing proof result for a goal");
    report_.policy_id = ctx_.policy_id;
    report_.architecture_id = ctx_.architecture_id;
    report_.max_crypto_depth = ctx_.max_crypto_depth;
    for (size_t i = 0; i < goals_.goals.size(); ++i)
      classify_goal(goals_.goals[i], results_[i]);
    scan_unwanted_consents();
    scan_unlisted_purposes();
    scan_storage_places();
    scan_deletion_places();
    scan_transfer_recipients();
    emit_skip_notes();
    return std::move(report_);
  }

 private:
  void push(const GoalEntry& g, const ProofResult& r, Classification c,
            std::string detail) {
    Verdict v;
    v.goal_text = g.str();
    v.sub_policy = g.sub_policy;
    v.data_type = g.data_type;
    v.polarity = g.polarity;
    v.proved = r.proved;
    v.classification = c;
    v.detail = std::move(detail);
    v.derivation = r.derivation;
    v.via_access = r.via_access_fallback;
    report_.verdicts.push_back(std::move(v));
  }

  void push_scan(SubPolicyKind sub, const std::string& data_type, std::string goal_text,
                 Classification c, std::string detail) {
    Verdict v;
    v.goal_text = std::move(goal_text);
    v.sub_policy = sub;
    v.data_type = data_type;
    v.polarity = GoalPolarity::ExpectedUnprovable;
    v.proved = true;
    v.classification = c;
    v.detail = std::move(detail);
    report_.verdicts.push_back(std::move(v));
  }

  static std::string subject_phrase(const Fact& goal) {
    if (goal.args.empty() || goal.args[0].kind != TermKind::Entity) return "the entity";
    const std::string& name = goal.args[0].name;
    if (is_reserved_place(name)) return "sp (via " + name + ")";
    return name;
  }

  void classify_goal(const GoalEntry& g, const ProofResult& r) {
    const std::string subject = subject_phrase(g.primary());
    const bool permitted = g.polarity == GoalPolarity::ExpectedProvable;
    switch (g.kind) {
      case GoalKind::Has:
      case GoalKind::Link:
      case GoalKind::LinkUnique: {
        const char* what = g.kind == GoalKind::Has ? "have"
                           : g.kind == GoalKind::Link ? "link"
                                                      : "uniquely link";
        std::string pair =
            g.kind == GoalKind::Has
                ? g.data_type
                : g.data_type + " and " + g.primary().args[2].str();
        if (permitted && r.proved)
          push(g, r, Classification::FunctionalConform,
               subject + " can " + what + " " + pair + " as the policy permits");
        else if (permitted && !r.proved)
          push(g, r, Classification::FunctionalViolation,
               subject + " is permitted to " + what + " " + pair +
                   " but the architecture does not enable it");
        else if (!permitted && r.proved)
          push(g, r, Classification::PrivacyViolation,
               subject + " is forbidden to " + what + " " + pair +
                   " but the architecture enables it (via " +
                   via_chain(r.derivation) + ")");
        else
          push(g, r, Classification::PrivacyConform,
               subject + " cannot " + what + " " + pair + ", as required");
        break;
      }
      case GoalKind::Consent: {
        const char* kind = g.sub_policy == SubPolicyKind::Collection ? "collection"
                           : g.sub_policy == SubPolicyKind::Usage    ? "usage"
                           : g.sub_policy == SubPolicyKind::Storage  ? "storage"
                                                                     : "transfer";
        if (r.proved)
          push(g, r, Classification::DprConform,
               std::string("sp collects the ") + kind + " consent before the data is " +
                   (g.sub_policy == SubPolicyKind::Storage    ? "stored"
                    : g.sub_policy == SubPolicyKind::Transfer ? "transferred"
                    : g.sub_policy == SubPolicyKind::Usage    ? "used"
                                                              : "collected"));
        else
          push(g, r, Classification::DprViolation,
               std::string("the policy requires a ") + kind + " consent for " +
                   g.data_type + " but the architecture never collects one");
        break;
      }
      case GoalKind::Purpose: {
        if (r.proved)
          push(g, r, Classification::FunctionalConform,
               "the architecture serves the declared purpose " + g.primary().str());
        else
          push(g, r, Classification::FunctionalViolation,
               "no architecture action serves the declared purpose " + g.primary().str());
        break;
      }
      case GoalKind::StorePlace: {
        const std::string place = g.primary().args[0].str();
        if (r.proved)
          push(g, r, Classification::FunctionalConform,
               g.data_type + " can be stored at " + place + " as the policy permits");
        else
          push(g, r, Classification::FunctionalViolation,
               "the policy lists storage place " + place + " for " + g.data_type +
                   " but the architecture cannot store it there");
        break;
      }
      case GoalKind::Transfer: {
        const std::string to = g.primary().args[0].str();
        if (r.proved)
          push(g, r, Classification::FunctionalConform,
               g.data_type + " can be transferred to " + to + " as the policy permits");
        else
          push(g, r, Classification::FunctionalViolation,
               "the policy allows transferring " + g.data_type + " to " + to +
                   " but the architecture cannot deliver it");
        break;
      }
      case GoalKind::HasUpTo: {
        if (!r.proved) {
          push(g, r, Classification::FunctionalViolation,
               "no bounded retention of " + g.data_type + " at " +
                   g.primary().args[0].str() + " is derivable from the architecture");
          break;
        }
        auto arch_delay = bound_delay(r);
        if (g.delay_nonspecific || !g.policy_delay) {
          push(g, r, Classification::PrivacyConform,
               "the policy sets no concrete retention bound for " + g.data_type);
          break;
        }
        if (arch_delay && arch_delay->minutes() > g.policy_delay->minutes())
          push(g, r, Classification::PrivacyViolation,
               subject + " can have the data of type " + g.data_type + " after " +
                   g.policy_delay->str() + " (the architecture keeps it up to " +
                   arch_delay->str() + ")");
        else
          push(g, r, Classification::PrivacyConform,
               subject + " holds " + g.data_type + " at most " +
                   (arch_delay ? arch_delay->str() : g.policy_delay->str()) +
                   ", within the policy bound " + g.policy_delay->str());
        break;
      }
      case GoalKind::DeleteWithin: {
        const std::string place = g.primary().args[0].str();
        if (!r.proved) {
          push(g, r, Classification::DprViolation,
               "the policy requires deleting " + g.data_type + " from " + place +
                   " but the architecture has no bounded deletion there");
          break;
        }
        auto arch_delay = bound_delay(r);
        if (g.delay_nonspecific || !g.policy_delay) {
          push(g, r, Classification::DprConform,
               "deletion of " + g.data_type + " from " + place +
                   " satisfies the non-specific policy delay");
          break;
        }
        if (arch_delay && arch_delay->minutes() > g.policy_delay->minutes())
          push(g, r, Classification::DprViolation,
               "the architecture deletes " + g.data_type + " from " + place +
                   " within " + arch_delay->str() + ", later than the policy bound " +
                   g.policy_delay->str());
        else
          push(g, r, Classification::DprConform,
               "the architecture deletes " + g.data_type + " from " + place +
                   " within the policy bound " + g.policy_delay->str());
        break;
      }
    }
  }

  // ---- architecture scans (the reverse directions) ----

  bool consent_payload_for(const Term& payload, SpecialKind kind,
                           const std::string& group) const {
    if (payload.kind != TermKind::Special || payload.special != kind) return false;
    return payload_matches_type(payload.args[0], group, ctx_.policy);
  }

  void scan_unwanted_consents() {
    struct Entry {
      SubPolicyKind sub;
      SpecialKind consent;
      bool present_without_consent;
    };
    for (const auto& [group, b] : ctx_.policy.bundles) {
      std::vector<Entry> entries;
      if (b.collection && !b.collection->consent_required)
        entries.push_back({SubPolicyKind::Collection, SpecialKind::Cconsent, true});
      if (b.usage && !b.usage->consent_required)
        entries.push_back({SubPolicyKind::Usage, SpecialKind::Uconsent, true});
      if (b.storage && !b.storage->consent_required)
        entries.push_back({SubPolicyKind::Storage, SpecialKind::Sconsent, true});
      if (b.transfer && !b.transfer->consent_required)
        entries.push_back({SubPolicyKind::Transfer, SpecialKind::Fwconsent, true});
      for (const auto& e : entries) {
        for (const auto& act : ctx_.architecture.actions) {
          if (act.kind != ActionKind::Receive && act.kind != ActionKind::ReceiveAt)
            continue;
          if (!consent_payload_for(act.payload, e.consent, group)) continue;
          push_scan(e.sub, group, act.str(), Classification::FunctionalViolation,
                    "the policy does not require this consent for " + group +
                        " but the architecture collects one");
        }
      }
    }
  }

  void scan_unlisted_purposes() {
    PurposeFacts facts = generate_purpose_facts(ctx_.architecture);
    auto scan = [&](const std::vector<Fact>& table, SubPolicyKind sub,
                    auto purposes_of) {
      bool any_defined = false;
      for (const auto& [group, b] : ctx_.policy.bundles)
        if (purposes_of(b) && !purposes_of(b)->empty()) any_defined = true;
      if (!any_defined) return;
      for (const Fact& f : table) {
        std::string type = lowercased(root_name(f.args[0]));
        std::string action = f.args[1].str();
        bool covered = false;
        for (const auto& [group, b] : ctx_.policy.bundles) {
          if (!purposes_of(b)) continue;
          for (const auto& p : *purposes_of(b))
            if (lowercased(p.action) == action && lowercased(p.result_type) == type)
              covered = true;
        }
        if (!covered)
          push_scan(sub, type, f.str(), Classification::DprViolation,
                    "the architecture pursues purpose " + f.str() +
                        " which no policy purpose list allows");
      }
    };
    scan(facts.collection, SubPolicyKind::Collection,
         [](const SubPolicyBundle& b) {
           return b.collection ? &b.collection->purposes : nullptr;
         });
    scan(facts.usage, SubPolicyKind::Usage, [](const SubPolicyBundle& b) {
      return b.usage ? &b.usage->purposes : nullptr;
    });
    scan(facts.transfer, SubPolicyKind::Transfer, [](const SubPolicyBundle& b) {
      return b.transfer ? &b.transfer->purposes : nullptr;
    });
  }

  void scan_storage_places() {
    for (const auto& [group, b] : ctx_.policy.bundles) {
      if (!b.storage) continue;
      for (const auto& act : ctx_.architecture.actions) {
        if (act.kind != ActionKind::Store && act.kind != ActionKind::StoreAt) continue;
        if (!payload_matches_type(act.payload, group, ctx_.policy)) continue;
        const std::string place = act.subject.name;
        if (std::find(b.storage->where.begin(), b.storage->where.end(), place) ==
            b.storage->where.end())
          push_scan(SubPolicyKind::Storage, group, act.str(),
                    Classification::DprViolation,
                    group + " is stored at " + place +
                        " which the storage sub-policy does not allow");
      }
    }
  }

  void scan_deletion_places() {
    for (const auto& [group, b] : ctx_.policy.bundles) {
      if (!b.deletion) continue;
      for (const auto& act : ctx_.architecture.actions) {
        if (act.kind != ActionKind::Delete && act.kind != ActionKind::DeleteWithin)
          continue;
        if (!payload_matches_type(act.payload, group, ctx_.policy)) continue;
        const std::string place = act.subject.name;
        if (std::find(b.deletion->fromwhere.begin(), b.deletion->fromwhere.end(),
                      place) == b.deletion->fromwhere.end())
          push_scan(SubPolicyKind::Deletion, group, act.str(),
                    Classification::FunctionalViolation,
                    group + " is deleted from " + place +
                        " which is not a declared deletion place");
      }
    }
  }

  void scan_transfer_recipients() {
    for (const auto& [group, b] : ctx_.policy.bundles) {
      if (!b.transfer) continue;
      for (const auto& act : ctx_.architecture.actions) {
        if (act.kind != ActionKind::Receive && act.kind != ActionKind::ReceiveAt)
          continue;
        if (!payload_matches_type(act.payload, group, ctx_.policy)) continue;
        const std::string to = act.subject.name;
        if (to == "sp" || is_reserved_place(to)) continue;  // collection, not transfer
        if (std::find(b.transfer->to.begin(), b.transfer->to.end(), to) ==
            b.transfer->to.end())
          push_scan(SubPolicyKind::Transfer, group, act.str(),
                    Classification::DprViolation,
                    group + " is transferred to " + to +
                        " which the transfer sub-policy does not allow");
      }
    }
  }

  bool arch_touches(const std::string& group, std::initializer_list<ActionKind> kinds,
                    bool exclude_service_receivers = false) const {
    for (const auto& act : ctx_.architecture.actions) {
      if (std::find(kinds.begin(), kinds.end(), act.kind) == kinds.end()) continue;
      if (exclude_service_receivers &&
          (act.subject.name == "sp" || is_reserved_place(act.subject.name)))
        continue;
      if (payload_matches_type(act.payload, group, ctx_.policy)) return true;
    }
    return false;
  }

  void emit_skip_notes() {
    for (const auto& [group, b] : ctx_.policy.bundles) {
      if (!b.collection)
        report_.notes.push_back("no collection sub-policy specified for " + group +
                                "; collection consent and purposes were not checked");
      if (!b.usage)
        report_.notes.push_back("no usage sub-policy specified for " + group +
                                "; usage consent and purposes were not checked");
      if (!b.storage &&
          arch_touches(group, {ActionKind::Store, ActionKind::StoreAt}))
        report_.notes.push_back("no storage sub-policy specified for " + group +
                                " although the architecture stores it");
      if (!b.deletion &&
          arch_touches(group, {ActionKind::Delete, ActionKind::DeleteWithin}))
        report_.notes.push_back("no deletion sub-policy specified for " + group +
                                " although the architecture deletes it");
      if (!b.transfer &&
          arch_touches(group, {ActionKind::Receive, ActionKind::ReceiveAt},
                       /*exclude_service_receivers=*/true))
        report_.notes.push_back("no transfer sub-policy specified for " + group +
                                " although the architecture transfers it");
    }
  }

  const GoalSet& goals_;
  const std::vector<ProofResult>& results_;
  const ClassifyContext& ctx_;
  ConformanceReport report_;
};

}  // namespace

ConformanceReport classify_results(const GoalSet& goals,
                                   const std::vector<ProofResult>& results,
                                   const ClassifyContext& ctx) {
  return Classifier(goals, results, ctx).run();
}

namespace {

const char* polarity_name(GoalPolarity p) {
  return p == GoalPolarity::ExpectedProvable ? "expected-provable" : "expected-unprovable";
}

std::string render_text(const ConformanceReport& r) {
  std::ostringstream out;
  out << "Conformance report\n";
  out << "  policy: " << r.policy_id << "\n";
  out << "  architecture: " << r.architecture_id << "\n";
  out << "  max crypto depth N = " << r.max_crypto_depth
      << " (unproved goals are relative to this bound)\n";
  if (!r.policy_conflicts.empty()) {
    out << "\nPolicy well-formedness:\n";
    for (const auto& c : r.policy_conflicts) out << "  ! " << c << "\n";
  }
  if (!r.arch_findings.empty()) {
    out << "\nArchitecture well-formedness:\n";
    for (const auto& c : r.arch_findings) out << "  ! " << c << "\n";
  }
  auto section = [&](const char* title, Classification c) {
    bool any = false;
    for (const auto& v : r.verdicts) {
      if (v.classification != c) continue;
      if (!any) out << "\n" << title << ":\n";
      any = true;
      out << "  - " << v.detail << "\n";
      out << "      goal: " << v.goal_text;
      if (v.derivation) out << "  (via " << via_chain(v.derivation) << ")";
      if (v.via_access) out << "  (through HasAccessTo: " << *v.via_access << ")";
      out << "\n";
    }
  };
  section("Functional conformance", Classification::FunctionalConform);
  section("Functional violations", Classification::FunctionalViolation);
  section("Privacy conformance", Classification::PrivacyConform);
  section("Privacy violations", Classification::PrivacyViolation);
  section("DPR conformance", Classification::DprConform);
  section("DPR violations", Classification::DprViolation);
  if (!r.notes.empty()) {
    out << "\nNotes:\n";
    for (const auto& n : r.notes) out << "  * " << n << "\n";
  }
  ReportSummary s = r.summary();
  out << "\nSummary: " << s.total_violations() << " violation(s) — functional="
      << s.functional_violations << " privacy=" << s.privacy_violations
      << " dpr=" << s.dpr_violations << "\n";
  return out.str();
}

std::string render_json(const ConformanceReport& r) {
  nlohmann::ordered_json doc;
  doc["policy"] = r.policy_id;
  doc["architecture"] = r.architecture_id;
  doc["maxCryptoDepth"] = r.max_crypto_depth;
  doc["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::ordered_json jv;
    jv["goal"] = v.goal_text;
    jv["subPolicy"] = sub_policy_name(v.sub_policy);
    jv["polarity"] = polarity_name(v.polarity);
    jv["outcome"] = v.proved ? "proved" : "not-proved";
    jv["classification"] = classification_name(v.classification);
    jv["detail"] = v.detail;
    if (v.derivation) jv["derivation"] = v.derivation->str();
    if (v.via_access) jv["viaAccess"] = *v.via_access;
    doc["verdicts"].push_back(std::move(jv));
  }
  ReportSummary s = r.summary();
  doc["summary"] = {{"functionalViolations", s.functional_violations},
                    {"privacyViolations", s.privacy_violations},
                    {"dprViolations", s.dpr_violations}};
  if (!r.notes.empty()) doc["notes"] = r.notes;
  if (!r.policy_conflicts.empty()) doc["policyConflicts"] = r.policy_conflicts;
  if (!r.arch_findings.empty()) doc["archFindings"] = r.arch_findings;
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const ConformanceReport& r, ReportFormat format) {
  return format == ReportFormat::Text ? render_text(r) : render_json(r);
}

}  // namespace dpv
