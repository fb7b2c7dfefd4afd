#include "dpv/goal_gen.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace dpv {

const char* sub_policy_name(SubPolicyKind k) {
  switch (k) {
    case SubPolicyKind::Collection: return "collection";
    case SubPolicyKind::Usage: return "usage";
    case SubPolicyKind::Storage: return "storage";
    case SubPolicyKind::Deletion: return "deletion";
    case SubPolicyKind::Transfer: return "transfer";
    case SubPolicyKind::Possession: return "possession";
    case SubPolicyKind::Connection: return "connection";
  }
  return "?";
}

std::string GoalEntry::str() const {
  std::ostringstream out;
  for (size_t i = 0; i < alternatives.size(); ++i)
    out << (i ? " | " : "") << alternatives[i].str();
  out << "  [" << sub_policy_name(sub_policy) << ", "
      << (polarity == GoalPolarity::ExpectedProvable ? "permitted" : "forbidden") << "]";
  return out.str();
}

namespace {

Term sp() { return entity("sp"); }
Term time_of(Term inner) { return special(SpecialKind::Time, {std::move(inner)}); }

class Generator {
 public:
  Generator(const Policy& p, const std::vector<std::string>& entities)
      : policy_(p), entities_(entities) {}

  GoalSet run() {
    for (const auto& [group, bundle] : policy_.bundles) {
      data_type_ = group;
      theta_ = simple(group);
      if (bundle.collection) collection(*bundle.collection);
      if (bundle.usage) usage(*bundle.usage);
      if (bundle.storage) storage(*bundle.storage);
      if (bundle.deletion) deletion(*bundle.deletion);
      if (bundle.transfer) transfer(*bundle.transfer);
      if (bundle.has) possession(*bundle.has);
      connection(bundle);
    }
    return std::move(out_);
  }

 private:
  void add(GoalEntry e) {
    e.data_type = data_type_;
    std::ostringstream key;
    for (const auto& a : e.alternatives) key << a.str() << "|";
    if (seen_.insert(key.str()).second) out_.goals.push_back(std::move(e));
  }

  void purpose_goals(const std::vector<Purpose>& purposes, const char* pred,
                     SubPolicyKind sub) {
    for (const auto& p : purposes) {
      GoalEntry e;
      e.kind = GoalKind::Purpose;
      e.sub_policy = sub;
      e.alternatives = {Fact{pred, {simple(p.result_type), simple(p.action)}}};
      add(std::move(e));
    }
  }

  void collection(const ConsentPurposes& c) {
    if (c.consent_required) {
      GoalEntry e;
      e.kind = GoalKind::Consent;
      e.sub_policy = SubPolicyKind::Collection;
      e.alternatives = {Fact{"CCONSENTCOLLECTED", {sp(), theta_}}};
      add(std::move(e));
    }
    purpose_goals(c.purposes, "CPURPOSE", SubPolicyKind::Collection);
  }

  void usage(const ConsentPurposes& u) {
    if (u.consent_required) {
      GoalEntry e;
      e.kind = GoalKind::Consent;
      e.sub_policy = SubPolicyKind::Usage;
      e.alternatives = {Fact{"UCONSENTCOLLECTED", {sp(), theta_}}};
      add(std::move(e));
    }
    purpose_goals(u.purposes, "UPURPOSE", SubPolicyKind::Usage);
  }

  void storage(const StoragePolicy& s) {
    if (s.consent_required) {
      GoalEntry e;
      e.kind = GoalKind::Consent;
      e.sub_policy = SubPolicyKind::Storage;
      e.alternatives = {Fact{"STRCONSENTCOLLECTED", {sp(), theta_}}};
      add(std::move(e));
    }
    for (const auto& place : s.where) {
      GoalEntry e;
      e.kind = GoalKind::StorePlace;
      e.sub_policy = SubPolicyKind::Storage;
      e.alternatives = {
          Fact{"STORE", {entity(place), theta_, entity_var("EVfrom")}},
          Fact{"STOREAT",
               {entity(place), theta_, entity_var("EVfrom"), time_of(nonspecific_time())}}};
      add(std::move(e));
    }
  }

  void deletion(const DeletionPolicy& d) {
    for (const auto& place : d.fromwhere) {
      GoalEntry upto;
      upto.kind = GoalKind::HasUpTo;
      upto.sub_policy = SubPolicyKind::Deletion;
      upto.alternatives = {
          Fact{"HASUPTO", {entity(place), theta_, time_of(delay_var("DD"))}}};
      upto.policy_delay = d.nonspecific_delay ? std::optional<TimeSpan>() : d.delay;
      upto.delay_nonspecific = d.nonspecific_delay;
      add(std::move(upto));

      GoalEntry within;
      within.kind = GoalKind::DeleteWithin;
      within.sub_policy = SubPolicyKind::Deletion;
      within.alternatives = {
          Fact{"DELETEWITHIN",
               {entity(place), theta_, entity_var("EVfrom"), time_of(delay_var("DD"))}}};
      within.policy_delay = d.nonspecific_delay ? std::optional<TimeSpan>() : d.delay;
      within.delay_nonspecific = d.nonspecific_delay;
      add(std::move(within));
    }
  }

  void transfer(const TransferPolicy& t) {
    for (const auto& to : t.to) {
      if (t.consent_required) {
        GoalEntry c;
        c.kind = GoalKind::Consent;
        c.sub_policy = SubPolicyKind::Transfer;
        c.alternatives = {Fact{"FWCONSENTCOLLECTED", {sp(), theta_, entity(to)}}};
        add(std::move(c));
      }
      GoalEntry e;
      e.kind = GoalKind::Transfer;
      e.sub_policy = SubPolicyKind::Transfer;
      e.alternatives = {
          Fact{"RECEIVE", {entity(to), theta_, entity_var("EVfrom")}},
          Fact{"RECEIVEAT",
               {entity(to), theta_, entity_var("EVfrom"), time_of(nonspecific_time())}}};
      add(std::move(e));
    }
    purpose_goals(t.purposes, "FWPURPOSE", SubPolicyKind::Transfer);
  }

  void possession(const std::vector<std::string>& has) {
    for (const auto& name : entities_) {
      GoalEntry e;
      e.kind = GoalKind::Has;
      e.sub_policy = SubPolicyKind::Possession;
      e.alternatives = {Fact{"HAS", {entity(name), theta_}}};
      bool allowed = std::find(has.begin(), has.end(), name) != has.end();
      e.polarity =
          allowed ? GoalPolarity::ExpectedProvable : GoalPolarity::ExpectedUnprovable;
      add(std::move(e));
    }
  }

  void connection(const SubPolicyBundle& b) {
    auto link_goal = [&](GoalKind kind, const char* pred, const LinkRule& rule,
                         GoalPolarity polarity) {
      GoalEntry e;
      e.kind = kind;
      e.sub_policy = SubPolicyKind::Connection;
      e.alternatives = {
          Fact{pred, {entity(rule.entity), theta_, simple(rule.other_type)}}};
      e.polarity = polarity;
      add(std::move(e));
    };
    if (b.link_permit) {
      for (const auto& rule : *b.link_permit) {
        link_goal(GoalKind::Link, "LINK", rule, GoalPolarity::ExpectedProvable);
        link_goal(GoalKind::LinkUnique, "LINKUNIQUE", rule,
                  rule.unique_flag ? GoalPolarity::ExpectedProvable
                                   : GoalPolarity::ExpectedUnprovable);
      }
    }
    if (b.link_forbid) {
      for (const auto& rule : *b.link_forbid) {
        if (!rule.unique_flag)  // any linkage forbidden, not just unique
          link_goal(GoalKind::Link, "LINK", rule, GoalPolarity::ExpectedUnprovable);
        link_goal(GoalKind::LinkUnique, "LINKUNIQUE", rule,
                  GoalPolarity::ExpectedUnprovable);
      }
    }
  }

  const Policy& policy_;
  const std::vector<std::string>& entities_;
  std::string data_type_;
  Term theta_;
  GoalSet out_;
  std::set<std::string> seen_;
};

}  // namespace

GoalSet generate_goals(const Policy& p, const std::vector<std::string>& declared_entities) {
  return Generator(p, declared_entities).run();
}

}  // namespace dpv
