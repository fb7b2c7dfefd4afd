#include "dpv/architecture.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace dpv {

const char* action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Own: return "OWN";
    case ActionKind::Receive: return "RECEIVE";
    case ActionKind::ReceiveAt: return "RECEIVEAT";
    case ActionKind::Create: return "CREATE";
    case ActionKind::CreateAt: return "CREATEAT";
    case ActionKind::Calculate: return "CALCULATE";
    case ActionKind::CalculateAt: return "CALCULATEAT";
    case ActionKind::Store: return "STORE";
    case ActionKind::StoreAt: return "STOREAT";
    case ActionKind::Delete: return "DELETE";
    case ActionKind::DeleteWithin: return "DELETEWITHIN";
  }
  return "?";
}

Fact Action::to_fact() const {
  Fact f;
  f.pred = action_kind_name(kind);
  switch (kind) {
    case ActionKind::Own:
    case ActionKind::Create:
    case ActionKind::Calculate:
    case ActionKind::Delete:
      f.args = {subject, payload};
      break;
    case ActionKind::Receive:
    case ActionKind::Store:
      f.args = {subject, payload, origin};
      break;
    case ActionKind::CreateAt:
    case ActionKind::CalculateAt:
      f.args = {subject, payload, *time};
      break;
    case ActionKind::ReceiveAt:
    case ActionKind::StoreAt:
    case ActionKind::DeleteWithin:
      f.args = {subject, payload, origin, *time};
      break;
  }
  return f;
}

std::string Action::str() const {
  std::ostringstream out;
  out << action_kind_name(kind) << "(" << subject.str() << "," << payload.str();
  if (!is_anon(origin)) out << "," << origin.str();
  if (time) out << "," << time->str();
  out << ")";
  return out.str();
}

bool Action::operator==(const Action& o) const {
  return kind == o.kind && subject == o.subject && payload == o.payload &&
         origin == o.origin && time == o.time;
}

std::vector<std::string> Architecture::component_names() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const Term& t) {
    if (t.kind == TermKind::Entity && !is_anon(t) && seen.insert(t.name).second)
      out.push_back(t.name);
  };
  for (const auto& a : actions) {
    add(a.subject);
    add(a.origin);
  }
  for (const auto& [key, members] : has_access_to) {
    if (seen.insert(key).second) out.push_back(key);
    for (const auto& m : members)
      if (seen.insert(m).second) out.push_back(m);
  }
  return out;
}

const std::vector<std::string>* Architecture::access_of(const std::string& component) const {
  for (const auto& [key, members] : has_access_to)
    if (key == component) return &members;
  return nullptr;
}

std::string render_architecture(const Architecture& a) {
  std::ostringstream out;
  for (const auto& act : a.actions) out << act.str() << "\n";
  for (const auto& [key, members] : a.has_access_to) {
    out << "HASACCESSTO(" << key << ",{";
    for (size_t i = 0; i < members.size(); ++i) out << (i ? "," : "") << members[i];
    out << "})\n";
  }
  return out.str();
}

namespace {

bool term_mentions(const Term& t, const std::function<bool(const Term&)>& pred) {
  if (pred(t)) return true;
  for (const auto& a : t.args)
    if (term_mentions(a, pred)) return true;
  return false;
}

bool fact_mentions(const Fact& f, const std::function<bool(const Term&)>& pred) {
  for (const auto& a : f.args)
    if (term_mentions(a, pred)) return true;
  return false;
}

// Does `container` contain a subterm equal to `wanted`?  `through_crypto`
// allows the search to cross crypto layers.
bool contains_subterm(const Term& container, const Term& wanted, bool through_crypto) {
  if (container == wanted) return true;
  switch (container.kind) {
    case TermKind::Compound:
      break;
    case TermKind::Special:
      if (container.special == SpecialKind::Time) return false;
      break;
    case TermKind::Crypto:
      if (!through_crypto) return false;
      break;
    default:
      return false;
  }
  for (const auto& a : container.args)
    if (contains_subterm(a, wanted, through_crypto)) return true;
  return false;
}

bool is_consent_term(const Term& t) {
  return t.kind == TermKind::Special &&
         (t.special == SpecialKind::Cconsent || t.special == SpecialKind::Uconsent ||
          t.special == SpecialKind::Sconsent || t.special == SpecialKind::Fwconsent);
}

}  // namespace

bool fact_mentions_time(const Fact& f) {
  return fact_mentions(f, [](const Term& t) {
    return t.kind == TermKind::Special && t.special == SpecialKind::Time;
  });
}

bool fact_mentions_pseudo(const Fact& f) {
  return fact_mentions(f, [](const Term& t) {
    return t.kind == TermKind::Special && t.special == SpecialKind::P;
  });
}

bool fact_mentions_meta(const Fact& f) {
  return fact_mentions(f, [](const Term& t) {
    return t.kind == TermKind::Special && t.special == SpecialKind::Meta;
  });
}

ArchPartition partition_architecture(const Architecture& a) {
  ArchPartition p;
  for (const auto& act : a.actions) {
    Fact f = act.to_fact();
    bool any = false;
    if (fact_mentions_time(f)) {
      p.with_time.push_back(f);
      any = true;
    }
    if (fact_mentions_pseudo(f)) {
      p.with_pseudo.push_back(f);
      any = true;
    }
    if (fact_mentions_meta(f)) {
      p.with_meta.push_back(f);
      any = true;
    }
    if (!any) p.plain.push_back(f);
  }
  return p;
}

std::vector<ArchViolation> check_well_formed_arch(const Architecture& a) {
  std::vector<ArchViolation> out;
  auto sources_store = [&](const Term& stored) {
    for (const auto& act : a.actions) {
      switch (act.kind) {
        case ActionKind::Own:
        case ActionKind::Create:
        case ActionKind::CreateAt:
        case ActionKind::Calculate:
        case ActionKind::CalculateAt:
          // the stored data or any non-consent function of it
          if (!is_consent_term(act.payload) &&
              contains_subterm(act.payload, stored, /*through_crypto=*/true))
            return true;
          break;
        case ActionKind::Receive:
        case ActionKind::ReceiveAt:
          // exact data, or wrapped in non-crypto non-consent functions
          if (act.payload == stored) return true;
          if (!is_consent_term(act.payload) && act.payload.kind != TermKind::Crypto &&
              contains_subterm(act.payload, stored, /*through_crypto=*/false))
            return true;
          break;
        default:
          break;
      }
    }
    return false;
  };
  auto has_store_of = [&](const Term& data) {
    for (const auto& act : a.actions)
      if ((act.kind == ActionKind::Store || act.kind == ActionKind::StoreAt) &&
          act.payload == data)
        return true;
    return false;
  };
  for (const auto& act : a.actions) {
    if (act.kind == ActionKind::Store || act.kind == ActionKind::StoreAt) {
      if (!sources_store(act.payload))
        out.push_back({"store-without-source",
                       act.str() + " stores data no action owns, receives, creates or "
                                   "calculates"});
    }
    if (act.kind == ActionKind::DeleteWithin) {
      if (!has_store_of(act.payload))
        out.push_back({"deletewithin-without-store",
                       act.str() + " deletes data that is never stored"});
    }
  }
  return out;
}

}  // namespace dpv
