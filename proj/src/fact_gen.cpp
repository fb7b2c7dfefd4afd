#include "dpv/fact_gen.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace dpv {

namespace {

bool decomposable(const Term& t) { return t.kind == TermKind::Compound; }

// Everything a compound argument stands for when pairing against a sibling:
// the term itself plus, recursively, the arguments of nested non-crypto
// compounds.  Crypto interiors stay opaque; Meta wrappers are transparent.
void constituents(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  if (t.kind == TermKind::Compound ||
      (t.kind == TermKind::Special && t.special == SpecialKind::Meta)) {
    for (const auto& a : t.args) constituents(a, out);
  }
}

class TrivialGen {
 public:
  void add_action_payload(const Term& subject, const Term& payload) {
    if (!decomposable(payload)) return;
    decompose(subject, payload);
  }

  std::vector<Fact> take() { return std::move(facts_); }

 private:
  void emit(Fact f) {
    if (seen_.insert(f.str()).second) facts_.push_back(std::move(f));
  }

  void emit_link_pair(const Term& subject, const Term& x, const Term& y) {
    emit(Fact{"LINK", {subject, x, y}});
    emit(Fact{"LINKUNIQUE", {subject, x, y}});
  }

  // HAS for every argument, LINK/LINKUNIQUE for every argument pair and for
  // the cross products of sibling constituents, then recurse into compound
  // arguments.
  void decompose(const Term& subject, const Term& record) {
    const auto& args = record.args;
    for (const auto& a : args) emit(Fact{"HAS", {subject, a}});
    for (size_t i = 0; i < args.size(); ++i) {
      for (size_t j = i + 1; j < args.size(); ++j) {
        std::vector<Term> left, right;
        constituents(args[i], left);
        constituents(args[j], right);
        for (const auto& x : left)
          for (const auto& y : right) emit_link_pair(subject, x, y);
      }
    }
    for (const auto& a : args) {
      if (decomposable(a)) decompose(subject, a);
      if (a.kind == TermKind::Special && a.special == SpecialKind::Meta &&
          decomposable(a.args[0]))
        decompose(subject, a.args[0]);
    }
  }

  std::vector<Fact> facts_;
  std::set<std::string> seen_;
};

}  // namespace

std::vector<Fact> generate_trivial_facts(const Architecture& a) {
  TrivialGen gen;
  for (const auto& act : a.actions) {
    switch (act.kind) {
      case ActionKind::Own:
      case ActionKind::Receive:
      case ActionKind::ReceiveAt:
      case ActionKind::Create:
      case ActionKind::CreateAt:
      case ActionKind::Calculate:
      case ActionKind::CalculateAt:
        gen.add_action_payload(act.subject, act.payload);
        break;
      default:
        break;  // no facts for STORE(AT)/DELETE*
    }
  }
  return gen.take();
}

PurposeFacts generate_purpose_facts(const Architecture& a) {
  PurposeFacts out;
  std::set<std::string> seen;
  auto emit = [&](std::vector<Fact>& dst, const char* pred, const Term& type,
                  const char* action) {
    Fact f{pred, {type, simple(action)}};
    if (seen.insert(f.str()).second) dst.push_back(std::move(f));
  };
  for (const auto& act : a.actions) {
    if (act.kind == ActionKind::CreateAt)
      emit(out.collection, "CPURPOSE", act.payload, "createat");
    if (act.kind == ActionKind::CalculateAt)
      emit(out.usage, "UPURPOSE", act.payload, "calculateat");
  }
  // transfer purposes: a received Fwconsent(data, e_to) paired with e_to
  // creating or calculating that data
  for (const auto& act : a.actions) {
    if (act.kind != ActionKind::ReceiveAt && act.kind != ActionKind::Receive) continue;
    const Term& p = act.payload;
    if (p.kind != TermKind::Special || p.special != SpecialKind::Fwconsent) continue;
    const Term& data = p.args[0];
    const Term& to = p.args[2];
    for (const auto& other : a.actions) {
      if (other.subject != to || other.payload != data) continue;
      if (other.kind == ActionKind::CreateAt)
        emit(out.transfer, "FWPURPOSE", data, "createat");
      if (other.kind == ActionKind::CalculateAt)
        emit(out.transfer, "FWPURPOSE", data, "calculateat");
    }
  }
  return out;
}

std::vector<Fact> generate_unique_facts(const Policy& p) {
  std::vector<Fact> out;
  for (const auto& g : p.groups)
    if (g.is_unique) out.push_back(Fact{"UNIQUE", {simple(g.group_name)}});
  return out;
}

}  // namespace dpv
