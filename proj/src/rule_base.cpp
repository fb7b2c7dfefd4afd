#include "dpv/rule_base.hpp"

#include <map>
#include <sstream>

namespace dpv {

std::string InferenceRule::str() const {
  std::ostringstream out;
  out << name << ": " << head.str() << " -| ";
  for (size_t i = 0; i < tail.size(); ++i) out << (i ? ", " : "") << tail[i].str();
  return out.str();
}

namespace {

Term EV() { return entity_var("EV"); }
Term EVfrom() { return entity_var("EVfrom"); }
Term EVto() { return entity_var("EVto"); }
Term EVact() { return entity_var("EVact"); }  // independent data-handling component
Term thV() { return data_var("thV"); }
Term thV1() { return data_var("thV1"); }
Term thV2() { return data_var("thV2"); }
Term thV3() { return data_var("thV3"); }
Term TV() { return time_var("TV"); }
Term DD() { return delay_var("DD"); }
Term K() { return key_var("K"); }
Term PK() { return key_var("PK"); }
Term trusted() { return entity("trusted"); }

Term at(Term inner) { return special(SpecialKind::Time, {std::move(inner)}); }

// containment slots
Term in_nc(std::string id, Term inner) {  // non-crypto containment (one layer)
  return contain_slot(std::move(id), std::move(inner), /*include_crypto=*/false);
}
Term in_nc_root(std::string id, Term inner) {  // plus non-crypto root
  return contain_slot(std::move(id), std::move(inner), /*include_crypto=*/false,
                      /*noncrypto_root=*/true);
}
Term in_inc(std::string id, Term inner) {  // crypto-inclusive containment
  return contain_slot(std::move(id), std::move(inner), /*include_crypto=*/true);
}

Fact receiveat(Term e, Term payload, Term origin, Term tv) {
  return {"RECEIVEAT", {std::move(e), std::move(payload), std::move(origin), at(std::move(tv))}};
}
Fact receive(Term e, Term payload, Term origin) {
  return {"RECEIVE", {std::move(e), std::move(payload), std::move(origin)}};
}
Fact storeat(Term e, Term payload, Term origin, Term tv) {
  return {"STOREAT", {std::move(e), std::move(payload), std::move(origin), at(std::move(tv))}};
}
Fact store(Term e, Term payload, Term origin) {
  return {"STORE", {std::move(e), std::move(payload), std::move(origin)}};
}
Fact deletewithin(Term e, Term payload, Term origin, Term delay) {
  return {"DELETEWITHIN",
          {std::move(e), std::move(payload), std::move(origin), at(std::move(delay))}};
}
Fact has(Term e, Term d) { return {"HAS", {std::move(e), std::move(d)}}; }
Fact crypthas(Term e, Term d) { return {"CRYPTHAS", {std::move(e), std::move(d)}}; }

Term consent(SpecialKind kind, Term data, Term origin) {
  return special(kind, {std::move(data), std::move(origin)});
}
Term fwconsent(Term data, Term origin, Term to) {
  return special(SpecialKind::Fwconsent, {std::move(data), std::move(origin), std::move(to)});
}

InferenceRule rule(std::string name, Fact head, std::vector<Fact> tail,
                   bool guarded = false) {
  return InferenceRule{std::move(name), std::move(head), std::move(tail), guarded};
}

std::vector<InferenceRule> build_dpr() {
  std::vector<InferenceRule> out;
  // Transfer consent: the consent collector and the named recipient.
  out.push_back(rule(
      "D1", Fact{"FWCONSENTCOLLECTED", {EV(), thV(), EVto()}},
      {receiveat(EV(), fwconsent(thV(), EVfrom(), EVto()), EVfrom(), TV()),
       receiveat(EVto(), thV(), EVfrom(), TV())}));
  // Collection/usage/storage consents: the consent reaches the service
  // provider while the data action itself may run on any service component
  // (storage places and sub-components act for the provider).
  out.push_back(rule(
      "D2", Fact{"CCONSENTCOLLECTED", {EV(), thV()}},
      {receiveat(EV(), consent(SpecialKind::Cconsent, thV(), EVfrom()), EVfrom(), TV()),
       receiveat(EVact(), thV(), EVfrom(), TV())}));
  out.push_back(rule(
      "D3", Fact{"UCONSENTCOLLECTED", {EV(), thV()}},
      {receiveat(EV(), consent(SpecialKind::Uconsent, thV(), EVfrom()), EVfrom(), TV()),
       Fact{"CREATEAT", {EVact(), in_nc_root("%U3", thV()), at(TV())}}}));
  out.push_back(rule(
      "D4", Fact{"UCONSENTCOLLECTED", {EV(), thV()}},
      {receiveat(EV(), consent(SpecialKind::Uconsent, thV(), EVfrom()), EVfrom(), TV()),
       Fact{"CALCULATEAT", {EVact(), in_nc_root("%U4", thV()), at(TV())}}}));
  out.push_back(rule(
      "D5", Fact{"STRCONSENTCOLLECTED", {EV(), thV()}},
      {receiveat(EV(), consent(SpecialKind::Sconsent, thV(), EVfrom()), EVfrom(), TV()),
       storeat(EVact(), thV(), EVfrom(), TV())}));
  // D6/D7: the transferred/collected data may arrive inside any compound,
  // including crypto wrappers.
  out.push_back(rule(
      "D6", Fact{"FWCONSENTCOLLECTED", {EV(), thV(), EVto()}},
      {receiveat(EV(), fwconsent(thV(), EVfrom(), EVto()), EVfrom(), TV()),
       receiveat(EVto(), in_inc("%W6", thV()), EVfrom(), TV())}));
  out.push_back(rule(
      "D7", Fact{"CCONSENTCOLLECTED", {EV(), thV()}},
      {receiveat(EV(), consent(SpecialKind::Cconsent, thV(), EVfrom()), EVfrom(), TV()),
       receiveat(EVact(), in_inc("%W7", thV()), EVfrom(), TV())}));
  return out;
}

std::vector<InferenceRule> build_has_up_to() {
  std::vector<InferenceRule> out;
  out.push_back(rule("P1", Fact{"HASUPTO", {EV(), thV(), at(DD())}},
                     {storeat(EV(), thV(), EVfrom(), TV()),
                      deletewithin(EV(), thV(), EVfrom(), DD())}));
  // Pseudonym bridging: a trusted party holding a record with P(ds) also
  // reaches the record with the real identity.
  out.push_back(rule("P2",
                     has(trusted(), any_schema("%A", {ds()}, "thVr")),
                     {has(trusted(), any_schema("%A", {data_var("thVr"),
                                                       special(SpecialKind::P, {ds()})},
                                                ""))}));
  return out;
}

std::vector<InferenceRule> build_has() {
  std::vector<InferenceRule> out;
  out.push_back(rule("P3", has(EV(), thV()), {Fact{"OWN", {EV(), thV()}}}));
  out.push_back(rule("P4", has(EV(), thV()), {receiveat(EV(), thV(), EVfrom(), TV())}));
  out.push_back(rule("P5", has(EV(), thV()), {storeat(EV(), thV(), EVfrom(), TV())}));
  out.push_back(rule("P6", has(EV(), thV()), {Fact{"CREATEAT", {EV(), thV(), at(TV())}}}));
  out.push_back(rule("P7", has(EV(), thV()), {Fact{"CALCULATEAT", {EV(), thV(), at(TV())}}}));
  // decryption: one crypto layer per application
  out.push_back(rule("P8", has(EV(), thV()),
                     {has(EV(), crypto(CryptoKind::Senc, {in_nc("%B8", thV()), K()})),
                      has(EV(), K())},
                     /*guarded=*/true));
  out.push_back(rule("P9", has(EV(), thV()),
                     {has(EV(), crypto(CryptoKind::Mac, {in_nc("%B9", thV()), K()})),
                      has(EV(), K())},
                     /*guarded=*/true));
  out.push_back(rule("P10", has(EV(), thV()),
                     {has(EV(), crypto(CryptoKind::Aenc, {in_nc("%B10", thV()), PK()})),
                      has(EV(), crypto(CryptoKind::Sk, {PK()}))},
                     /*guarded=*/true));
  out.push_back(rule("P11", Fact{"HASUPTO", {EV(), thV(), at(DD())}},
                     {store(EV(), thV(), EVfrom()),
                      deletewithin(EV(), thV(), EVfrom(), DD())}));
  out.push_back(rule("P12",
                     has(trusted(), any_schema("%A", {ds()}, "thVr")),
                     {has(trusted(), any_schema("%A", {special(SpecialKind::P, {ds()}),
                                                       data_var("thVr")},
                                                ""))}));
  out.push_back(rule("P13",
                     has(trusted(), any_schema("%A", {ds()}, "thVr")),
                     {has(trusted(), any_schema("%A", {data_var("thVr"),
                                                       special(SpecialKind::P, {ds()})},
                                                ""))}));
  out.push_back(rule("P14",
                     has(trusted(), any_schema("%A", {ds()}, "thVr")),
                     {has(trusted(), any_schema("%A", {special(SpecialKind::P, {ds()}),
                                                       data_var("thVr")},
                                                ""))}));
  out.push_back(rule("P15", has(EV(), thV()), {receive(EV(), thV(), EVfrom())}));
  out.push_back(rule("P16", has(EV(), thV()), {store(EV(), thV(), EVfrom())}));
  out.push_back(rule("P17", has(EV(), thV()), {Fact{"CREATE", {EV(), thV()}}}));
  out.push_back(rule("P18", has(EV(), thV()), {Fact{"CALCULATE", {EV(), thV()}}}));
  return out;
}

std::vector<InferenceRule> build_crypt_has() {
  std::vector<InferenceRule> out;
  out.push_back(rule("C1", crypthas(EV(), thV()),
                     {has(EV(), crypto(CryptoKind::Senc, {in_nc("%B1", thV()), K()})),
                      has(EV(), K())},
                     /*guarded=*/true));
  out.push_back(rule("C2", crypthas(EV(), thV()),
                     {has(EV(), crypto(CryptoKind::Mac, {in_nc("%B2", thV()), K()})),
                      has(EV(), K())},
                     /*guarded=*/true));
  out.push_back(rule("C3", crypthas(EV(), thV()),
                     {has(EV(), crypto(CryptoKind::Aenc, {in_nc("%B3", thV()), PK()})),
                      has(EV(), crypto(CryptoKind::Sk, {PK()}))},
                     /*guarded=*/true));
  return out;
}

// A record pattern with two distinguished members and a rest variable.
Fact link_tail(const char* schema, const char* rest, Term first, Term third) {
  return has(EV(), any_schema(schema, {std::move(first), std::move(third)}, rest));
}

struct LinkSpec {
  std::string name;
  Term head1, head2;    // head argument order
  Term t1a, t1b;        // tail-1 first/third members
  Term t2a, t2b;        // tail-2 first/third members
};

// Base rule plus the /b,/c,/d variants wrapping tail-2 members in
// crypto-inclusive containment with CRYPTHAS side conditions.
void emit_link_family(std::vector<InferenceRule>& out, const LinkSpec& s,
                      const char* head_pred, bool with_unique) {
  auto head = [&]() { return Fact{head_pred, {EV(), s.head1, s.head2}}; };
  auto t1 = [&]() { return link_tail("%A1", "thVr1", s.t1a, s.t1b); };
  auto base_tail = [&](Fact t2) {
    std::vector<Fact> tail{t1(), std::move(t2)};
    if (with_unique) tail.push_back(Fact{"UNIQUE", {thV3()}});
    return tail;
  };

  out.push_back(rule(s.name, head(), base_tail(link_tail("%A2", "thVr2", s.t2a, s.t2b))));

  auto wrapped = [&](bool first, bool third) {
    Term a = first ? in_inc("%W1", s.t2a) : s.t2a;
    Term b = third ? in_inc("%W2", s.t2b) : s.t2b;
    std::vector<Fact> tail = base_tail(link_tail("%A2", "thVr2", a, b));
    if (first) tail.push_back(crypthas(EV(), s.t2a));
    if (third) tail.push_back(crypthas(EV(), s.t2b));
    return tail;
  };
  out.push_back(rule(s.name + "/b", head(), wrapped(false, true)));
  out.push_back(rule(s.name + "/c", head(), wrapped(true, false)));
  out.push_back(rule(s.name + "/d", head(), wrapped(true, true)));
}

std::vector<InferenceRule> build_link() {
  std::vector<InferenceRule> out;
  // Shared metadata links the two records.
  Term meta3 = special(SpecialKind::Meta, {thV3()});
  out.push_back(rule("L0", Fact{"LINK", {EV(), thV1(), thV2()}},
                     {link_tail("%A1", "thVr1", thV1(), meta3),
                      link_tail("%A2", "thVr2", thV2(), meta3)}));
  // L1-L4 permute the head and the shared member; L5-L8 swap tail-1.
  std::vector<LinkSpec> specs = {
      {"L1", thV1(), thV2(), thV1(), thV3(), thV2(), thV3()},
      {"L2", thV1(), thV2(), thV1(), thV3(), thV3(), thV2()},
      {"L3", thV2(), thV1(), thV1(), thV3(), thV2(), thV3()},
      {"L4", thV2(), thV1(), thV1(), thV3(), thV3(), thV2()},
      {"L5", thV1(), thV2(), thV3(), thV1(), thV2(), thV3()},
      {"L6", thV1(), thV2(), thV3(), thV1(), thV3(), thV2()},
      {"L7", thV2(), thV1(), thV3(), thV1(), thV2(), thV3()},
      {"L8", thV2(), thV1(), thV3(), thV1(), thV3(), thV2()},
  };
  for (const auto& s : specs) emit_link_family(out, s, "LINK", /*with_unique=*/false);
  return out;
}

std::vector<InferenceRule> build_link_unique() {
  std::vector<InferenceRule> out;
  std::vector<LinkSpec> specs = {
      {"U1", thV1(), thV2(), thV1(), thV3(), thV2(), thV3()},
      {"U2", thV1(), thV2(), thV1(), thV3(), thV3(), thV2()},
      {"U3", thV2(), thV1(), thV1(), thV3(), thV2(), thV3()},
      {"U4", thV2(), thV1(), thV1(), thV3(), thV3(), thV2()},
      {"U5", thV1(), thV2(), thV3(), thV1(), thV2(), thV3()},
      {"U6", thV1(), thV2(), thV3(), thV1(), thV3(), thV2()},
      {"U7", thV2(), thV1(), thV3(), thV1(), thV2(), thV3()},
      {"U8", thV2(), thV1(), thV3(), thV1(), thV3(), thV2()},
  };
  for (const auto& s : specs) emit_link_family(out, s, "LINKUNIQUE", /*with_unique=*/true);
  return out;
}

}  // namespace

RuleSets build_rulesets() {
  RuleSets rs;
  rs.dpr_rules = build_dpr();
  rs.has_up_to_rules = build_has_up_to();
  rs.has_rules = build_has();
  rs.crypt_has_rules = build_crypt_has();
  rs.link_rules = build_link();
  rs.link_unique_rules = build_link_unique();
  return rs;
}

std::vector<const InferenceRule*> RuleSets::all() const {
  std::vector<const InferenceRule*> out;
  auto append = [&](const std::vector<InferenceRule>& v) {
    for (const auto& r : v) out.push_back(&r);
  };
  append(dpr_rules);
  append(has_up_to_rules);
  append(has_rules);
  append(crypt_has_rules);
  append(link_rules);
  append(link_unique_rules);
  return out;
}

InferenceRule freshen_rule(const InferenceRule& r, long& counter) {
  std::map<std::string, std::string> renames;
  std::string suffix = "#" + std::to_string(++counter);
  auto visit = [&](const Fact& f) {
    for (const auto& v : free_vars(f))
      if (!renames.count(v)) renames[v] = v + suffix;
  };
  visit(r.head);
  for (const auto& t : r.tail) visit(t);
  InferenceRule out;
  out.name = r.name;
  out.crypto_guarded = r.crypto_guarded;
  out.head = rename_vars(r.head, renames);
  for (const auto& t : r.tail) out.tail.push_back(rename_vars(t, renames));
  return out;
}

}  // namespace dpv
