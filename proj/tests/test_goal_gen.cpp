#include "dpv/goal_gen.hpp"

#include <set>

#include "doctest.h"

using namespace dpv;

namespace {

std::vector<const GoalEntry*> of_kind(const GoalSet& gs, GoalKind k) {
  std::vector<const GoalEntry*> out;
  for (const auto& g : gs.goals)
    if (g.kind == k) out.push_back(&g);
  return out;
}

}  // namespace

TEST_CASE("deletion sub-policy yields hasupto and deletewithin goals") {
  Policy p = parse_policy(
      "DATAGROUP personalinfo UNIQUE=N { name }\n"
      "POLICY personalinfo { DELETION { fromwhere = mainstorage ; delay = 8y } }\n");
  GoalSet gs = generate_goals(p, {"sp"});
  auto upto = of_kind(gs, GoalKind::HasUpTo);
  auto within = of_kind(gs, GoalKind::DeleteWithin);
  REQUIRE(upto.size() == 1);
  REQUIRE(within.size() == 1);
  CHECK(upto[0]->primary().str() == "HASUPTO(mainstorage,personalinfo,Time(DD))");
  CHECK(within[0]->primary().str() ==
        "DELETEWITHIN(mainstorage,personalinfo,EVfrom,Time(DD))");
  REQUIRE(upto[0]->policy_delay.has_value());
  CHECK(upto[0]->policy_delay->minutes() == 8LL * 525600);
}

TEST_CASE("an empty bundle yields no goals at all") {
  Policy p = parse_policy("DATAGROUP g UNIQUE=N { a }\nPOLICY g { }\n");
  GoalSet gs = generate_goals(p, {"sp"});
  CHECK(gs.goals.empty());
}

TEST_CASE("possession goals cover every declared entity with polarity") {
  Policy p = parse_policy(
      "ENTITY client \"c\"\n"
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { HAS { client } }\n");
  GoalSet gs = generate_goals(p, {"sp", "client"});
  auto has = of_kind(gs, GoalKind::Has);
  REQUIRE(has.size() == 2);
  CHECK(has[0]->primary().str() == "HAS(sp,g)");
  CHECK(has[0]->polarity == GoalPolarity::ExpectedUnprovable);
  CHECK(has[1]->primary().str() == "HAS(client,g)");
  CHECK(has[1]->polarity == GoalPolarity::ExpectedProvable);
}

TEST_CASE("transfer sub-policy yields receive pairs, consents and purposes") {
  Policy p = parse_policy(
      "ENTITY auth \"a\"\n"
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { TRANSFER { consent=Y ; to = auth ; purposes = calculateat:Report } }\n");
  GoalSet gs = generate_goals(p, {"sp", "auth"});
  auto transfer = of_kind(gs, GoalKind::Transfer);
  REQUIRE(transfer.size() == 1);
  REQUIRE(transfer[0]->alternatives.size() == 2);
  CHECK(transfer[0]->alternatives[0].str() == "RECEIVE(auth,g,EVfrom)");
  CHECK(transfer[0]->alternatives[1].str() == "RECEIVEAT(auth,g,EVfrom,Time(t))");
  auto consents = of_kind(gs, GoalKind::Consent);
  REQUIRE(consents.size() == 1);
  CHECK(consents[0]->primary().str() == "FWCONSENTCOLLECTED(sp,g,auth)");
  auto purposes = of_kind(gs, GoalKind::Purpose);
  REQUIRE(purposes.size() == 1);
  CHECK(purposes[0]->primary().str() == "FWPURPOSE(Report,calculateat)");
}

TEST_CASE("storage goals carry both action forms per place") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { STORAGE { consent=Y ; where = mainstorage, backupstorage } }\n");
  GoalSet gs = generate_goals(p, {"sp"});
  auto stores = of_kind(gs, GoalKind::StorePlace);
  REQUIRE(stores.size() == 2);
  CHECK(stores[0]->alternatives[0].pred == "STORE");
  CHECK(stores[0]->alternatives[1].pred == "STOREAT");
  auto consents = of_kind(gs, GoalKind::Consent);
  REQUIRE(consents.size() == 1);
  CHECK(consents[0]->primary().str() == "STRCONSENTCOLLECTED(sp,g)");
}

TEST_CASE("consent goals disappear when consent is not required") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { COLLECTION { consent=N ; purposes = createat:Account } }\n");
  GoalSet gs = generate_goals(p, {"sp"});
  CHECK(of_kind(gs, GoalKind::Consent).empty());
  REQUIRE(of_kind(gs, GoalKind::Purpose).size() == 1);
  CHECK(of_kind(gs, GoalKind::Purpose)[0]->primary().str() ==
        "CPURPOSE(Account,createat)");
}

TEST_CASE("connection goals follow the permit and forbid stances") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\nDATAGROUP h UNIQUE=N { b }\n"
      "POLICY g { LINKPERMIT { sp : h UNIQUE=N } }\n"
      "POLICY h { LINKFORBID { sp : g UNIQUE=N } }\n");
  GoalSet gs = generate_goals(p, {"sp"});
  auto links = of_kind(gs, GoalKind::Link);
  auto uniques = of_kind(gs, GoalKind::LinkUnique);
  REQUIRE(links.size() == 2);
  REQUIRE(uniques.size() == 2);
  // permit with UNIQUE=N: link expected, unique link forbidden
  CHECK(links[0]->primary().str() == "LINK(sp,g,h)");
  CHECK(links[0]->polarity == GoalPolarity::ExpectedProvable);
  CHECK(uniques[0]->polarity == GoalPolarity::ExpectedUnprovable);
  // forbid with UNIQUE=N: both forbidden
  CHECK(links[1]->primary().str() == "LINK(sp,h,g)");
  CHECK(links[1]->polarity == GoalPolarity::ExpectedUnprovable);
  CHECK(uniques[1]->polarity == GoalPolarity::ExpectedUnprovable);

  // forbid with UNIQUE=Y constrains only the unique link
  Policy q = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\nDATAGROUP h UNIQUE=N { b }\n"
      "POLICY g { LINKFORBID { sp : h UNIQUE=Y } }\n");
  GoalSet qs = generate_goals(q, {"sp"});
  CHECK(of_kind(qs, GoalKind::Link).empty());
  REQUIRE(of_kind(qs, GoalKind::LinkUnique).size() == 1);
}

TEST_CASE("goal generation is deterministic") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { STORAGE { consent=Y ; where = mainstorage } HAS { } }\n");
  GoalSet a = generate_goals(p, {"sp"});
  GoalSet b = generate_goals(p, {"sp"});
  REQUIRE(a.goals.size() == b.goals.size());
  for (size_t i = 0; i < a.goals.size(); ++i) CHECK(a.goals[i].str() == b.goals[i].str());
}
