#include "dpv/policy.hpp"

#include "doctest.h"

using namespace dpv;

namespace {

const char* kSample = R"(# sample policy
ENTITY client "the data subject's machine"
ENTITY auth "third party authority"
DATAGROUP personalinfo UNIQUE=Y { name address dateofbirth phonenumber }
DATAGROUP energy UNIQUE=N { gas water electricity }
POLICY personalinfo {
  COLLECTION { consent=Y ; purposes = createat:Account }
  STORAGE { consent=Y ; where = mainstorage }
  DELETION { fromwhere = mainstorage ; delay = 8y }
  TRANSFER { consent=Y ; to = auth ; purposes = calculateat:Report }
  HAS { client }
  LINKPERMIT { sp : energy UNIQUE=N }
}
POLICY energy {
  USAGE { consent=N ; purposes = calculateat:Bill }
}
)";

}  // namespace

TEST_CASE("parse_policy reads groups, bundles and flags") {
  Policy p = parse_policy(kSample);
  REQUIRE(p.groups.size() == 2);
  CHECK(p.groups[0].group_name == "personalinfo");
  CHECK(p.groups[0].is_unique);
  CHECK(p.groups[0].member_types ==
        std::vector<std::string>{"name", "address", "dateofbirth", "phonenumber"});
  CHECK_FALSE(p.groups[1].is_unique);

  const SubPolicyBundle* b = p.find_bundle("personalinfo");
  REQUIRE(b != nullptr);
  REQUIRE(b->collection.has_value());
  CHECK(b->collection->consent_required);
  REQUIRE(b->collection->purposes.size() == 1);
  CHECK(b->collection->purposes[0].action == "createat");
  CHECK(b->collection->purposes[0].result_type == "Account");
  REQUIRE(b->deletion.has_value());
  CHECK(b->deletion->fromwhere == std::vector<std::string>{"mainstorage"});
  CHECK(b->deletion->delay.minutes() == 8LL * 525600);
  REQUIRE(b->transfer.has_value());
  CHECK(b->transfer->to == std::vector<std::string>{"auth"});
  REQUIRE(b->has.has_value());
  CHECK(*b->has == std::vector<std::string>{"client"});
  REQUIRE(b->link_permit.has_value());
  CHECK((*b->link_permit)[0].entity == "sp");
  CHECK_FALSE((*b->link_permit)[0].unique_flag);
  // unspecified sub-policies stay absent
  CHECK_FALSE(b->usage.has_value());
  CHECK_FALSE(b->link_forbid.has_value());

  // sp is predeclared
  CHECK(p.is_entity("sp"));
  CHECK(p.is_entity("auth"));
}

TEST_CASE("an empty policy block leaves every sub-policy absent") {
  Policy p = parse_policy("DATAGROUP g UNIQUE=N { a b }\nPOLICY g { }\n");
  const SubPolicyBundle* b = p.find_bundle("g");
  REQUIRE(b != nullptr);
  CHECK(b->empty());
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(parse_policy("ENTITY client\n"), ParseError);
  // undeclared group
  CHECK_THROWS_AS(parse_policy("POLICY nosuch { }\n"), ParseError);
  // undeclared entity in HAS
  CHECK_THROWS_AS(
      parse_policy("DATAGROUP g UNIQUE=N { a }\nPOLICY g { HAS { ghost } }\n"),
      ParseError);
  // duplicate bundle
  CHECK_THROWS_AS(
      parse_policy("DATAGROUP g UNIQUE=N { a }\nPOLICY g { }\nPOLICY g { }\n"),
      ParseError);
  try {
    parse_policy("DATAGROUP g UNIQUE=N { a }\nPOLICY g { STORAGE { consent=X } }\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("tvalue concatenation parses") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { DELETION { fromwhere = mainstorage ; delay = 5y+2mo+1d+5m } }\n");
  const auto& del = *p.find_bundle("g")->deletion;
  CHECK(del.delay.str() == "5y+2mo+1d+5m");
  CHECK_FALSE(del.nonspecific_delay);

  Policy q = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { DELETION { fromwhere = mainstorage ; delay = tt } }\n");
  CHECK(q.find_bundle("g")->deletion->nonspecific_delay);
}

TEST_CASE("parse and render round-trip on the normalized form") {
  Policy p = parse_policy(kSample);
  std::string once = render_policy(p);
  std::string twice = render_policy(parse_policy(once));
  CHECK(once == twice);
}

TEST_CASE("well-formedness flags storage versus possession conflicts") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { STORAGE { consent=N ; where = mainstorage } HAS { } }\n");
  auto conflicts = check_well_formed_policy(p);
  REQUIRE(conflicts.size() == 1);
  CHECK(conflicts[0].kind == "storage-vs-has");
}

TEST_CASE("well-formedness flags collection versus possession conflicts") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { COLLECTION { consent=N } HAS { } }\n");
  auto conflicts = check_well_formed_policy(p);
  REQUIRE(conflicts.size() == 1);
  CHECK(conflicts[0].kind == "collection-vs-has");
}

TEST_CASE("well-formedness flags permit/forbid contradictions") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\nDATAGROUP energy UNIQUE=N { gas }\n"
      "POLICY g { LINKPERMIT { sp : energy UNIQUE=N } LINKFORBID { sp : energy "
      "UNIQUE=N } }\n");
  auto conflicts = check_well_formed_policy(p);
  REQUIRE(conflicts.size() == 1);
  CHECK(conflicts[0].kind == "permit-vs-forbid");

  // only-unique forbid is consistent with a non-unique permit
  Policy q = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\nDATAGROUP energy UNIQUE=N { gas }\n"
      "POLICY g { LINKPERMIT { sp : energy UNIQUE=N } LINKFORBID { sp : energy "
      "UNIQUE=Y } }\n");
  CHECK(check_well_formed_policy(q).empty());
}

TEST_CASE("well-formedness flags deletion places outside storage places") {
  Policy p = parse_policy(
      "DATAGROUP g UNIQUE=N { a }\n"
      "POLICY g { STORAGE { consent=N ; where = mainstorage } DELETION { fromwhere = "
      "mainstorage, backupstorage ; delay = 1y } }\n");
  auto conflicts = check_well_formed_policy(p);
  REQUIRE(conflicts.size() == 1);
  CHECK(conflicts[0].kind == "deletion-vs-storage");
}

TEST_CASE("empty policy has no conflicts") {
  CHECK(check_well_formed_policy(parse_policy("")).empty());
  // any single-sub-policy bundle has no conflicting pair
  for (const char* body :
       {"COLLECTION { consent=Y }", "STORAGE { consent=N ; where = mainstorage }",
        "DELETION { fromwhere = x ; delay = 1y }", "HAS { }",
        "LINKPERMIT { sp : g UNIQUE=N }"}) {
    std::string src = "DATAGROUP g UNIQUE=N { a }\nPOLICY g { " + std::string(body) + " }\n";
    CHECK(check_well_formed_policy(parse_policy(src)).empty());
  }
}
