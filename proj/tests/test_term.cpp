#include "dpv/term.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "testgen.hpp"

using namespace dpv;

namespace {

// Independent brute-force oracle: enumerate every subterm position, filter
// the crypto-interior ones, and collect the subterms a data variable could
// bind.  Used to pin down the expected match_contains results.
void enumerate_positions(const Term& t, bool inside_crypto, bool include_crypto,
                         std::vector<Term>& out) {
  if (include_crypto || !inside_crypto) out.push_back(t);
  switch (t.kind) {
    case TermKind::Compound:
      for (const auto& a : t.args) enumerate_positions(a, inside_crypto, include_crypto, out);
      break;
    case TermKind::Special:
      if (t.special != SpecialKind::Time)
        for (const auto& a : t.args) enumerate_positions(a, inside_crypto, include_crypto, out);
      break;
    case TermKind::Crypto:
      for (const auto& a : t.args) enumerate_positions(a, true, include_crypto, out);
      break;
    default:
      break;
  }
}

std::set<std::string> oracle_contains(const Term& candidate, bool include_crypto) {
  std::vector<Term> positions;
  enumerate_positions(candidate, false, include_crypto, positions);
  std::set<std::string> out;
  for (const auto& p : positions)
    if (can_bind(TermKind::DataVar, p)) out.insert(p.str());
  return out;
}

std::set<std::string> bound_values(const std::vector<Substitution>& subs,
                                   const std::string& var) {
  std::set<std::string> out;
  for (const auto& s : subs) {
    const Term* t = s.lookup(var);
    REQUIRE(t != nullptr);
    out.insert(t->str());
  }
  return out;
}

Fact has(Term e, Term d) { return Fact{"HAS", {std::move(e), std::move(d)}}; }

}  // namespace

TEST_CASE("unify binds entity and data variables") {
  Fact goal = has(entity_var("EV"), data_var("thV"));
  Fact fact = has(entity("sp"), simple("name"));
  auto s = unify(goal, fact);
  REQUIRE(s.has_value());
  CHECK(s->lookup("EV")->str() == "sp");
  CHECK(s->lookup("thV")->str() == "name");
  CHECK(apply(*s, goal) == fact);
}

TEST_CASE("unify of identical ground facts yields the empty substitution") {
  Fact f = has(entity("sp"), simple("name"));
  auto s = unify(f, f);
  REQUIRE(s.has_value());
  CHECK(s->empty());
}

TEST_CASE("ds never unifies with its pseudonym") {
  CHECK_FALSE(unify(ds(), special(SpecialKind::P, {ds()})).has_value());
  // and a data variable binds neither of them
  CHECK_FALSE(unify(data_var("thV"), ds()).has_value());
  CHECK_FALSE(unify(data_var("thV"), special(SpecialKind::P, {ds()})).has_value());
}

TEST_CASE("occurs check rejects self-referential bindings") {
  Term v = data_var("thV");
  Term wrapped = compound("Rec", {data_var("thV"), simple("name")});
  CHECK_FALSE(unify(v, wrapped).has_value());
}

TEST_CASE("variable kinds are enforced") {
  CHECK_FALSE(unify(entity_var("EV"), simple("name")).has_value());
  CHECK_FALSE(unify(data_var("thV"), entity("sp")).has_value());
  CHECK_FALSE(unify(delay_var("DD"), nonspecific_time()).has_value());
  CHECK(unify(time_var("TV"), nonspecific_time()).has_value());
  TimeSpan eight{{{8, "y"}}};
  CHECK(unify(delay_var("DD"), time_value(eight)).has_value());
  CHECK(unify(key_var("K"), simple("spkey")).has_value());
  CHECK_FALSE(unify(key_var("K"), compound("Acc", {simple("a")})).has_value());
}

TEST_CASE("apply distributes over compound structure") {
  Substitution s;
  s.bind("thV", simple("name"));
  Term t = compound("Rec", {data_var("thV"), crypto(CryptoKind::Senc, {data_var("thV"), simple("k")})});
  Term expect = compound("Rec", {simple("name"), crypto(CryptoKind::Senc, {simple("name"), simple("k")})});
  CHECK(apply(s, t) == expect);
  // empty substitution is the identity
  CHECK(apply(Substitution{}, t) == t);
}

TEST_CASE("apply routes a reception payload substitution") {
  Substitution s;
  s.bind("thV", simple("name"));
  Fact g{"RECEIVEAT", {entity_var("EV"), data_var("thV"), entity("client"),
                       special(SpecialKind::Time, {time_var("TV")})}};
  Fact applied = apply(s, g);
  CHECK(applied.args[1] == simple("name"));
  CHECK(applied.args[0] == entity_var("EV"));
}

TEST_CASE("match_contains without crypto lists record members and the record") {
  Term rec = compound("Sicknessrec", {simple("name"), simple("disease")});
  auto subs = match_contains(data_var("thV"), rec, false);
  auto got = bound_values(subs, "thV");
  CHECK(got == std::set<std::string>{"name", "disease", "Sicknessrec(name,disease)"});
  CHECK(got == oracle_contains(rec, false));
}

TEST_CASE("match_contains excludes crypto interiors unless asked") {
  Term enc = crypto(CryptoKind::Senc, {simple("name"), simple("key")});
  auto closed = bound_values(match_contains(data_var("thV"), enc, false), "thV");
  CHECK(closed == std::set<std::string>{"Senc(name,key)"});
  CHECK(closed == oracle_contains(enc, false));

  auto open = bound_values(match_contains(data_var("thV"), enc, true), "thV");
  CHECK(open == std::set<std::string>{"Senc(name,key)", "name", "key"});
  CHECK(open == oracle_contains(enc, true));
}

TEST_CASE("match_contains agrees with the brute-force oracle on random terms") {
  std::mt19937 rng(77);
  for (int i = 0; i < 300; ++i) {
    Term t = dpvtest::random_ground_term(rng, 3);
    for (bool inc : {false, true}) {
      auto got = bound_values(match_contains(data_var("thV"), t, inc), "thV");
      CHECK(got == oracle_contains(t, inc));
    }
    // the closed results are always a subset of the open ones
    auto closed = bound_values(match_contains(data_var("thV"), t, false), "thV");
    auto open = bound_values(match_contains(data_var("thV"), t, true), "thV");
    CHECK(std::includes(open.begin(), open.end(), closed.begin(), closed.end()));
  }
}

TEST_CASE("crypto_depth counts nested layers") {
  CHECK(crypto_depth(simple("name")) == 0);
  CHECK(crypto_depth(crypto(CryptoKind::Senc, {simple("name"), simple("key")})) == 1);
  Term nested = crypto(
      CryptoKind::Senc,
      {compound("Account", {crypto(CryptoKind::Senc, {simple("name"), simple("key")}),
                            simple("address")}),
       simple("key")});
  CHECK(crypto_depth(nested) == 2);
}

TEST_CASE("crypto_depth by recursive traversal oracle on random terms") {
  std::mt19937 rng(12);
  // independent oracle: depth = max over paths, counting crypto nodes
  std::function<int(const Term&)> depth_of = [&](const Term& t) {
    int best = 0;
    for (const auto& a : t.args) best = std::max(best, depth_of(a));
    return best + (t.kind == TermKind::Crypto ? 1 : 0);
  };
  for (int i = 0; i < 200; ++i) {
    Term t = dpvtest::random_ground_term(rng, 4);
    CHECK(crypto_depth(t) == depth_of(t));
  }
}

TEST_CASE("unifier makes both sides structurally equal on random pairs") {
  std::mt19937 rng(99);
  int successes = 0;
  for (int i = 0; i < 1000; ++i) {
    Term a = dpvtest::random_term(rng, 3);
    Term b = dpvtest::random_term(rng, 3);
    auto s = unify(a, b);
    if (!s) continue;
    ++successes;
    CHECK(apply(*s, a) == apply(*s, b));
    // idempotence: applying twice equals applying once
    CHECK(apply(*s, apply(*s, a)) == apply(*s, a));
  }
  CHECK(successes > 20);  // the generator must exercise the success path
}

TEST_CASE("mgu generality against brute-force ground unifiers") {
  // For small var-bearing pairs, every ground unifier found by enumerating
  // bindings over a tiny universe must factor through the returned mgu.
  std::vector<Term> universe = {simple("name"), simple("ip"),
                                compound("Rec", {simple("name"), simple("ip")})};
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    Term a = dpvtest::random_term(rng, 2);
    Term b = dpvtest::random_term(rng, 2);
    auto mgu = unify(a, b);
    auto vars_a = free_vars(a);
    auto vars_b = free_vars(b);
    std::vector<std::string> vars = vars_a;
    for (const auto& v : vars_b)
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    if (vars.size() > 3) continue;
    // enumerate all assignments
    std::vector<size_t> idx(vars.size(), 0);
    bool done = vars.empty();
    auto advance = [&]() {
      for (size_t k = 0; k < idx.size(); ++k) {
        if (++idx[k] < universe.size()) return true;
        idx[k] = 0;
      }
      return false;
    };
    bool first = true;
    while (!done && (first || advance())) {
      first = false;
      Substitution ground;
      bool ok = true;
      for (size_t k = 0; k < vars.size(); ++k) {
        // skip kind-invalid assignments
        Term var = data_var(vars[k]);
        if (vars[k][0] == 'e') { ok = false; break; }
        if (vars[k][0] == 'k' && universe[idx[k]].kind != TermKind::Simple) { ok = false; break; }
        ground.bind(vars[k], universe[idx[k]]);
      }
      if (!ok) continue;
      if (apply(ground, a) == apply(ground, b)) {
        REQUIRE_MESSAGE(mgu.has_value(), "ground unifier exists but mgu missing: ",
                        a.str(), " vs ", b.str());
        // the ground unifier factors through the mgu
        Substitution through = mgu->composed_with(ground);
        CHECK(apply(through, a) == apply(ground, a));
      }
      if (done) break;
    }
  }
}

TEST_CASE("schema patterns match constructor-flexibly in any order") {
  Term rec = compound("Sicknessrecord",
                      {simple("nhsnumber"), simple("name"),
                       special(SpecialKind::Meta, {simple("ip")})});
  // distinguished slots: a bound first member and a Meta-wrapped variable
  Term pat = any_schema("%A1", {simple("nhsnumber"),
                                special(SpecialKind::Meta, {data_var("thV3")})},
                        "thVrest");
  auto subs = match(pat, rec);
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].lookup("thV3")->str() == "ip");
  // the schema id records the full matched term
  CHECK(*subs[0].lookup("%A1") == rec);
}

TEST_CASE("schema patterns refuse crypto constructors") {
  Term enc = crypto(CryptoKind::Senc, {simple("name"), simple("key")});
  Term pat = any_schema("%A1", {data_var("thV1")}, "thVrest");
  CHECK(match(pat, enc).empty());
}

TEST_CASE("rename_vars renames schema ids and rest variables") {
  Term pat = any_schema("%A1", {data_var("thV1")}, "thVrest");
  Term renamed = rename_vars(pat, {{"%A1", "%B9"}, {"thV1", "x"}, {"thVrest", "r"}});
  CHECK(renamed.name == "%B9");
  CHECK(renamed.args[0].name == "x");
  CHECK(renamed.rest_var == "r");
}

TEST_CASE("time spans normalize to canonical minutes") {
  TimeSpan y8{{{8, "y"}}};
  CHECK(y8.minutes() == 8LL * 525600);
  TimeSpan mixed{{{5, "y"}, {2, "mo"}, {1, "d"}, {5, "m"}}};
  CHECK(mixed.minutes() == 5LL * 525600 + 2LL * 43200 + 1440 + 5);
  CHECK(mixed.str() == "5y+2mo+1d+5m");
}
