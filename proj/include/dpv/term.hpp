#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpv {

// Symbolic terms shared by the policy/architecture models and the proof
// engine.  Terms are immutable values; every operation returns new terms.

enum class TermKind {
  DataVar,    // binds data terms (simple, compound, crypto, consent)
  EntityVar,  // binds entity constants
  TimeVar,    // binds the non-specific time token or a concrete time value
  DelayVar,   // binds concrete time values only
  KeyVar,     // binds simple types used in key positions
  Simple,     // lowercase data type identifier (name, spkey, ...)
  Entity,     // component identifier (sp, auth, mainstorage, ...)
  Ds,         // the reserved data-subject identity
  NonSpecificTime,  // the reserved token t
  TimeValue,        // concrete duration, e.g. 8y or 5y+2mo
  Compound,         // user constructor, capitalized (Account, Sicknessrec)
  Crypto,           // Senc, Aenc, Mac, Hash, Sk
  Special,          // Time, P, Meta and the four consent constructors
  AnySchema,    // rule slot: any non-crypto constructor, flexible arity/order
  ContainSlot,  // rule slot: subterm containment at any depth
  ArgPack,      // bound remainder of an AnySchema match (internal)
};

enum class CryptoKind { Senc, Aenc, Mac, Hash, Sk };
enum class SpecialKind { Time, P, Meta, Cconsent, Uconsent, Sconsent, Fwconsent };

// Concrete duration written in the tvalue syntax (concatenation with '+').
struct TimeSpan {
  // (count, unit) pairs in written order; units: y, mo, w, d, h, m
  std::vector<std::pair<long, std::string>> parts;

  // Canonical minutes: 1y=525600, 1mo=43200, 1w=10080, 1d=1440, 1h=60.
  long long minutes() const;
  std::string str() const;
  bool operator==(const TimeSpan& o) const { return parts == o.parts; }
};

class Term {
 public:
  TermKind kind = TermKind::Simple;
  std::string name;  // identifier / variable name / schema or slot id
  CryptoKind crypto = CryptoKind::Senc;
  SpecialKind special = SpecialKind::Time;
  std::vector<Term> args;
  TimeSpan span;  // TimeValue only

  // ContainSlot configuration.  inner pattern lives in args[0].
  bool slot_include_crypto = false;    // may the match cross crypto layers
  bool slot_noncrypto_root = false;    // must the candidate root be non-crypto

  // AnySchema: args are the distinguished member patterns; rest_var names the
  // variable absorbing the remaining arguments ("" when none).
  std::string rest_var;

  bool operator==(const Term& o) const;
  bool operator!=(const Term& o) const { return !(*this == o); }
  bool is_var() const;
  bool is_pattern() const;  // contains AnySchema/ContainSlot nodes
  std::string str() const;
};

// ---- constructors ----------------------------------------------------------

Term data_var(std::string name);
Term entity_var(std::string name);
Term time_var(std::string name);
Term delay_var(std::string name);
Term key_var(std::string name);
Term simple(std::string name);
Term entity(std::string name);
Term ds();
Term nonspecific_time();
Term time_value(TimeSpan span);
Term compound(std::string ctor, std::vector<Term> args);
Term crypto(CryptoKind kind, std::vector<Term> args);
Term special(SpecialKind kind, std::vector<Term> args);
Term any_schema(std::string id, std::vector<Term> members, std::string rest_var);
Term contain_slot(std::string id, Term inner, bool include_crypto,
                  bool noncrypto_root = false);
Term arg_pack(std::vector<Term> items);

// The placeholder origin entity used when an action omits E_from.
const Term& anon_entity();
bool is_anon(const Term& t);

// ---- substitution ----------------------------------------------------------

// Idempotent variable binding map.  Schema/slot ids share the namespace with
// variable names (they are prefixed with '%' at construction).
class Substitution {
 public:
  std::map<std::string, Term> bindings;

  bool empty() const { return bindings.empty(); }
  bool has(const std::string& var) const { return bindings.count(var) > 0; }
  const Term* lookup(const std::string& var) const;
  void bind(const std::string& var, Term value);

  // Apply `other` to all ranges and adopt its new bindings.
  Substitution composed_with(const Substitution& other) const;
  // Keep only bindings for the given variable names.
  Substitution restricted_to(const std::vector<std::string>& vars) const;
  std::string str() const;
  bool operator==(const Substitution& o) const { return bindings == o.bindings; }
  bool operator<(const Substitution& o) const;
};

// A logic atom: PREDICATE(arg1, ..., argn).
struct Fact {
  std::string pred;
  std::vector<Term> args;

  bool operator==(const Fact& o) const { return pred == o.pred && args == o.args; }
  bool operator!=(const Fact& o) const { return !(*this == o); }
  bool operator<(const Fact& o) const;
  std::string str() const;
};

// ---- operations ------------------------------------------------------------

// Most general unifier of two plain terms (no schema/slot nodes).  Variable
// kinds are enforced: an entity variable never binds a data term, a delay
// variable binds only concrete time values, and so on.  Fails (returns
// nullopt) on kind clashes, structural clashes and occurs-check hits.
std::optional<Substitution> unify(const Term& a, const Term& b);
std::optional<Substitution> unify(const Fact& a, const Fact& b);

Term apply(const Substitution& s, const Term& t);
Fact apply(const Substitution& s, const Fact& f);

// Generalized matching: like unify but pattern nodes (AnySchema/ContainSlot)
// on either side are expanded, which can yield several incomparable matchers.
// `seed` carries bindings already accumulated by the caller.
std::vector<Substitution> match(const Term& pattern, const Term& candidate,
                                const Substitution& seed = {});
std::vector<Substitution> match(const Fact& pattern, const Fact& candidate,
                                const Substitution& seed = {});

// One substitution per position of `candidate` whose subterm can bind `slot`
// (a data variable).  Positions include the candidate itself; when
// include_crypto is false, positions strictly inside Senc/Aenc/Mac/Hash are
// excluded.
std::vector<Substitution> match_contains(const Term& slot, const Term& candidate,
                                         bool include_crypto);

// Maximum number of nested crypto constructors along any root-to-leaf path.
// Slot nodes contribute the depth of their inner pattern.
int crypto_depth(const Term& t);
int crypto_depth(const Fact& f);

// Free variable names (including unbound schema/slot ids) in traversal order.
std::vector<std::string> free_vars(const Term& t);
std::vector<std::string> free_vars(const Fact& f);

bool can_bind(TermKind var_kind, const Term& value);

// Rename variables, schema ids, slot ids and rest variables.
Term rename_vars(const Term& t, const std::map<std::string, std::string>& renames);
Fact rename_vars(const Fact& f, const std::map<std::string, std::string>& renames);

}  // namespace dpv
