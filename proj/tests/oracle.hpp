#pragma once

// Independent forward-chaining saturation oracle used to cross-check the
// backward engine.  It derives HAS / CRYPTHAS / LINK / LINKUNIQUE / consent
// facts from the architecture by exhaustive rule application to a fixpoint,
// with decryption bounded the same way the engine bounds it (peel count plus
// the residual crypto depth of the extracted term may not exceed N).
//
// The implementation deliberately avoids the production matcher: record
// patterns are enumerated by brute force over argument positions and subterm
// positions.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpv/term.hpp"

namespace dpvtest {

struct OracleInputs {
  std::vector<dpv::Fact> arch_facts;  // every action, all partitions
  std::vector<dpv::Fact> trivial_facts;
  std::vector<dpv::Fact> unique_types;
  std::vector<std::pair<std::string, std::vector<std::string>>> has_access_to;
  int max_crypto_depth = 3;
};

class ForwardOracle {
 public:
  explicit ForwardOracle(OracleInputs in);

  // Supports HAS, LINK, LINKUNIQUE and the four consent predicates, with the
  // same single-level HasAccessTo fallback the engine applies.
  bool proves(const dpv::Fact& goal) const;

  size_t derived_has_count() const { return has_.size(); }

 private:
  struct HeldTerm {
    dpv::Term term;
    int peel;  // decryption steps used to obtain it
  };

  void saturate();
  bool step_decrypt();
  bool step_pseudonym();
  bool step_links();
  bool step_consents();

  bool holds(const std::string& entity, const dpv::Term& t) const;
  bool crypt_holds(const std::string& entity, const dpv::Term& t) const;
  bool add_has(const std::string& entity, const dpv::Term& t, int peel);
  bool add_crypt(const std::string& entity, const dpv::Term& t);
  bool add_atom(const std::string& pred, const std::string& entity, const dpv::Term& a,
                const dpv::Term& b);

  bool proves_direct(const dpv::Fact& goal) const;

  OracleInputs in_;
  // entity -> rendered term -> held record
  std::map<std::string, std::map<std::string, HeldTerm>> has_;
  std::map<std::string, std::set<std::string>> crypt_has_;
  std::set<std::string> atoms_;  // LINK/LINKUNIQUE/consent facts, rendered
  std::set<std::string> unique_;
};

}  // namespace dpvtest
