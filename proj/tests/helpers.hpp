#pragma once

#include <string>

#include "dpv/architecture.hpp"
#include "dpv/engine.hpp"
#include "dpv/fact_gen.hpp"
#include "dpv/policy.hpp"
#include "dpv/rule_base.hpp"
#include "oracle.hpp"

namespace dpvtest {

inline dpv::EngineInputs make_inputs(const dpv::Architecture& arch,
                                     const dpv::Policy& policy, int depth = 3) {
  dpv::EngineInputs in;
  in.rules = dpv::build_rulesets();
  in.partition = dpv::partition_architecture(arch);
  in.trivial_facts = dpv::generate_trivial_facts(arch);
  in.purposes = dpv::generate_purpose_facts(arch);
  in.unique_types = dpv::generate_unique_facts(policy);
  in.has_access_to = arch.has_access_to;
  in.max_crypto_depth = depth;
  return in;
}

inline dpv::EngineInputs make_inputs(const std::string& arch_text,
                                     const std::string& policy_text = "",
                                     int depth = 3) {
  return make_inputs(dpv::parse_architecture(arch_text), dpv::parse_policy(policy_text),
                     depth);
}

inline OracleInputs make_oracle_inputs(const dpv::Architecture& arch,
                                       const dpv::Policy& policy, int depth = 3) {
  OracleInputs in;
  for (const auto& act : arch.actions) in.arch_facts.push_back(act.to_fact());
  in.trivial_facts = dpv::generate_trivial_facts(arch);
  in.unique_types = dpv::generate_unique_facts(policy);
  in.has_access_to = arch.has_access_to;
  in.max_crypto_depth = depth;
  return in;
}

}  // namespace dpvtest
