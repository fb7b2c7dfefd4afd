#include "dpv/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dpv/architecture.hpp"
#include "dpv/engine.hpp"
#include "dpv/fact_gen.hpp"
#include "dpv/goal_gen.hpp"
#include "dpv/policy.hpp"
#include "dpv/report.hpp"
#include "dpv/rule_base.hpp"
#include "dpv/trace.hpp"

namespace dpv {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int default_depth() {
  if (const char* env = std::getenv("DPV_MAX_CRYPTO_DEPTH")) {
    int v = std::atoi(env);
    if (v >= 0) return v;
  }
  return 3;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << text;
}

std::vector<std::string> entity_names(const Policy& p) {
  std::vector<std::string> out;
  for (const auto& e : p.entities) out.push_back(e.short_name);
  return out;
}

EngineInputs build_inputs(const Policy& policy, const Architecture& arch, int depth) {
  EngineInputs in;
  in.rules = build_rulesets();
  in.partition = partition_architecture(arch);
  in.trivial_facts = generate_trivial_facts(arch);
  in.purposes = generate_purpose_facts(arch);
  in.unique_types = generate_unique_facts(policy);
  in.has_access_to = arch.has_access_to;
  in.max_crypto_depth = depth;
  return in;
}

int cmd_verify(const std::string& policy_path, const std::string& arch_path, int depth,
               ReportFormat format, const std::string& out_path, std::ostream& out) {
  Policy policy = parse_policy(read_file(policy_path));
  Architecture arch = parse_architecture(read_file(arch_path));

  GoalSet goals = generate_goals(policy, entity_names(policy));
  Engine engine(build_inputs(policy, arch, depth));
  std::vector<ProofResult> results;
  results.reserve(goals.goals.size());
  for (const auto& goal : goals.goals) {
    // a goal with alternative forms is proved when either form is
    ProofResult best = engine.conformance_check(goal.alternatives.front());
    for (size_t i = 1; i < goal.alternatives.size() && !best.proved; ++i)
      best = engine.conformance_check(goal.alternatives[i]);
    results.push_back(std::move(best));
  }

  ClassifyContext ctx{policy, arch, policy_path, arch_path, depth};
  ConformanceReport report = classify_results(goals, results, ctx);
  for (const auto& c : check_well_formed_policy(policy))
    report.policy_conflicts.push_back(c.kind + " on " + c.data_type + ": " + c.detail);
  for (const auto& v : check_well_formed_arch(arch))
    report.arch_findings.push_back(v.kind + ": " + v.detail);
  for (const auto& w : arch.warnings) report.arch_findings.push_back(w);

  emit(render_report(report, format), out_path, out);
  return report.summary().total_violations() > 0 ? 2 : 0;
}

int cmd_lint_policy(const std::string& path, std::ostream& out) {
  Policy policy = parse_policy(read_file(path));
  auto conflicts = check_well_formed_policy(policy);
  for (const auto& c : conflicts)
    out << c.kind << " on " << c.data_type << ": " << c.detail << "\n";
  out << conflicts.size() << " conflict(s)\n";
  return conflicts.empty() ? 0 : 2;
}

int cmd_lint_arch(const std::string& path, std::ostream& out) {
  Architecture arch = parse_architecture(read_file(path));
  auto violations = check_well_formed_arch(arch);
  for (const auto& v : violations) out << v.kind << ": " << v.detail << "\n";
  for (const auto& w : arch.warnings) out << "warning: " << w << "\n";
  out << violations.size() << " violation(s)\n";
  return violations.empty() ? 0 : 2;
}

int cmd_facts(const std::string& arch_path, const std::string& policy_path,
              const std::string& out_path, std::ostream& out) {
  Architecture arch = parse_architecture(read_file(arch_path));
  std::ostringstream text;
  text << "# trivial HAS/LINK/LINKUNIQUE facts\n";
  for (const auto& f : generate_trivial_facts(arch)) text << f.str() << "\n";
  PurposeFacts purposes = generate_purpose_facts(arch);
  text << "# purpose facts\n";
  for (const auto& f : purposes.collection) text << f.str() << "\n";
  for (const auto& f : purposes.usage) text << f.str() << "\n";
  for (const auto& f : purposes.transfer) text << f.str() << "\n";
  if (!policy_path.empty()) {
    text << "# unique types\n";
    for (const auto& f : generate_unique_facts(parse_policy(read_file(policy_path))))
      text << f.str() << "\n";
  }
  emit(text.str(), out_path, out);
  return 0;
}

int cmd_goals(const std::string& policy_path, const std::string& out_path,
              std::ostream& out) {
  Policy policy = parse_policy(read_file(policy_path));
  GoalSet goals = generate_goals(policy, entity_names(policy));
  std::ostringstream text;
  for (const auto& g : goals.goals) text << g.str() << "\n";
  emit(text.str(), out_path, out);
  return 0;
}

int cmd_rules(const std::string& out_path, std::ostream& out) {
  RuleSets rules = build_rulesets();
  std::ostringstream text;
  auto dump = [&](const char* title, const std::vector<InferenceRule>& set) {
    text << "# " << title << " (" << set.size() << ")\n";
    for (const auto& r : set) text << r.str() << "\n";
  };
  dump("DPRRules", rules.dpr_rules);
  dump("HasUpToRules", rules.has_up_to_rules);
  dump("HasRules", rules.has_rules);
  dump("CryptHasRules", rules.crypt_has_rules);
  dump("LinkRules", rules.link_rules);
  dump("LinkUniqueRules", rules.link_unique_rules);
  emit(text.str(), out_path, out);
  return 0;
}

int cmd_trace_check(const std::string& policy_path, const std::string& trace_path,
                    std::ostream& out) {
  Policy policy = parse_policy(read_file(policy_path));
  std::vector<PolicyEvent> trace = parse_trace(read_file(trace_path));
  auto violations = check_trace_compliance(trace, policy);
  for (const auto& v : violations)
    out << v.rule << " (" << v.data_type << "): " << v.detail << "  [" << v.witness
        << "]\n";
  out << violations.size() << " violation(s)\n";
  return violations.empty() ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"data protection policy / architecture conformance checker"};
  app.require_subcommand(1);

  std::string policy_path, arch_path, trace_path, out_path;
  std::string format_name = "text";
  int depth = default_depth();

  auto add_common = [&](CLI::App* cmd, bool needs_policy, bool needs_arch) {
    auto* p = cmd->add_option("--policy", policy_path, "policy DSL file");
    auto* a = cmd->add_option("--arch", arch_path, "architecture DSL file");
    if (needs_policy) p->required();
    if (needs_arch) a->required();
    cmd->add_option("--out", out_path, "write output to a file");
  };

  auto* verify = app.add_subcommand("verify", "run the full conformance check");
  add_common(verify, true, true);
  verify->add_option("--max-crypto-depth", depth, "nested crypto layers to explore");
  verify->add_option("--format", format_name, "text | json")
      ->check(CLI::IsMember({"text", "json"}));

  auto* lint_policy = app.add_subcommand("lint-policy", "well-formedness of a policy");
  lint_policy->add_option("--policy", policy_path, "policy DSL file")->required();

  auto* lint_arch = app.add_subcommand("lint-arch", "well-formedness of an architecture");
  lint_arch->add_option("--arch", arch_path, "architecture DSL file")->required();

  auto* facts = app.add_subcommand("facts", "dump generated facts");
  add_common(facts, false, true);

  auto* goals = app.add_subcommand("goals", "dump generated verification goals");
  add_common(goals, true, false);

  auto* rules = app.add_subcommand("rules", "print the inference rule catalog");
  rules->add_option("--out", out_path, "write output to a file");

  auto* trace_check = app.add_subcommand("trace-check", "audit an event trace");
  trace_check->add_option("--policy", policy_path, "policy DSL file")->required();
  trace_check->add_option("--trace", trace_path, "trace file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (verify->parsed()) {
      ReportFormat format =
          format_name == "json" ? ReportFormat::Structured : ReportFormat::Text;
      return cmd_verify(policy_path, arch_path, depth, format, out_path, out);
    }
    if (lint_policy->parsed()) return cmd_lint_policy(policy_path, out);
    if (lint_arch->parsed()) return cmd_lint_arch(arch_path, out);
    if (facts->parsed()) return cmd_facts(arch_path, policy_path, out_path, out);
    if (goals->parsed()) return cmd_goals(policy_path, out_path, out);
    if (rules->parsed()) return cmd_rules(out_path, out);
    if (trace_check->parsed()) return cmd_trace_check(policy_path, trace_path, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 1;
}

}  // namespace dpv
