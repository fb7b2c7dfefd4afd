#include "dpv/engine.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dpv {

namespace {

constexpr size_t kMaxWitnesses = 256;
constexpr int kMaxDepth = 256;

const std::set<std::string>& action_preds() {
  static const std::set<std::string> preds = {
      "OWN",   "RECEIVE",   "RECEIVEAT", "CREATE", "CREATEAT",    "CALCULATE",
      "CALCULATEAT", "STORE", "STOREAT",   "DELETE", "DELETEWITHIN"};
  return preds;
}

const std::set<std::string>& rule_goal_preds() {
  static const std::set<std::string> preds = {
      "HAS", "HASUPTO", "LINK", "LINKUNIQUE", "CRYPTHAS",
      "CCONSENTCOLLECTED", "UCONSENTCOLLECTED", "STRCONSENTCOLLECTED",
      "FWCONSENTCOLLECTED"};
  return preds;
}

std::string root_type_name(const Term& t) {
  switch (t.kind) {
    case TermKind::Simple:
    case TermKind::Compound:
      return t.name;
    default:
      return t.str();
  }
}

std::string lowercased(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Fact replace_entity(const Fact& f, const std::string& from, const std::string& to) {
  std::function<Term(const Term&)> walk = [&](const Term& t) -> Term {
    if (t.kind == TermKind::Entity && t.name == from) return entity(to);
    Term out = t;
    for (auto& a : out.args) a = walk(a);
    return out;
  };
  Fact out;
  out.pred = f.pred;
  for (const auto& a : f.args) out.args.push_back(walk(a));
  return out;
}

}  // namespace

bool is_action_predicate(const std::string& pred) { return action_preds().count(pred) > 0; }

bool is_purpose_predicate(const std::string& pred) {
  return pred == "CPURPOSE" || pred == "UPURPOSE" || pred == "FWPURPOSE";
}

bool is_consent_predicate(const std::string& pred) {
  return pred == "CCONSENTCOLLECTED" || pred == "UCONSENTCOLLECTED" ||
         pred == "STRCONSENTCOLLECTED" || pred == "FWCONSENTCOLLECTED";
}

int Derivation::depth() const {
  if (rule.empty()) return 0;
  int best = 0;
  for (const auto& c : children) best = std::max(best, c->depth());
  return best + 1;
}

bool Derivation::mentions_rule(const std::string& name) const {
  if (rule == name) return true;
  for (const auto& c : children)
    if (c->mentions_rule(name)) return true;
  return false;
}

std::vector<Fact> Derivation::leaves() const {
  std::vector<Fact> out;
  if (rule.empty()) {
    out.push_back(leaf);
    return out;
  }
  for (const auto& c : children) {
    auto sub = c->leaves();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::string Derivation::str(int indent) const {
  std::ostringstream out;
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  if (rule.empty()) {
    out << pad << goal.str() << "  <-  " << leaf.str() << "\n";
    return out.str();
  }
  out << pad << goal.str() << "  [" << rule << "]\n";
  for (const auto& c : children) out << c->str(indent + 1);
  return out.str();
}

Engine::Engine(EngineInputs inputs) : inputs_(std::move(inputs)) {
  catalog_ = inputs_.rules.all();
  std::set<std::string> seen;
  auto add_untimed = [&](const std::vector<Fact>& facts) {
    for (const auto& f : facts) {
      if (fact_mentions_time(f)) continue;
      if (seen.insert(f.str()).second) untimed_facts_.push_back(f);
    }
  };
  add_untimed(inputs_.partition.plain);
  add_untimed(inputs_.partition.with_meta);
  add_untimed(inputs_.partition.with_pseudo);

  if (inputs_.step_ceiling > 0) {
    ceiling_ = inputs_.step_ceiling;
  } else {
    long long facts_total = static_cast<long long>(untimed_facts_.size()) +
                            static_cast<long long>(inputs_.partition.with_time.size()) +
                            static_cast<long long>(inputs_.trivial_facts.size()) +
                            static_cast<long long>(inputs_.unique_types.size());
    long long rules_total = static_cast<long long>(catalog_.size());
    int n = std::min(inputs_.max_crypto_depth, 16);
    ceiling_ = 64LL * (1LL << n) * (rules_total + 1) * (2 * facts_total + 1);
  }
}

bool Engine::step() {
  if (limit_hit_) return false;
  if (++steps_ > ceiling_) {
    limit_hit_ = true;
    return false;
  }
  return true;
}

std::string Engine::canonical_key(const Fact& goal) {
  std::map<std::string, std::string> renames;
  int next = 0;
  for (const auto& v : free_vars(goal)) renames[v] = "$" + std::to_string(next++);
  return rename_vars(goal, renames).str();
}

std::vector<const Fact*> Engine::arch_candidates(const Fact& goal) const {
  std::vector<const Fact*> out;
  const bool timed = fact_mentions_time(goal);
  const bool meta = fact_mentions_meta(goal);
  const bool pseudo = fact_mentions_pseudo(goal);
  const std::vector<Fact>& base = timed ? inputs_.partition.with_time : untimed_facts_;
  for (const auto& f : base) {
    if (f.pred != goal.pred) continue;
    if (meta && !fact_mentions_meta(f)) continue;
    if (pseudo && !fact_mentions_pseudo(f)) continue;
    out.push_back(&f);
  }
  return out;
}

Engine::ProveOutcome Engine::match_architecture(const Fact& goal) {
  ProveOutcome out;
  auto vars = free_vars(goal);
  for (const Fact* f : arch_candidates(goal)) {
    if (!step()) {
      out.tentative = true;
      return out;
    }
    for (auto& s : match(goal, *f)) {
      auto leaf = std::make_shared<Derivation>();
      leaf->goal = goal;
      leaf->sigma = s;
      leaf->leaf = *f;
      out.witnesses.push_back({s.restricted_to(vars), leaf});
      if (out.witnesses.size() >= kMaxWitnesses) break;
    }
  }
  out.proved = !out.witnesses.empty();
  return out;
}

Engine::ProveOutcome Engine::match_fact_table(const Fact& goal,
                                              const std::vector<Fact>& table) {
  ProveOutcome out;
  auto vars = free_vars(goal);
  const bool symmetric = goal.pred == "LINK" || goal.pred == "LINKUNIQUE";
  for (const Fact& f : table) {
    if (f.pred != goal.pred) continue;
    if (!step()) {
      out.tentative = true;
      return out;
    }
    std::vector<Substitution> subs = match(goal, f);
    if (symmetric && goal.args.size() == 3) {
      Fact swapped = goal;
      std::swap(swapped.args[1], swapped.args[2]);
      for (auto& s : match(swapped, f)) subs.push_back(std::move(s));
    }
    for (auto& s : subs) {
      auto leaf = std::make_shared<Derivation>();
      leaf->goal = goal;
      leaf->sigma = s;
      leaf->leaf = f;
      out.witnesses.push_back({s.restricted_to(vars), leaf});
      if (out.witnesses.size() >= kMaxWitnesses) break;
    }
  }
  out.proved = !out.witnesses.empty();
  return out;
}

Engine::ProveOutcome Engine::match_unique(const Fact& goal) {
  return match_fact_table(goal, inputs_.unique_types);
}

Engine::ProveOutcome Engine::match_purposes(const Fact& goal) {
  const std::vector<Fact>* table = nullptr;
  if (goal.pred == "CPURPOSE") table = &inputs_.purposes.collection;
  if (goal.pred == "UPURPOSE") table = &inputs_.purposes.usage;
  if (goal.pred == "FWPURPOSE") table = &inputs_.purposes.transfer;
  ProveOutcome out;
  if (!table) return out;
  for (const Fact& f : *table) {
    if (!step()) {
      out.tentative = true;
      return out;
    }
    // Purpose facts carry the concrete payload term; the policy names the
    // result type.  Compare by root type name, case-insensitively.
    bool type_ok = lowercased(root_type_name(goal.args[0])) ==
                   lowercased(root_type_name(f.args[0]));
    bool action_ok = goal.args[1] == f.args[1];
    if (type_ok && action_ok) {
      auto leaf = std::make_shared<Derivation>();
      leaf->goal = goal;
      leaf->leaf = f;
      out.witnesses.push_back({Substitution{}, leaf});
    }
  }
  out.proved = !out.witnesses.empty();
  return out;
}

Engine::ProveOutcome Engine::prove_subgoal(const Fact& goal, int depth) {
  if (is_action_predicate(goal.pred)) return match_architecture(goal);
  if (goal.pred == "UNIQUE") return match_unique(goal);
  if (is_purpose_predicate(goal.pred)) return match_purposes(goal);
  return prove_with_rules(goal, depth);
}

Engine::ProveOutcome Engine::prove_with_rules(const Fact& goal, int depth) {
  ProveOutcome out;
  if (depth > kMaxDepth || !step()) {
    out.tentative = true;
    return out;
  }

  const std::string key = canonical_key(goal);
  auto vars = free_vars(goal);
  if (auto it = memo_.find(key); it != memo_.end()) {
    const MemoEntry& hit = it->second;
    ProveOutcome renamed;
    renamed.proved = hit.outcome.proved;
    // rename the stored witnesses onto this goal's variable names
    std::map<std::string, std::string> ren;
    for (size_t i = 0; i < hit.vars.size() && i < vars.size(); ++i)
      if (hit.vars[i] != vars[i]) ren[hit.vars[i]] = vars[i];
    for (const auto& w : hit.outcome.witnesses) {
      Witness nw;
      nw.tree = w.tree;
      for (const auto& [k, v] : w.sigma.bindings) {
        auto kit = ren.find(k);
        nw.sigma.bind(kit == ren.end() ? k : kit->second,
                      rename_vars(Fact{"X", {v}}, ren).args[0]);
      }
      renamed.witnesses.push_back(std::move(nw));
    }
    return renamed;
  }
  if (in_progress_.count(key)) {
    out.tentative = true;
    return out;
  }
  in_progress_.insert(key);

  // fact tables first: trivial HAS/LINK/LINKUNIQUE facts close goals directly
  if (goal.pred == "HAS" || goal.pred == "LINK" || goal.pred == "LINKUNIQUE") {
    ProveOutcome table = match_fact_table(goal, inputs_.trivial_facts);
    out.proved |= table.proved;
    out.tentative |= table.tentative;
    for (auto& w : table.witnesses) out.witnesses.push_back(std::move(w));
  }

  for (const InferenceRule* rule : catalog_) {
    if (rule->head.pred != goal.pred) continue;
    if (!step()) {
      out.tentative = true;
      break;
    }
    InferenceRule fresh = freshen_rule(*rule, fresh_counter_);
    for (const Substitution& s0 : match(goal, fresh.head)) {
      // nested-crypto guard: a decryption step whose sub-goals exceed the
      // depth budget closes this branch
      if (fresh.crypto_guarded) {
        bool too_deep = false;
        for (const auto& t : fresh.tail)
          if (crypto_depth(apply(s0, t)) > inputs_.max_crypto_depth) too_deep = true;
        if (too_deep) continue;
      }
      struct Partial {
        Substitution sigma;
        std::vector<DerivPtr> children;
      };
      std::vector<Partial> chain{{s0, {}}};
      for (const Fact& tail : fresh.tail) {
        std::vector<Partial> next;
        for (const auto& part : chain) {
          Fact tg = apply(part.sigma, tail);
          ProveOutcome sub = prove_subgoal(tg, depth + 1);
          out.tentative |= sub.tentative;
          for (const auto& w : sub.witnesses) {
            Partial np;
            np.sigma = part.sigma.composed_with(w.sigma);
            np.children = part.children;
            np.children.push_back(w.tree);
            next.push_back(std::move(np));
            if (next.size() >= kMaxWitnesses) break;
          }
          if (next.size() >= kMaxWitnesses) break;
        }
        chain = std::move(next);
        if (chain.empty()) break;
      }
      for (const auto& done : chain) {
        auto node = std::make_shared<Derivation>();
        node->goal = goal;
        node->rule = fresh.name;
        node->sigma = done.sigma;
        node->children = done.children;
        out.witnesses.push_back({done.sigma.restricted_to(vars), node});
      }
    }
  }

  // deduplicate witnesses, keeping search order
  std::set<std::string> seen;
  std::vector<Witness> unique;
  for (auto& w : out.witnesses) {
    if (seen.insert(w.sigma.str()).second) unique.push_back(std::move(w));
    if (unique.size() >= kMaxWitnesses) break;
  }
  out.witnesses = std::move(unique);
  out.proved = !out.witnesses.empty();

  in_progress_.erase(key);
  if (!out.tentative && !limit_hit_) memo_[key] = MemoEntry{out, vars};
  return out;
}

Engine::ProveOutcome Engine::attempt(const Fact& goal) {
  if (is_action_predicate(goal.pred)) return match_architecture(goal);
  if (is_purpose_predicate(goal.pred)) return match_purposes(goal);
  if (goal.pred == "UNIQUE") return match_unique(goal);
  if (!rule_goal_preds().count(goal.pred))
    throw std::invalid_argument("unknown goal predicate: " + goal.pred);
  return prove_with_rules(goal, 0);
}

ProofResult Engine::conformance_check(const Fact& initgoal) {
  steps_ = 0;
  limit_hit_ = false;

  ProofResult result;
  result.goal = initgoal;

  ProveOutcome direct = attempt(initgoal);
  const ProveOutcome* winner = direct.proved ? &direct : nullptr;
  ProveOutcome fallback;
  if (!winner && !initgoal.args.empty() &&
      initgoal.args[0].kind == TermKind::Entity) {
    const std::string& subject = initgoal.args[0].name;
    for (const auto& [key, members] : inputs_.has_access_to) {
      if (key != subject) continue;
      for (const auto& member : members) {
        Fact replaced = replace_entity(initgoal, subject, member);
        fallback = attempt(replaced);
        if (fallback.proved) {
          winner = &fallback;
          result.via_access_fallback = member;
          break;
        }
      }
      break;
    }
  }

  if (winner) {
    result.proved = true;
    result.derivation = winner->witnesses.front().tree;
    result.witness = winner->witnesses.front().sigma;
    for (const auto& w : winner->witnesses) result.witnesses.push_back(w.sigma);
  }
  result.steps = steps_;
  result.step_limit_hit = limit_hit_;
  return result;
}

}  // namespace dpv
