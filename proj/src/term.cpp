#include "dpv/term.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>
#include <sstream>

namespace dpv {

namespace {

const char* crypto_name(CryptoKind k) {
  switch (k) {
    case CryptoKind::Senc: return "Senc";
    case CryptoKind::Aenc: return "Aenc";
    case CryptoKind::Mac: return "Mac";
    case CryptoKind::Hash: return "Hash";
    case CryptoKind::Sk: return "Sk";
  }
  return "?";
}

const char* special_name(SpecialKind k) {
  switch (k) {
    case SpecialKind::Time: return "Time";
    case SpecialKind::P: return "P";
    case SpecialKind::Meta: return "Meta";
    case SpecialKind::Cconsent: return "Cconsent";
    case SpecialKind::Uconsent: return "Uconsent";
    case SpecialKind::Sconsent: return "Sconsent";
    case SpecialKind::Fwconsent: return "Fwconsent";
  }
  return "?";
}

bool is_consent(SpecialKind k) {
  return k == SpecialKind::Cconsent || k == SpecialKind::Uconsent ||
         k == SpecialKind::Sconsent || k == SpecialKind::Fwconsent;
}

}  // namespace

long long TimeSpan::minutes() const {
  long long total = 0;
  for (const auto& [count, unit] : parts) {
    long long per = 0;
    if (unit == "y") per = 525600;
    else if (unit == "mo") per = 43200;
    else if (unit == "w") per = 10080;
    else if (unit == "d") per = 1440;
    else if (unit == "h") per = 60;
    else if (unit == "m") per = 1;
    total += count * per;
  }
  return total;
}

std::string TimeSpan::str() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [count, unit] : parts) {
    if (!first) out << "+";
    out << count << unit;
    first = false;
  }
  return out.str();
}

bool Term::operator==(const Term& o) const {
  if (kind != o.kind || name != o.name) return false;
  if (kind == TermKind::Crypto && crypto != o.crypto) return false;
  if (kind == TermKind::Special && special != o.special) return false;
  if (kind == TermKind::TimeValue && !(span == o.span)) return false;
  if (kind == TermKind::ContainSlot &&
      (slot_include_crypto != o.slot_include_crypto ||
       slot_noncrypto_root != o.slot_noncrypto_root))
    return false;
  if (kind == TermKind::AnySchema && rest_var != o.rest_var) return false;
  return args == o.args;
}

bool Term::is_var() const {
  switch (kind) {
    case TermKind::DataVar:
    case TermKind::EntityVar:
    case TermKind::TimeVar:
    case TermKind::DelayVar:
    case TermKind::KeyVar:
      return true;
    default:
      return false;
  }
}

bool Term::is_pattern() const {
  if (kind == TermKind::AnySchema || kind == TermKind::ContainSlot) return true;
  for (const auto& a : args)
    if (a.is_pattern()) return true;
  return false;
}

std::string Term::str() const {
  std::ostringstream out;
  switch (kind) {
    case TermKind::DataVar:
    case TermKind::EntityVar:
    case TermKind::TimeVar:
    case TermKind::DelayVar:
    case TermKind::KeyVar:
    case TermKind::Simple:
    case TermKind::Entity:
      return name;
    case TermKind::Ds:
      return "ds";
    case TermKind::NonSpecificTime:
      return "t";
    case TermKind::TimeValue:
      return span.str();
    case TermKind::Compound: {
      out << name << "(";
      for (size_t i = 0; i < args.size(); ++i) out << (i ? "," : "") << args[i].str();
      out << ")";
      return out.str();
    }
    case TermKind::Crypto: {
      out << crypto_name(crypto) << "(";
      for (size_t i = 0; i < args.size(); ++i) out << (i ? "," : "") << args[i].str();
      out << ")";
      return out.str();
    }
    case TermKind::Special: {
      out << special_name(special) << "(";
      bool first = true;
      for (size_t i = 0; i < args.size(); ++i) {
        // Consent origins default to the anonymous entity; omit them so the
        // canonical rendering round-trips through the parser.
        if (is_consent(special) && i == 1 && is_anon(args[i])) continue;
        out << (first ? "" : ",") << args[i].str();
        first = false;
      }
      out << ")";
      return out.str();
    }
    case TermKind::AnySchema: {
      out << name << "{";
      for (size_t i = 0; i < args.size(); ++i) out << (i ? "," : "") << args[i].str();
      if (!rest_var.empty()) out << "|" << rest_var;
      out << "}";
      return out.str();
    }
    case TermKind::ContainSlot: {
      out << name << (slot_include_crypto ? ":inc[" : ":in[") << args[0].str() << "]";
      return out.str();
    }
    case TermKind::ArgPack: {
      out << "<";
      for (size_t i = 0; i < args.size(); ++i) out << (i ? "," : "") << args[i].str();
      out << ">";
      return out.str();
    }
  }
  return "?";
}

Term data_var(std::string name) { Term t; t.kind = TermKind::DataVar; t.name = std::move(name); return t; }
Term entity_var(std::string name) { Term t; t.kind = TermKind::EntityVar; t.name = std::move(name); return t; }
Term time_var(std::string name) { Term t; t.kind = TermKind::TimeVar; t.name = std::move(name); return t; }
Term delay_var(std::string name) { Term t; t.kind = TermKind::DelayVar; t.name = std::move(name); return t; }
Term key_var(std::string name) { Term t; t.kind = TermKind::KeyVar; t.name = std::move(name); return t; }
Term simple(std::string name) { Term t; t.kind = TermKind::Simple; t.name = std::move(name); return t; }
Term entity(std::string name) { Term t; t.kind = TermKind::Entity; t.name = std::move(name); return t; }
Term ds() { Term t; t.kind = TermKind::Ds; return t; }
Term nonspecific_time() { Term t; t.kind = TermKind::NonSpecificTime; return t; }
Term time_value(TimeSpan span) { Term t; t.kind = TermKind::TimeValue; t.span = std::move(span); return t; }

Term compound(std::string ctor, std::vector<Term> args) {
  Term t;
  t.kind = TermKind::Compound;
  t.name = std::move(ctor);
  t.args = std::move(args);
  return t;
}

Term crypto(CryptoKind kind, std::vector<Term> args) {
  Term t;
  t.kind = TermKind::Crypto;
  t.crypto = kind;
  t.args = std::move(args);
  return t;
}

Term special(SpecialKind kind, std::vector<Term> args) {
  Term t;
  t.kind = TermKind::Special;
  t.special = kind;
  t.args = std::move(args);
  return t;
}

Term any_schema(std::string id, std::vector<Term> members, std::string rest_var) {
  Term t;
  t.kind = TermKind::AnySchema;
  t.name = std::move(id);
  t.args = std::move(members);
  t.rest_var = std::move(rest_var);
  return t;
}

Term contain_slot(std::string id, Term inner, bool include_crypto, bool noncrypto_root) {
  Term t;
  t.kind = TermKind::ContainSlot;
  t.name = std::move(id);
  t.args.push_back(std::move(inner));
  t.slot_include_crypto = include_crypto;
  t.slot_noncrypto_root = noncrypto_root;
  return t;
}

Term arg_pack(std::vector<Term> items) {
  Term t;
  t.kind = TermKind::ArgPack;
  t.args = std::move(items);
  return t;
}

const Term& anon_entity() {
  static const Term t = entity("__anon");
  return t;
}

bool is_anon(const Term& t) {
  return t.kind == TermKind::Entity && t.name == "__anon";
}

// ---- substitution ----------------------------------------------------------

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings.find(var);
  return it == bindings.end() ? nullptr : &it->second;
}

void Substitution::bind(const std::string& var, Term value) {
  bindings[var] = std::move(value);
}

Substitution Substitution::composed_with(const Substitution& other) const {
  Substitution out;
  for (const auto& [k, v] : bindings) out.bindings[k] = apply(other, v);
  for (const auto& [k, v] : other.bindings)
    if (!out.bindings.count(k)) out.bindings[k] = v;
  return out;
}

Substitution Substitution::restricted_to(const std::vector<std::string>& vars) const {
  Substitution out;
  for (const auto& v : vars) {
    auto it = bindings.find(v);
    if (it != bindings.end()) out.bindings[v] = it->second;
  }
  return out;
}

std::string Substitution::str() const {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const auto& [k, v] : bindings) {
    out << (first ? "" : ", ") << k << " -> " << v.str();
    first = false;
  }
  out << "}";
  return out.str();
}

bool Substitution::operator<(const Substitution& o) const { return str() < o.str(); }

bool Fact::operator<(const Fact& o) const {
  if (pred != o.pred) return pred < o.pred;
  return str() < o.str();
}

std::string Fact::str() const {
  std::ostringstream out;
  out << pred << "(";
  for (size_t i = 0; i < args.size(); ++i) out << (i ? "," : "") << args[i].str();
  out << ")";
  return out.str();
}

// ---- matching machinery ----------------------------------------------------

bool can_bind(TermKind var_kind, const Term& value) {
  switch (var_kind) {
    case TermKind::DataVar:
      switch (value.kind) {
        case TermKind::Simple:
        case TermKind::Compound:
        case TermKind::Crypto:
        case TermKind::AnySchema:
        case TermKind::ContainSlot:
        case TermKind::DataVar:
        case TermKind::KeyVar:
          return true;
        case TermKind::Special:
          return is_consent(value.special);
        default:
          return false;
      }
    case TermKind::EntityVar:
      return value.kind == TermKind::Entity || value.kind == TermKind::EntityVar;
    case TermKind::TimeVar:
      return value.kind == TermKind::NonSpecificTime ||
             value.kind == TermKind::TimeValue ||
             value.kind == TermKind::TimeVar || value.kind == TermKind::DelayVar;
    case TermKind::DelayVar:
      return value.kind == TermKind::TimeValue || value.kind == TermKind::DelayVar;
    case TermKind::KeyVar:
      return value.kind == TermKind::Simple || value.kind == TermKind::KeyVar;
    default:
      return false;
  }
}

namespace {

const Term& resolve(const Term& t, const Substitution& s) {
  const Term* cur = &t;
  while (cur->is_var()) {
    const Term* next = s.lookup(cur->name);
    if (!next) break;
    cur = next;
  }
  return *cur;
}

bool occurs(const std::string& var, const Term& t, const Substitution& s) {
  const Term& r = resolve(t, s);
  if (r.is_var() && r.name == var) return true;
  if ((r.kind == TermKind::AnySchema || r.kind == TermKind::ContainSlot) &&
      r.name == var)
    return true;
  for (const auto& a : r.args)
    if (occurs(var, a, s)) return true;
  return false;
}

// When two unbound variables meet, keep the one with the narrower domain.
bool bind_var_pair(const Term& a, const Term& b, Substitution& s) {
  auto narrower = [](TermKind x, TermKind y) {
    // returns true when domain(x) is a subset of domain(y)
    if (x == y) return true;
    if (x == TermKind::KeyVar && y == TermKind::DataVar) return true;
    if (x == TermKind::DelayVar && y == TermKind::TimeVar) return true;
    return false;
  };
  if (narrower(b.kind, a.kind)) {
    s.bind(a.name, b);
    return true;
  }
  if (narrower(a.kind, b.kind)) {
    s.bind(b.name, a);
    return true;
  }
  return false;
}

struct Matcher {
  // Enumerates all matchers of (pattern, candidate) extending a seed.
  std::vector<Substitution> out;

  void run(const Term& a, const Term& b, Substitution s) { step(a, b, std::move(s)); }

  void step(const Term& pa, const Term& pb, Substitution s) {
    const Term a = resolve(pa, s);
    const Term b = resolve(pb, s);

    if (a.is_var() || b.is_var()) {
      bind_step(a, b, std::move(s));
      return;
    }
    if (a.kind == TermKind::ContainSlot) {
      contain_step(a, b, std::move(s));
      return;
    }
    if (b.kind == TermKind::ContainSlot) {
      contain_step(b, a, std::move(s));
      return;
    }
    if (a.kind == TermKind::AnySchema) {
      schema_step(a, b, std::move(s));
      return;
    }
    if (b.kind == TermKind::AnySchema) {
      schema_step(b, a, std::move(s));
      return;
    }
    structural_step(a, b, std::move(s));
  }

  void bind_step(const Term& a, const Term& b, Substitution s) {
    if (a.is_var() && b.is_var()) {
      if (a.name == b.name) {
        out.push_back(std::move(s));
        return;
      }
      if (bind_var_pair(a, b, s)) out.push_back(std::move(s));
      return;
    }
    const Term& var = a.is_var() ? a : b;
    const Term& val = a.is_var() ? b : a;
    if (!can_bind(var.kind, val)) return;
    if (occurs(var.name, val, s)) return;
    s.bind(var.name, val);
    out.push_back(std::move(s));
  }

  void structural_step(const Term& a, const Term& b, Substitution s) {
    if (a.kind != b.kind) return;
    switch (a.kind) {
      case TermKind::Simple:
      case TermKind::Entity:
        if (a.name == b.name) out.push_back(std::move(s));
        return;
      case TermKind::Ds:
      case TermKind::NonSpecificTime:
        out.push_back(std::move(s));
        return;
      case TermKind::TimeValue:
        if (a.span == b.span) out.push_back(std::move(s));
        return;
      case TermKind::Compound:
        if (a.name != b.name || a.args.size() != b.args.size()) return;
        args_step(a.args, b.args, std::move(s));
        return;
      case TermKind::Crypto:
        if (a.crypto != b.crypto || a.args.size() != b.args.size()) return;
        args_step(a.args, b.args, std::move(s));
        return;
      case TermKind::Special:
        if (a.special != b.special || a.args.size() != b.args.size()) return;
        args_step(a.args, b.args, std::move(s));
        return;
      case TermKind::ArgPack:
        if (a.args.size() != b.args.size()) return;
        args_step(a.args, b.args, std::move(s));
        return;
      default:
        // pattern-vs-pattern is not supported; identical nodes only
        if (a == b) out.push_back(std::move(s));
        return;
    }
  }

  void args_step(const std::vector<Term>& as, const std::vector<Term>& bs,
                 Substitution s) {
    // cartesian product over per-argument alternatives
    std::vector<Substitution> layer{std::move(s)};
    for (size_t i = 0; i < as.size(); ++i) {
      std::vector<Substitution> next;
      for (auto& sub : layer) {
        Matcher m;
        m.step(as[i], bs[i], sub);
        for (auto& r : m.out) next.push_back(std::move(r));
      }
      layer = std::move(next);
      if (layer.empty()) return;
    }
    for (auto& r : layer) out.push_back(std::move(r));
  }

  void contain_step(const Term& slot, const Term& candidate, Substitution s) {
    if (candidate.is_pattern()) return;  // slot-vs-pattern unsupported
    if (slot.slot_noncrypto_root && candidate.kind == TermKind::Crypto) return;
    const Term& inner = slot.args[0];
    std::vector<Substitution> found;
    std::function<void(const Term&)> visit = [&](const Term& at) {
      Matcher m;
      m.step(inner, at, s);
      for (auto& r : m.out) {
        r.bind(slot.name, candidate);
        found.push_back(std::move(r));
      }
      switch (at.kind) {
        case TermKind::Compound:
          for (const auto& a : at.args) visit(a);
          break;
        case TermKind::Special:
          if (at.special != SpecialKind::Time)
            for (const auto& a : at.args) visit(a);
          break;
        case TermKind::Crypto:
          if (slot.slot_include_crypto)
            for (const auto& a : at.args) visit(a);
          break;
        default:
          break;
      }
    };
    visit(candidate);
    for (auto& r : found) {
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(std::move(r));
    }
  }

  void schema_step(const Term& schema, const Term& candidate, Substitution s) {
    if (candidate.is_pattern()) return;
    if (candidate.kind != TermKind::Compound) return;  // schemas are non-crypto
    // Splice already-bound member packs before matching.
    std::vector<Term> members;
    for (const auto& m : schema.args) {
      const Term r = resolve(m, s);
      if (r.kind == TermKind::ArgPack)
        members.insert(members.end(), r.args.begin(), r.args.end());
      else
        members.push_back(r);
    }
    bool rest_open = !schema.rest_var.empty();
    if (rest_open) {
      if (const Term* packed = s.lookup(schema.rest_var)) {
        if (packed->kind == TermKind::ArgPack) {
          members.insert(members.end(), packed->args.begin(), packed->args.end());
          rest_open = false;
        }
      }
    }
    if (const Term* ctor = s.lookup("%ctor:" + schema.name)) {
      if (ctor->name != candidate.name) return;
    }
    const size_t n = candidate.args.size();
    if (members.size() > n) return;
    if (!rest_open && members.size() != n) return;

    // Injective assignment of member patterns to argument positions, in any
    // order; the rest variable absorbs the unassigned positions.
    std::vector<bool> used(n, false);
    std::function<void(size_t, Substitution)> assign = [&](size_t idx, Substitution cur) {
      if (idx == members.size()) {
        Substitution done = std::move(cur);
        if (rest_open) {
          std::vector<Term> rest;
          for (size_t j = 0; j < n; ++j)
            if (!used[j]) rest.push_back(candidate.args[j]);
          done.bind(schema.rest_var, arg_pack(std::move(rest)));
        }
        Term ctor_marker = simple(candidate.name);
        done.bind("%ctor:" + schema.name, ctor_marker);
        done.bind(schema.name, candidate);
        if (std::find(out.begin(), out.end(), done) == out.end())
          out.push_back(std::move(done));
        return;
      }
      for (size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        Matcher m;
        m.step(members[idx], candidate.args[j], cur);
        if (m.out.empty()) continue;
        used[j] = true;
        for (auto& r : m.out) assign(idx + 1, std::move(r));
        used[j] = false;
      }
    };
    assign(0, std::move(s));
  }
};

Substitution normalized(Substitution s) {
  // Make idempotent: apply the substitution to its own ranges to fixpoint.
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 64) {
    changed = false;
    for (auto& [k, v] : s.bindings) {
      Term nv = apply(s, v);
      if (nv != v) {
        v = std::move(nv);
        changed = true;
      }
    }
  }
  return s;
}

}  // namespace

Term apply(const Substitution& s, const Term& t) {
  switch (t.kind) {
    case TermKind::DataVar:
    case TermKind::EntityVar:
    case TermKind::TimeVar:
    case TermKind::DelayVar:
    case TermKind::KeyVar: {
      const Term* b = s.lookup(t.name);
      return b ? apply(s, *b) : t;
    }
    case TermKind::ContainSlot: {
      const Term* b = s.lookup(t.name);
      if (b) return apply(s, *b);
      Term out = t;
      out.args[0] = apply(s, t.args[0]);
      return out;
    }
    case TermKind::AnySchema: {
      std::vector<Term> members;
      for (const auto& m : t.args) {
        Term r = apply(s, m);
        if (r.kind == TermKind::ArgPack)
          members.insert(members.end(), r.args.begin(), r.args.end());
        else
          members.push_back(std::move(r));
      }
      std::string rest = t.rest_var;
      if (!rest.empty()) {
        if (const Term* packed = s.lookup(rest)) {
          Term r = apply(s, *packed);
          if (r.kind == TermKind::ArgPack) {
            members.insert(members.end(), r.args.begin(), r.args.end());
            rest.clear();
          }
        }
      }
      if (const Term* ctor = s.lookup("%ctor:" + t.name); ctor && rest.empty())
        return compound(ctor->name, std::move(members));
      Term out = t;
      out.args = std::move(members);
      out.rest_var = rest;
      return out;
    }
    default: {
      if (t.args.empty()) return t;
      Term out = t;
      for (auto& a : out.args) a = apply(s, a);
      return out;
    }
  }
}

Fact apply(const Substitution& s, const Fact& f) {
  Fact out;
  out.pred = f.pred;
  out.args.reserve(f.args.size());
  for (const auto& a : f.args) out.args.push_back(apply(s, a));
  return out;
}

std::optional<Substitution> unify(const Term& a, const Term& b) {
  auto all = match(a, b);
  if (all.empty()) return std::nullopt;
  return all.front();
}

std::optional<Substitution> unify(const Fact& a, const Fact& b) {
  auto all = match(a, b);
  if (all.empty()) return std::nullopt;
  return all.front();
}

std::vector<Substitution> match(const Term& pattern, const Term& candidate,
                                const Substitution& seed) {
  Matcher m;
  m.run(pattern, candidate, seed);
  std::vector<Substitution> out;
  for (auto& s : m.out) {
    Substitution n = normalized(std::move(s));
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

std::vector<Substitution> match(const Fact& pattern, const Fact& candidate,
                                const Substitution& seed) {
  if (pattern.pred != candidate.pred || pattern.args.size() != candidate.args.size())
    return {};
  std::vector<Substitution> layer{seed};
  for (size_t i = 0; i < pattern.args.size(); ++i) {
    std::vector<Substitution> next;
    for (const auto& s : layer) {
      Matcher step;
      step.run(pattern.args[i], candidate.args[i], s);
      for (auto& r : step.out) next.push_back(std::move(r));
    }
    layer = std::move(next);
    if (layer.empty()) return {};
  }
  std::vector<Substitution> out;
  for (auto& s : layer) {
    Substitution n = normalized(std::move(s));
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

std::vector<Substitution> match_contains(const Term& slot, const Term& candidate,
                                         bool include_crypto) {
  Term wrapper = contain_slot("%mc", slot, include_crypto);
  std::vector<Substitution> raw = match(wrapper, candidate);
  std::vector<Substitution> out;
  for (auto& s : raw) {
    s.bindings.erase("%mc");
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  }
  return out;
}

int crypto_depth(const Term& t) {
  int inner = 0;
  for (const auto& a : t.args) inner = std::max(inner, crypto_depth(a));
  return t.kind == TermKind::Crypto ? inner + 1 : inner;
}

int crypto_depth(const Fact& f) {
  int d = 0;
  for (const auto& a : f.args) d = std::max(d, crypto_depth(a));
  return d;
}

namespace {
void collect_vars(const Term& t, std::vector<std::string>& out, std::set<std::string>& seen) {
  auto add = [&](const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  };
  if (t.is_var()) {
    add(t.name);
    return;
  }
  if (t.kind == TermKind::AnySchema) {
    add(t.name);
    for (const auto& a : t.args) collect_vars(a, out, seen);
    if (!t.rest_var.empty()) add(t.rest_var);
    return;
  }
  if (t.kind == TermKind::ContainSlot) {
    add(t.name);
    collect_vars(t.args[0], out, seen);
    return;
  }
  for (const auto& a : t.args) collect_vars(a, out, seen);
}
}  // namespace

std::vector<std::string> free_vars(const Term& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_vars(t, out, seen);
  return out;
}

std::vector<std::string> free_vars(const Fact& f) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& a : f.args) collect_vars(a, out, seen);
  return out;
}

Term rename_vars(const Term& t, const std::map<std::string, std::string>& renames) {
  auto ren = [&](const std::string& n) {
    auto it = renames.find(n);
    return it == renames.end() ? n : it->second;
  };
  Term out = t;
  if (t.is_var() || t.kind == TermKind::AnySchema || t.kind == TermKind::ContainSlot)
    out.name = ren(t.name);
  if (t.kind == TermKind::AnySchema && !t.rest_var.empty())
    out.rest_var = ren(t.rest_var);
  for (auto& a : out.args) a = rename_vars(a, renames);
  return out;
}

Fact rename_vars(const Fact& f, const std::map<std::string, std::string>& renames) {
  Fact out;
  out.pred = f.pred;
  out.args.reserve(f.args.size());
  for (const auto& a : f.args) out.args.push_back(rename_vars(a, renames));
  return out;
}

}  // namespace dpv
