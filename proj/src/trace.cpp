#include "dpv/trace.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <tuple>

namespace dpv {

namespace {

constexpr const char* kConsentSlots[] = {"cconsenttype", "uconsenttype", "sconsenttype",
                                         "fwconsenttype"};

bool is_consent_event(const std::string& kind) {
  return kind == "cconsentat" || kind == "uconsentat" || kind == "sconsentat" ||
         kind == "fwconsentat";
}

bool is_builtin(const std::string& kind) {
  return is_consent_event(kind) || kind == "collectat" || kind == "storeat" ||
         kind == "deleteat" || kind == "forwardat";
}

// days since 1970-01-01 for a civil date (proleptic Gregorian)
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

}  // namespace

long long parse_timestamp(const std::string& text, int line) {
  // yyyy.mm.dd.hh:mm
  unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0;
  char dot1, dot2, dot3, colon;
  std::istringstream in(text);
  if (!(in >> y >> dot1 >> mo >> dot2 >> d >> dot3 >> h >> colon >> mi) ||
      dot1 != '.' || dot2 != '.' || dot3 != '.' || colon != ':' || mo < 1 || mo > 12 ||
      d < 1 || d > 31 || h > 23 || mi > 59)
    throw ParseError("bad timestamp '" + text + "' (expected yyyy.mm.dd.hh:mm)", line, 1);
  return (days_from_civil(y, mo, d) * 24 + h) * 60 + mi;
}

bool PolicyEvent::is_use_event() const { return !is_builtin(kind); }

std::string PolicyEvent::str() const {
  std::ostringstream out;
  out << kind << "(" << time_text;
  if (kind == "fwconsentat" || kind == "forwardat") out << "," << e_to;
  out << "," << e_from;
  if (is_use_event()) out << "," << derived_type;
  out << "," << data_type;
  if (kind == "collectat" || kind == "storeat" || kind == "deleteat" ||
      kind == "forwardat" || is_use_event())
    out << "," << value;
  if (kind == "storeat" || kind == "deleteat") out << "," << place;
  out << ")";
  return out.str();
}

std::vector<PolicyEvent> parse_trace(const std::string& source) {
  std::vector<PolicyEvent> out;
  std::istringstream in(source);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);

    auto paren = line.find('(');
    if (paren == std::string::npos || line.back() != ')')
      throw ParseError("expected event(timestamp,args...)", lineno, 1);
    PolicyEvent ev;
    ev.kind = line.substr(0, paren);
    std::string args_text = line.substr(paren + 1, line.size() - paren - 2);
    std::vector<std::string> args;
    std::istringstream split(args_text);
    std::string piece;
    while (std::getline(split, piece, ',')) args.push_back(piece);
    auto need = [&](size_t n) {
      if (args.size() != n)
        throw ParseError(ev.kind + " takes " + std::to_string(n) + " arguments", lineno, 1);
    };
    if (args.empty()) throw ParseError("event needs a timestamp", lineno, 1);
    ev.time_text = args[0];
    ev.time = parse_timestamp(args[0], lineno);
    if (ev.kind == "cconsentat" || ev.kind == "uconsentat" || ev.kind == "sconsentat") {
      need(3);
      ev.e_from = args[1];
      ev.data_type = args[2];
    } else if (ev.kind == "collectat") {
      need(4);
      ev.e_from = args[1];
      ev.data_type = args[2];
      ev.value = args[3];
    } else if (ev.kind == "storeat" || ev.kind == "deleteat") {
      need(5);
      ev.e_from = args[1];
      ev.data_type = args[2];
      ev.value = args[3];
      ev.place = args[4];
    } else if (ev.kind == "fwconsentat") {
      need(4);
      ev.e_to = args[1];
      ev.e_from = args[2];
      ev.data_type = args[3];
    } else if (ev.kind == "forwardat") {
      need(5);
      ev.e_to = args[1];
      ev.e_from = args[2];
      ev.data_type = args[3];
      ev.value = args[4];
    } else {
      // service-specific use event: (act, t, E_from, theta', theta, v)
      need(5);
      ev.e_from = args[1];
      ev.derived_type = args[2];
      ev.data_type = args[3];
      ev.value = args[4];
    }
    out.push_back(std::move(ev));
  }
  return out;
}

const std::optional<std::string>* ServiceState::slot(const std::string& entity,
                                                     const Slot& s) const {
  auto e = dstate.find(entity);
  if (e == dstate.end()) return nullptr;
  auto it = e->second.find(s);
  return it == e->second.end() ? nullptr : &it->second;
}

ServiceState apply_policy_event(const PolicyEvent& e, ServiceState state) {
  auto set = [&](const std::string& entity, const std::string& type,
                 std::optional<std::string> value) {
    state.dstate[entity][{type, e.e_from}] = std::move(value);
  };
  if (e.kind == "cconsentat") {
    set("sp", "cconsenttype", "consent");
  } else if (e.kind == "collectat") {
    set("sp", e.data_type, e.value);
  } else if (e.kind == "uconsentat") {
    set("sp", "uconsenttype", "consent");
  } else if (e.kind == "sconsentat") {
    set("sp", "sconsenttype", "consent");
  } else if (e.kind == "fwconsentat") {
    set("sp", "fwconsenttype", "consent");
  } else if (e.kind == "storeat") {
    state.dstate[e.place][{e.data_type, e.e_from}] = e.value;
  } else if (e.kind == "deleteat") {
    state.dstate[e.place][{e.data_type, e.e_from}] = std::nullopt;
    for (const char* slot : kConsentSlots)
      state.dstate[e.place][{slot, e.e_from}] = std::nullopt;
  } else if (e.kind == "forwardat") {
    state.dstate[e.e_to][{e.data_type, e.e_from}] = e.value;
  } else {
    // service-specific use event writes the derived type
    set("sp", e.derived_type, e.value);
  }
  state.tv = e.time_text;
  return state;
}

ServiceState run_trace(const std::vector<PolicyEvent>& trace, ServiceState state) {
  for (const auto& e : trace) state = apply_policy_event(e, std::move(state));
  return state;
}

namespace {

struct Auditor {
  const std::vector<PolicyEvent>& trace;
  const Policy& policy;
  std::vector<ComplianceViolation> out;

  bool type_matches(const std::string& event_type, const std::string& group) const {
    if (event_type == group) return true;
    const DataGroupDecl* g = policy.find_group(group);
    if (!g) return false;
    return std::find(g->member_types.begin(), g->member_types.end(), event_type) !=
           g->member_types.end();
  }

  // Was the datum (θ matching group, origin) deleted in (from, to]?
  bool deleted_between(const std::string& group, const std::string& e_from,
                       long long from, long long to) const {
    for (const auto& d : trace)
      if (d.kind == "deleteat" && d.e_from == e_from && type_matches(d.data_type, group) &&
          d.time > from && d.time <= to)
        return true;
    return false;
  }

  // A consent of `kind` covering the event at time t (no deletion between).
  bool consent_before(const std::string& kind, const std::string& group,
                      const PolicyEvent& at, const std::string& e_to = "") const {
    for (const auto& c : trace) {
      if (c.kind != kind || c.e_from != at.e_from) continue;
      if (!type_matches(c.data_type, group)) continue;
      if (!e_to.empty() && c.e_to != e_to) continue;
      if (c.time <= at.time && !deleted_between(group, at.e_from, c.time, at.time))
        return true;
    }
    return false;
  }

  void violation(const char* rule, const std::string& group, std::string detail,
                 const PolicyEvent& witness) {
    out.push_back({rule, group, std::move(detail), witness.str()});
  }

  bool purpose_listed(const std::vector<Purpose>& purposes, const PolicyEvent& use) const {
    for (const auto& p : purposes)
      if (p.action == use.kind && p.result_type == use.derived_type) return true;
    return false;
  }

  void audit_bundle(const std::string& group, const SubPolicyBundle& b) {
    for (const auto& e : trace) {
      if (e.kind == "collectat" && type_matches(e.data_type, group)) {
        if (b.collection && b.collection->consent_required &&
            !consent_before("cconsentat", group, e))
          violation("C1", group, "data collected without a prior collection consent", e);
        if (b.collection) {
          for (const auto& u : trace) {
            if (!u.is_use_event() || u.time < e.time) continue;
            if (u.e_from != e.e_from || u.data_type != e.data_type || u.value != e.value)
              continue;
            if (!purpose_listed(b.collection->purposes, u))
              violation("C2", group,
                        "collected data used for unlisted purpose " + u.kind + ":" +
                            u.derived_type,
                        u);
          }
        }
      }
      if (e.is_use_event() && type_matches(e.data_type, group)) {
        if (b.usage && b.usage->consent_required && !consent_before("uconsentat", group, e))
          violation("C3", group, "data used without a prior usage consent", e);
        if (b.usage && !purpose_listed(b.usage->purposes, e))
          violation("C4", group,
                    "data used for unlisted purpose " + e.kind + ":" + e.derived_type, e);
      }
      if (e.kind == "storeat" && type_matches(e.data_type, group)) {
        if (b.storage && b.storage->consent_required &&
            !consent_before("sconsentat", group, e))
          violation("C5", group, "data stored without a prior storage consent", e);
        if (b.storage &&
            std::find(b.storage->where.begin(), b.storage->where.end(), e.place) ==
                b.storage->where.end())
          violation("C6", group, "data stored at unlisted place " + e.place, e);
      }
      if (e.kind == "forwardat" && type_matches(e.data_type, group)) {
        if (b.transfer && b.transfer->consent_required &&
            !consent_before("fwconsentat", group, e, e.e_to))
          violation("C9", group, "data transferred without a prior transfer consent", e);
        if (b.transfer && std::find(b.transfer->to.begin(), b.transfer->to.end(),
                                    e.e_to) == b.transfer->to.end())
          violation("C10", group, "data transferred to unlisted entity " + e.e_to, e);
        if (b.transfer) {
          for (const auto& u : trace) {
            if (!u.is_use_event() || u.time < e.time) continue;
            if (u.e_from != e.e_from || u.data_type != e.data_type || u.value != e.value)
              continue;
            if (!purpose_listed(b.transfer->purposes, u))
              violation("C11", group,
                        "transferred data used for unlisted purpose " + u.kind + ":" +
                            u.derived_type,
                        u);
          }
        }
      }
    }
    if (b.deletion) audit_deletion(group, *b.deletion);
  }

  void audit_deletion(const std::string& group, const DeletionPolicy& del) {
    // per datum (θ, v, E_from) that has at least one deletion event; data
    // never deleted in the trace has no place set to compare yet
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& e : trace) {
      if (e.kind != "deleteat" || !type_matches(e.data_type, group)) continue;
      auto key = std::make_tuple(e.data_type, e.value, e.e_from);
      if (!seen.insert(key).second) continue;

      std::set<std::string> deleted_places;
      const PolicyEvent* witness = &e;
      for (const auto& d : trace) {
        if (d.kind != "deleteat" || d.data_type != e.data_type || d.value != e.value ||
            d.e_from != e.e_from)
          continue;
        deleted_places.insert(d.place);
        witness = &d;
      }
      std::set<std::string> required(del.fromwhere.begin(), del.fromwhere.end());
      if (deleted_places != required) {
        std::ostringstream detail;
        detail << "deletion places {";
        bool first = true;
        for (const auto& p : deleted_places) {
          detail << (first ? "" : ",") << p;
          first = false;
        }
        detail << "} do not equal fromwhere";
        violation("C7", group, detail.str(), *witness);
      }

      if (!del.nonspecific_delay) {
        // the latest collection not later than each deletion anchors the window
        for (const auto& d : trace) {
          if (d.kind != "deleteat" || d.data_type != e.data_type || d.value != e.value ||
              d.e_from != e.e_from)
            continue;
          const PolicyEvent* collect = nullptr;
          for (const auto& c : trace) {
            if (c.kind != "collectat" || c.data_type != e.data_type ||
                c.value != e.value || c.e_from != e.e_from)
              continue;
            if (c.time <= d.time && (!collect || c.time > collect->time)) collect = &c;
          }
          if (!collect) continue;
          long long deadline = collect->time + del.delay.minutes();
          if (d.time > deadline || d.time < collect->time)
            violation("C8", group,
                      "deletion at " + d.time_text + " misses the window of " +
                          del.delay.str() + " after collection at " + collect->time_text,
                      d);
        }
      }
    }
  }

  void run() {
    for (const auto& [group, bundle] : policy.bundles) audit_bundle(group, bundle);
  }
};

}  // namespace

std::vector<ComplianceViolation> check_trace_compliance(
    const std::vector<PolicyEvent>& trace, const Policy& policy) {
  Auditor a{trace, policy, {}};
  a.run();
  return a.out;
}

// ---- architecture events ----------------------------------------------------

const std::optional<std::string>* GlobalState::slot(const std::string& entity,
                                                    const std::string& key) const {
  auto e = locals.find(entity);
  if (e == locals.end()) return nullptr;
  auto it = e->second.find(key);
  return it == e->second.end() ? nullptr : &it->second;
}

std::optional<std::string> eval_term(const Term& t, const GlobalState& g,
                                     const std::string& entity) {
  switch (t.kind) {
    case TermKind::Simple: {
      const auto* bound = g.slot(entity, t.name);
      if (!bound || !bound->has_value()) return std::nullopt;
      return **bound;
    }
    case TermKind::Compound:
    case TermKind::Crypto:
    case TermKind::Special: {
      std::ostringstream out;
      out << (t.kind == TermKind::Compound ? t.name : t.str().substr(0, t.str().find('(')))
          << "(";
      for (size_t i = 0; i < t.args.size(); ++i) {
        auto v = eval_term(t.args[i], g, entity);
        if (!v) return std::nullopt;
        out << (i ? "," : "") << *v;
      }
      out << ")";
      return out.str();
    }
    default:
      return t.str();
  }
}

GlobalState apply_arch_event(const ArchEvent& e, GlobalState g) {
  const std::string key = e.slot.str();
  if (e.kind == "own" || e.kind == "receiveat" || e.kind == "storeat") {
    g.locals[e.entity][key] = e.value;
  } else if (e.kind == "createat" || e.kind == "calculateat") {
    g.locals[e.entity][key] = e.expr ? eval_term(*e.expr, g, e.entity) : std::nullopt;
  } else if (e.kind == "deletewithin") {
    g.locals[e.entity][key] = std::nullopt;
    for (const char* ctor : {"Cconsent", "Uconsent", "Sconsent", "Fwconsent"})
      g.locals[e.entity][std::string(ctor) + "(" + key + ")"] = std::nullopt;
  }
  g.tt = e.time;
  return g;
}

}  // namespace dpv
