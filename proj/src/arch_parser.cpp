#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "dpv/architecture.hpp"

namespace dpv {

namespace {

bool all_lower(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::islower(c) || std::isdigit(c) || c == '_';
  });
}

// Character-level parser for one action statement.  The statement syntax
// forbids spaces, so the whole line is consumed token by token.
class LineParser {
 public:
  LineParser(const std::string& text, int line, int nesting_bound,
             std::vector<std::string>& warnings)
      : text_(text), line_(line), nesting_bound_(nesting_bound), warnings_(warnings) {}

  Action parse_action(const std::string& keyword) {
    static const std::map<std::string, ActionKind> kinds = {
        {"OWN", ActionKind::Own},
        {"RECEIVE", ActionKind::Receive},
        {"RECEIVEAT", ActionKind::ReceiveAt},
        {"CREATE", ActionKind::Create},
        {"CREATEAT", ActionKind::CreateAt},
        {"CALCULATE", ActionKind::Calculate},
        {"CALCULATEAT", ActionKind::CalculateAt},
        {"STORE", ActionKind::Store},
        {"STOREAT", ActionKind::StoreAt},
        {"DELETE", ActionKind::Delete},
        {"DELETEWITHIN", ActionKind::DeleteWithin},
    };
    auto it = kinds.find(keyword);
    if (it == kinds.end()) fail("unknown action keyword '" + keyword + "'");
    Action act;
    act.kind = it->second;
    expect('(');
    std::vector<Term> args;
    args.push_back(parse_term());
    while (eat(',')) args.push_back(parse_term());
    expect(')');
    if (pos_ != text_.size()) fail("trailing characters after action");
    assemble(act, std::move(args));
    check_payload(act);
    return act;
  }

  std::pair<std::string, std::vector<std::string>> parse_access() {
    expect('(');
    std::string key = ident();
    expect(',');
    expect('{');
    std::vector<std::string> members;
    members.push_back(ident());
    while (eat(',')) members.push_back(ident());
    expect('}');
    expect(')');
    if (pos_ != text_.size()) fail("trailing characters after HASACCESSTO");
    return {key, members};
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
  }

  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }

  TimeSpan parse_tvalue(const std::string& first) {
    TimeSpan span;
    static const std::set<std::string> units = {"y", "mo", "w", "d", "h", "m"};
    auto add = [&](const std::string& word) {
      size_t i = 0;
      while (i < word.size() && std::isdigit(static_cast<unsigned char>(word[i]))) ++i;
      long count = i == 0 ? 1 : std::stol(word.substr(0, i));
      std::string unit = word.substr(i);
      if (!units.count(unit) || count <= 0) fail("bad time value '" + word + "'");
      span.parts.push_back({count, unit});
    };
    add(first);
    while (eat('+')) add(ident());
    return span;
  }

  Term parse_term() {
    std::string name = ident();
    bool applied = pos_ < text_.size() && text_[pos_] == '(';
    if (!applied) {
      if (name == "ds") return ds();
      if (!all_lower(name)) fail("simple types and components are lowercase: '" + name + "'");
      return simple(name);
    }
    expect('(');

    if (name == "Time") {
      std::string inner = ident();
      Term value = inner == "t" ? nonspecific_time() : time_value(parse_tvalue(inner));
      expect(')');
      return special(SpecialKind::Time, {value});
    }
    if (name == "P") {
      std::string inner = ident();
      if (inner != "ds") fail("P() takes the reserved identity ds");
      expect(')');
      return special(SpecialKind::P, {ds()});
    }

    std::vector<Term> args;
    args.push_back(parse_term());
    while (eat(',')) args.push_back(parse_term());
    expect(')');

    static const std::map<std::string, CryptoKind> cryptos = {
        {"Senc", CryptoKind::Senc}, {"Aenc", CryptoKind::Aenc}, {"Mac", CryptoKind::Mac},
        {"Hash", CryptoKind::Hash}, {"Sk", CryptoKind::Sk}};
    if (auto it = cryptos.find(name); it != cryptos.end()) {
      size_t want = (it->second == CryptoKind::Hash || it->second == CryptoKind::Sk) ? 1 : 2;
      if (args.size() != want) fail(name + " takes " + std::to_string(want) + " argument(s)");
      return crypto(it->second, std::move(args));
    }

    static const std::map<std::string, SpecialKind> consents = {
        {"Cconsent", SpecialKind::Cconsent},
        {"Uconsent", SpecialKind::Uconsent},
        {"Sconsent", SpecialKind::Sconsent},
        {"Fwconsent", SpecialKind::Fwconsent}};
    if (auto it = consents.find(name); it != consents.end()) {
      bool fw = it->second == SpecialKind::Fwconsent;
      // Cconsent(data[,origin]) / Fwconsent(data[,origin],to); the origin
      // defaults to the anonymous entity.
      if (fw) {
        if (args.size() == 2) return special(it->second, {args[0], anon_entity(), to_entity(args[1])});
        if (args.size() == 3) return special(it->second, {args[0], to_entity(args[1]), to_entity(args[2])});
        fail("Fwconsent takes (data,component) or (data,origin,component)");
      }
      if (args.size() == 1) return special(it->second, {args[0], anon_entity()});
      if (args.size() == 2) return special(it->second, {args[0], to_entity(args[1])});
      fail(name + " takes (data) or (data,origin)");
    }

    if (name == "Meta") {
      if (args.size() != 1) fail("Meta takes one argument");
      return special(SpecialKind::Meta, {args[0]});
    }

    if (!std::isupper(static_cast<unsigned char>(name[0])))
      fail("compound constructors start with a capital letter: '" + name + "'");
    // Meta is always the last argument of its record
    for (size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i].kind == TermKind::Special && args[i].special == SpecialKind::Meta)
        fail("Meta() must be the last argument of " + name);
    }
    return compound(name, std::move(args));
  }

  static Term to_entity(const Term& t) {
    if (t.kind == TermKind::Simple) return entity(t.name);
    return t;
  }

  static bool is_time_term(const Term& t) {
    return t.kind == TermKind::Special && t.special == SpecialKind::Time;
  }

  void assemble(Action& act, std::vector<Term> args) {
    // STORE(sp,mainstorage,Data[,...]) is accepted with the leading sp dropped.
    bool placed = act.kind == ActionKind::Store || act.kind == ActionKind::StoreAt ||
                  act.kind == ActionKind::Delete || act.kind == ActionKind::DeleteWithin;
    if (placed && args.size() >= 3 && args[0].kind == TermKind::Simple &&
        args[0].name == "sp" && args[1].kind == TermKind::Simple &&
        is_reserved_place_name(args[1].name)) {
      args.erase(args.begin());
    }
    if (args.size() < 2) fail("action needs a component and a data term");
    act.subject = to_entity(args[0]);
    if (act.subject.kind != TermKind::Entity) fail("first argument must be a component");
    act.payload = args[1];

    bool timed = act.kind == ActionKind::ReceiveAt || act.kind == ActionKind::CreateAt ||
                 act.kind == ActionKind::CalculateAt || act.kind == ActionKind::StoreAt ||
                 act.kind == ActionKind::DeleteWithin;
    bool takes_origin = act.kind == ActionKind::Receive || act.kind == ActionKind::ReceiveAt ||
                        act.kind == ActionKind::Store || act.kind == ActionKind::StoreAt ||
                        act.kind == ActionKind::DeleteWithin;
    size_t next = 2;
    if (takes_origin && next < args.size() && !is_time_term(args[next])) {
      act.origin = to_entity(args[next]);
      if (act.origin.kind != TermKind::Entity) fail("origin must be a component");
      ++next;
    }
    // A consent payload carries its own origin slot; keep it in sync with
    // the action's origin so either spelling matches the same rules.
    if (act.payload.kind == TermKind::Special &&
        (act.payload.special == SpecialKind::Cconsent ||
         act.payload.special == SpecialKind::Uconsent ||
         act.payload.special == SpecialKind::Sconsent ||
         act.payload.special == SpecialKind::Fwconsent)) {
      Term& consent_origin = act.payload.args[1];
      if (is_anon(consent_origin) && !is_anon(act.origin)) consent_origin = act.origin;
      if (is_anon(act.origin) && !is_anon(consent_origin)) act.origin = consent_origin;
    }
    if (timed) {
      if (next >= args.size() || !is_time_term(args[next])) fail("missing Time() argument");
      act.time = args[next];
      ++next;
      const Term& inner = act.time->args[0];
      if (act.kind == ActionKind::DeleteWithin) {
        if (inner.kind != TermKind::TimeValue)
          fail("DELETEWITHIN takes a concrete Time(tvalue)");
      } else if (inner.kind != TermKind::NonSpecificTime) {
        fail(std::string(action_kind_name(act.kind)) + " takes the non-specific Time(t)");
      }
    }
    if (next != args.size()) fail("too many arguments");

    int depth = nesting_depth(act.payload);
    if (depth > nesting_bound_) {
      std::ostringstream w;
      w << "line " << line_ << ": payload nests " << depth
        << " constructor layers (supported: " << nesting_bound_ << ")";
      warnings_.push_back(w.str());
    }
  }

  void check_payload(const Action& act) {
    bool receiving = act.kind == ActionKind::Receive || act.kind == ActionKind::ReceiveAt;
    bool consent = act.payload.kind == TermKind::Special &&
                   (act.payload.special == SpecialKind::Cconsent ||
                    act.payload.special == SpecialKind::Uconsent ||
                    act.payload.special == SpecialKind::Sconsent ||
                    act.payload.special == SpecialKind::Fwconsent);
    if (consent && !receiving) fail("consents can only appear in RECEIVE/RECEIVEAT");
    if (act.payload.kind == TermKind::Special &&
        act.payload.special == SpecialKind::Time)
      fail("Time() is not a data term");
  }

  static bool is_reserved_place_name(const std::string& s) {
    return s == "mainstorage" || s == "backupstorage";
  }

  static int nesting_depth(const Term& t) {
    int inner = 0;
    for (const auto& a : t.args) inner = std::max(inner, nesting_depth(a));
    bool ctor = t.kind == TermKind::Compound || t.kind == TermKind::Crypto;
    return inner + (ctor ? 1 : 0);
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_;
  int nesting_bound_;
  std::vector<std::string>& warnings_;
};

}  // namespace

Architecture parse_architecture(const std::string& source, const ArchParseOptions& options) {
  Architecture arch;
  std::istringstream in(source);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    // trim
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    if (auto sp = line.find_first_of(" \t"); sp != std::string::npos)
      throw ParseError("no space character is allowed inside a statement", lineno,
                       static_cast<int>(sp) + 1);

    auto paren = line.find('(');
    if (paren == std::string::npos)
      throw ParseError("expected ACTION(...) or HASACCESSTO(...)", lineno, 1);
    std::string keyword = line.substr(0, paren);
    std::string rest = line.substr(paren);

    LineParser parser(rest, lineno, options.nesting_bound, arch.warnings);
    if (keyword == "HASACCESSTO") {
      arch.has_access_to.push_back(parser.parse_access());
      continue;
    }
    Action act = parser.parse_action(keyword);
    if (std::find(arch.actions.begin(), arch.actions.end(), act) == arch.actions.end())
      arch.actions.push_back(std::move(act));
  }
  return arch;
}

}  // namespace dpv
