#include <cctype>
#include <set>

#include "dpv/policy.hpp"

namespace dpv {

namespace {

struct Token {
  enum Type { Word, Punct, Quoted, End } type = End;
  std::string text;
  int line = 0;
  int col = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
        continue;
      }
      break;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (c == '"') {
      size_t end = src_.find('"', pos_ + 1);
      if (end == std::string::npos) throw ParseError("unterminated string", line_, col_);
      tok_.type = Token::Quoted;
      tok_.text = src_.substr(pos_ + 1, end - pos_ - 1);
      col_ += static_cast<int>(end - pos_ + 1);
      pos_ = end + 1;
      return;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.type = Token::Word;
      tok_.text = src_.substr(start, pos_ - start);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    tok_.type = Token::Punct;
    tok_.text = std::string(1, c);
    ++pos_;
    ++col_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class PolicyParser {
 public:
  explicit PolicyParser(const std::string& src) : lex_(src) {
    policy_.entities.push_back({"sp", "service provider"});
  }

  Policy run() {
    while (lex_.peek().type != Token::End) {
      Token t = expect_word();
      if (t.text == "ENTITY")
        parse_entity();
      else if (t.text == "DATAGROUP")
        parse_group();
      else if (t.text == "POLICY")
        parse_bundle();
      else
        throw ParseError("expected ENTITY, DATAGROUP or POLICY, got '" + t.text + "'",
                         t.line, t.col);
    }
    return std::move(policy_);
  }

 private:
  Token expect_word() {
    Token t = lex_.take();
    if (t.type != Token::Word)
      throw ParseError("expected identifier, got '" + t.text + "'", t.line, t.col);
    return t;
  }

  void expect_punct(const std::string& p) {
    Token t = lex_.take();
    if (t.type != Token::Punct || t.text != p)
      throw ParseError("expected '" + p + "', got '" + t.text + "'", t.line, t.col);
  }

  bool eat_punct(const std::string& p) {
    if (lex_.peek().type == Token::Punct && lex_.peek().text == p) {
      lex_.take();
      return true;
    }
    return false;
  }

  bool consent_flag(const Token& at) {
    Token v = expect_word();
    if (v.text == "Y") return true;
    if (v.text == "N") return false;
    throw ParseError("consent flag must be Y or N", at.line, at.col);
  }

  void parse_entity() {
    Token name = expect_word();
    Token desc = lex_.take();
    if (desc.type != Token::Quoted)
      throw ParseError("entity description must be quoted", desc.line, desc.col);
    for (auto& e : policy_.entities) {
      if (e.short_name == name.text) {
        if (name.text == "sp") {
          e.description = desc.text;  // sp is predeclared; allow a description
          return;
        }
        throw ParseError("duplicate entity '" + name.text + "'", name.line, name.col);
      }
    }
    policy_.entities.push_back({name.text, desc.text});
  }

  void parse_group() {
    Token name = expect_word();
    if (policy_.find_group(name.text))
      throw ParseError("duplicate data group '" + name.text + "'", name.line, name.col);
    Token uniq = expect_word();
    if (uniq.text != "UNIQUE")
      throw ParseError("expected UNIQUE=<Y|N>", uniq.line, uniq.col);
    expect_punct("=");
    DataGroupDecl g;
    g.group_name = name.text;
    g.is_unique = consent_flag(uniq);
    expect_punct("{");
    while (!eat_punct("}")) g.member_types.push_back(expect_word().text);
    policy_.groups.push_back(std::move(g));
  }

  std::vector<Purpose> parse_purposes() {
    std::vector<Purpose> out;
    do {
      Token act = expect_word();
      expect_punct(":");
      Token type = expect_word();
      out.push_back({act.text, type.text});
    } while (eat_punct(","));
    return out;
  }

  std::vector<std::string> parse_name_list(bool entities_only) {
    std::vector<std::string> out;
    do {
      Token t = expect_word();
      if (entities_only && !policy_.is_entity(t.text))
        throw ParseError("undeclared entity '" + t.text + "'", t.line, t.col);
      out.push_back(t.text);
    } while (eat_punct(","));
    return out;
  }

  TimeSpan parse_tvalue(bool* nonspecific) {
    Token t = expect_word();
    if (t.text == "tt") {
      *nonspecific = true;
      return {};
    }
    *nonspecific = false;
    TimeSpan span;
    static const std::set<std::string> units = {"y", "mo", "w", "d", "h", "m"};
    auto add_part = [&](const Token& tok) {
      size_t i = 0;
      while (i < tok.text.size() && std::isdigit(static_cast<unsigned char>(tok.text[i])))
        ++i;
      long count = i == 0 ? 1 : std::stol(tok.text.substr(0, i));
      std::string unit = tok.text.substr(i);
      if (!units.count(unit) || count <= 0)
        throw ParseError("bad time value '" + tok.text + "'", tok.line, tok.col);
      span.parts.push_back({count, unit});
    };
    add_part(t);
    while (eat_punct("+")) add_part(expect_word());
    return span;
  }

  ConsentPurposes parse_consent_purposes(const Token& at) {
    ConsentPurposes cp;
    expect_punct("{");
    while (!eat_punct("}")) {
      if (eat_punct(";")) continue;
      Token key = expect_word();
      if (key.text == "consent") {
        expect_punct("=");
        cp.consent_required = consent_flag(at);
      } else if (key.text == "purposes") {
        expect_punct("=");
        cp.purposes = parse_purposes();
      } else {
        throw ParseError("unknown field '" + key.text + "'", key.line, key.col);
      }
    }
    return cp;
  }

  void parse_bundle() {
    Token group = expect_word();
    if (!policy_.find_group(group.text))
      throw ParseError("undeclared data group '" + group.text + "'", group.line, group.col);
    if (policy_.find_bundle(group.text))
      throw ParseError("duplicate policy bundle for '" + group.text + "'", group.line,
                       group.col);
    SubPolicyBundle b;
    expect_punct("{");
    while (!eat_punct("}")) {
      Token section = expect_word();
      if (section.text == "COLLECTION") {
        b.collection = parse_consent_purposes(section);
      } else if (section.text == "USAGE") {
        b.usage = parse_consent_purposes(section);
      } else if (section.text == "STORAGE") {
        StoragePolicy sp;
        expect_punct("{");
        while (!eat_punct("}")) {
          if (eat_punct(";")) continue;
          Token key = expect_word();
          expect_punct("=");
          if (key.text == "consent")
            sp.consent_required = consent_flag(section);
          else if (key.text == "where")
            sp.where = parse_name_list(false);
          else
            throw ParseError("unknown field '" + key.text + "'", key.line, key.col);
        }
        b.storage = std::move(sp);
      } else if (section.text == "DELETION") {
        DeletionPolicy del;
        expect_punct("{");
        while (!eat_punct("}")) {
          if (eat_punct(";")) continue;
          Token key = expect_word();
          expect_punct("=");
          if (key.text == "fromwhere")
            del.fromwhere = parse_name_list(false);
          else if (key.text == "delay")
            del.delay = parse_tvalue(&del.nonspecific_delay);
          else
            throw ParseError("unknown field '" + key.text + "'", key.line, key.col);
        }
        b.deletion = std::move(del);
      } else if (section.text == "TRANSFER") {
        TransferPolicy tr;
        expect_punct("{");
        while (!eat_punct("}")) {
          if (eat_punct(";")) continue;
          Token key = expect_word();
          expect_punct("=");
          if (key.text == "consent")
            tr.consent_required = consent_flag(section);
          else if (key.text == "to")
            tr.to = parse_name_list(true);
          else if (key.text == "purposes")
            tr.purposes = parse_purposes();
          else
            throw ParseError("unknown field '" + key.text + "'", key.line, key.col);
        }
        b.transfer = std::move(tr);
      } else if (section.text == "HAS") {
        std::vector<std::string> has;
        expect_punct("{");
        while (!eat_punct("}")) {
          Token t = expect_word();
          if (!policy_.is_entity(t.text))
            throw ParseError("undeclared entity '" + t.text + "'", t.line, t.col);
          has.push_back(t.text);
        }
        b.has = std::move(has);
      } else if (section.text == "LINKPERMIT" || section.text == "LINKFORBID") {
        std::vector<LinkRule> rules;
        expect_punct("{");
        while (!eat_punct("}")) {
          if (eat_punct(";")) continue;
          Token ent = expect_word();
          if (!policy_.is_entity(ent.text))
            throw ParseError("undeclared entity '" + ent.text + "'", ent.line, ent.col);
          expect_punct(":");
          Token other = expect_word();
          if (!policy_.find_group(other.text))
            throw ParseError("undeclared data group '" + other.text + "'", other.line,
                             other.col);
          Token uniq = expect_word();
          if (uniq.text != "UNIQUE")
            throw ParseError("expected UNIQUE=<Y|N>", uniq.line, uniq.col);
          expect_punct("=");
          rules.push_back({ent.text, other.text, consent_flag(uniq)});
        }
        if (section.text == "LINKPERMIT")
          b.link_permit = std::move(rules);
        else
          b.link_forbid = std::move(rules);
      } else {
        throw ParseError("unknown sub-policy '" + section.text + "'", section.line,
                         section.col);
      }
    }
    policy_.bundles.push_back({group.text, std::move(b)});
  }

  Lexer lex_;
  Policy policy_;
};

}  // namespace

Policy parse_policy(const std::string& source) { return PolicyParser(source).run(); }

}  // namespace dpv
