#include "dpv/policy.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace dpv {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const SubPolicyBundle* Policy::find_bundle(const std::string& group) const {
  for (const auto& [name, bundle] : bundles)
    if (name == group) return &bundle;
  return nullptr;
}

const DataGroupDecl* Policy::find_group(const std::string& group) const {
  for (const auto& g : groups)
    if (g.group_name == group) return &g;
  return nullptr;
}

bool Policy::is_entity(const std::string& name) const {
  for (const auto& e : entities)
    if (e.short_name == name) return true;
  return false;
}

bool is_reserved_place(const std::string& name) {
  return name == "mainstorage" || name == "backupstorage";
}

std::string render_policy(const Policy& p) {
  std::ostringstream out;
  for (const auto& e : p.entities) {
    if (e.short_name == "sp" && e.description == "service provider") continue;
    out << "ENTITY " << e.short_name << " \"" << e.description << "\"\n";
  }
  for (const auto& g : p.groups) {
    out << "DATAGROUP " << g.group_name << " UNIQUE=" << (g.is_unique ? "Y" : "N")
        << " {";
    for (const auto& m : g.member_types) out << " " << m;
    out << " }\n";
  }
  auto render_purposes = [&](const std::vector<Purpose>& ps) {
    std::ostringstream s;
    for (size_t i = 0; i < ps.size(); ++i)
      s << (i ? ", " : "") << ps[i].action << ":" << ps[i].result_type;
    return s.str();
  };
  auto render_list = [&](const std::vector<std::string>& xs) {
    std::ostringstream s;
    for (size_t i = 0; i < xs.size(); ++i) s << (i ? ", " : "") << xs[i];
    return s.str();
  };
  for (const auto& [group, b] : p.bundles) {
    out << "POLICY " << group << " {\n";
    if (b.collection) {
      out << "  COLLECTION { consent=" << (b.collection->consent_required ? "Y" : "N");
      if (!b.collection->purposes.empty())
        out << " ; purposes = " << render_purposes(b.collection->purposes);
      out << " }\n";
    }
    if (b.usage) {
      out << "  USAGE { consent=" << (b.usage->consent_required ? "Y" : "N");
      if (!b.usage->purposes.empty())
        out << " ; purposes = " << render_purposes(b.usage->purposes);
      out << " }\n";
    }
    if (b.storage) {
      out << "  STORAGE { consent=" << (b.storage->consent_required ? "Y" : "N");
      if (!b.storage->where.empty()) out << " ; where = " << render_list(b.storage->where);
      out << " }\n";
    }
    if (b.deletion) {
      out << "  DELETION { fromwhere = " << render_list(b.deletion->fromwhere)
          << " ; delay = "
          << (b.deletion->nonspecific_delay ? std::string("tt") : b.deletion->delay.str())
          << " }\n";
    }
    if (b.transfer) {
      out << "  TRANSFER { consent=" << (b.transfer->consent_required ? "Y" : "N");
      if (!b.transfer->to.empty()) out << " ; to = " << render_list(b.transfer->to);
      if (!b.transfer->purposes.empty())
        out << " ; purposes = " << render_purposes(b.transfer->purposes);
      out << " }\n";
    }
    if (b.has) {
      out << "  HAS {";
      for (const auto& e : *b.has) out << " " << e;
      out << " }\n";
    }
    auto render_links = [&](const char* kw, const std::vector<LinkRule>& rules) {
      out << "  " << kw << " {";
      for (size_t i = 0; i < rules.size(); ++i) {
        out << (i ? " ; " : " ") << rules[i].entity << " : " << rules[i].other_type
            << " UNIQUE=" << (rules[i].unique_flag ? "Y" : "N");
      }
      out << " }\n";
    };
    if (b.link_permit) render_links("LINKPERMIT", *b.link_permit);
    if (b.link_forbid) render_links("LINKFORBID", *b.link_forbid);
    out << "}\n";
  }
  return out.str();
}

std::vector<Conflict> check_well_formed_policy(const Policy& p) {
  std::vector<Conflict> out;
  for (const auto& [group, b] : p.bundles) {
    // collection implies possession by sp
    if (b.collection && b.has && !contains(*b.has, "sp")) {
      out.push_back({"collection-vs-has", group,
                     "collection sub-policy lets sp collect " + group +
                         " but sp is not in the possession list"});
    }
    // storage places imply possession by sp (service storage) or the place
    if (b.storage && b.has) {
      for (const auto& place : b.storage->where) {
        std::string possessor = is_reserved_place(place) ? "sp" : place;
        if (!is_reserved_place(place) && !p.is_entity(place)) continue;
        if (!contains(*b.has, possessor)) {
          out.push_back({"storage-vs-has", group,
                         "storage at " + place + " implies possession by " + possessor +
                             " which is not in the possession list"});
        }
      }
    }
    // contradictory connection stances on the same (entity, other type)
    if (b.link_permit && b.link_forbid) {
      for (const auto& permit : *b.link_permit) {
        for (const auto& forbid : *b.link_forbid) {
          if (permit.entity != forbid.entity || permit.other_type != forbid.other_type)
            continue;
          if (!forbid.unique_flag || permit.unique_flag) {
            out.push_back({"permit-vs-forbid", group,
                           permit.entity + " : " + group + "<->" + permit.other_type +
                               " is both permitted and forbidden"});
          }
        }
      }
    }
    // deletion can only remove data from places it may be stored in
    if (b.deletion && b.storage) {
      for (const auto& place : b.deletion->fromwhere) {
        if (!contains(b.storage->where, place)) {
          out.push_back({"deletion-vs-storage", group,
                         "deletion place " + place + " is not a storage place"});
        }
      }
    }
  }
  return out;
}

}  // namespace dpv
