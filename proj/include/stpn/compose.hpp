#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "net.hpp"

namespace stpn {

struct fusion_member {
  std::string net; // id of the source net
  std::string local;

  bool operator==(const fusion_member &) const = default;
};

struct fusion_group {
  std::string canonical;
  std::vector<fusion_member> members;
  std::optional<std::string> authoritative; // net whose initial marking wins

  bool operator==(const fusion_group &) const = default;
};

enum class prefix_policy { net_id, none };

struct fusion_map {
  std::vector<fusion_group> places;
  std::vector<fusion_group> resources;
  prefix_policy prefix = prefix_policy::net_id;
  std::string separator = ".";

  bool operator==(const fusion_map &) const = default;
};

struct named_net {
  std::string id;
  stpn::net model;
};

class compose_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string join(const std::vector<std::string> &parts, const std::string &sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i)
    out += (i ? sep : "") + parts[i];
  return out;
}

template <class Element>
const Element *find_element(const std::vector<Element> &items, const std::string &id) {
  auto it = std::find_if(items.begin(), items.end(), [&](const Element &e) { return e.id == id; });
  return it == items.end() ? nullptr : &*it;
}

} // namespace detail

// Disjoint union of the nets with each fusion group collapsed onto its
// canonical id. Unfused ids are prefixed with their net id. Every merged
// element records its origin in the `source_net` and `source_id` tags.
// Goals are conjoined; the earliest deadline wins. The policy of the first
// net is kept.
[[nodiscard]] inline net merge_nets(std::span<const named_net> nets, const fusion_map &fusion) {
  std::map<std::string, const named_net *> by_id;
  for (const auto &n : nets) {
    if (n.id.empty())
      throw compose_error("merge: net with empty id");
    if (!by_id.emplace(n.id, &n).second)
      throw compose_error("merge: duplicate net id '" + n.id + "'");
    const auto report = validate_net(n.model);
    if (!report.valid())
      throw compose_error("merge: net '" + n.id + "' is not valid");
  }

  // (net, local) -> canonical for places and resources.
  std::map<std::pair<std::string, std::string>, std::string> place_alias, resource_alias;
  auto index_groups = [&](const std::vector<fusion_group> &groups, bool places,
                          std::map<std::pair<std::string, std::string>, std::string> &alias) {
    const char *kind = places ? "place" : "resource";
    std::set<std::string> canonicals;
    for (const auto &g : groups) {
      if (g.canonical.empty())
        throw compose_error(std::string("fusion: ") + kind + " group without canonical id");
      if (!canonicals.insert(g.canonical).second)
        throw compose_error("fusion: canonical id '" + g.canonical + "' used twice");
      if (g.members.empty())
        throw compose_error("fusion: group '" + g.canonical + "' has no members");
      for (const auto &m : g.members) {
        auto it = by_id.find(m.net);
        if (it == by_id.end())
          throw compose_error("fusion: group '" + g.canonical + "' references unknown net '" + m.net + "'");
        const net &src = it->second->model;
        const bool exists = places ? src.place_index(m.local).has_value()
                                   : src.resource_index(m.local).has_value();
        if (!exists)
          throw compose_error("fusion: group '" + g.canonical + "' references unknown " + kind + " '" +
                              m.net + ":" + m.local + "'");
        if (!alias.emplace(std::pair{m.net, m.local}, g.canonical).second)
          throw compose_error("fusion: " + std::string(kind) + " '" + m.net + ":" + m.local +
                              "' appears in more than one group");
      }
      if (g.authoritative &&
          std::none_of(g.members.begin(), g.members.end(),
                       [&](const fusion_member &m) { return m.net == *g.authoritative; }))
        throw compose_error("fusion: authoritative net '" + *g.authoritative + "' of group '" + g.canonical +
                            "' is not a member");
    }
  };
  index_groups(fusion.places, true, place_alias);
  index_groups(fusion.resources, false, resource_alias);

  auto prefixed = [&](const std::string &net_id, const std::string &local) {
    return fusion.prefix == prefix_policy::net_id ? net_id + fusion.separator + local : local;
  };
  auto place_name = [&](const std::string &net_id, const std::string &local) {
    auto it = place_alias.find({net_id, local});
    return it != place_alias.end() ? it->second : prefixed(net_id, local);
  };
  auto resource_name = [&](const std::string &net_id, const std::string &local) {
    auto it = resource_alias.find({net_id, local});
    return it != resource_alias.end() ? it->second : prefixed(net_id, local);
  };

  // Resolve the representative element of each group.
  auto representative = [&](const fusion_group &g, auto lookup) {
    const fusion_member *chosen = &g.members.front();
    if (g.authoritative)
      for (const auto &m : g.members)
        if (m.net == *g.authoritative) {
          chosen = &m;
          break;
        }
    return lookup(*chosen);
  };

  net out;
  out.policy = nets.empty() ? conflict_policy::fixed_priority : nets.front().model.policy;
  std::set<std::string> taken;
  auto claim = [&](const std::string &id) {
    if (!taken.insert(id).second)
      throw compose_error("merge: id collision on '" + id + "'");
  };

  for (const auto &g : fusion.places) {
    auto lookup = [&](const fusion_member &m) {
      return *detail::find_element(by_id.at(m.net)->model.places, m.local);
    };
    if (!g.authoritative) {
      const auto first = lookup(g.members.front()).initial_tokens;
      for (const auto &m : g.members)
        if (lookup(m).initial_tokens != first)
          throw compose_error("fusion: place group '" + g.canonical +
                              "' has conflicting initial tokens and no authoritative net");
    }
    place p = representative(g, lookup);
    p.id = g.canonical;
    std::vector<std::string> nets_of, ids_of;
    for (const auto &m : g.members) {
      nets_of.push_back(m.net);
      ids_of.push_back(m.local);
    }
    p.tags["source_net"] = detail::join(nets_of, ",");
    p.tags["source_id"] = detail::join(ids_of, ",");
    claim(p.id);
    out.places.push_back(std::move(p));
  }
  for (const auto &g : fusion.resources) {
    auto lookup = [&](const fusion_member &m) {
      return *detail::find_element(by_id.at(m.net)->model.resources, m.local);
    };
    if (!g.authoritative) {
      const auto &first = lookup(g.members.front());
      for (const auto &m : g.members) {
        const auto &r = lookup(m);
        if (r.initial_level != first.initial_level || r.min_level != first.min_level ||
            r.max_level != first.max_level)
          throw compose_error("fusion: resource group '" + g.canonical +
                              "' has conflicting levels and no authoritative net");
      }
    }
    resource r = representative(g, lookup);
    r.id = g.canonical;
    std::vector<std::string> nets_of, ids_of;
    for (const auto &m : g.members) {
      nets_of.push_back(m.net);
      ids_of.push_back(m.local);
    }
    r.tags["source_net"] = detail::join(nets_of, ",");
    r.tags["source_id"] = detail::join(ids_of, ",");
    claim(r.id);
    out.resources.push_back(std::move(r));
  }

  std::optional<goal_predicate> goal;
  std::vector<std::string> ids;
  for (const auto &nn : nets) {
    ids.push_back(nn.id);
    const net &src = nn.model;
    for (const auto &p : src.places) {
      if (place_alias.count({nn.id, p.id}))
        continue;
      place q = p;
      q.id = prefixed(nn.id, p.id);
      q.tags["source_net"] = nn.id;
      q.tags["source_id"] = p.id;
      claim(q.id);
      out.places.push_back(std::move(q));
    }
    for (const auto &r : src.resources) {
      if (resource_alias.count({nn.id, r.id}))
        continue;
      resource q = r;
      q.id = prefixed(nn.id, r.id);
      q.tags["source_net"] = nn.id;
      q.tags["source_id"] = r.id;
      claim(q.id);
      out.resources.push_back(std::move(q));
    }
    for (const auto &t : src.transitions) {
      transition u = t;
      u.id = prefixed(nn.id, t.id);
      for (auto &a : u.inputs)
        a.place = place_name(nn.id, a.place);
      for (auto &a : u.outputs)
        a.place = place_name(nn.id, a.place);
      for (auto &p : u.inhibitors)
        p = place_name(nn.id, p);
      for (auto &r : u.rates)
        r.resource = resource_name(nn.id, r.resource);
      u.tags["source_net"] = nn.id;
      u.tags["source_id"] = t.id;
      claim(u.id);
      out.transitions.push_back(std::move(u));
    }
    if (src.goal) {
      if (!goal)
        goal.emplace();
      for (auto c : src.goal->tokens) {
        c.place = place_name(nn.id, c.place);
        goal->tokens.push_back(std::move(c));
      }
      for (auto c : src.goal->resources) {
        c.resource = resource_name(nn.id, c.resource);
        goal->resources.push_back(std::move(c));
      }
      if (src.goal->deadline)
        goal->deadline = goal->deadline ? std::min(*goal->deadline, *src.goal->deadline) : *src.goal->deadline;
    }
    for (const auto &[k, v] : src.metadata)
      if (k != "id")
        out.metadata[nn.id + "." + k] = v;
  }
  out.goal = std::move(goal);
  out.metadata["id"] = detail::join(ids, "+");
  out.metadata["merged_from"] = detail::join(ids, ",");

  const auto report = validate_net(out);
  if (!report.valid())
    throw compose_error("merge: result is not valid: " + report.violations.front().message);
  return out;
}

//==============================================================================

struct level_group {
  std::string level;
  std::vector<std::string> places;
  std::vector<std::string> resources;
  std::vector<std::string> transitions;

  [[nodiscard]] std::size_t size() const { return places.size() + resources.size() + transitions.size(); }
};

// Elements grouped by their `level` tag: mission, system, subsystem first,
// then other levels alphabetically, then "untagged". Ids sorted per group.
[[nodiscard]] inline std::vector<level_group> levels_report(const net &n) {
  std::map<std::string, level_group> groups;
  auto level_of = [](const tag_map &tags) {
    auto it = tags.find("level");
    return it == tags.end() || it->second.empty() ? std::string("untagged") : it->second;
  };
  for (const auto &p : n.places)
    groups[level_of(p.tags)].places.push_back(p.id);
  for (const auto &r : n.resources)
    groups[level_of(r.tags)].resources.push_back(r.id);
  for (const auto &t : n.transitions)
    groups[level_of(t.tags)].transitions.push_back(t.id);

  auto rank = [](const std::string &level) {
    if (level == "mission")
      return 0;
    if (level == "system")
      return 1;
    if (level == "subsystem")
      return 2;
    if (level == "untagged")
      return 4;
    return 3;
  };
  std::vector<level_group> out;
  for (auto &[level, g] : groups) {
    g.level = level;
    std::sort(g.places.begin(), g.places.end());
    std::sort(g.resources.begin(), g.resources.end());
    std::sort(g.transitions.begin(), g.transitions.end());
    out.push_back(std::move(g));
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](const level_group &a, const level_group &b) { return rank(a.level) < rank(b.level); });
  return out;
}

} // namespace stpn
