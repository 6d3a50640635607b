#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "availability.hpp"
#include "compose.hpp"
#include "montecarlo.hpp"
#include "net.hpp"

// Net documents (.pnet) are YAML with a fixed schema, see docs/pnet-format.md.
// Every section is optional; a single document may carry a net, a fusion map,
// a sampling specification and an availability model.

namespace stpn::io {

inline constexpr int format_version = 1;

struct diagnostic {
  int line = 0; // 1-based; 0 when no location applies
  int column = 0;
  std::string message;

  [[nodiscard]] std::string str() const {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
};

struct net_document {
  stpn::net model;
  std::optional<fusion_map> fusion;
  std::optional<sampling_spec> sampling;
  std::optional<availability_model> availability;
};

template <class T> struct parse_result {
  std::optional<T> value;
  std::vector<diagnostic> diagnostics;

  [[nodiscard]] bool ok() const { return value.has_value(); }
  [[nodiscard]] std::string message() const {
    std::string out;
    for (const auto &d : diagnostics)
      out += d.str() + "\n";
    return out;
  }
};

//==============================================================================
// Parsing

namespace detail {

class reader {
public:
  std::vector<diagnostic> diagnostics;

  void error(const YAML::Node &at, std::string message) {
    const auto m = at.Mark();
    diagnostics.push_back({m.line + 1, m.column + 1, std::move(message)});
  }
  void error(const YAML::Mark &m, std::string message) {
    diagnostics.push_back({m.line + 1, m.column + 1, std::move(message)});
  }

  bool expect_map(const YAML::Node &n, std::string_view what) {
    if (n.IsMap())
      return true;
    error(n, std::string(what) + " must be a mapping");
    return false;
  }
  bool expect_seq(const YAML::Node &n, std::string_view what) {
    if (n.IsSequence())
      return true;
    error(n, std::string(what) + " must be a sequence");
    return false;
  }

  // Reports keys outside `allowed`; returns false if any.
  bool known_keys(const YAML::Node &n, std::initializer_list<std::string_view> allowed,
                  std::string_view what) {
    bool ok = true;
    for (auto it = n.begin(); it != n.end(); ++it) {
      const auto key = it->first.Scalar();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        error(it->first, "unknown field '" + key + "' in " + std::string(what));
        ok = false;
      }
    }
    return ok;
  }

  bool require(const YAML::Node &map, const char *key, std::string_view what) {
    if (map[key])
      return true;
    error(map, std::string(what) + " is missing required field '" + key + "'");
    return false;
  }

  std::optional<std::string> text(const YAML::Node &n, std::string_view what) {
    if (!n.IsScalar()) {
      error(n, std::string(what) + " must be a string");
      return std::nullopt;
    }
    return n.Scalar();
  }

  std::optional<std::int64_t> integer(const YAML::Node &n, std::string_view what) {
    if (n.IsScalar()) {
      const std::string &s = n.Scalar();
      try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used == s.size())
          return v;
      } catch (const std::exception &) {
      }
    }
    error(n, std::string(what) + " must be an integer");
    return std::nullopt;
  }

  std::optional<double> number(const YAML::Node &n, std::string_view what) {
    if (n.IsScalar()) {
      const std::string &s = n.Scalar();
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v))
          return v;
      } catch (const std::exception &) {
      }
    }
    error(n, std::string(what) + " must be a finite number");
    return std::nullopt;
  }

  std::optional<tag_map> tags(const YAML::Node &n, std::string_view what) {
    if (!expect_map(n, what))
      return std::nullopt;
    tag_map out;
    for (auto it = n.begin(); it != n.end(); ++it) {
      if (!it->second.IsScalar()) {
        error(it->second, std::string(what) + " values must be strings");
        return std::nullopt;
      }
      out[it->first.Scalar()] = it->second.Scalar();
    }
    return out;
  }
};

struct locations {
  std::map<std::string, YAML::Mark> element; // id -> mark of its mapping
  std::optional<YAML::Mark> goal;
  YAML::Mark root;
};

inline std::optional<duration_distribution> read_duration(reader &r, const YAML::Node &n,
                                                          const std::string &tid) {
  const std::string what = "duration of '" + tid + "'";
  if (!r.expect_map(n, what) || !r.require(n, "kind", what))
    return std::nullopt;
  auto kind = r.text(n["kind"], what + " kind");
  if (!kind)
    return std::nullopt;
  auto param = [&](const char *key) -> std::optional<double> {
    if (!r.require(n, key, what))
      return std::nullopt;
    return r.number(n[key], what + " " + key);
  };
  if (*kind == "constant") {
    if (!r.known_keys(n, {"kind", "value"}, what))
      return std::nullopt;
    auto v = param("value");
    if (!v)
      return std::nullopt;
    return duration_distribution::constant(*v);
  }
  if (*kind == "normal") {
    if (!r.known_keys(n, {"kind", "mean", "sd"}, what))
      return std::nullopt;
    auto m = param("mean");
    auto s = param("sd");
    if (!m || !s)
      return std::nullopt;
    if (*s < 0.0) {
      r.error(n["sd"], what + ": sd must be non-negative");
      return std::nullopt;
    }
    return duration_distribution::normal(*m, *s);
  }
  if (*kind == "uniform") {
    if (!r.known_keys(n, {"kind", "low", "high"}, what))
      return std::nullopt;
    auto lo = param("low");
    auto hi = param("high");
    if (!lo || !hi)
      return std::nullopt;
    if (*lo > *hi) {
      r.error(n, what + ": low must not exceed high");
      return std::nullopt;
    }
    return duration_distribution::uniform(*lo, *hi);
  }
  r.error(n["kind"], what + ": unknown kind '" + *kind + "' (constant, normal, uniform)");
  return std::nullopt;
}

inline std::optional<std::vector<arc>> read_arcs(reader &r, const YAML::Node &n, const std::string &what) {
  if (!r.expect_seq(n, what))
    return std::nullopt;
  std::vector<arc> out;
  bool ok = true;
  for (const auto &item : n) {
    if (!r.expect_map(item, what + " entry") || !r.known_keys(item, {"place", "weight"}, what + " entry") ||
        !r.require(item, "place", what + " entry")) {
      ok = false;
      continue;
    }
    auto p = r.text(item["place"], what + " place");
    std::int64_t w = 1;
    if (item["weight"]) {
      auto v = r.integer(item["weight"], what + " weight");
      if (!v) {
        ok = false;
        continue;
      }
      if (*v < 1) {
        r.error(item["weight"], what + " weight must be a positive integer");
        ok = false;
        continue;
      }
      w = *v;
    }
    if (!p) {
      ok = false;
      continue;
    }
    out.push_back({*p, w});
  }
  if (!ok)
    return std::nullopt;
  return out;
}

inline std::optional<std::int64_t> read_bound(reader &r, const YAML::Node &n, const std::string &what,
                                              bool &ok) {
  if (n.IsScalar() && n.Scalar() == "unbounded")
    return std::nullopt;
  auto v = r.integer(n, what);
  if (!v) {
    ok = false;
    return std::nullopt;
  }
  if (*v < 1) {
    r.error(n, what + " must be at least 1");
    ok = false;
  }
  return v;
}

inline std::optional<comparator> read_op(reader &r, const YAML::Node &n, const std::string &what) {
  auto s = r.text(n, what);
  if (!s)
    return std::nullopt;
  auto c = parse_comparator(*s);
  if (!c)
    r.error(n, what + ": unknown comparator '" + *s + "' (>=, ==, <=)");
  return c;
}

inline bool read_net_sections(reader &r, const YAML::Node &root, net &out, locations &where) {
  bool ok = true;

  if (auto md = root["metadata"]) {
    if (auto t = r.tags(md, "metadata"))
      out.metadata = *t;
    else
      ok = false;
  }

  if (auto pol = root["policy"]) {
    if (auto s = r.text(pol, "policy")) {
      if (auto p = parse_policy(*s))
        out.policy = *p;
      else {
        r.error(pol, "unknown policy '" + *s + "' (fixed_priority, uniform_random, priority_proportional)");
        ok = false;
      }
    } else {
      ok = false;
    }
  }

  if (auto places = root["places"]) {
    if (!r.expect_seq(places, "places"))
      ok = false;
    else
      for (const auto &n : places) {
        if (!r.expect_map(n, "place") || !r.known_keys(n, {"id", "name", "tokens", "tags"}, "place") ||
            !r.require(n, "id", "place")) {
          ok = false;
          continue;
        }
        place p;
        auto id = r.text(n["id"], "place id");
        if (!id) {
          ok = false;
          continue;
        }
        p.id = *id;
        where.element.emplace(p.id, n.Mark());
        if (n["name"]) {
          if (auto s = r.text(n["name"], "place name"))
            p.name = *s;
          else
            ok = false;
        }
        if (n["tokens"]) {
          auto v = r.integer(n["tokens"], "tokens of '" + p.id + "'");
          if (!v)
            ok = false;
          else if (*v < 0) {
            r.error(n["tokens"], "tokens of '" + p.id + "' must be non-negative");
            ok = false;
          } else
            p.initial_tokens = *v;
        }
        if (n["tags"]) {
          if (auto t = r.tags(n["tags"], "tags of '" + p.id + "'"))
            p.tags = *t;
          else
            ok = false;
        }
        out.places.push_back(std::move(p));
      }
  }

  if (auto resources = root["resources"]) {
    if (!r.expect_seq(resources, "resources"))
      ok = false;
    else
      for (const auto &n : resources) {
        if (!r.expect_map(n, "resource") ||
            !r.known_keys(n, {"id", "name", "initial", "min", "max", "tags"}, "resource") ||
            !r.require(n, "id", "resource") || !r.require(n, "initial", "resource")) {
          ok = false;
          continue;
        }
        resource res;
        auto id = r.text(n["id"], "resource id");
        if (!id) {
          ok = false;
          continue;
        }
        res.id = *id;
        where.element.emplace(res.id, n.Mark());
        if (n["name"]) {
          if (auto s = r.text(n["name"], "resource name"))
            res.name = *s;
          else
            ok = false;
        }
        if (auto v = r.number(n["initial"], "initial level of '" + res.id + "'"))
          res.initial_level = *v;
        else
          ok = false;
        if (n["min"]) {
          if (auto v = r.number(n["min"], "min level of '" + res.id + "'"))
            res.min_level = *v;
          else
            ok = false;
        }
        if (n["max"] && !(n["max"].IsScalar() && n["max"].Scalar() == "unbounded")) {
          if (auto v = r.number(n["max"], "max level of '" + res.id + "'"))
            res.max_level = *v;
          else
            ok = false;
        }
        if (n["tags"]) {
          if (auto t = r.tags(n["tags"], "tags of '" + res.id + "'"))
            res.tags = *t;
          else
            ok = false;
        }
        out.resources.push_back(std::move(res));
      }
  }

  if (auto transitions = root["transitions"]) {
    if (!r.expect_seq(transitions, "transitions"))
      ok = false;
    else
      for (const auto &n : transitions) {
        if (!r.expect_map(n, "transition") ||
            !r.known_keys(n,
                          {"id", "name", "duration", "inputs", "outputs", "inhibitors", "rates", "priority",
                           "max_instances", "tags"},
                          "transition") ||
            !r.require(n, "id", "transition")) {
          ok = false;
          continue;
        }
        transition t;
        auto id = r.text(n["id"], "transition id");
        if (!id) {
          ok = false;
          continue;
        }
        t.id = *id;
        where.element.emplace(t.id, n.Mark());
        if (n["name"]) {
          if (auto s = r.text(n["name"], "transition name"))
            t.name = *s;
          else
            ok = false;
        }
        if (n["duration"]) {
          if (auto d = read_duration(r, n["duration"], t.id))
            t.duration = *d;
          else
            ok = false;
        }
        if (n["inputs"]) {
          if (auto a = read_arcs(r, n["inputs"], "inputs of '" + t.id + "'"))
            t.inputs = *a;
          else
            ok = false;
        }
        if (n["outputs"]) {
          if (auto a = read_arcs(r, n["outputs"], "outputs of '" + t.id + "'"))
            t.outputs = *a;
          else
            ok = false;
        }
        if (auto inh = n["inhibitors"]) {
          if (!r.expect_seq(inh, "inhibitors of '" + t.id + "'"))
            ok = false;
          else
            for (const auto &p : inh) {
              if (auto s = r.text(p, "inhibitor place"))
                t.inhibitors.push_back(*s);
              else
                ok = false;
            }
        }
        if (auto rates = n["rates"]) {
          if (!r.expect_seq(rates, "rates of '" + t.id + "'"))
            ok = false;
          else
            for (const auto &item : rates) {
              const std::string what = "rate entry of '" + t.id + "'";
              if (!r.expect_map(item, what) || !r.known_keys(item, {"resource", "rate"}, what) ||
                  !r.require(item, "resource", what) || !r.require(item, "rate", what)) {
                ok = false;
                continue;
              }
              auto res = r.text(item["resource"], what + " resource");
              auto v = r.number(item["rate"], what + " rate");
              if (!res || !v) {
                ok = false;
                continue;
              }
              t.rates.push_back({*res, *v});
            }
        }
        if (n["priority"]) {
          auto v = r.integer(n["priority"], "priority of '" + t.id + "'");
          if (!v)
            ok = false;
          else if (*v < 0) {
            r.error(n["priority"], "priority of '" + t.id + "' must be non-negative");
            ok = false;
          } else
            t.priority = *v;
        }
        if (n["max_instances"])
          t.max_instances = read_bound(r, n["max_instances"], "max_instances of '" + t.id + "'", ok);
        if (n["tags"]) {
          if (auto tg = r.tags(n["tags"], "tags of '" + t.id + "'"))
            t.tags = *tg;
          else
            ok = false;
        }
        out.transitions.push_back(std::move(t));
      }
  }

  if (auto g = root["goal"]) {
    where.goal = g.Mark();
    if (!r.expect_map(g, "goal") || !r.known_keys(g, {"tokens", "resources", "deadline"}, "goal")) {
      ok = false;
    } else {
      goal_predicate goal;
      if (auto toks = g["tokens"]) {
        if (!r.expect_seq(toks, "goal tokens"))
          ok = false;
        else
          for (const auto &item : toks) {
            if (!r.expect_map(item, "goal token condition") ||
                !r.known_keys(item, {"place", "op", "count"}, "goal token condition") ||
                !r.require(item, "place", "goal token condition") ||
                !r.require(item, "count", "goal token condition")) {
              ok = false;
              continue;
            }
            token_condition c;
            auto p = r.text(item["place"], "goal place");
            auto v = r.integer(item["count"], "goal count");
            std::optional<comparator> op = comparator::greater_equal;
            if (item["op"])
              op = read_op(r, item["op"], "goal op");
            if (!p || !v || !op) {
              ok = false;
              continue;
            }
            c.place = *p;
            c.count = *v;
            c.op = *op;
            goal.tokens.push_back(c);
          }
      }
      if (auto res = g["resources"]) {
        if (!r.expect_seq(res, "goal resources"))
          ok = false;
        else
          for (const auto &item : res) {
            if (!r.expect_map(item, "goal resource condition") ||
                !r.known_keys(item, {"resource", "op", "level"}, "goal resource condition") ||
                !r.require(item, "resource", "goal resource condition") ||
                !r.require(item, "level", "goal resource condition")) {
              ok = false;
              continue;
            }
            resource_condition c;
            auto id = r.text(item["resource"], "goal resource");
            auto v = r.number(item["level"], "goal level");
            std::optional<comparator> op = comparator::greater_equal;
            if (item["op"])
              op = read_op(r, item["op"], "goal op");
            if (!id || !v || !op) {
              ok = false;
              continue;
            }
            c.resource = *id;
            c.level = *v;
            c.op = *op;
            goal.resources.push_back(c);
          }
      }
      if (g["deadline"]) {
        auto v = r.number(g["deadline"], "goal deadline");
        if (!v)
          ok = false;
        else if (*v < 0.0) {
          r.error(g["deadline"], "goal deadline must be non-negative");
          ok = false;
        } else
          goal.deadline = *v;
      }
      out.goal = std::move(goal);
    }
  }
  return ok;
}

inline std::optional<fusion_map> read_fusion(reader &r, const YAML::Node &n) {
  if (!r.expect_map(n, "fusion") || !r.known_keys(n, {"places", "resources", "prefix", "separator"}, "fusion"))
    return std::nullopt;
  fusion_map out;
  bool ok = true;
  if (n["prefix"]) {
    auto s = r.text(n["prefix"], "fusion prefix");
    if (s && *s == "net_id")
      out.prefix = prefix_policy::net_id;
    else if (s && *s == "none")
      out.prefix = prefix_policy::none;
    else {
      r.error(n["prefix"], "fusion prefix must be 'net_id' or 'none'");
      ok = false;
    }
  }
  if (n["separator"]) {
    if (auto s = r.text(n["separator"], "fusion separator"))
      out.separator = *s;
    else
      ok = false;
  }
  auto groups = [&](const char *key, std::vector<fusion_group> &dst) {
    auto seq = n[key];
    if (!seq)
      return;
    if (!r.expect_seq(seq, std::string("fusion ") + key)) {
      ok = false;
      return;
    }
    for (const auto &g : seq) {
      const std::string what = std::string("fusion group in ") + key;
      if (!r.expect_map(g, what) || !r.known_keys(g, {"canonical", "members", "authoritative"}, what) ||
          !r.require(g, "canonical", what) || !r.require(g, "members", what)) {
        ok = false;
        continue;
      }
      fusion_group fg;
      if (auto s = r.text(g["canonical"], "canonical id"))
        fg.canonical = *s;
      else
        ok = false;
      if (g["authoritative"]) {
        if (auto s = r.text(g["authoritative"], "authoritative net"))
          fg.authoritative = *s;
        else
          ok = false;
      }
      if (!r.expect_seq(g["members"], "fusion members")) {
        ok = false;
        continue;
      }
      for (const auto &m : g["members"]) {
        // "net:local"
        auto s = r.text(m, "fusion member");
        if (!s) {
          ok = false;
          continue;
        }
        const auto colon = s->find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == s->size()) {
          r.error(m, "fusion member must be written 'net:local'");
          ok = false;
          continue;
        }
        fg.members.push_back({s->substr(0, colon), s->substr(colon + 1)});
      }
      dst.push_back(std::move(fg));
    }
  };
  groups("places", out.places);
  groups("resources", out.resources);
  if (!ok)
    return std::nullopt;
  return out;
}

inline std::optional<sampling_spec> read_sampling(reader &r, const YAML::Node &n) {
  if (!r.expect_seq(n, "sampling"))
    return std::nullopt;
  sampling_spec out;
  bool ok = true;
  for (const auto &e : n) {
    if (!r.expect_map(e, "sampling entry") ||
        !r.known_keys(e, {"name", "target", "distribution"}, "sampling entry") ||
        !r.require(e, "target", "sampling entry") || !r.require(e, "distribution", "sampling entry")) {
      ok = false;
      continue;
    }
    sampling_entry entry;
    auto target = r.text(e["target"], "sampling target");
    auto dist = r.text(e["distribution"], "sampling distribution");
    if (!target || !dist) {
      ok = false;
      continue;
    }
    auto t = parse_target(*target);
    if (!t) {
      r.error(e["target"], "malformed sampling target '" + *target + "'");
      ok = false;
      continue;
    }
    auto d = parse_sampler(*dist);
    if (!d) {
      r.error(e["distribution"], "malformed distribution '" + *dist + "'");
      ok = false;
      continue;
    }
    entry.target = *t;
    entry.distribution = *d;
    entry.name = to_string(*t);
    if (e["name"]) {
      if (auto s = r.text(e["name"], "sampling name"))
        entry.name = *s;
      else
        ok = false;
    }
    out.entries.push_back(std::move(entry));
  }
  if (!ok)
    return std::nullopt;
  return out;
}

inline std::optional<availability_model> read_availability(reader &r, const YAML::Node &n) {
  if (!r.expect_map(n, "availability_model") ||
      !r.known_keys(n, {"devices", "capabilities", "mission", "systems"}, "availability_model") ||
      !r.require(n, "mission", "availability_model"))
    return std::nullopt;
  availability_model out;
  bool ok = true;
  if (auto s = r.text(n["mission"], "mission capability"))
    out.mission_capability = *s;
  else
    ok = false;
  if (n["systems"]) {
    auto v = r.integer(n["systems"], "systems");
    if (!v || *v < 1) {
      if (v)
        r.error(n["systems"], "systems must be at least 1");
      ok = false;
    } else
      out.n_systems = *v;
  }
  if (auto devs = n["devices"]) {
    if (!r.expect_seq(devs, "devices"))
      ok = false;
    else
      for (const auto &d : devs) {
        if (!r.expect_map(d, "device") ||
            !r.known_keys(d, {"id", "reliability", "redundancy", "distribution"}, "device") ||
            !r.require(d, "id", "device") || !r.require(d, "reliability", "device")) {
          ok = false;
          continue;
        }
        device dev;
        auto id = r.text(d["id"], "device id");
        auto p = r.number(d["reliability"], "device reliability");
        if (!id || !p) {
          ok = false;
          continue;
        }
        dev.id = *id;
        dev.reliability = *p;
        if (*p < 0.0 || *p > 1.0) {
          r.error(d["reliability"], "reliability must lie in [0, 1]");
          ok = false;
        }
        if (d["redundancy"]) {
          auto k = r.integer(d["redundancy"], "device redundancy");
          if (!k || *k < 1) {
            if (k)
              r.error(d["redundancy"], "redundancy must be at least 1");
            ok = false;
          } else
            dev.redundancy = *k;
        }
        if (d["distribution"]) {
          auto s = r.text(d["distribution"], "reliability distribution");
          auto dist = s ? parse_sampler(*s) : std::nullopt;
          if (!dist) {
            if (s)
              r.error(d["distribution"], "malformed distribution '" + *s + "'");
            ok = false;
          } else
            dev.reliability_distribution = *dist;
        }
        out.devices.push_back(std::move(dev));
      }
  }
  if (auto caps = n["capabilities"]) {
    if (!r.expect_seq(caps, "capabilities"))
      ok = false;
    else
      for (const auto &c : caps) {
        if (!r.expect_map(c, "capability") ||
            !r.known_keys(c, {"id", "combinator", "requires", "level"}, "capability") ||
            !r.require(c, "id", "capability") || !r.require(c, "requires", "capability")) {
          ok = false;
          continue;
        }
        capability cap;
        if (auto s = r.text(c["id"], "capability id"))
          cap.id = *s;
        else
          ok = false;
        if (c["combinator"]) {
          auto s = r.text(c["combinator"], "combinator");
          if (s && *s == "all_of")
            cap.mode = combinator::all_of;
          else if (s && *s == "any_of")
            cap.mode = combinator::any_of;
          else {
            r.error(c["combinator"], "combinator must be 'all_of' or 'any_of'");
            ok = false;
          }
        }
        if (c["level"]) {
          if (auto s = r.text(c["level"], "capability level"))
            cap.level = *s;
          else
            ok = false;
        }
        if (!r.expect_seq(c["requires"], "requires")) {
          ok = false;
          continue;
        }
        for (const auto &x : c["requires"]) {
          if (auto s = r.text(x, "requirement"))
            cap.depends_on.push_back(*s);
          else
            ok = false;
        }
        out.capabilities.push_back(std::move(cap));
      }
  }
  if (!ok)
    return std::nullopt;
  return out;
}

} // namespace detail

// Strict schema check plus semantic validation of the net and availability
// sections. Every diagnostic carries the line and column it refers to.
[[nodiscard]] inline parse_result<net_document> parse_document(std::string_view text) {
  parse_result<net_document> out;
  detail::reader r;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException &e) {
    out.diagnostics.push_back({e.mark.line + 1, e.mark.column + 1, "syntax error: " + e.msg});
    return out;
  }
  if (!root.IsMap()) {
    out.diagnostics.push_back({1, 1, "document must be a mapping"});
    return out;
  }
  bool ok = r.known_keys(root,
                         {"format_version", "metadata", "policy", "places", "resources", "transitions", "goal",
                          "fusion", "sampling", "availability_model"},
                         "document");
  if (!root["format_version"]) {
    r.error(root, "document is missing required field 'format_version'");
    ok = false;
  } else if (auto v = r.integer(root["format_version"], "format_version"); !v) {
    ok = false;
  } else if (*v != format_version) {
    r.error(root["format_version"], "unsupported format_version " + std::to_string(*v) + " (expected " +
                                        std::to_string(format_version) + ")");
    ok = false;
  }

  net_document doc;
  detail::locations where;
  where.root = root.Mark();
  ok = detail::read_net_sections(r, root, doc.model, where) && ok;
  if (auto f = root["fusion"]) {
    doc.fusion = detail::read_fusion(r, f);
    ok = ok && doc.fusion.has_value();
  }
  if (auto s = root["sampling"]) {
    doc.sampling = detail::read_sampling(r, s);
    ok = ok && doc.sampling.has_value();
  }
  if (auto a = root["availability_model"]) {
    doc.availability = detail::read_availability(r, a);
    ok = ok && doc.availability.has_value();
    if (doc.availability) {
      const auto report = validate_model(*doc.availability);
      for (const auto &v : report.violations)
        if (v.level == severity::error) {
          r.error(a, v.message);
          ok = false;
        }
    }
  }

  if (ok) {
    const auto report = validate_net(doc.model);
    for (const auto &v : report.violations) {
      if (v.level != severity::error)
        continue;
      YAML::Mark m = where.root;
      if (auto it = where.element.find(v.element); it != where.element.end())
        m = it->second;
      else if (v.element == "goal" && where.goal)
        m = *where.goal;
      r.error(m, v.message);
      ok = false;
    }
  }

  out.diagnostics = std::move(r.diagnostics);
  if (ok)
    out.value = std::move(doc);
  return out;
}

[[nodiscard]] inline parse_result<net> parse_net(std::string_view text) {
  auto doc = parse_document(text);
  parse_result<net> out;
  out.diagnostics = std::move(doc.diagnostics);
  if (doc.value)
    out.value = std::move(doc.value->model);
  return out;
}

//==============================================================================
// Canonical serialization: keys sorted, element lists sorted by id, reals
// printed with 9 significant digits, strings always double-quoted.

namespace detail {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (ch) {
    case '"':
      out += "\\\"";
      break;
    case '\\':
      out += "\\\\";
      break;
    case '\n':
      out += "\\n";
      break;
    case '\t':
      out += "\\t";
      break;
    case '\r':
      out += "\\r";
      break;
    default:
      if (c < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02x", c);
        out += buf;
      } else {
        out += ch;
      }
    }
  }
  return out + "\"";
}

inline std::string real(double v) {
  if (v == 0.0)
    return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Tiny block-style emitter. Values are pre-rendered scalars or nested nodes.
struct node {
  enum class kind { scalar, map, seq } k = kind::scalar;
  std::string scalar;
  std::vector<std::pair<std::string, node>> entries; // map, sorted on emit
  std::vector<node> items;                          // seq

  static node of(std::string s) { return {kind::scalar, std::move(s), {}, {}}; }
  static node str(std::string_view s) { return of(quote(s)); }
  static node num(double v) { return of(real(v)); }
  static node integer(std::int64_t v) { return of(std::to_string(v)); }
  static node map() { return {kind::map, {}, {}, {}}; }
  static node seq() { return {kind::seq, {}, {}, {}}; }

  node &set(std::string key, node value) {
    entries.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  node &push(node value) {
    items.push_back(std::move(value));
    return *this;
  }
  [[nodiscard]] bool empty_container() const {
    return (k == kind::map && entries.empty()) || (k == kind::seq && items.empty());
  }
};

inline bool plain_key(std::string_view key) {
  if (key.empty())
    return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

inline void emit(std::string &out, const node &n, int indent);

inline void emit_value_after_key(std::string &out, const node &v, int indent) {
  if (v.k == node::kind::scalar) {
    out += " " + v.scalar + "\n";
  } else if (v.empty_container()) {
    out += v.k == node::kind::map ? " {}\n" : " []\n";
  } else {
    out += "\n";
    emit(out, v, indent + 2);
  }
}

inline void emit(std::string &out, const node &n, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (n.k == node::kind::map) {
    auto sorted = n.entries;
    std::sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[key, value] : sorted) {
      out += pad + (plain_key(key) ? key : quote(key)) + ":";
      emit_value_after_key(out, value, indent);
    }
  } else if (n.k == node::kind::seq) {
    for (const auto &item : n.items) {
      if (item.k == node::kind::map && !item.entries.empty()) {
        // first key on the dash line, the rest aligned under it
        std::string nested;
        emit(nested, item, indent + 2);
        out += pad + "- " + nested.substr(static_cast<std::size_t>(indent + 2));
      } else if (item.k == node::kind::scalar) {
        out += pad + "- " + item.scalar + "\n";
      } else if (item.empty_container()) {
        out += pad + (item.k == node::kind::map ? "- {}\n" : "- []\n");
      } else {
        out += pad + "-\n";
        emit(out, item, indent + 2);
      }
    }
  } else {
    out += pad + n.scalar + "\n";
  }
}

inline node tags_node(const tag_map &tags) {
  node m = node::map();
  for (const auto &[k, v] : tags)
    m.set(k, node::str(v));
  return m;
}

template <class T, class Key> std::vector<T> sorted_by(std::vector<T> items, Key key) {
  std::stable_sort(items.begin(), items.end(), [&](const T &a, const T &b) { return key(a) < key(b); });
  return items;
}

inline node arcs_node(const std::vector<arc> &arcs) {
  node s = node::seq();
  for (const auto &a : sorted_by(arcs, [](const arc &x) { return x.place; }))
    s.push(node::map().set("place", node::str(a.place)).set("weight", node::integer(a.weight)));
  return s;
}

inline node duration_node(const duration_distribution &d) {
  node m = node::map();
  switch (d.kind) {
  case distribution_kind::constant:
    m.set("kind", node::str("constant")).set("value", node::num(d.first));
    break;
  case distribution_kind::normal:
    m.set("kind", node::str("normal")).set("mean", node::num(d.first)).set("sd", node::num(d.second));
    break;
  case distribution_kind::uniform:
    m.set("kind", node::str("uniform")).set("low", node::num(d.first)).set("high", node::num(d.second));
    break;
  }
  return m;
}

inline void add_net_sections(node &root, const net &n) {
  if (!n.metadata.empty())
    root.set("metadata", tags_node(n.metadata));
  root.set("policy", node::str(to_string(n.policy)));

  node places = node::seq();
  for (const auto &p : sorted_by(n.places, [](const place &x) { return x.id; })) {
    node m = node::map();
    m.set("id", node::str(p.id)).set("tokens", node::integer(p.initial_tokens));
    if (!p.name.empty())
      m.set("name", node::str(p.name));
    if (!p.tags.empty())
      m.set("tags", tags_node(p.tags));
    places.push(std::move(m));
  }
  root.set("places", std::move(places));

  node resources = node::seq();
  for (const auto &r : sorted_by(n.resources, [](const resource &x) { return x.id; })) {
    node m = node::map();
    m.set("id", node::str(r.id)).set("initial", node::num(r.initial_level)).set("min", node::num(r.min_level));
    m.set("max", std::isfinite(r.max_level) ? node::num(r.max_level) : node::str("unbounded"));
    if (!r.name.empty())
      m.set("name", node::str(r.name));
    if (!r.tags.empty())
      m.set("tags", tags_node(r.tags));
    resources.push(std::move(m));
  }
  root.set("resources", std::move(resources));

  node transitions = node::seq();
  for (const auto &t : sorted_by(n.transitions, [](const transition &x) { return x.id; })) {
    node m = node::map();
    m.set("id", node::str(t.id)).set("duration", duration_node(t.duration));
    m.set("priority", node::integer(t.priority));
    m.set("max_instances", t.max_instances ? node::integer(*t.max_instances) : node::str("unbounded"));
    if (!t.name.empty())
      m.set("name", node::str(t.name));
    if (!t.inputs.empty())
      m.set("inputs", arcs_node(t.inputs));
    if (!t.outputs.empty())
      m.set("outputs", arcs_node(t.outputs));
    if (!t.inhibitors.empty()) {
      node s = node::seq();
      auto inh = t.inhibitors;
      std::sort(inh.begin(), inh.end());
      for (const auto &p : inh)
        s.push(node::str(p));
      m.set("inhibitors", std::move(s));
    }
    if (!t.rates.empty()) {
      node s = node::seq();
      for (const auto &r : sorted_by(t.rates, [](const resource_rate &x) { return x.resource; }))
        s.push(node::map().set("resource", node::str(r.resource)).set("rate", node::num(r.rate)));
      m.set("rates", std::move(s));
    }
    if (!t.tags.empty())
      m.set("tags", tags_node(t.tags));
    transitions.push(std::move(m));
  }
  root.set("transitions", std::move(transitions));

  if (n.goal) {
    node g = node::map();
    if (!n.goal->tokens.empty()) {
      node s = node::seq();
      auto conds = sorted_by(n.goal->tokens, [](const token_condition &c) {
        return std::tuple{c.place, static_cast<int>(c.op), c.count};
      });
      for (const auto &c : conds)
        s.push(node::map()
                   .set("place", node::str(c.place))
                   .set("op", node::str(to_string(c.op)))
                   .set("count", node::integer(c.count)));
      g.set("tokens", std::move(s));
    }
    if (!n.goal->resources.empty()) {
      node s = node::seq();
      auto conds = sorted_by(n.goal->resources, [](const resource_condition &c) {
        return std::tuple{c.resource, static_cast<int>(c.op), c.level};
      });
      for (const auto &c : conds)
        s.push(node::map()
                   .set("resource", node::str(c.resource))
                   .set("op", node::str(to_string(c.op)))
                   .set("level", node::num(c.level)));
      g.set("resources", std::move(s));
    }
    if (n.goal->deadline)
      g.set("deadline", node::num(*n.goal->deadline));
    root.set("goal", std::move(g));
  }
}

inline node fusion_node(const fusion_map &f) {
  node m = node::map();
  m.set("prefix", node::str(f.prefix == prefix_policy::net_id ? "net_id" : "none"));
  m.set("separator", node::str(f.separator));
  auto groups = [](const std::vector<fusion_group> &gs) {
    node s = node::seq();
    for (const auto &g : sorted_by(gs, [](const fusion_group &x) { return x.canonical; })) {
      node gm = node::map();
      gm.set("canonical", node::str(g.canonical));
      node members = node::seq();
      for (const auto &mb : g.members)
        members.push(node::str(mb.net + ":" + mb.local));
      gm.set("members", std::move(members));
      if (g.authoritative)
        gm.set("authoritative", node::str(*g.authoritative));
      s.push(std::move(gm));
    }
    return s;
  };
  if (!f.places.empty())
    m.set("places", groups(f.places));
  if (!f.resources.empty())
    m.set("resources", groups(f.resources));
  return m;
}

inline node sampling_node(const sampling_spec &spec) {
  node s = node::seq();
  for (const auto &e : spec.entries)
    s.push(node::map()
               .set("name", node::str(e.name))
               .set("target", node::str(to_string(e.target)))
               .set("distribution", node::str(to_string(e.distribution))));
  return s;
}

inline node availability_node(const availability_model &m) {
  node a = node::map();
  a.set("mission", node::str(m.mission_capability)).set("systems", node::integer(m.n_systems));
  node devs = node::seq();
  for (const auto &d : m.devices) {
    node dm = node::map();
    dm.set("id", node::str(d.id)).set("reliability", node::num(d.reliability));
    dm.set("redundancy", node::integer(d.redundancy));
    if (d.reliability_distribution)
      dm.set("distribution", node::str(to_string(*d.reliability_distribution)));
    devs.push(std::move(dm));
  }
  a.set("devices", std::move(devs));
  node caps = node::seq();
  for (const auto &c : m.capabilities) {
    node cm = node::map();
    cm.set("id", node::str(c.id)).set("combinator", node::str(c.mode == combinator::all_of ? "all_of" : "any_of"));
    node req = node::seq();
    for (const auto &r : c.depends_on)
      req.push(node::str(r));
    cm.set("requires", std::move(req));
    if (!c.level.empty())
      cm.set("level", node::str(c.level));
    caps.push(std::move(cm));
  }
  a.set("capabilities", std::move(caps));
  return a;
}

} // namespace detail

[[nodiscard]] inline std::string serialize_document(const net_document &doc, bool include_net = true) {
  detail::node root = detail::node::map();
  root.set("format_version", detail::node::integer(format_version));
  if (include_net)
    detail::add_net_sections(root, doc.model);
  if (doc.fusion)
    root.set("fusion", detail::fusion_node(*doc.fusion));
  if (doc.sampling)
    root.set("sampling", detail::sampling_node(*doc.sampling));
  if (doc.availability)
    root.set("availability_model", detail::availability_node(*doc.availability));
  std::string out;
  detail::emit(out, root, 0);
  return out;
}

[[nodiscard]] inline std::string serialize_net(const net &n) {
  net_document doc;
  doc.model = n;
  return serialize_document(doc);
}

// Documents holding only the given section.
[[nodiscard]] inline std::string serialize_fusion(const fusion_map &f) {
  net_document doc;
  doc.fusion = f;
  return serialize_document(doc, false);
}
[[nodiscard]] inline std::string serialize_sampling(const sampling_spec &s) {
  net_document doc;
  doc.sampling = s;
  return serialize_document(doc, false);
}
[[nodiscard]] inline std::string serialize_availability(const availability_model &m) {
  net_document doc;
  doc.availability = m;
  return serialize_document(doc, false);
}

//==============================================================================
// Files

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[nodiscard]] inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw io_error("error while reading '" + path + "'");
  return ss.str();
}

inline void write_file(const std::string &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw io_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw io_error("error while writing '" + path + "'");
}

} // namespace stpn::io
