#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stpn {

using tag_map = std::map<std::string, std::string>;

inline constexpr double unbounded = std::numeric_limits<double>::infinity();

struct place {
  std::string id;
  std::string name;
  std::int64_t initial_tokens = 0;
  tag_map tags;

  bool operator==(const place &) const = default;
};

struct resource {
  std::string id;
  std::string name;
  double initial_level = 0.0;
  double min_level = 0.0;
  double max_level = unbounded;
  tag_map tags;

  bool operator==(const resource &) const = default;
};

enum class distribution_kind { constant, normal, uniform };

// Action duration. Parameter meaning depends on kind:
//   constant: first = value
//   normal:   first = mean, second = standard deviation
//   uniform:  first = low,  second = high
// Samples are clamped at zero.
struct duration_distribution {
  distribution_kind kind = distribution_kind::constant;
  double first = 0.0;
  double second = 0.0;

  static duration_distribution constant(double value) {
    return {distribution_kind::constant, value, 0.0};
  }
  static duration_distribution normal(double mean, double stddev) {
    return {distribution_kind::normal, mean, stddev};
  }
  static duration_distribution uniform(double low, double high) {
    return {distribution_kind::uniform, low, high};
  }

  [[nodiscard]] double expected() const {
    switch (kind) {
    case distribution_kind::constant:
      return std::max(0.0, first);
    case distribution_kind::normal:
      return std::max(0.0, first);
    case distribution_kind::uniform:
      return std::max(0.0, 0.5 * (first + second));
    }
    return 0.0;
  }

  bool operator==(const duration_distribution &) const = default;
};

struct arc {
  std::string place;
  std::int64_t weight = 1;

  bool operator==(const arc &) const = default;
};

struct resource_rate {
  std::string resource;
  double rate = 0.0; // negative consumes, positive produces

  bool operator==(const resource_rate &) const = default;
};

struct transition {
  std::string id;
  std::string name;
  duration_distribution duration;
  std::vector<arc> inputs;
  std::vector<arc> outputs;
  std::vector<std::string> inhibitors;
  std::vector<resource_rate> rates;
  std::int64_t priority = 0;
  std::optional<std::int64_t> max_instances; // nullopt = unbounded
  tag_map tags;

  bool operator==(const transition &) const = default;
};

enum class comparator { greater_equal, equal, less_equal };

[[nodiscard]] inline std::string_view to_string(comparator c) {
  switch (c) {
  case comparator::greater_equal:
    return ">=";
  case comparator::equal:
    return "==";
  case comparator::less_equal:
    return "<=";
  }
  return "?";
}

[[nodiscard]] inline std::optional<comparator> parse_comparator(std::string_view s) {
  if (s == ">=" || s == "≥")
    return comparator::greater_equal;
  if (s == "==" || s == "=")
    return comparator::equal;
  if (s == "<=" || s == "≤")
    return comparator::less_equal;
  return std::nullopt;
}

template <class T> [[nodiscard]] bool compare(comparator c, T lhs, T rhs) {
  switch (c) {
  case comparator::greater_equal:
    return lhs >= rhs;
  case comparator::equal:
    return lhs == rhs;
  case comparator::less_equal:
    return lhs <= rhs;
  }
  return false;
}

struct token_condition {
  std::string place;
  comparator op = comparator::greater_equal;
  std::int64_t count = 0;

  bool operator==(const token_condition &) const = default;
};

struct resource_condition {
  std::string resource;
  comparator op = comparator::greater_equal;
  double level = 0.0;

  bool operator==(const resource_condition &) const = default;
};

struct goal_predicate {
  std::vector<token_condition> tokens;
  std::vector<resource_condition> resources;
  std::optional<double> deadline;

  bool operator==(const goal_predicate &) const = default;
};

enum class conflict_policy { fixed_priority, uniform_random, priority_proportional };

[[nodiscard]] inline std::string_view to_string(conflict_policy p) {
  switch (p) {
  case conflict_policy::fixed_priority:
    return "fixed_priority";
  case conflict_policy::uniform_random:
    return "uniform_random";
  case conflict_policy::priority_proportional:
    return "priority_proportional";
  }
  return "?";
}

[[nodiscard]] inline std::optional<conflict_policy> parse_policy(std::string_view s) {
  if (s == "fixed_priority")
    return conflict_policy::fixed_priority;
  if (s == "uniform_random")
    return conflict_policy::uniform_random;
  if (s == "priority_proportional")
    return conflict_policy::priority_proportional;
  return std::nullopt;
}

struct net {
  std::vector<place> places;
  std::vector<resource> resources;
  std::vector<transition> transitions;
  std::optional<goal_predicate> goal;
  conflict_policy policy = conflict_policy::fixed_priority;
  tag_map metadata;

  bool operator==(const net &) const = default;

  [[nodiscard]] std::optional<std::size_t> place_index(std::string_view id) const {
    return find(places, id);
  }
  [[nodiscard]] std::optional<std::size_t> resource_index(std::string_view id) const {
    return find(resources, id);
  }
  [[nodiscard]] std::optional<std::size_t> transition_index(std::string_view id) const {
    return find(transitions, id);
  }

private:
  template <class T>
  static std::optional<std::size_t> find(const std::vector<T> &items, std::string_view id) {
    for (std::size_t i = 0; i < items.size(); ++i)
      if (items[i].id == id)
        return i;
    return std::nullopt;
  }
};

//==============================================================================
// Structural validation

enum class severity { error, warning };

struct violation {
  severity level = severity::error;
  std::string code;    // stable identifier, e.g. "unresolved place reference"
  std::string element; // id of the offending element, may be empty
  std::string message;

  bool operator==(const violation &) const = default;
};

struct validation_report {
  std::vector<violation> violations;

  [[nodiscard]] bool valid() const {
    return std::none_of(violations.begin(), violations.end(),
                        [](const violation &v) { return v.level == severity::error; });
  }
  [[nodiscard]] std::size_t error_count() const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(),
                      [](const violation &v) { return v.level == severity::error; }));
  }
  [[nodiscard]] bool has(std::string_view code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const violation &v) { return v.code == code; });
  }
};

namespace detail {

inline bool finite(double x) { return std::isfinite(x); }

class report_builder {
public:
  void error(std::string code, std::string element, std::string message) {
    report_.violations.push_back(
        {severity::error, std::move(code), std::move(element), std::move(message)});
  }
  void warning(std::string code, std::string element, std::string message) {
    report_.violations.push_back(
        {severity::warning, std::move(code), std::move(element), std::move(message)});
  }
  validation_report take() { return std::move(report_); }

private:
  validation_report report_;
};

} // namespace detail

// Every invariant violation of the net, in a deterministic order. Violations
// are data: an empty report (or warnings only) means the net is executable.
[[nodiscard]] inline validation_report validate_net(const net &n) {
  detail::report_builder out;

  std::set<std::string> ids;
  std::map<std::string, std::string> names; // name -> first id
  auto claim = [&](const std::string &id, const std::string &name, std::string_view kind) {
    if (id.empty())
      out.error("empty id", id, std::string(kind) + " with empty id");
    else if (!ids.insert(id).second)
      out.error("duplicate id", id, "id '" + id + "' is declared more than once");
    if (!name.empty()) {
      auto [it, inserted] = names.emplace(name, id);
      if (!inserted)
        out.warning("duplicate name", id,
                    "name '" + name + "' is shared with '" + it->second + "'");
    }
  };

  std::set<std::string> place_ids, resource_ids;
  for (const auto &p : n.places) {
    claim(p.id, p.name, "place");
    place_ids.insert(p.id);
    if (p.initial_tokens < 0)
      out.error("negative tokens", p.id, "place '" + p.id + "' has negative initial tokens");
  }

  for (const auto &r : n.resources) {
    claim(r.id, r.name, "resource");
    resource_ids.insert(r.id);
    if (!detail::finite(r.initial_level) || !detail::finite(r.min_level) ||
        std::isnan(r.max_level))
      out.error("non-finite level", r.id, "resource '" + r.id + "' has a non-finite level");
    if (r.min_level < 0.0)
      out.error("negative minimum", r.id, "resource '" + r.id + "' has negative min_level");
    if (r.min_level > r.max_level)
      out.error("minimum above maximum", r.id,
                "resource '" + r.id + "' has min_level above max_level");
    if (r.initial_level < r.min_level)
      out.error("initial below minimum", r.id,
                "resource '" + r.id + "' starts below its min_level");
    if (r.initial_level > r.max_level)
      out.error("initial above maximum", r.id,
                "resource '" + r.id + "' starts above its max_level");
  }

  auto check_arcs = [&](const transition &t, const std::vector<arc> &arcs, std::string_view kind) {
    std::set<std::string> seen;
    for (const auto &a : arcs) {
      if (!place_ids.count(a.place))
        out.error("unresolved place reference", t.id,
                  "transition '" + t.id + "' " + std::string(kind) + " arc references unknown place '" +
                      a.place + "'");
      if (a.weight < 1)
        out.error("non-positive weight", t.id,
                  "transition '" + t.id + "' " + std::string(kind) + " arc to '" + a.place +
                      "' has weight < 1");
      if (!seen.insert(a.place).second)
        out.error("duplicate arc", t.id,
                  "transition '" + t.id + "' has two " + std::string(kind) + " arcs on '" +
                      a.place + "'");
    }
  };

  for (const auto &t : n.transitions) {
    claim(t.id, t.name, "transition");
    const auto &d = t.duration;
    if (!detail::finite(d.first) || !detail::finite(d.second))
      out.error("non-finite duration", t.id, "transition '" + t.id + "' has non-finite duration");
    if (d.kind == distribution_kind::normal && d.second < 0.0)
      out.error("negative deviation", t.id,
                "transition '" + t.id + "' normal duration has negative std-dev");
    if (d.kind == distribution_kind::uniform && d.first > d.second)
      out.error("inverted range", t.id,
                "transition '" + t.id + "' uniform duration has low > high");

    check_arcs(t, t.inputs, "input");
    check_arcs(t, t.outputs, "output");

    std::set<std::string> seen;
    for (const auto &p : t.inhibitors) {
      if (!place_ids.count(p))
        out.error("unresolved place reference", t.id,
                  "transition '" + t.id + "' inhibitor arc references unknown place '" + p + "'");
      if (!seen.insert(p).second)
        out.error("duplicate arc", t.id,
                  "transition '" + t.id + "' has two inhibitor arcs on '" + p + "'");
    }

    seen.clear();
    for (const auto &r : t.rates) {
      if (!resource_ids.count(r.resource))
        out.error("unresolved resource reference", t.id,
                  "transition '" + t.id + "' rate references unknown resource '" + r.resource + "'");
      if (!seen.insert(r.resource).second)
        out.error("duplicate rate", t.id,
                  "transition '" + t.id + "' lists resource '" + r.resource + "' twice");
      if (!detail::finite(r.rate))
        out.error("non-finite rate", t.id, "transition '" + t.id + "' has a non-finite rate");
    }

    if (t.priority < 0)
      out.error("negative priority", t.id, "transition '" + t.id + "' has negative priority");
    if (t.max_instances && *t.max_instances < 1)
      out.error("non-positive instance bound", t.id,
                "transition '" + t.id + "' has max_instances < 1");
    if (t.inputs.empty() && !t.max_instances)
      out.warning("source transition", t.id,
                  "transition '" + t.id + "' has no inputs and no instance bound");
  }

  if (n.goal) {
    for (const auto &c : n.goal->tokens) {
      if (!place_ids.count(c.place))
        out.error("unresolved place reference", "goal",
                  "goal references unknown place '" + c.place + "'");
      if (c.count < 0)
        out.error("negative goal count", "goal", "goal count on '" + c.place + "' is negative");
    }
    for (const auto &c : n.goal->resources) {
      if (!resource_ids.count(c.resource))
        out.error("unresolved resource reference", "goal",
                  "goal references unknown resource '" + c.resource + "'");
      if (!detail::finite(c.level))
        out.error("non-finite goal level", "goal", "goal level on '" + c.resource + "' is not finite");
    }
    if (n.goal->deadline && !(*n.goal->deadline >= 0.0))
      out.error("negative deadline", "goal", "goal deadline is negative");
  }

  return out.take();
}

} // namespace stpn
