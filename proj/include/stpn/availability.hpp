#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "montecarlo.hpp"
#include "net.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace stpn {

enum class combinator { all_of, any_of };

struct device {
  std::string id;
  double reliability = 1.0;
  std::int64_t redundancy = 1;
  std::optional<sampler> reliability_distribution; // for Monte Carlo; clamped to [0, 1]

  bool operator==(const device &) const = default;
};

struct capability {
  std::string id;
  combinator mode = combinator::all_of;
  std::vector<std::string> depends_on; // device or capability ids
  std::string level;                  // mission / system / subsystem

  bool operator==(const capability &) const = default;
};

// Device -> capability dependency DAG for one robot, replicated over
// n_systems identical robots of which one must keep the root capability.
struct availability_model {
  std::vector<device> devices;
  std::vector<capability> capabilities;
  std::string mission_capability;
  std::int64_t n_systems = 1;

  bool operator==(const availability_model &) const = default;

  [[nodiscard]] const device *find_device(const std::string &id) const {
    auto it = std::find_if(devices.begin(), devices.end(), [&](const device &d) { return d.id == id; });
    return it == devices.end() ? nullptr : &*it;
  }
  [[nodiscard]] const capability *find_capability(const std::string &id) const {
    auto it = std::find_if(capabilities.begin(), capabilities.end(),
                           [&](const capability &c) { return c.id == id; });
    return it == capabilities.end() ? nullptr : &*it;
  }
};

[[nodiscard]] inline validation_report validate_model(const availability_model &m) {
  detail::report_builder out;
  std::set<std::string> seen; // devices and capabilities share one namespace
  {
    for (const auto &d : m.devices) {
      if (d.id.empty() || !seen.insert(d.id).second)
        out.error("duplicate id", d.id, "device id '" + d.id + "' is empty or repeated");
      if (!(d.reliability >= 0.0 && d.reliability <= 1.0))
        out.error("reliability out of range", d.id,
                        "device '" + d.id + "' reliability outside [0, 1]");
      if (d.redundancy < 1)
        out.error("non-positive redundancy", d.id, "device '" + d.id + "' redundancy < 1");
    }
    for (const auto &c : m.capabilities)
      if (c.id.empty() || !seen.insert(c.id).second)
        out.error("duplicate id", c.id, "capability id '" + c.id + "' is empty or repeated");
    for (const auto &c : m.capabilities) {
      if (c.depends_on.empty())
        out.error("empty requirement", c.id, "capability '" + c.id + "' requires nothing");
      for (const auto &r : c.depends_on)
        if (!seen.count(r))
          out.error("unresolved reference", c.id,
                          "capability '" + c.id + "' requires unknown element '" + r + "'");
    }
    if (!m.find_capability(m.mission_capability))
      out.error("unresolved reference", m.mission_capability,
                      "mission capability '" + m.mission_capability + "' is not declared");
    if (m.n_systems < 1)
      out.error("non-positive systems", "", "n_systems < 1");
  }

  // Cycle detection over capability -> capability edges.
  std::map<std::string, int> colour; // 0 new, 1 on stack, 2 done
  bool cyclic = false;
  std::function<void(const capability &)> visit = [&](const capability &c) {
    colour[c.id] = 1;
    for (const auto &r : c.depends_on) {
      if (const capability *child = m.find_capability(r)) {
        if (colour[r] == 1)
          cyclic = true;
        else if (colour[r] == 0)
          visit(*child);
      }
    }
    colour[c.id] = 2;
  };
  for (const auto &c : m.capabilities)
    if (colour[c.id] == 0)
      visit(c);
  if (cyclic)
    out.error("cycle", "", "capability dependencies contain a cycle");

  // Orphans: elements the root never depends on.
  if (!cyclic && m.find_capability(m.mission_capability)) {
    std::set<std::string> reached;
    std::function<void(const std::string &)> walk = [&](const std::string &id) {
      if (!reached.insert(id).second)
        return;
      if (const capability *c = m.find_capability(id))
        for (const auto &r : c->depends_on)
          walk(r);
    };
    walk(m.mission_capability);
    for (const auto &d : m.devices)
      if (!reached.count(d.id))
        out.warning("orphan", d.id, "device '" + d.id + "' does not feed the mission capability");
    for (const auto &c : m.capabilities)
      if (!reached.count(c.id))
        out.warning("orphan", c.id,
                          "capability '" + c.id + "' does not feed the mission capability");
  }
  return out.take();
}

namespace detail {
inline void require_valid(const availability_model &m, const char *where) {
  const auto report = validate_model(m);
  if (!report.valid()) {
    std::string msg = std::string(where) + ": invalid availability model:";
    for (const auto &v : report.violations)
      if (v.level == severity::error)
        msg += " " + v.message + ";";
    throw std::invalid_argument(msg);
  }
}
} // namespace detail

// At least one of k independent copies works.
[[nodiscard]] inline double device_availability(double p, std::int64_t k) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("device_availability: p outside [0, 1]");
  if (k < 1)
    throw std::invalid_argument("device_availability: k < 1");
  return 1.0 - std::pow(1.0 - p, static_cast<double>(k));
}

using device_states = std::map<std::string, bool>;

// Bottom-up evaluation of every capability for one robot. Devices missing
// from the state map count as down.
[[nodiscard]] inline std::map<std::string, bool> capability_rollup(const availability_model &m,
                                                                  const device_states &state) {
  detail::require_valid(m, "capability_rollup");
  std::map<std::string, bool> memo;
  std::function<bool(const std::string &)> eval = [&](const std::string &id) -> bool {
    if (m.find_device(id)) {
      auto it = state.find(id);
      return it != state.end() && it->second;
    }
    if (auto it = memo.find(id); it != memo.end())
      return it->second;
    const capability &c = *m.find_capability(id);
    bool v = c.mode == combinator::all_of;
    for (const auto &r : c.depends_on) {
      const bool child = eval(r);
      v = c.mode == combinator::all_of ? (v && child) : (v || child);
    }
    memo[id] = v;
    return v;
  };
  std::map<std::string, bool> out;
  for (const auto &c : m.capabilities)
    out[c.id] = eval(c.id);
  return out;
}

// Devices the capability depends on, and whether every capability on the way
// is all_of (in which case availability is the plain product).
namespace detail {
inline std::pair<std::vector<std::string>, bool> root_devices(const availability_model &m,
                                                              const std::string &root) {
  std::set<std::string> devices, visited;
  bool conjunctive = true;
  std::function<void(const std::string &)> walk = [&](const std::string &id) {
    if (!visited.insert(id).second)
      return;
    if (m.find_device(id)) {
      devices.insert(id);
      return;
    }
    const capability &c = *m.find_capability(id);
    if (c.mode == combinator::any_of && c.depends_on.size() > 1)
      conjunctive = false;
    for (const auto &r : c.depends_on)
      walk(r);
  };
  walk(root);
  // keep declaration order
  std::vector<std::string> ordered;
  for (const auto &d : m.devices)
    if (devices.count(d.id))
      ordered.push_back(d.id);
  return {ordered, conjunctive};
}
} // namespace detail

// Availability of the root capability on a single robot.
[[nodiscard]] inline double robot_availability(const availability_model &m) {
  detail::require_valid(m, "robot_availability");
  const auto [devs, conjunctive] = detail::root_devices(m, m.mission_capability);
  if (conjunctive) {
    double product = 1.0;
    for (const auto &id : devs) {
      const device &d = *m.find_device(id);
      product *= device_availability(d.reliability, d.redundancy);
    }
    return product;
  }
  // Mixed combinators: sum over device up/down states weighted by the
  // per-device availability.
  if (devs.size() > 24)
    throw std::invalid_argument("robot_availability: too many devices under any_of nodes");
  std::vector<double> a;
  for (const auto &id : devs) {
    const device &d = *m.find_device(id);
    a.push_back(device_availability(d.reliability, d.redundancy));
  }
  double total = 0.0;
  const std::uint64_t states = std::uint64_t{1} << devs.size();
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    device_states s;
    double w = 1.0;
    for (std::size_t i = 0; i < devs.size(); ++i) {
      const bool up = (mask >> i) & 1u;
      s[devs[i]] = up;
      w *= up ? a[i] : 1.0 - a[i];
    }
    if (w > 0.0 && capability_rollup(m, s).at(m.mission_capability))
      total += w;
  }
  return total;
}

// One of n_systems robots must keep the root capability.
[[nodiscard]] inline double mission_availability(const availability_model &m) {
  const double per_robot = robot_availability(m);
  return 1.0 - std::pow(1.0 - per_robot, static_cast<double>(m.n_systems));
}

//==============================================================================
// Monte Carlo

struct reliability_result {
  std::size_t n_trials = 0;
  std::map<std::string, double> availability; // capability id -> fraction of trials
  double mission = 0.0;                       // root capability on any robot
  std::vector<std::string> device_labels;
  std::vector<std::string> capability_labels;
  stats::correlation_matrix correlation; // devices then capabilities, square
};

// Per trial: draw each device's reliability (clamped to [0, 1]), draw every
// copy on every robot, roll up. A device's variable is the fraction of robots
// on which at least one copy works; a capability's is whether any robot has it.
[[nodiscard]] inline reliability_result reliability_mc(const availability_model &m, std::size_t n_trials,
                                                       std::uint64_t seed, unsigned jobs = 0) {
  detail::require_valid(m, "reliability_mc");
  if (n_trials == 0)
    throw std::invalid_argument("reliability_mc: n_trials must be positive");
  const std::size_t nd = m.devices.size(), nc = m.capabilities.size();
  std::vector<std::vector<double>> dev_cols(nd, std::vector<double>(n_trials));
  std::vector<std::vector<double>> cap_cols(nc, std::vector<double>(n_trials));

  parallel_for(n_trials, jobs, [&](std::size_t trial) {
    stpn::rng random{stpn::rng::derive(seed, trial)};
    std::vector<double> p(nd);
    for (std::size_t i = 0; i < nd; ++i) {
      const auto &d = m.devices[i];
      const double draw = d.reliability_distribution ? d.reliability_distribution->draw(random) : d.reliability;
      p[i] = std::clamp(draw, 0.0, 1.0);
    }
    std::vector<double> dev_up(nd, 0.0);
    std::vector<double> cap_any(nc, 0.0);
    for (std::int64_t robot = 0; robot < m.n_systems; ++robot) {
      device_states state;
      for (std::size_t i = 0; i < nd; ++i) {
        bool up = false;
        for (std::int64_t copy = 0; copy < m.devices[i].redundancy; ++copy)
          up = random.bernoulli(p[i]) || up;
        state[m.devices[i].id] = up;
        dev_up[i] += up ? 1.0 : 0.0;
      }
      const auto caps = capability_rollup(m, state);
      for (std::size_t c = 0; c < nc; ++c)
        if (caps.at(m.capabilities[c].id))
          cap_any[c] = 1.0;
    }
    for (std::size_t i = 0; i < nd; ++i)
      dev_cols[i][trial] = dev_up[i] / static_cast<double>(m.n_systems);
    for (std::size_t c = 0; c < nc; ++c)
      cap_cols[c][trial] = cap_any[c];
  });

  reliability_result out;
  out.n_trials = n_trials;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> columns;
  for (std::size_t i = 0; i < nd; ++i) {
    out.device_labels.push_back(m.devices[i].id);
    labels.push_back(m.devices[i].id);
    columns.push_back(dev_cols[i]);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const auto &id = m.capabilities[c].id;
    out.capability_labels.push_back(id);
    out.availability[id] = stats::mean(cap_cols[c]);
    labels.push_back(id);
    columns.push_back(cap_cols[c]);
  }
  out.mission = out.availability.at(m.mission_capability);
  out.correlation = stats::correlate_columns(labels, columns);
  return out;
}

//==============================================================================
// Redundancy sweeps

enum class sweep_axis { subsystem, system };

struct sweep_point {
  std::int64_t count = 0;
  double availability = 0.0;
};

// subsystem: every device gets redundancy k (and, if given, reliability r);
// system: n_systems = N.
[[nodiscard]] inline std::vector<sweep_point> redundancy_sweep(const availability_model &m, sweep_axis axis,
                                                               std::int64_t from, std::int64_t to,
                                                               std::optional<double> reliability = {}) {
  if (from < 1 || to < from)
    throw std::invalid_argument("redundancy_sweep: range must satisfy 1 <= from <= to");
  std::vector<sweep_point> out;
  for (std::int64_t k = from; k <= to; ++k) {
    availability_model v = m;
    if (axis == sweep_axis::subsystem) {
      for (auto &d : v.devices) {
        d.redundancy = k;
        if (reliability)
          d.reliability = *reliability;
      }
    } else {
      v.n_systems = k;
      if (reliability)
        for (auto &d : v.devices)
          d.reliability = *reliability;
    }
    out.push_back({k, mission_availability(v)});
  }
  return out;
}

//==============================================================================
// Petri-net view

// Executable capability net equivalent to the DAG. Device places hold one
// token per working copy; each capability c has a place `c` (available) and
// `c_unavailable` (initially 1) that its enabling transition consumes, so it
// fires once. any_of capabilities get one enabling transition per
// alternative competing for that token. All durations are zero. With several
// robots, per-robot elements are prefixed `r<i>.` and the root place is fed by
// any robot.
[[nodiscard]] inline net to_capability_net(const availability_model &m,
                                           const std::map<std::string, std::int64_t> &working_copies = {}) {
  detail::require_valid(m, "to_capability_net");
  net out;
  out.policy = conflict_policy::fixed_priority;
  out.metadata["id"] = "capability";
  out.metadata["kind"] = "capability";

  const bool multi = m.n_systems > 1;
  auto level_of = [&](const capability &c) {
    if (!c.level.empty())
      return c.level;
    return c.id == m.mission_capability ? std::string("mission") : std::string("system");
  };

  auto add_enabler = [&](const std::string &tid, const std::string &target,
                         const std::vector<std::string> &children, const std::string &level) {
    transition t;
    t.id = tid;
    t.duration = duration_distribution::constant(0.0);
    t.inputs.push_back({target + "_unavailable", 1});
    for (const auto &ch : children) {
      t.inputs.push_back({ch, 1});
      t.outputs.push_back({ch, 1});
    }
    t.outputs.push_back({target, 1});
    t.max_instances = 1;
    t.tags["level"] = level;
    out.transitions.push_back(std::move(t));
  };

  for (std::int64_t robot = 0; robot < m.n_systems; ++robot) {
    const std::string prefix = multi ? "r" + std::to_string(robot + 1) + "." : "";
    for (const auto &d : m.devices) {
      place p;
      p.id = prefix + d.id;
      p.name = d.id;
      auto it = working_copies.find(d.id);
      p.initial_tokens = it != working_copies.end() ? it->second : d.redundancy;
      p.tags["level"] = "subsystem";
      p.tags["role"] = "device";
      out.places.push_back(std::move(p));
    }
    for (const auto &c : m.capabilities) {
      const std::string level = level_of(c);
      place avail;
      avail.id = prefix + c.id;
      avail.name = c.id;
      avail.tags["level"] = level;
      avail.tags["role"] = "capability";
      place missing;
      missing.id = prefix + c.id + "_unavailable";
      missing.initial_tokens = 1;
      missing.tags["level"] = level;
      missing.tags["role"] = "capability_gate";
      out.places.push_back(std::move(avail));
      out.places.push_back(std::move(missing));

      std::vector<std::string> children;
      for (const auto &r : c.depends_on)
        children.push_back(prefix + r);
      if (c.mode == combinator::all_of) {
        add_enabler(prefix + "enable_" + c.id, prefix + c.id, children, level);
      } else {
        for (std::size_t i = 0; i < children.size(); ++i)
          add_enabler(prefix + "enable_" + c.id + "_via_" + c.depends_on[i], prefix + c.id, {children[i]},
                      level);
      }
    }
  }

  std::string root = m.mission_capability;
  if (multi) {
    place avail;
    avail.id = root;
    avail.name = root;
    avail.tags["level"] = "mission";
    avail.tags["role"] = "capability";
    place missing;
    missing.id = root + "_unavailable";
    missing.initial_tokens = 1;
    missing.tags["level"] = "mission";
    missing.tags["role"] = "capability_gate";
    out.places.push_back(std::move(avail));
    out.places.push_back(std::move(missing));
    for (std::int64_t robot = 0; robot < m.n_systems; ++robot) {
      const std::string prefix = "r" + std::to_string(robot + 1) + ".";
      add_enabler("enable_" + root + "_via_r" + std::to_string(robot + 1), root, {prefix + root},
                  "mission");
    }
  }

  goal_predicate g;
  g.tokens.push_back({root, comparator::greater_equal, 1});
  out.goal = g;
  return out;
}

} // namespace stpn
