#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "net.hpp"

namespace stpn {

// Copy of the net with time and continuous resources stripped: every duration
// becomes constant 0, resources and rates are removed, and resource goal
// conditions are dropped. Token structure and inhibitor arcs are kept.
[[nodiscard]] inline net untimed_skeleton(const net &n) {
  if (!validate_net(n).valid())
    throw std::invalid_argument("untimed_skeleton: net is not valid");
  net out = n;
  out.resources.clear();
  for (auto &t : out.transitions) {
    t.duration = duration_distribution::constant(0.0);
    t.rates.clear();
  }
  if (out.goal)
    out.goal->resources.clear();
  return out;
}

using marking = std::vector<std::int64_t>;

struct reachability_result {
  std::vector<marking> markings;    // breadth-first discovery order
  std::vector<bool> deadlock;       // parallel to markings; only for expanded ones
  std::vector<bool> expanded;       // successors fully explored
  std::vector<std::string> dead_transitions; // never enabled in any expanded marking
  bool truncated = false;

  [[nodiscard]] std::size_t deadlock_count() const {
    return static_cast<std::size_t>(std::count(deadlock.begin(), deadlock.end(), true));
  }
};

namespace detail {

struct untimed_transition {
  std::vector<std::pair<std::size_t, std::int64_t>> inputs, outputs;
  std::vector<std::size_t> inhibitors;
};

inline std::vector<untimed_transition> compile_untimed(const net &n) {
  std::vector<untimed_transition> out;
  out.reserve(n.transitions.size());
  for (const auto &t : n.transitions) {
    untimed_transition u;
    for (const auto &a : t.inputs)
      u.inputs.emplace_back(*n.place_index(a.place), a.weight);
    for (const auto &a : t.outputs)
      u.outputs.emplace_back(*n.place_index(a.place), a.weight);
    for (const auto &p : t.inhibitors)
      u.inhibitors.push_back(*n.place_index(p));
    out.push_back(std::move(u));
  }
  return out;
}

inline bool untimed_enabled(const untimed_transition &t, const marking &m) {
  for (auto p : t.inhibitors)
    if (m[p] > 0)
      return false;
  for (auto [p, w] : t.inputs)
    if (m[p] < w)
      return false;
  return true;
}

inline marking untimed_fire(const untimed_transition &t, marking m) {
  for (auto [p, w] : t.inputs)
    m[p] -= w;
  for (auto [p, w] : t.outputs)
    m[p] += w;
  return m;
}

} // namespace detail

// Breadth-first exploration of token markings under atomic untimed firing.
// Markings are indexed by the net's place order. At most max_states markings
// are recorded; when more exist the result is flagged truncated and the
// unexpanded frontier carries no deadlock verdict.
[[nodiscard]] inline reachability_result reachable_markings(const net &n, std::size_t max_states) {
  const net skeleton = untimed_skeleton(n);
  const auto ts = detail::compile_untimed(skeleton);

  reachability_result out;
  std::map<marking, std::size_t> seen;
  std::vector<bool> ever_enabled(ts.size(), false);

  marking initial;
  for (const auto &p : skeleton.places)
    initial.push_back(p.initial_tokens);

  if (max_states == 0) {
    out.truncated = true;
    return out;
  }

  seen.emplace(initial, 0);
  out.markings.push_back(initial);
  out.deadlock.push_back(false);
  out.expanded.push_back(false);

  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const std::size_t current = frontier.front();
    frontier.pop_front();
    bool any = false;
    bool complete = true;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!detail::untimed_enabled(ts[i], out.markings[current]))
        continue;
      any = true;
      ever_enabled[i] = true;
      marking next = detail::untimed_fire(ts[i], out.markings[current]);
      if (seen.count(next))
        continue;
      if (out.markings.size() >= max_states) {
        out.truncated = true;
        complete = false;
        continue;
      }
      seen.emplace(next, out.markings.size());
      out.markings.push_back(std::move(next));
      out.deadlock.push_back(false);
      out.expanded.push_back(false);
      frontier.push_back(out.markings.size() - 1);
    }
    out.expanded[current] = complete;
    out.deadlock[current] = !any;
  }

  for (std::size_t i = 0; i < ts.size(); ++i)
    if (!ever_enabled[i])
      out.dead_transitions.push_back(skeleton.transitions[i].id);
  std::sort(out.dead_transitions.begin(), out.dead_transitions.end());
  return out;
}

} // namespace stpn
