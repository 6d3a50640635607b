#pragma once

// Seeded generators of random nets and availability models for property tests.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "stpn/availability.hpp"
#include "stpn/net.hpp"
#include "stpn/rng.hpp"

namespace stpn::fixtures {

struct net_options {
  int min_places = 2;
  int max_places = 6;
  int min_transitions = 1;
  int max_transitions = 5;
  int max_resources = 2;
  int max_tokens = 3;
  int max_weight = 2;
  bool stochastic = true;   // normal/uniform durations
  bool inhibitors = true;
  bool source_transitions = true; // transitions without inputs
  bool goal = true;
  bool decorate = true;     // names, tags, metadata with awkward characters
};

inline const std::vector<std::string> &awkward_names() {
  static const std::vector<std::string> names{
      "",           "Robot pool", "say \"hi\"", "comma, inside", "colon: yes", "#hash", "tab\there",
      "line\nbreak", "\xc3\xa9nergie", "- dash", "[brackets]", "{braces}", "back\\slash", "'single'", "  spaced  ",
      "yes", "null", "123", "1e3", "~",
  };
  return names;
}

// A quarter-unit grid keeps every generated real exactly representable in
// nine significant digits.
inline double grid(stpn::rng &r, int lo, int hi, double step = 0.25) {
  return static_cast<double>(r.integer(lo, hi)) * step;
}

[[nodiscard]] inline net random_net(std::uint64_t seed, const net_options &o = {}) {
  stpn::rng r{seed};
  net n;
  const auto np = r.integer(o.min_places, o.max_places);
  const auto nt = r.integer(o.min_transitions, o.max_transitions);
  const auto nr = r.integer(0, o.max_resources);
  const auto &names = awkward_names();
  auto pick_name = [&] { return o.decorate ? names[r.index(names.size())] : std::string(); };

  for (std::int64_t i = 0; i < np; ++i) {
    place p;
    p.id = "p" + std::to_string(i);
    p.name = pick_name();
    p.initial_tokens = r.integer(0, o.max_tokens);
    if (o.decorate && r.bernoulli(0.3))
      p.tags["level"] = std::vector<std::string>{"mission", "system", "subsystem"}[r.index(3)];
    n.places.push_back(std::move(p));
  }
  for (std::int64_t i = 0; i < nr; ++i) {
    resource res;
    res.id = "r" + std::to_string(i);
    res.name = pick_name();
    res.min_level = r.bernoulli(0.5) ? 0.0 : grid(r, 0, 20);
    res.initial_level = res.min_level + grid(r, 0, 80);
    if (r.bernoulli(0.5))
      res.max_level = res.initial_level + grid(r, 0, 40);
    n.resources.push_back(std::move(res));
  }
  for (std::int64_t i = 0; i < nt; ++i) {
    transition t;
    t.id = "t" + std::to_string(i);
    t.name = pick_name();
    const int kind = o.stochastic ? static_cast<int>(r.index(3)) : 0;
    if (kind == 0)
      t.duration = duration_distribution::constant(grid(r, 0, 16));
    else if (kind == 1)
      t.duration = duration_distribution::normal(grid(r, 0, 16), grid(r, 0, 8));
    else {
      const double lo = grid(r, 0, 12);
      t.duration = duration_distribution::uniform(lo, lo + grid(r, 0, 8));
    }
    std::vector<std::size_t> order(static_cast<std::size_t>(np));
    for (std::size_t k = 0; k < order.size(); ++k)
      order[k] = k;
    // shuffle with the generator so nets depend on the seed only
    for (std::size_t k = order.size(); k > 1; --k)
      std::swap(order[k - 1], order[r.index(k)]);
    std::size_t cursor = 0;
    const auto n_in = r.integer(o.source_transitions ? 0 : 1, std::min<std::int64_t>(2, np));
    for (std::int64_t k = 0; k < n_in; ++k)
      t.inputs.push_back({n.places[order[cursor++ % order.size()]].id, r.integer(1, o.max_weight)});
    const auto n_out = r.integer(0, 2);
    for (std::int64_t k = 0; k < n_out; ++k) {
      const auto &id = n.places[r.index(static_cast<std::size_t>(np))].id;
      if (std::none_of(t.outputs.begin(), t.outputs.end(), [&](const arc &a) { return a.place == id; }))
        t.outputs.push_back({id, r.integer(1, o.max_weight)});
    }
    if (o.inhibitors && r.bernoulli(0.3))
      t.inhibitors.push_back(n.places[order[cursor++ % order.size()]].id);
    for (const auto &res : n.resources)
      if (r.bernoulli(0.5)) {
        double rate = grid(r, -16, 8, 0.125);
        if (rate == 0.0)
          rate = -1.0;
        t.rates.push_back({res.id, rate});
      }
    t.priority = r.integer(0, 3);
    // an unbounded source would fire without limit at a single instant
    if (t.inputs.empty() || r.bernoulli(0.4))
      t.max_instances = r.integer(1, 3);
    if (o.decorate && r.bernoulli(0.3))
      t.tags["note"] = pick_name();
    n.transitions.push_back(std::move(t));
  }
  // at most one arc of each kind per (transition, place)
  for (auto &t : n.transitions) {
    std::vector<arc> unique_inputs;
    for (const auto &a : t.inputs)
      if (std::none_of(unique_inputs.begin(), unique_inputs.end(), [&](const arc &b) { return b.place == a.place; }))
        unique_inputs.push_back(a);
    t.inputs = std::move(unique_inputs);
    std::sort(t.inhibitors.begin(), t.inhibitors.end());
    t.inhibitors.erase(std::unique(t.inhibitors.begin(), t.inhibitors.end()), t.inhibitors.end());
  }

  n.policy = static_cast<conflict_policy>(r.index(3));
  if (o.goal && r.bernoulli(0.7)) {
    goal_predicate g;
    const auto &p = n.places[r.index(n.places.size())];
    g.tokens.push_back({p.id, static_cast<comparator>(r.index(3)), r.integer(0, 4)});
    if (!n.resources.empty() && r.bernoulli(0.3))
      g.resources.push_back({n.resources.front().id, comparator::greater_equal, grid(r, 0, 40)});
    if (r.bernoulli(0.5))
      g.deadline = grid(r, 0, 120);
    n.goal = std::move(g);
  }
  if (o.decorate) {
    n.metadata["id"] = "net" + std::to_string(seed);
    if (r.bernoulli(0.5))
      n.metadata["comment"] = pick_name();
  }
  return n;
}

// Layered acyclic model; devices are shared freely between capabilities so
// the per-robot availability is not a plain product in general.
[[nodiscard]] inline availability_model random_model(std::uint64_t seed, int max_devices = 10) {
  stpn::rng r{seed};
  availability_model m;
  const auto nd = r.integer(1, max_devices);
  for (std::int64_t i = 0; i < nd; ++i) {
    device d;
    d.id = "d" + std::to_string(i);
    d.reliability = static_cast<double>(r.integer(0, 100)) / 100.0;
    d.redundancy = r.integer(1, 3);
    m.devices.push_back(std::move(d));
  }
  std::vector<std::string> pool;
  for (const auto &d : m.devices)
    pool.push_back(d.id);
  const auto nc = r.integer(1, 5);
  for (std::int64_t i = 0; i < nc; ++i) {
    capability c;
    c.id = "c" + std::to_string(i);
    c.mode = r.bernoulli(0.5) ? combinator::all_of : combinator::any_of;
    const auto k = r.integer(1, std::min<std::int64_t>(3, static_cast<std::int64_t>(pool.size())));
    std::vector<std::string> choices = pool;
    for (std::int64_t j = 0; j < k; ++j) {
      const auto at = r.index(choices.size());
      c.depends_on.push_back(choices[at]);
      choices.erase(choices.begin() + static_cast<std::ptrdiff_t>(at));
    }
    pool.push_back(c.id);
    m.capabilities.push_back(std::move(c));
  }
  // root over every capability not yet used, so none is orphaned
  capability root;
  root.id = "root";
  root.mode = r.bernoulli(0.5) ? combinator::all_of : combinator::any_of;
  std::vector<std::string> used;
  for (const auto &c : m.capabilities)
    used.insert(used.end(), c.depends_on.begin(), c.depends_on.end());
  for (const auto &id : pool)
    if (std::find(used.begin(), used.end(), id) == used.end())
      root.depends_on.push_back(id);
  m.capabilities.push_back(std::move(root));
  m.mission_capability = "root";
  m.n_systems = r.integer(1, 3);
  return m;
}

// Plain all_of chain: every device feeds the root directly.
[[nodiscard]] inline availability_model product_model(const std::vector<double> &reliabilities,
                                                      std::int64_t n_systems = 1) {
  availability_model m;
  capability root{"mission", combinator::all_of, {}, "mission"};
  for (std::size_t i = 0; i < reliabilities.size(); ++i) {
    m.devices.push_back({"d" + std::to_string(i), reliabilities[i], 1, std::nullopt});
    root.depends_on.push_back("d" + std::to_string(i));
  }
  m.capabilities.push_back(std::move(root));
  m.mission_capability = "mission";
  m.n_systems = n_systems;
  return m;
}

} // namespace stpn::fixtures
