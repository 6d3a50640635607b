#pragma once

// Small nets whose event timelines were traced by hand.

#include <string>
#include <tuple>
#include <vector>

#include "stpn/net.hpp"
#include "stpn/trace.hpp"

namespace stpn::fixtures {

inline transition timed(std::string id, double d, std::vector<arc> in, std::vector<arc> out) {
  transition t;
  t.id = std::move(id);
  t.duration = duration_distribution::constant(d);
  t.inputs = std::move(in);
  t.outputs = std::move(out);
  return t;
}

inline goal_predicate at_least(const std::string &p, std::int64_t n) {
  goal_predicate g;
  g.tokens.push_back({p, comparator::greater_equal, n});
  return g;
}

// p1(1) -t(2)-> p2
inline net chain_net() {
  net n;
  n.places = {{"p1", "", 1, {}}, {"p2", "", 0, {}}};
  n.transitions = {timed("t", 2, {{"p1", 1}}, {{"p2", 1}})};
  n.goal = at_least("p2", 1);
  return n;
}

// chain with E = 5 drained at rate 1 while t runs: success at 2, E = 3
inline net energy_chain_net() {
  net n = chain_net();
  n.resources = {{"E", "", 5, 0, unbounded, {}}};
  n.transitions[0].rates = {{"E", -1}};
  return n;
}

// two tokens, E = 10, each instance draws 1/unit for 6 units. Two together
// would empty E at 5, so only one runs; afterwards 4 is left, short of 6.
inline net overdraw_net() {
  net n;
  n.places = {{"p", "", 2, {}}, {"done", "", 0, {}}};
  n.resources = {{"E", "", 10, 0, unbounded, {}}};
  n.transitions = {timed("t", 6, {{"p", 1}}, {{"done", 1}})};
  n.transitions[0].rates = {{"E", -1}};
  n.goal = at_least("done", 2);
  return n;
}

// t (4 units) is inhibited by q. u puts a token in q at 1; v (2 units) and
// the instant w clear it at 3. t runs [0,1] and [3,6].
inline net suspension_net() {
  net n;
  n.places = {{"a", "", 1, {}}, {"done", "", 0, {}}, {"f", "", 1, {}}, {"q", "", 0, {}},
              {"h", "", 0, {}}, {"k", "", 0, {}}, {"z", "", 0, {}}};
  n.transitions = {
      timed("t", 4, {{"a", 1}}, {{"done", 1}}),
      timed("u", 1, {{"f", 1}}, {{"q", 1}, {"h", 1}}),
      timed("v", 2, {{"h", 1}}, {{"k", 1}}),
      timed("w", 0, {{"k", 1}, {"q", 1}}, {{"z", 1}}),
  };
  n.transitions[0].inhibitors = {"q"};
  n.goal = at_least("done", 1);
  return n;
}

// goal holds iff a (priority 3) wins the single token over b (priority 1)
inline net biased_coin_net() {
  net n;
  n.places = {{"s", "", 1, {}}, {"heads", "", 0, {}}, {"tails", "", 0, {}}};
  n.transitions = {timed("a", 1, {{"s", 1}}, {{"heads", 1}}), timed("b", 1, {{"s", 1}}, {{"tails", 1}})};
  n.transitions[0].priority = 3;
  n.transitions[1].priority = 1;
  n.policy = conflict_policy::priority_proportional;
  n.goal = at_least("heads", 1);
  return n;
}

// (time, kind, transition id or "-") per event
using timeline = std::vector<std::tuple<double, event_kind, std::string>>;

inline timeline timeline_of(const net &n, const trace &tr) {
  timeline out;
  for (const auto &e : tr.events)
    out.emplace_back(e.time, e.kind, e.transition == no_transition ? "-" : n.transitions[e.transition].id);
  return out;
}

inline const timeline &expected_energy_chain() {
  static const timeline t{{0, event_kind::fire, "t"}, {2, event_kind::complete, "t"}, {2, event_kind::goal_reached, "-"}};
  return t;
}

inline const timeline &expected_overdraw() {
  static const timeline t{
      {0, event_kind::fire, "t"}, {6, event_kind::complete, "t"}, {6, event_kind::resource_exhausted, "-"}};
  return t;
}

inline const timeline &expected_suspension() {
  static const timeline t{
      {0, event_kind::fire, "t"},     {0, event_kind::fire, "u"},     {1, event_kind::complete, "u"},
      {1, event_kind::suspend, "t"},  {1, event_kind::fire, "v"},     {3, event_kind::complete, "v"},
      {3, event_kind::fire, "w"},     {3, event_kind::resume, "t"},   {3, event_kind::complete, "w"},
      {6, event_kind::complete, "t"}, {6, event_kind::goal_reached, "-"},
  };
  return t;
}

} // namespace stpn::fixtures
