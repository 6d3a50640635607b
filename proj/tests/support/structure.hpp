#pragma once

#include <algorithm>
#include <tuple>

#include "stpn/net.hpp"

namespace stpn::fixtures {

// Declaration order carries no meaning, so compare nets with every list sorted.
inline net normalized(net n) {
  auto by_id = [](const auto &a, const auto &b) { return a.id < b.id; };
  std::sort(n.places.begin(), n.places.end(), by_id);
  std::sort(n.resources.begin(), n.resources.end(), by_id);
  std::sort(n.transitions.begin(), n.transitions.end(), by_id);
  for (auto &t : n.transitions) {
    auto by_place = [](const arc &a, const arc &b) { return a.place < b.place; };
    std::sort(t.inputs.begin(), t.inputs.end(), by_place);
    std::sort(t.outputs.begin(), t.outputs.end(), by_place);
    std::sort(t.inhibitors.begin(), t.inhibitors.end());
    std::sort(t.rates.begin(), t.rates.end(),
              [](const resource_rate &a, const resource_rate &b) { return a.resource < b.resource; });
  }
  if (n.goal) {
    auto &g = *n.goal;
    std::sort(g.tokens.begin(), g.tokens.end(), [](const token_condition &a, const token_condition &b) {
      return std::tie(a.place, a.op, a.count) < std::tie(b.place, b.op, b.count);
    });
    std::sort(g.resources.begin(), g.resources.end(), [](const resource_condition &a, const resource_condition &b) {
      return std::tie(a.resource, a.op, a.level) < std::tie(b.resource, b.op, b.level);
    });
  }
  return n;
}

} // namespace stpn::fixtures
