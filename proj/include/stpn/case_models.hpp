#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "availability.hpp"
#include "compose.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "net.hpp"

// Tower-building case study: three boxes are stacked into a tower by a fleet
// of robots within 60 time units (1 unit = 10 s). Three views of the same
// mission are provided, plus the fusion map tying them together and the
// sampling specifications used by the batch experiments.

namespace stpn::case_study {

inline constexpr std::int64_t boxes = 3;
inline constexpr double deadline = 60.0;

// Stack Box duration at mission level. Three sequential boxes with one robot
// give mean 3 * 18.3 = 54.9 and P(T <= 60) ~ 0.72.
inline constexpr double stack_mean = 18.3;
inline constexpr double stack_sd = 5.0;

struct action_params {
  const char *id;
  const char *capability; // its gate place is <capability>_unavailable
  double mean;
  double sd;
  double energy_rate; // drawn from E while running
};

// System-level decomposition of one Stack Box. Means add up to the mission
// figure; place happens at the shared tower.
inline const std::vector<action_params> &system_actions() {
  static const std::vector<action_params> actions{
      {"detect", "detection", 2.0, 0.6, 0.4},
      {"track", "tracking", 3.0, 0.9, 0.4},
      {"approach", "approach", 5.3, 2.0, 0.9},
      {"manipulate", "manipulation", 4.0, 1.2, 0.9},
      {"begin_place", "manipulation", 0.5, 0.1, 0.5},
      {"place", "manipulation", 3.5, 1.0, 0.5},
  };
  return actions;
}

inline constexpr double energy_min = 10.0;
inline constexpr double energy_max = 100.0;

struct bundle {
  net mission;
  net system;
  net capability;
  fusion_map fusion;
  sampling_spec q1_mission;
  sampling_spec q1_system;
  availability_model q2_capability;

  // file name -> canonical document text
  [[nodiscard]] std::map<std::string, std::string> files() const {
    std::map<std::string, std::string> out;
    out["mission.pnet"] = io::serialize_net(mission);
    out["system.pnet"] = io::serialize_net(system);
    out["capability.pnet"] = io::serialize_net(capability);
    out["fusion.map"] = io::serialize_fusion(fusion);
    out["q1_mission.sampling"] = io::serialize_sampling(q1_mission);
    out["q1_system.sampling"] = io::serialize_sampling(q1_system);
    out["q2_capability.model"] = io::serialize_availability(q2_capability);
    return out;
  }

  [[nodiscard]] net merged() const {
    const std::vector<named_net> nets{{"mission", mission}, {"system", system}, {"capability", capability}};
    return merge_nets(nets, fusion);
  }
};

namespace detail {

inline place make_place(std::string id, std::string name, std::int64_t tokens, std::string level) {
  place p;
  p.id = std::move(id);
  p.name = std::move(name);
  p.initial_tokens = tokens;
  p.tags["level"] = std::move(level);
  return p;
}

inline goal_predicate tower_goal() {
  goal_predicate g;
  g.tokens.push_back({"stacked", comparator::greater_equal, boxes});
  g.deadline = deadline;
  return g;
}

} // namespace detail

[[nodiscard]] inline net mission_net(std::int64_t robots = 1) {
  net n;
  n.metadata["id"] = "mission";
  n.metadata["description"] = "Mission-level coordination: robots stack three boxes into a tower";
  n.metadata["time_unit"] = "1 unit = 10 s";
  n.metadata["note.deadline"] = "tower complete within 60 units (10 min)";
  n.metadata["note.stack_box"] =
      "duration normal(18.3, 5): one robot needs ~54.9 units for three boxes, ~72% within the deadline";
  n.metadata["note.robots"] = "robot count is sampled per run, see q1_mission.sampling";
  n.places.push_back(detail::make_place("boxes", "Green boxes", boxes, "mission"));
  n.places.push_back(detail::make_place("robots", "Idle robots", robots, "mission"));
  n.places.push_back(detail::make_place("stacked", "Boxes on the tower", 0, "mission"));
  n.places.push_back(detail::make_place("stacking_unavailable", "Stacking capability lost", 0, "mission"));

  transition t;
  t.id = "stack_box";
  t.name = "Stack Box";
  t.duration = duration_distribution::normal(stack_mean, stack_sd);
  t.inputs = {{"boxes", 1}, {"robots", 1}};
  t.outputs = {{"robots", 1}, {"stacked", 1}};
  t.inhibitors = {"stacking_unavailable"};
  t.tags["level"] = "mission";
  n.transitions.push_back(std::move(t));
  n.goal = detail::tower_goal();
  return n;
}

[[nodiscard]] inline net system_net(std::int64_t robots = 1, double energy = energy_max) {
  net n;
  n.metadata["id"] = "system";
  n.metadata["description"] = "System-level decomposition of Stack Box into perception and manipulation actions";
  n.metadata["time_unit"] = "1 unit = 10 s";
  n.metadata["note.energy"] =
      "shared fleet energy E must stay at or above 10% of capacity; each action drains E while it runs";
  n.metadata["note.tower"] =
      "only one robot places at a time; approach waits while the tower is busy";
  n.metadata["note.capabilities"] =
      "each action is inhibited while the capability it needs is unavailable (fused with capability.pnet)";
  n.metadata["note.durations"] = "action means sum to the mission-level Stack Box mean of 18.3";

  n.places.push_back(detail::make_place("boxes", "Green boxes", boxes, "mission"));
  n.places.push_back(detail::make_place("robots", "Idle robots", robots, "system"));
  n.places.push_back(detail::make_place("detected", "Box detected", 0, "system"));
  n.places.push_back(detail::make_place("tracked", "Box tracked", 0, "system"));
  n.places.push_back(detail::make_place("approached", "At the box", 0, "system"));
  n.places.push_back(detail::make_place("holding", "Box grasped", 0, "system"));
  n.places.push_back(detail::make_place("placing", "Placing on tower", 0, "system"));
  n.places.push_back(detail::make_place("tower_free", "Tower free", 1, "mission"));
  n.places.push_back(detail::make_place("tower_busy", "Tower busy", 0, "mission"));
  n.places.push_back(detail::make_place("stacked", "Boxes on the tower", 0, "mission"));
  // gate levels follow the capability they stand for
  for (const auto &[cap, level] : std::vector<std::pair<std::string, std::string>>{
           {"detection", "subsystem"}, {"tracking", "subsystem"}, {"approach", "system"}, {"manipulation", "system"}})
    n.places.push_back(detail::make_place(cap + "_unavailable", cap + " capability lost", 0, level));

  resource e;
  e.id = "E";
  e.name = "Fleet energy";
  e.initial_level = energy;
  e.min_level = energy_min;
  e.max_level = energy_max;
  e.tags["level"] = "system";
  n.resources.push_back(std::move(e));

  const std::map<std::string, std::pair<std::vector<arc>, std::vector<arc>>> flow{
      {"detect", {{{"boxes", 1}, {"robots", 1}}, {{"detected", 1}}}},
      {"track", {{{"detected", 1}}, {{"tracked", 1}}}},
      {"approach", {{{"tracked", 1}}, {{"approached", 1}}}},
      {"manipulate", {{{"approached", 1}}, {{"holding", 1}}}},
      {"begin_place", {{{"holding", 1}, {"tower_free", 1}}, {{"placing", 1}, {"tower_busy", 1}}}},
      {"place", {{{"placing", 1}, {"tower_busy", 1}}, {{"stacked", 1}, {"robots", 1}, {"tower_free", 1}}}},
  };
  for (const auto &a : system_actions()) {
    transition t;
    t.id = a.id;
    t.duration = duration_distribution::normal(a.mean, a.sd);
    t.inputs = flow.at(a.id).first;
    t.outputs = flow.at(a.id).second;
    t.inhibitors = {std::string(a.capability) + "_unavailable"};
    if (t.id == "approach")
      t.inhibitors.push_back("tower_busy");
    t.rates = {{"E", -a.energy_rate}};
    t.tags["level"] = "system";
    n.transitions.push_back(std::move(t));
  }
  n.goal = detail::tower_goal();
  return n;
}

// Device and capability DAG of one robot.
[[nodiscard]] inline availability_model capability_model() {
  availability_model m;
  const sampler reliability{sampler_kind::normal, 0.9, 0.05};
  for (const char *d : {"locomotion", "gripper", "mast", "camera"})
    m.devices.push_back({d, 0.9, 1, reliability});
  m.capabilities.push_back({"detection", combinator::all_of, {"camera", "mast"}, "subsystem"});
  m.capabilities.push_back({"tracking", combinator::all_of, {"camera", "mast"}, "subsystem"});
  m.capabilities.push_back({"approach", combinator::all_of, {"locomotion", "camera"}, "system"});
  m.capabilities.push_back({"manipulation", combinator::all_of, {"gripper", "locomotion"}, "system"});
  m.capabilities.push_back(
      {"stacking", combinator::all_of, {"detection", "tracking", "approach", "manipulation"}, "mission"});
  m.mission_capability = "stacking";
  m.n_systems = 1;
  return m;
}

[[nodiscard]] inline net capability_net() {
  net n = to_capability_net(capability_model());
  n.metadata["description"] = "Capability view: devices enable capabilities up to the stacking mission";
  n.metadata["note.devices"] = "one token per working device copy; remove a token to disable a device";
  n.metadata["note.gates"] =
      "<capability>_unavailable holds a token until the capability is established";
  return n;
}

[[nodiscard]] inline fusion_map fusion() {
  fusion_map f;
  f.prefix = prefix_policy::net_id;
  f.places.push_back({"stacking_unavailable",
                      {{"mission", "stacking_unavailable"}, {"capability", "stacking_unavailable"}},
                      "capability"});
  for (const char *cap : {"detection", "tracking", "approach", "manipulation"}) {
    const std::string gate = std::string(cap) + "_unavailable";
    f.places.push_back({gate, {{"system", gate}, {"capability", gate}}, "capability"});
  }
  return f;
}

[[nodiscard]] inline sampling_spec q1_mission_sampling() {
  sampling_spec s;
  s.entries.push_back({"robots", {target_kind::initial_tokens, "robots", ""},
                       {sampler_kind::integer_uniform, 1, 4}});
  return s;
}

[[nodiscard]] inline sampling_spec q1_system_sampling() {
  sampling_spec s;
  s.entries.push_back({"robots", {target_kind::initial_tokens, "robots", ""},
                       {sampler_kind::integer_uniform, 1, 4}});
  s.entries.push_back({"energy", {target_kind::initial_level, "E", ""}, {sampler_kind::uniform, 30, 100}});
  return s;
}

[[nodiscard]] inline bundle build_case_models() {
  bundle b;
  b.mission = mission_net();
  b.system = system_net();
  b.capability = capability_net();
  b.fusion = fusion();
  b.q1_mission = q1_mission_sampling();
  b.q1_system = q1_system_sampling();
  b.q2_capability = capability_model();
  return b;
}

} // namespace stpn::case_study
