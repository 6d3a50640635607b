#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace stpn {

enum class event_kind {
  fire,
  complete,
  suspend,
  resume,
  inhibited,
  deadlock,
  goal_reached,
  deadline_exceeded,
  resource_exhausted,
};

[[nodiscard]] inline std::string_view to_string(event_kind k) {
  switch (k) {
  case event_kind::fire:
    return "fire";
  case event_kind::complete:
    return "complete";
  case event_kind::suspend:
    return "suspend";
  case event_kind::resume:
    return "resume";
  case event_kind::inhibited:
    return "inhibited";
  case event_kind::deadlock:
    return "deadlock";
  case event_kind::goal_reached:
    return "goal_reached";
  case event_kind::deadline_exceeded:
    return "deadline_exceeded";
  case event_kind::resource_exhausted:
    return "resource_exhausted";
  }
  return "?";
}

enum class outcome { success, timeout, deadlock, resource_failure };

[[nodiscard]] inline std::string_view to_string(outcome o) {
  switch (o) {
  case outcome::success:
    return "success";
  case outcome::timeout:
    return "timeout";
  case outcome::deadlock:
    return "deadlock";
  case outcome::resource_failure:
    return "resource_failure";
  }
  return "?";
}

inline constexpr std::size_t no_transition = std::numeric_limits<std::size_t>::max();

struct token_delta {
  std::size_t place = 0;
  std::int64_t amount = 0;

  bool operator==(const token_delta &) const = default;
};

// Continuous change applied to a resource by one clock advance. An event
// carries every advance since the previous event, in application order, so a
// left fold over all deltas reproduces the engine's floating-point levels.
struct resource_delta {
  std::size_t resource = 0;
  double amount = 0.0;

  bool operator==(const resource_delta &) const = default;
};

struct event {
  double time = 0.0;
  event_kind kind = event_kind::fire;
  std::size_t transition = no_transition; // index into net::transitions
  std::uint64_t instance = 0;             // 0 when not instance-related
  std::uint64_t sequence = 0;
  std::vector<token_delta> tokens;
  std::vector<resource_delta> resources;

  bool operator==(const event &) const = default;
};

struct trajectory_sample {
  double time = 0.0;
  std::vector<std::int64_t> tokens;
  std::vector<double> levels;

  bool operator==(const trajectory_sample &) const = default;
};

struct trace {
  std::vector<event> events;
  std::vector<trajectory_sample> trajectory;
  outcome result = outcome::deadlock;
  double final_time = 0.0;
  bool goal_reached = false; // goal predicate held when the run stopped
  bool truncated = false;    // max_events hit
  std::vector<std::int64_t> initial_tokens;
  std::vector<double> initial_levels;
  std::vector<std::int64_t> final_tokens;
  std::vector<double> final_levels;

  bool operator==(const trace &) const = default;
};

} // namespace stpn
