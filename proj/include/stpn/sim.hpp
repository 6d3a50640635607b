#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "net.hpp"
#include "rng.hpp"
#include "trace.hpp"

namespace stpn {

enum class instance_status { running, suspended };

struct active_instance {
  std::size_t transition = 0;
  std::uint64_t instance_id = 0;
  double start_time = 0.0;
  double sampled_duration = 0.0;
  double elapsed = 0.0;
  instance_status status = instance_status::running;

  [[nodiscard]] double remaining() const { return sampled_duration - elapsed; }
};

struct sim_state {
  double clock = 0.0;
  std::vector<std::int64_t> tokens; // indexed like net::places
  std::vector<double> levels;       // indexed like net::resources
  std::vector<active_instance> active;
  stpn::rng random{0};
  std::uint64_t next_instance = 1;
};

struct sim_config {
  std::uint64_t seed = 0;
  double max_time = 1000.0;
  std::optional<conflict_policy> policy;
  double sample_interval = 1.0;
  std::size_t max_events = 1'000'000;
  bool stop_at_deadline = false;
  bool record_trajectory = true;
};

struct enabled_entry {
  std::size_t transition = 0;
  std::string id;
  std::int64_t count = 0; // feasible additional instances
};

struct candidate {
  std::string id;
  std::int64_t priority = 0;
};

// Upper bound reported for transitions limited by neither tokens nor
// max_instances.
inline constexpr std::int64_t unbounded_instances = std::int64_t{1} << 20;

// Compiled, index-based view of a valid net plus the firing semantics.
// Immutable after construction; any number of runs may use one engine
// concurrently.
class engine {
public:
  explicit engine(const net &n) : net_{&n} {
    auto report = validate_net(n);
    if (!report.valid()) {
      std::string msg = "invalid net:";
      for (const auto &v : report.violations)
        if (v.level == severity::error)
          msg += " " + v.message + ";";
      throw std::invalid_argument(msg);
    }
    for (const auto &t : n.transitions) {
      compiled c;
      for (const auto &a : t.inputs)
        c.inputs.emplace_back(*n.place_index(a.place), a.weight);
      for (const auto &a : t.outputs)
        c.outputs.emplace_back(*n.place_index(a.place), a.weight);
      for (const auto &p : t.inhibitors)
        c.inhibitors.push_back(*n.place_index(p));
      for (const auto &r : t.rates)
        if (r.rate != 0.0)
          c.rates.emplace_back(*n.resource_index(r.resource), r.rate);
      transitions_.push_back(std::move(c));
    }
    if (n.goal && n.goal->deadline)
      deadline_ = *n.goal->deadline;
  }

  [[nodiscard]] const net &model() const { return *net_; }

  [[nodiscard]] sim_state initial_state(std::uint64_t seed) const {
    sim_state s;
    s.random = stpn::rng{seed};
    for (const auto &p : net_->places)
      s.tokens.push_back(p.initial_tokens);
    for (const auto &r : net_->resources)
      s.levels.push_back(r.initial_level);
    return s;
  }

  //----------------------------------------------------------------------------
  // Enabling

  [[nodiscard]] bool inhibited(std::size_t t, const sim_state &s) const {
    return std::any_of(transitions_[t].inhibitors.begin(), transitions_[t].inhibitors.end(),
                       [&](std::size_t p) { return s.tokens[p] > 0; });
  }

  // Instances admissible by tokens and max_instances alone.
  [[nodiscard]] std::int64_t structural_capacity(std::size_t t, const sim_state &s) const {
    std::int64_t cap = unbounded_instances;
    for (auto [p, w] : transitions_[t].inputs)
      cap = std::min(cap, s.tokens[p] / w);
    if (const auto &bound = net_->transitions[t].max_instances) {
      const auto active = std::count_if(s.active.begin(), s.active.end(),
                                        [&](const active_instance &a) { return a.transition == t; });
      cap = std::min<std::int64_t>(cap, *bound - active);
    }
    return std::max<std::int64_t>(cap, 0);
  }

  // k candidate instances of t with the given sampled durations, projected
  // together with the currently running instances.
  [[nodiscard]] bool resource_feasible(const sim_state &s, std::size_t t,
                                       std::span<const double> durations) const {
    std::vector<std::pair<std::int64_t, double>> groups;
    groups.reserve(durations.size());
    for (double d : durations)
      groups.emplace_back(1, d);
    return feasible_groups(s, t, groups);
  }

  // Expected durations stand in for the not-yet-sampled ones; the admissible
  // set of k is an interval starting at 0, so a bisection finds its end.
  [[nodiscard]] std::int64_t feasible_count(const sim_state &s, std::size_t t) const {
    if (inhibited(t, s))
      return 0;
    const std::int64_t cap = structural_capacity(t, s);
    if (cap == 0 || transitions_[t].rates.empty())
      return cap;
    const double d = net_->transitions[t].duration.expected();
    auto ok = [&](std::int64_t k) {
      std::pair<std::int64_t, double> g{k, d};
      return feasible_groups(s, t, std::span{&g, 1});
    };
    if (!ok(1))
      return 0;
    std::int64_t lo = 1, hi = cap;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo + 1) / 2;
      if (ok(mid))
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  // Same as feasible_count(s, t) > 0 without searching for the largest k.
  [[nodiscard]] bool admissible(const sim_state &s, std::size_t t) const {
    if (inhibited(t, s) || structural_capacity(t, s) == 0)
      return false;
    if (transitions_[t].rates.empty())
      return true;
    const std::pair<std::int64_t, double> g{1, net_->transitions[t].duration.expected()};
    return feasible_groups(s, t, std::span{&g, 1});
  }

  // One entry per transition, in declaration order.
  [[nodiscard]] std::vector<enabled_entry> enabled_instances(const sim_state &s) const {
    std::vector<enabled_entry> out;
    out.reserve(transitions_.size());
    for (std::size_t t = 0; t < transitions_.size(); ++t)
      out.push_back({t, net_->transitions[t].id, feasible_count(s, t)});
    return out;
  }

  //----------------------------------------------------------------------------
  // Conflict resolution

  // Candidates are indices into net::transitions. Returns the chosen index.
  [[nodiscard]] std::optional<std::size_t> select_firing(std::span<const std::size_t> candidates,
                                                         conflict_policy policy,
                                                         stpn::rng &random) const {
    if (candidates.empty())
      return std::nullopt;
    std::vector<std::size_t> ordered(candidates.begin(), candidates.end());
    std::sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
      return net_->transitions[a].id < net_->transitions[b].id;
    });
    if (ordered.size() == 1)
      return ordered.front();
    auto priority = [&](std::size_t t) { return net_->transitions[t].priority; };

    switch (policy) {
    case conflict_policy::fixed_priority: {
      std::size_t best = ordered.front();
      for (auto t : ordered)
        if (priority(t) > priority(best))
          best = t;
      return best;
    }
    case conflict_policy::uniform_random:
      return ordered[random.index(ordered.size())];
    case conflict_policy::priority_proportional: {
      double total = 0.0;
      for (auto t : ordered)
        total += static_cast<double>(priority(t));
      if (total <= 0.0)
        return ordered[random.index(ordered.size())];
      const double u = random.uniform01() * total;
      double acc = 0.0;
      std::size_t last_positive = ordered.front();
      for (auto t : ordered) {
        if (priority(t) <= 0)
          continue;
        last_positive = t;
        acc += static_cast<double>(priority(t));
        if (u < acc)
          return t;
      }
      return last_positive;
    }
    }
    return std::nullopt;
  }

  //----------------------------------------------------------------------------
  // Termination

  [[nodiscard]] bool goal_holds(const sim_state &s) const {
    if (!net_->goal)
      return false;
    const auto &g = *net_->goal;
    for (const auto &c : g.tokens)
      if (!compare(c.op, s.tokens[*net_->place_index(c.place)], c.count))
        return false;
    for (const auto &c : g.resources)
      if (!compare(c.op, s.levels[*net_->resource_index(c.resource)], c.level))
        return false;
    return true;
  }

  // Stalled run: deadlock, unless some transition has its tokens, is not
  // inhibited, has instance headroom and is held back only by resources.
  [[nodiscard]] outcome classify_stall(const sim_state &s) const {
    for (std::size_t t = 0; t < transitions_.size(); ++t)
      if (!inhibited(t, s) && structural_capacity(t, s) > 0 && !transitions_[t].rates.empty())
        return outcome::resource_failure;
    return outcome::deadlock;
  }

  [[nodiscard]] std::optional<outcome> detect_termination(const sim_state &s,
                                                          const sim_config &config) const {
    if (goal_holds(s))
      return s.clock <= deadline_ ? outcome::success : outcome::timeout;
    if (s.clock >= config.max_time || (config.stop_at_deadline && s.clock >= deadline_))
      return outcome::timeout;
    const bool running = std::any_of(s.active.begin(), s.active.end(), [](const active_instance &a) {
      return a.status == instance_status::running;
    });
    if (running)
      return std::nullopt;
    for (std::size_t t = 0; t < transitions_.size(); ++t)
      if (admissible(s, t))
        return std::nullopt;
    return classify_stall(s);
  }

  [[nodiscard]] double sample_duration(std::size_t t, stpn::rng &random) const {
    const auto &d = net_->transitions[t].duration;
    switch (d.kind) {
    case distribution_kind::constant:
      return std::max(0.0, d.first);
    case distribution_kind::normal:
      return std::max(0.0, random.normal(d.first, d.second));
    case distribution_kind::uniform:
      return std::max(0.0, random.uniform(d.first, d.second));
    }
    return 0.0;
  }

  //----------------------------------------------------------------------------

  [[nodiscard]] trace run(const sim_config &config) const;

private:
  struct compiled {
    std::vector<std::pair<std::size_t, std::int64_t>> inputs, outputs;
    std::vector<std::size_t> inhibitors;
    std::vector<std::pair<std::size_t, double>> rates;
  };

  static bool within(double level, const resource &r) {
    const double lo_tol = 1e-9 * std::max(1.0, std::abs(r.min_level));
    if (level < r.min_level - lo_tol)
      return false;
    if (std::isfinite(r.max_level)) {
      const double hi_tol = 1e-9 * std::max(1.0, std::abs(r.max_level));
      if (level > r.max_level + hi_tol)
        return false;
    }
    return true;
  }

  // Piecewise-linear projection. Rates are constant per instance, so levels
  // are linear between instance completions and the breakpoints suffice.
  bool feasible_groups(const sim_state &s, std::size_t t,
                       std::span<const std::pair<std::int64_t, double>> groups) const {
    const auto &rates = transitions_[t].rates;
    if (rates.empty())
      return true;
    for (auto [res, cand_rate] : rates) {
      // (rate, horizon) contributions to this resource
      std::vector<std::pair<double, double>> parts;
      for (const auto &a : s.active) {
        if (a.status != instance_status::running)
          continue;
        for (auto [r2, rate] : transitions_[a.transition].rates)
          if (r2 == res)
            parts.emplace_back(rate, std::max(0.0, a.remaining()));
      }
      for (auto [count, d] : groups)
        parts.emplace_back(cand_rate * static_cast<double>(count), d);

      // sweep the breakpoints in time order; the slope drops as parts end
      const auto &spec = net_->resources[res];
      std::sort(parts.begin(), parts.end(), [](const auto &a, const auto &b) { return a.second < b.second; });
      double level = s.levels[res], slope = 0.0, at = 0.0;
      for (auto [rate, horizon] : parts)
        slope += rate;
      if (!within(level, spec))
        return false;
      for (auto [rate, horizon] : parts) {
        level += slope * (horizon - at);
        at = horizon;
        slope -= rate;
        if (!within(level, spec))
          return false;
      }
    }
    return true;
  }

  const net *net_;
  std::vector<compiled> transitions_;
  double deadline_ = std::numeric_limits<double>::infinity();
};

//==============================================================================
// Event loop

inline trace engine::run(const sim_config &config) const {
  if (!(config.max_time > 0.0) || !std::isfinite(config.max_time))
    throw std::invalid_argument("simulate: max_time must be positive and finite");
  if (!(config.sample_interval > 0.0))
    throw std::invalid_argument("simulate: sample_interval must be positive");

  const conflict_policy policy = config.policy.value_or(net_->policy);
  sim_state s = initial_state(config.seed);
  trace out;
  out.initial_tokens = s.tokens;
  out.initial_levels = s.levels;

  std::uint64_t sequence = 0;
  std::vector<resource_delta> pending;
  std::vector<bool> inhibited_flag(transitions_.size(), false);
  bool deadline_logged = false;
  std::uint64_t sample_index = 0;

  auto emit = [&](event_kind kind, std::size_t t, std::uint64_t instance,
                  std::vector<token_delta> tokens = {}) {
    event e;
    e.time = s.clock;
    e.kind = kind;
    e.transition = t;
    e.instance = instance;
    e.sequence = sequence++;
    e.tokens = std::move(tokens);
    e.resources = std::move(pending);
    pending.clear();
    out.events.push_back(std::move(e));
    if (out.events.size() >= config.max_events)
      out.truncated = true;
  };

  auto next_sample_time = [&] {
    return static_cast<double>(sample_index) * config.sample_interval;
  };
  auto record_sample = [&] {
    if (config.record_trajectory)
      out.trajectory.push_back({s.clock, s.tokens, s.levels});
  };
  while (config.record_trajectory && next_sample_time() <= s.clock) {
    record_sample();
    ++sample_index;
  }

  auto update_suspensions = [&] {
    for (auto &a : s.active) {
      const bool blocked = inhibited(a.transition, s);
      if (a.status == instance_status::running && blocked) {
        a.status = instance_status::suspended;
        emit(event_kind::suspend, a.transition, a.instance_id);
      } else if (a.status == instance_status::suspended && !blocked) {
        a.status = instance_status::running;
        emit(event_kind::resume, a.transition, a.instance_id);
      }
    }
  };

  auto finish = [&](outcome o) {
    out.result = o;
    out.final_time = s.clock;
    out.goal_reached = goal_holds(s);
  };

  for (;;) {
    if (out.truncated) {
      finish(outcome::timeout);
      break;
    }

    // Termination at the current instant, after completions.
    if (goal_holds(s)) {
      emit(event_kind::goal_reached, no_transition, 0);
      finish(s.clock <= deadline_ ? outcome::success : outcome::timeout);
      break;
    }
    if (s.clock >= deadline_ && !deadline_logged) {
      deadline_logged = true;
      emit(event_kind::deadline_exceeded, no_transition, 0);
      if (config.stop_at_deadline) {
        finish(outcome::timeout);
        break;
      }
    }
    if (s.clock >= config.max_time) {
      if (!(deadline_logged && deadline_ == s.clock))
        emit(event_kind::deadline_exceeded, no_transition, 0);
      finish(outcome::timeout);
      break;
    }

    // Firing round: one instance per selection until nothing is admissible.
    bool fired_any = false;
    std::vector<bool> rejected(transitions_.size(), false);
    for (;;) {
      std::vector<std::size_t> candidates;
      for (std::size_t t = 0; t < transitions_.size(); ++t)
        if (!rejected[t] && admissible(s, t))
          candidates.push_back(t);
      if (candidates.empty())
        break;
      const std::size_t t = *select_firing(candidates, policy, s.random);
      const double d = sample_duration(t, s.random);
      if (!resource_feasible(s, t, std::span{&d, 1})) {
        rejected[t] = true;
        continue;
      }
      std::vector<token_delta> consumed;
      for (auto [p, w] : transitions_[t].inputs) {
        s.tokens[p] -= w;
        consumed.push_back({p, -w});
      }
      const std::uint64_t id = s.next_instance++;
      s.active.push_back({t, id, s.clock, d, 0.0, instance_status::running});
      inhibited_flag[t] = false;
      emit(event_kind::fire, t, id, std::move(consumed));
      fired_any = true;
      update_suspensions();
      if (out.truncated)
        break;
    }

    // Edge-triggered record of transitions held back only by an inhibitor.
    for (std::size_t t = 0; t < transitions_.size(); ++t) {
      const bool held = inhibited(t, s) && structural_capacity(t, s) > 0;
      if (held && !inhibited_flag[t])
        emit(event_kind::inhibited, t, 0);
      inhibited_flag[t] = held;
    }

    if (fired_any)
      continue;

    const bool any_running = std::any_of(s.active.begin(), s.active.end(), [](const active_instance &a) {
      return a.status == instance_status::running;
    });
    if (!any_running) {
      const outcome o = classify_stall(s);
      emit(o == outcome::deadlock ? event_kind::deadlock : event_kind::resource_exhausted,
           no_transition, 0);
      finish(o);
      break;
    }

    // Next instant: completion, trajectory sample, deadline or horizon.
    double next = config.max_time;
    for (const auto &a : s.active)
      if (a.status == instance_status::running)
        next = std::min(next, s.clock + a.remaining());
    if (config.record_trajectory)
      next = std::min(next, next_sample_time());
    if (!deadline_logged)
      next = std::min(next, deadline_);

    // Bound crossing inside the step ends the run at the crossing instant.
    std::vector<double> net_rate(s.levels.size(), 0.0);
    for (const auto &a : s.active)
      if (a.status == instance_status::running)
        for (auto [r, rate] : transitions_[a.transition].rates)
          net_rate[r] += rate;
    double crossing = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < s.levels.size(); ++r) {
      const auto &spec = net_->resources[r];
      if (net_rate[r] < 0.0)
        crossing = std::min(crossing, s.clock + (s.levels[r] - spec.min_level) / -net_rate[r]);
      else if (net_rate[r] > 0.0 && std::isfinite(spec.max_level))
        crossing = std::min(crossing, s.clock + (spec.max_level - s.levels[r]) / net_rate[r]);
    }
    const bool exhausts = crossing < next && (next - crossing) > 1e-9 * std::max(1.0, next);
    if (exhausts)
      next = std::max(s.clock, crossing);

    const double step = next - s.clock;
    if (step > 0.0) {
      for (auto &a : s.active)
        if (a.status == instance_status::running)
          a.elapsed = std::min(a.sampled_duration, a.elapsed + step);
      for (std::size_t r = 0; r < s.levels.size(); ++r) {
        if (net_rate[r] == 0.0)
          continue;
        const double d = net_rate[r] * step;
        s.levels[r] += d;
        pending.push_back({r, d});
      }
      s.clock = next;
    }

    if (exhausts) {
      emit(event_kind::resource_exhausted, no_transition, 0);
      record_sample();
      finish(outcome::resource_failure);
      break;
    }

    // Completions at this instant in instance order; deposits happen here.
    std::vector<active_instance> done, still_active;
    for (auto &a : s.active) {
      const double tol = 1e-9 * std::max(1.0, a.sampled_duration);
      if (a.status == instance_status::running && a.remaining() <= tol) {
        a.elapsed = a.sampled_duration;
        done.push_back(a);
      } else {
        still_active.push_back(a);
      }
    }
    if (!done.empty())
      s.active = std::move(still_active);
    for (const auto &a : done) {
      std::vector<token_delta> produced;
      for (auto [p, w] : transitions_[a.transition].outputs) {
        s.tokens[p] += w;
        produced.push_back({p, w});
      }
      emit(event_kind::complete, a.transition, a.instance_id, std::move(produced));
    }
    if (!done.empty())
      update_suspensions();

    while (config.record_trajectory && next_sample_time() <= s.clock) {
      record_sample();
      ++sample_index;
    }
  }

  if (config.record_trajectory &&
      (out.trajectory.empty() || out.trajectory.back().time != s.clock ||
       out.trajectory.back().tokens != s.tokens || out.trajectory.back().levels != s.levels))
    record_sample();
  out.final_tokens = s.tokens;
  out.final_levels = s.levels;
  return out;
}

//==============================================================================
// Free-function interface over net ids

[[nodiscard]] inline sim_state initial_state(const net &n, std::uint64_t seed) {
  return engine{n}.initial_state(seed);
}

[[nodiscard]] inline std::vector<enabled_entry> enabled_instances(const net &n, const sim_state &s) {
  return engine{n}.enabled_instances(s);
}

[[nodiscard]] inline bool resource_feasible(const net &n, const sim_state &s,
                                            const std::string &transition_id, std::size_t k,
                                            std::span<const double> sampled_durations) {
  if (k == 0 || sampled_durations.size() != k)
    throw std::invalid_argument("resource_feasible: need k >= 1 sampled durations");
  const auto t = n.transition_index(transition_id);
  if (!t)
    throw std::invalid_argument("resource_feasible: unknown transition '" + transition_id + "'");
  return engine{n}.resource_feasible(s, *t, sampled_durations);
}

// Chooses among candidates by id and priority. Only the candidates' own
// priorities are consulted, so the net is not needed.
[[nodiscard]] inline std::optional<std::string> select_firing(std::span<const candidate> candidates,
                                                              conflict_policy policy,
                                                              stpn::rng &random) {
  net scratch;
  for (const auto &c : candidates) {
    transition t;
    t.id = c.id;
    t.priority = c.priority;
    t.max_instances = 1;
    scratch.transitions.push_back(std::move(t));
  }
  engine e{scratch};
  std::vector<std::size_t> idx(candidates.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  const auto chosen = e.select_firing(idx, policy, random);
  if (!chosen)
    return std::nullopt;
  return candidates[*chosen].id;
}

[[nodiscard]] inline std::optional<outcome> detect_termination(const net &n, const sim_state &s,
                                                               const sim_config &config) {
  return engine{n}.detect_termination(s, config);
}

[[nodiscard]] inline trace simulate(const net &n, const sim_config &config) {
  return engine{n}.run(config);
}

} // namespace stpn
