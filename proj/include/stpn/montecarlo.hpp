#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "net.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "stats.hpp"

namespace stpn {

//==============================================================================
// Sampling specification

enum class target_kind { initial_tokens, initial_level, duration_param, rate, priority, max_instances };

// What to overwrite. `element` is a place, resource or transition id; `detail`
// is the duration parameter name (value, mean, sd, low, high) or, for rates,
// the resource id.
struct sampling_target {
  target_kind kind = target_kind::initial_tokens;
  std::string element;
  std::string detail;

  [[nodiscard]] bool integer_valued() const {
    return kind == target_kind::initial_tokens || kind == target_kind::priority ||
           kind == target_kind::max_instances;
  }

  [[nodiscard]] double lower_bound() const {
    return kind == target_kind::max_instances ? 1.0 : 0.0;
  }

  bool operator==(const sampling_target &) const = default;
};

enum class sampler_kind { constant, uniform, normal, integer_uniform };

struct sampler {
  sampler_kind kind = sampler_kind::constant;
  double first = 0.0;  // value | low | mean
  double second = 0.0; // high | sd

  double draw(stpn::rng &random) const {
    switch (kind) {
    case sampler_kind::constant:
      return first;
    case sampler_kind::uniform:
      return random.uniform(first, second);
    case sampler_kind::normal:
      return random.normal(first, second);
    case sampler_kind::integer_uniform:
      return static_cast<double>(random.integer(static_cast<std::int64_t>(std::ceil(first)),
                                                static_cast<std::int64_t>(std::floor(second))));
    }
    return first;
  }

  bool operator==(const sampler &) const = default;
};

struct sampling_entry {
  std::string name; // variable label in batch records and correlation matrices
  sampling_target target;
  sampler distribution;

  bool operator==(const sampling_entry &) const = default;
};

struct sampling_spec {
  std::vector<sampling_entry> entries;

  bool operator==(const sampling_spec &) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// "head(a, b)" -> head, {a, b}
inline std::optional<std::pair<std::string, std::vector<std::string>>> split_call(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    return std::nullopt;
  std::pair<std::string, std::vector<std::string>> out;
  out.first = std::string(trim(text.substr(0, open)));
  std::string_view args = text.substr(open + 1, text.size() - open - 2);
  while (true) {
    const auto comma = args.find(',');
    out.second.emplace_back(trim(args.substr(0, comma)));
    if (comma == std::string_view::npos)
      break;
    args.remove_prefix(comma + 1);
  }
  if (out.second.size() == 1 && out.second.front().empty())
    out.second.clear();
  return out;
}

inline std::optional<double> to_number(const std::string &s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      return std::nullopt;
    return v;
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

} // namespace detail

[[nodiscard]] inline std::string to_string(const sampling_target &t) {
  switch (t.kind) {
  case target_kind::initial_tokens:
    return "initial_tokens(" + t.element + ")";
  case target_kind::initial_level:
    return "initial_level(" + t.element + ")";
  case target_kind::duration_param:
    return "duration(" + t.element + "," + t.detail + ")";
  case target_kind::rate:
    return "rate(" + t.element + "," + t.detail + ")";
  case target_kind::priority:
    return "priority(" + t.element + ")";
  case target_kind::max_instances:
    return "max_instances(" + t.element + ")";
  }
  return "?";
}

[[nodiscard]] inline std::optional<sampling_target> parse_target(std::string_view text) {
  auto call = detail::split_call(text);
  if (!call)
    return std::nullopt;
  const auto &[head, args] = *call;
  static const std::map<std::string, std::pair<target_kind, std::size_t>> forms{
      {"initial_tokens", {target_kind::initial_tokens, 1}},
      {"initial_level", {target_kind::initial_level, 1}},
      {"duration", {target_kind::duration_param, 2}},
      {"rate", {target_kind::rate, 2}},
      {"priority", {target_kind::priority, 1}},
      {"max_instances", {target_kind::max_instances, 1}},
  };
  auto it = forms.find(head);
  if (it == forms.end() || args.size() != it->second.second)
    return std::nullopt;
  sampling_target t{it->second.first, args[0], args.size() > 1 ? args[1] : std::string{}};
  if (t.element.empty())
    return std::nullopt;
  return t;
}

[[nodiscard]] inline std::string to_string(const sampler &s, int digits = 9) {
  auto num = [&](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::string(buf);
  };
  switch (s.kind) {
  case sampler_kind::constant:
    return "constant(" + num(s.first) + ")";
  case sampler_kind::uniform:
    return "uniform(" + num(s.first) + "," + num(s.second) + ")";
  case sampler_kind::normal:
    return "normal(" + num(s.first) + "," + num(s.second) + ")";
  case sampler_kind::integer_uniform:
    return "integer_uniform(" + num(s.first) + "," + num(s.second) + ")";
  }
  return "?";
}

[[nodiscard]] inline std::optional<sampler> parse_sampler(std::string_view text) {
  auto call = detail::split_call(text);
  if (!call)
    return std::nullopt;
  const auto &[head, args] = *call;
  std::vector<double> values;
  for (const auto &a : args) {
    auto v = detail::to_number(a);
    if (!v || !std::isfinite(*v))
      return std::nullopt;
    values.push_back(*v);
  }
  if (head == "constant" && values.size() == 1)
    return sampler{sampler_kind::constant, values[0], 0.0};
  if (values.size() != 2)
    return std::nullopt;
  if (head == "uniform" && values[0] <= values[1])
    return sampler{sampler_kind::uniform, values[0], values[1]};
  if (head == "normal" && values[1] >= 0.0)
    return sampler{sampler_kind::normal, values[0], values[1]};
  if (head == "integer_uniform" && std::ceil(values[0]) <= std::floor(values[1]))
    return sampler{sampler_kind::integer_uniform, values[0], values[1]};
  return std::nullopt;
}

// "target=distribution" or "name:target=distribution"
[[nodiscard]] inline std::optional<sampling_entry> parse_sampling_entry(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos)
    return std::nullopt;
  std::string_view lhs = detail::trim(text.substr(0, eq));
  std::string name;
  if (const auto colon = lhs.find(':'); colon != std::string_view::npos && colon < lhs.find('(')) {
    name = std::string(detail::trim(lhs.substr(0, colon)));
    lhs = detail::trim(lhs.substr(colon + 1));
  }
  auto target = parse_target(lhs);
  auto dist = parse_sampler(text.substr(eq + 1));
  if (!target || !dist)
    return std::nullopt;
  if (name.empty())
    name = to_string(*target);
  return sampling_entry{name, *target, *dist};
}

//==============================================================================
// Instantiation

struct named_value {
  std::string name;
  double value = 0.0;

  bool operator==(const named_value &) const = default;
};

using input_record = std::vector<named_value>;

namespace detail {

inline double round_half_away(double v) { return std::round(v); }

inline double *duration_slot(duration_distribution &d, const std::string &param) {
  switch (d.kind) {
  case distribution_kind::constant:
    return param == "value" ? &d.first : nullptr;
  case distribution_kind::normal:
    return param == "mean" ? &d.first : param == "sd" ? &d.second : nullptr;
  case distribution_kind::uniform:
    return param == "low" ? &d.first : param == "high" ? &d.second : nullptr;
  }
  return nullptr;
}

} // namespace detail

// Throws std::invalid_argument for targets that do not resolve.
inline void check_targets(const net &templ, const sampling_spec &spec) {
  net scratch = templ;
  for (const auto &e : spec.entries) {
    const auto &t = e.target;
    const std::string where = "sampling target " + to_string(t) + ": ";
    switch (t.kind) {
    case target_kind::initial_tokens:
      if (!templ.place_index(t.element))
        throw std::invalid_argument(where + "unknown place");
      break;
    case target_kind::initial_level:
      if (!templ.resource_index(t.element))
        throw std::invalid_argument(where + "unknown resource");
      break;
    case target_kind::duration_param: {
      auto i = templ.transition_index(t.element);
      if (!i)
        throw std::invalid_argument(where + "unknown transition");
      if (!detail::duration_slot(scratch.transitions[*i].duration, t.detail))
        throw std::invalid_argument(where + "duration has no parameter '" + t.detail + "'");
      break;
    }
    case target_kind::rate: {
      auto i = templ.transition_index(t.element);
      if (!i)
        throw std::invalid_argument(where + "unknown transition");
      if (!templ.resource_index(t.detail))
        throw std::invalid_argument(where + "unknown resource");
      break;
    }
    case target_kind::priority:
    case target_kind::max_instances:
      if (!templ.transition_index(t.element))
        throw std::invalid_argument(where + "unknown transition");
      break;
    }
  }
}

// Draws every entry in declaration order and substitutes it into a copy of
// the template. Integer targets are rounded half away from zero and floored
// at their lower bound; the record holds the values actually used.
[[nodiscard]] inline std::pair<net, input_record> instantiate(const net &templ, const sampling_spec &spec,
                                                              stpn::rng &random) {
  check_targets(templ, spec);
  net out = templ;
  input_record record;
  for (const auto &e : spec.entries) {
    const auto &t = e.target;
    double v = e.distribution.draw(random);
    if (t.integer_valued())
      v = std::max(t.lower_bound(), detail::round_half_away(v));
    switch (t.kind) {
    case target_kind::initial_tokens:
      out.places[*out.place_index(t.element)].initial_tokens = static_cast<std::int64_t>(v);
      break;
    case target_kind::initial_level:
      out.resources[*out.resource_index(t.element)].initial_level = v;
      break;
    case target_kind::duration_param:
      *detail::duration_slot(out.transitions[*out.transition_index(t.element)].duration, t.detail) = v;
      break;
    case target_kind::rate: {
      auto &tr = out.transitions[*out.transition_index(t.element)];
      auto it = std::find_if(tr.rates.begin(), tr.rates.end(),
                             [&](const resource_rate &r) { return r.resource == t.detail; });
      if (it == tr.rates.end())
        tr.rates.push_back({t.detail, v});
      else
        it->rate = v;
      break;
    }
    case target_kind::priority:
      out.transitions[*out.transition_index(t.element)].priority = static_cast<std::int64_t>(v);
      break;
    case target_kind::max_instances:
      out.transitions[*out.transition_index(t.element)].max_instances = static_cast<std::int64_t>(v);
      break;
    }
    record.push_back({e.name, v});
  }
  return {std::move(out), std::move(record)};
}

//==============================================================================
// Batches

struct batch_run {
  std::vector<double> inputs; // aligned with batch_result::input_names
  outcome result = outcome::deadlock;
  double final_time = 0.0;
  std::vector<double> final_levels; // aligned with batch_result::resource_names
  bool goal = false;                // objective fulfilled (outcome success)
  bool goal_reached = false;        // goal predicate held at the end, possibly late

  bool operator==(const batch_run &) const = default;
};

struct batch_result {
  std::vector<std::string> input_names;
  std::vector<std::string> resource_names;
  std::vector<batch_run> runs;
  std::size_t n_runs = 0;
  std::uint64_t master_seed = 0;

  bool operator==(const batch_result &) const = default;

  // Variable names usable with column(): every input name, plus
  // final_time, goal, goal_reached and final:<resource>.
  [[nodiscard]] std::vector<std::string> output_names() const {
    std::vector<std::string> out{"final_time", "goal", "goal_reached"};
    for (const auto &r : resource_names)
      out.push_back("final:" + r);
    return out;
  }

  [[nodiscard]] std::vector<double> column(const std::string &name) const {
    std::vector<double> out;
    out.reserve(runs.size());
    if (auto it = std::find(input_names.begin(), input_names.end(), name); it != input_names.end()) {
      const auto i = static_cast<std::size_t>(it - input_names.begin());
      for (const auto &r : runs)
        out.push_back(r.inputs[i]);
    } else if (name == "final_time") {
      for (const auto &r : runs)
        out.push_back(r.final_time);
    } else if (name == "goal") {
      for (const auto &r : runs)
        out.push_back(r.goal ? 1.0 : 0.0);
    } else if (name == "goal_reached") {
      for (const auto &r : runs)
        out.push_back(r.goal_reached ? 1.0 : 0.0);
    } else if (name.rfind("final:", 0) == 0) {
      auto it2 = std::find(resource_names.begin(), resource_names.end(), name.substr(6));
      if (it2 == resource_names.end())
        throw std::out_of_range("batch: no resource '" + name.substr(6) + "'");
      const auto i = static_cast<std::size_t>(it2 - resource_names.begin());
      for (const auto &r : runs)
        out.push_back(r.final_levels[i]);
    } else {
      throw std::out_of_range("batch: no variable '" + name + "'");
    }
    return out;
  }
};

// Seeds of run i: the simulation stream and the parameter-sampling stream.
[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index) {
  return stpn::rng::derive(master_seed, index);
}
[[nodiscard]] inline std::uint64_t sampling_seed(std::uint64_t master_seed, std::size_t index) {
  return stpn::rng::derive(run_seed(master_seed, index), 0x5a4d);
}

// Runs job(i) for i in [0, n) on up to `jobs` threads (0 = hardware
// concurrency). The first exception by index is rethrown.
template <class Job> void parallel_for(std::size_t n, unsigned jobs, Job &&job) {
  if (jobs == 0)
    jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

[[nodiscard]] inline batch_result run_batch(const net &templ, const sampling_spec &spec, std::size_t n_runs,
                                            std::uint64_t master_seed, const sim_config &config,
                                            unsigned jobs = 0) {
  if (n_runs == 0)
    throw std::invalid_argument("run_batch: n_runs must be positive");
  const auto report = validate_net(templ);
  if (!report.valid())
    throw std::invalid_argument("run_batch: template net is not valid");
  check_targets(templ, spec);

  batch_result out;
  out.n_runs = n_runs;
  out.master_seed = master_seed;
  for (const auto &e : spec.entries)
    out.input_names.push_back(e.name);
  for (const auto &r : templ.resources)
    out.resource_names.push_back(r.id);
  out.runs.resize(n_runs);

  sim_config base = config;
  base.record_trajectory = false;

  parallel_for(n_runs, jobs, [&](std::size_t i) {
    stpn::rng sampling{sampling_seed(master_seed, i)};
    auto [instance, record] = instantiate(templ, spec, sampling);
    const auto v = validate_net(instance);
    if (!v.valid()) {
      std::string msg = "run " + std::to_string(i) + ": sampled net is invalid:";
      for (const auto &x : v.violations)
        if (x.level == severity::error)
          msg += " " + x.message + ";";
      throw std::runtime_error(msg);
    }
    sim_config c = base;
    c.seed = run_seed(master_seed, i);
    const trace tr = simulate(instance, c);
    batch_run r;
    for (const auto &nv : record)
      r.inputs.push_back(nv.value);
    r.result = tr.result;
    r.final_time = tr.final_time;
    r.final_levels = tr.final_levels;
    r.goal = tr.result == outcome::success;
    r.goal_reached = tr.goal_reached;
    out.runs[i] = std::move(r);
  });
  return out;
}

//==============================================================================
// Aggregation

enum class time_stats_mode {
  successful, // only runs whose outcome is success
  all_runs,   // every run contributes its final_time (censoring time for failures)
};

struct time_statistics {
  std::size_t count = 0;
  double mean = stats::undefined;
  double stddev = stats::undefined;
  double min = stats::undefined;
  double p05 = stats::undefined;
  double p50 = stats::undefined;
  double p95 = stats::undefined;
  double max = stats::undefined;

  [[nodiscard]] double standard_error() const {
    return count > 1 ? stddev / std::sqrt(static_cast<double>(count)) : stats::undefined;
  }
};

struct batch_summary {
  std::size_t n_runs = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  time_statistics time;
  std::map<outcome, std::size_t> histogram;
};

[[nodiscard]] inline time_statistics describe(const std::vector<double> &xs) {
  time_statistics t;
  t.count = xs.size();
  if (xs.empty())
    return t;
  t.mean = stats::mean(xs);
  t.stddev = stats::stddev(xs);
  t.min = *std::min_element(xs.begin(), xs.end());
  t.max = *std::max_element(xs.begin(), xs.end());
  t.p05 = stats::percentile(xs, 5);
  t.p50 = stats::percentile(xs, 50);
  t.p95 = stats::percentile(xs, 95);
  return t;
}

[[nodiscard]] inline batch_summary summarize(const batch_result &batch,
                                             time_stats_mode mode = time_stats_mode::successful) {
  if (batch.runs.empty())
    throw std::invalid_argument("summarize: empty batch");
  batch_summary s;
  s.n_runs = batch.runs.size();
  for (auto o : {outcome::success, outcome::timeout, outcome::deadlock, outcome::resource_failure})
    s.histogram[o] = 0;
  std::vector<double> times;
  for (const auto &r : batch.runs) {
    ++s.histogram[r.result];
    if (r.result == outcome::success)
      ++s.successes;
    if (mode == time_stats_mode::all_runs || r.result == outcome::success)
      times.push_back(r.final_time);
  }
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.n_runs);
  s.time = describe(times);
  return s;
}

// Coefficients between every pair of the named variables (inputs first).
[[nodiscard]] inline stats::correlation_matrix
compute_correlation(const batch_result &batch, const std::vector<std::string> &inputs,
                    const std::vector<std::string> &outputs,
                    stats::correlation_method method = stats::correlation_method::pearson) {
  if (batch.runs.size() < 3)
    throw std::invalid_argument("correlation: need at least 3 runs");
  std::vector<std::string> labels = inputs;
  labels.insert(labels.end(), outputs.begin(), outputs.end());
  std::vector<std::vector<double>> columns;
  for (const auto &l : labels)
    columns.push_back(batch.column(l));
  return stats::correlate_columns(labels, columns, method);
}

} // namespace stpn
