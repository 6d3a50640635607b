#pragma once

// Command implementations for the `stpn` executable. Kept in a header so the
// test suite can drive commands in-process.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stpn/stpn.hpp"

namespace stpn::cli {

enum exit_code : int { ok = 0, model_error = 1, io_failure = 2, unsuccessful = 3 };

namespace fs = std::filesystem;
using nlohmann::json;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct model_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string g9(double v) { return io::detail::g9(v); }

inline json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// Reads and fully validates a document, printing diagnostics as
// path:line:col: message.
inline io::net_document load(const std::string &path, std::ostream &err) {
  const std::string text = io::read_file(path);
  auto parsed = io::parse_document(text);
  for (const auto &d : parsed.diagnostics)
    err << path << ":" << d.str() << "\n";
  if (!parsed.ok())
    throw model_failure(path + ": invalid document");
  return std::move(*parsed.value);
}

inline void write_output(const fs::path &dir, const std::string &name, const std::string &content) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw io::io_error("cannot create directory '" + dir.string() + "': " + ec.message());
  io::write_file((dir / name).string(), content);
}

inline void print_warnings(const std::string &path, const validation_report &report, std::ostream &err) {
  for (const auto &v : report.violations)
    if (v.level == severity::warning)
      err << path << ": warning: " << v.message << "\n";
}

inline json outcome_json(const net &n, const trace &tr) {
  json res = json::object();
  for (std::size_t i = 0; i < n.resources.size(); ++i)
    res[n.resources[i].id] = tr.final_levels[i];
  return {{"outcome", std::string(to_string(tr.result))},
          {"final_time", tr.final_time},
          {"goal_reached", tr.goal_reached},
          {"truncated", tr.truncated},
          {"events", tr.events.size()},
          {"resources", res}};
}

inline json time_json(const time_statistics &t) {
  return {{"count", t.count},
          {"mean", number_or_null(t.mean)},
          {"stddev", number_or_null(t.stddev)},
          {"standard_error", number_or_null(t.standard_error())},
          {"min", number_or_null(t.min)},
          {"p05", number_or_null(t.p05)},
          {"p50", number_or_null(t.p50)},
          {"p95", number_or_null(t.p95)},
          {"max", number_or_null(t.max)}};
}

inline json matrix_json(const stats::correlation_matrix &m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.row_labels.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.col_labels.size(); ++j)
      row.push_back(number_or_null(m.at(i, j)));
    rows.push_back(row);
  }
  return {{"rows", m.row_labels}, {"columns", m.col_labels}, {"values", rows}, {"samples", m.samples}};
}

inline void print_matrix(std::ostream &out, const stats::correlation_matrix &m) {
  std::size_t w = 6;
  for (const auto &l : m.row_labels)
    w = std::max(w, l.size());
  out << std::string(w, ' ');
  for (const auto &c : m.col_labels)
    out << "  " << std::string(c.size() < 8 ? 8 - c.size() : 0, ' ') << c;
  out << "\n";
  for (std::size_t i = 0; i < m.row_labels.size(); ++i) {
    out << m.row_labels[i] << std::string(w - m.row_labels[i].size(), ' ');
    for (std::size_t j = 0; j < m.col_labels.size(); ++j) {
      const std::string v = m.defined(i, j) ? fmt(m.at(i, j)) : "n/a";
      const std::size_t cw = std::max<std::size_t>(8, m.col_labels[j].size());
      out << "  " << std::string(cw - std::min(cw, v.size()), ' ') << v;
    }
    out << "\n";
  }
}

// `--sampling` values are file paths when such a file exists, otherwise
// inline entries "[name:]target=distribution".
inline sampling_spec read_sampling(const std::vector<std::string> &args, std::ostream &err) {
  sampling_spec spec;
  for (const auto &a : args) {
    if (fs::exists(a)) {
      auto doc = load(a, err);
      if (!doc.sampling)
        throw model_failure(a + ": document has no sampling section");
      spec.entries.insert(spec.entries.end(), doc.sampling->entries.begin(), doc.sampling->entries.end());
      continue;
    }
    auto e = parse_sampling_entry(a);
    if (!e)
      throw usage_error("--sampling: '" + a + "' is neither a file nor an entry like robots:initial_tokens(robots)=integer_uniform(1,4)");
    spec.entries.push_back(*e);
  }
  return spec;
}

struct range {
  std::int64_t from = 1;
  std::int64_t to = 1;
};

inline range parse_range(const std::string &text, const char *flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos)
      throw std::invalid_argument("");
    std::size_t a = 0, b = 0;
    range r{std::stoll(text.substr(0, colon), &a), std::stoll(text.substr(colon + 1), &b)};
    if (a != colon || b != text.size() - colon - 1 || r.from > r.to)
      throw std::invalid_argument("");
    return r;
  } catch (const std::exception &) {
    throw usage_error(std::string(flag) + ": expected FROM:TO with FROM <= TO, got '" + text + "'");
  }
}

//==============================================================================

inline int cmd_validate(const std::string &path, std::ostream &out, std::ostream &err) {
  auto doc = load(path, err);
  print_warnings(path, validate_net(doc.model), err);
  if (doc.availability)
    print_warnings(path, validate_model(*doc.availability), err);
  std::vector<std::string> parts;
  const auto &n = doc.model;
  if (!n.places.empty() || !n.resources.empty() || !n.transitions.empty())
    parts.push_back(std::to_string(n.places.size()) + " places, " + std::to_string(n.resources.size()) +
                    " resources, " + std::to_string(n.transitions.size()) + " transitions");
  if (doc.fusion)
    parts.push_back(std::to_string(doc.fusion->places.size() + doc.fusion->resources.size()) + " fusion groups");
  if (doc.sampling)
    parts.push_back(std::to_string(doc.sampling->entries.size()) + " sampling entries");
  if (doc.availability)
    parts.push_back(std::to_string(doc.availability->devices.size()) + " devices, " +
                    std::to_string(doc.availability->capabilities.size()) + " capabilities");
  if (parts.empty())
    parts.push_back("empty net");
  out << path << ": valid (";
  for (std::size_t i = 0; i < parts.size(); ++i)
    out << (i ? "; " : "") << parts[i];
  out << ")\n";
  return ok;
}

struct simulate_options {
  std::string file;
  std::uint64_t seed = 0;
  double max_time = 1000.0;
  std::string policy;
  std::string out_dir;
  double sample_interval = 1.0;
  std::size_t max_events = 1'000'000;
  bool stop_at_deadline = false;
  bool json = false;
};

inline int cmd_simulate(const simulate_options &o, std::ostream &out, std::ostream &err) {
  const auto doc = load(o.file, err);
  sim_config c;
  c.seed = o.seed;
  c.max_time = o.max_time;
  c.sample_interval = o.sample_interval;
  c.max_events = o.max_events;
  c.stop_at_deadline = o.stop_at_deadline;
  if (!o.policy.empty()) {
    c.policy = parse_policy(o.policy);
    if (!c.policy)
      throw usage_error("--policy: unknown policy '" + o.policy + "'");
  }
  if (!(c.max_time > 0.0) || !std::isfinite(c.max_time))
    throw usage_error("--max-time must be positive and finite");
  if (!(c.sample_interval > 0.0))
    throw usage_error("--sample-interval must be positive");

  const trace tr = simulate(doc.model, c);
  if (!o.out_dir.empty()) {
    write_output(o.out_dir, "events.csv", io::export_trace(doc.model, tr, io::trace_format::events_csv));
    write_output(o.out_dir, "trajectories.csv",
                 io::export_trace(doc.model, tr, io::trace_format::trajectories_csv));
    write_output(o.out_dir, "timeline.svg", io::export_trace(doc.model, tr, io::trace_format::timeline_svg));
  }
  if (o.json) {
    out << outcome_json(doc.model, tr).dump(2) << "\n";
  } else {
    out << "outcome " << to_string(tr.result) << " at time " << g9(tr.final_time);
    if (tr.result != outcome::success && tr.goal_reached)
      out << " (goal reached after the deadline)";
    if (tr.truncated)
      out << " (truncated)";
    for (std::size_t i = 0; i < doc.model.resources.size(); ++i)
      out << (i ? ", " : "; ") << doc.model.resources[i].id << "=" << g9(tr.final_levels[i]);
    out << "\n";
  }
  return tr.result == outcome::success ? ok : unsuccessful;
}

struct mc_options {
  std::string file;
  std::size_t runs = 1000;
  std::uint64_t seed = 0;
  double max_time = 1000.0;
  std::string policy;
  std::vector<std::string> sampling;
  std::string sweep;
  bool correlate = false;
  bool spearman = false;
  std::string time_stats = "successful";
  unsigned jobs = 0;
  std::string out_dir;
  bool json = false;
};

inline int cmd_mc(const mc_options &o, std::ostream &out, std::ostream &err) {
  const auto doc = load(o.file, err);
  if (o.runs == 0)
    throw usage_error("--runs must be positive");
  sampling_spec spec = read_sampling(o.sampling, err);
  if (o.sampling.empty() && doc.sampling)
    spec = *doc.sampling;
  sim_config c;
  c.max_time = o.max_time;
  if (!o.policy.empty()) {
    c.policy = parse_policy(o.policy);
    if (!c.policy)
      throw usage_error("--policy: unknown policy '" + o.policy + "'");
  }
  time_stats_mode mode;
  if (o.time_stats == "successful")
    mode = time_stats_mode::successful;
  else if (o.time_stats == "all")
    mode = time_stats_mode::all_runs;
  else
    throw usage_error("--time-stats must be 'successful' or 'all'");
  const auto method = o.spearman ? stats::correlation_method::spearman : stats::correlation_method::pearson;

  auto check = [&](const sampling_spec &s) {
    try {
      check_targets(doc.model, s);
    } catch (const std::invalid_argument &e) {
      throw model_failure(e.what());
    }
  };

  json report = json::object();
  if (!o.sweep.empty()) {
    // TARGET=FROM:TO, each value run as its own batch with the same seed
    const auto eq = o.sweep.rfind('=');
    if (eq == std::string::npos)
      throw usage_error("--sweep: expected TARGET=FROM:TO");
    const auto target = parse_target(o.sweep.substr(0, eq));
    if (!target)
      throw usage_error("--sweep: malformed target '" + o.sweep.substr(0, eq) + "'");
    const range r = parse_range(o.sweep.substr(eq + 1), "--sweep");
    std::string table = "value,runs,success_rate,mean_time,stddev,standard_error\n";
    json rows = json::array();
    if (!o.json)
      out << "value  success  mean_time  std_err\n";
    for (std::int64_t v = r.from; v <= r.to; ++v) {
      sampling_spec s;
      for (const auto &e : spec.entries)
        if (!(e.target == *target))
          s.entries.push_back(e);
      s.entries.push_back({to_string(*target), *target, {sampler_kind::constant, static_cast<double>(v), 0.0}});
      check(s);
      const auto batch = run_batch(doc.model, s, o.runs, o.seed, c, o.jobs);
      const auto sum = summarize(batch, mode);
      table += std::to_string(v) + "," + std::to_string(o.runs) + "," + g9(sum.success_rate) + "," +
               g9(sum.time.mean) + "," + g9(sum.time.stddev) + "," + g9(sum.time.standard_error()) + "\n";
      rows.push_back({{"value", v},
                      {"success_rate", sum.success_rate},
                      {"time", time_json(sum.time)}});
      if (!o.json)
        out << std::to_string(v) << std::string(7 - std::min<std::size_t>(6, std::to_string(v).size()), ' ')
            << fmt(sum.success_rate) << "  " << fmt(sum.time.mean) << "  " << fmt(sum.time.standard_error())
            << "\n";
    }
    if (!o.out_dir.empty())
      write_output(o.out_dir, "sweep.csv", table);
    report["sweep"] = {{"target", to_string(*target)}, {"runs", o.runs}, {"rows", rows}};
    if (o.json)
      out << report.dump(2) << "\n";
    return ok;
  }

  check(spec);
  const auto batch = run_batch(doc.model, spec, o.runs, o.seed, c, o.jobs);
  const auto sum = summarize(batch, mode);
  if (!o.out_dir.empty())
    write_output(o.out_dir, "batch.csv", io::batch_csv(batch));

  std::optional<stats::correlation_matrix> corr;
  if (o.correlate) {
    if (o.runs < 3)
      throw usage_error("--correlate needs at least 3 runs");
    corr = compute_correlation(batch, batch.input_names, batch.output_names(), method);
    if (!o.out_dir.empty()) {
      write_output(o.out_dir, "correlation.csv", io::export_matrix(*corr, io::matrix_format::csv));
      write_output(o.out_dir, "correlation.svg", io::export_matrix(*corr, io::matrix_format::heatmap_svg));
    }
  }

  if (o.json) {
    json outcomes = json::object();
    for (const auto &[k, v] : sum.histogram)
      outcomes[std::string(to_string(k))] = v;
    report["runs"] = sum.n_runs;
    report["seed"] = o.seed;
    report["successes"] = sum.successes;
    report["success_rate"] = sum.success_rate;
    report["time"] = time_json(sum.time);
    report["time_stats"] = o.time_stats;
    report["outcomes"] = outcomes;
    if (corr)
      report["correlation"] = matrix_json(*corr);
    out << report.dump(2) << "\n";
    return ok;
  }
  out << "runs " << sum.n_runs << ", success rate " << fmt(sum.success_rate) << "\n";
  out << "outcomes:";
  for (const auto &[k, v] : sum.histogram)
    out << " " << to_string(k) << "=" << v;
  out << "\n";
  out << "time (" << o.time_stats << " runs, n=" << sum.time.count << "): mean " << fmt(sum.time.mean) << " sd "
      << fmt(sum.time.stddev) << " se " << fmt(sum.time.standard_error()) << " min " << fmt(sum.time.min)
      << " p50 " << fmt(sum.time.p50) << " p95 " << fmt(sum.time.p95) << " max " << fmt(sum.time.max) << "\n";
  if (corr) {
    out << (o.spearman ? "spearman" : "pearson") << " correlation:\n";
    print_matrix(out, *corr);
  }
  return ok;
}

struct reliability_options {
  std::string file;
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  std::string sweep;
  std::string range = "1:5";
  std::optional<double> reliability;
  unsigned jobs = 0;
  std::string out_dir;
  bool json = false;
};

// Capability rows ordered mission, system, subsystem, then others.
inline std::pair<std::vector<std::string>, std::vector<std::string>> capability_rows(const availability_model &m) {
  auto rank = [](const std::string &l) { return l == "mission" ? 0 : l == "system" ? 1 : l == "subsystem" ? 2 : 3; };
  std::vector<const capability *> caps;
  for (const auto &c : m.capabilities)
    caps.push_back(&c);
  std::stable_sort(caps.begin(), caps.end(), [&](auto a, auto b) {
    const std::string la = a->id == m.mission_capability && a->level.empty() ? "mission" : a->level;
    const std::string lb = b->id == m.mission_capability && b->level.empty() ? "mission" : b->level;
    return rank(la) < rank(lb);
  });
  std::vector<std::string> rows, groups;
  for (const auto *c : caps) {
    rows.push_back(c->id);
    groups.push_back(c->level.empty() ? (c->id == m.mission_capability ? "mission" : "other") : c->level);
  }
  return {rows, groups};
}

inline int cmd_reliability(const reliability_options &o, std::ostream &out, std::ostream &err) {
  const auto doc = load(o.file, err);
  if (!doc.availability)
    throw model_failure(o.file + ": document has no availability_model section");
  availability_model m = *doc.availability;
  if (o.trials == 0)
    throw usage_error("--trials must be positive");
  if (o.reliability && !(*o.reliability >= 0.0 && *o.reliability <= 1.0))
    throw usage_error("--reliability must lie in [0, 1]");

  const double robot = robot_availability(m);
  const double mission = mission_availability(m);
  const auto mc = reliability_mc(m, o.trials, o.seed, o.jobs);
  json report = {{"trials", o.trials},
                 {"seed", o.seed},
                 {"systems", m.n_systems},
                 {"robot_availability", robot},
                 {"mission_availability", {{"closed_form", mission}, {"monte_carlo", mc.mission},
                                           {"abs_difference", std::abs(mission - mc.mission)}}}};
  json devices = json::object();
  for (const auto &d : m.devices)
    devices[d.id] = device_availability(d.reliability, d.redundancy);
  report["devices"] = devices;
  json caps = json::object();
  for (const auto &[k, v] : mc.availability)
    caps[k] = v;
  report["capabilities_monte_carlo"] = caps;

  const auto [rows, groups] = capability_rows(m);
  const auto matrix = mc.correlation.slice(rows, mc.device_labels);
  report["correlation"] = matrix_json(matrix);
  if (!o.out_dir.empty()) {
    write_output(o.out_dir, "correlation.csv", io::export_matrix(matrix, io::matrix_format::csv));
    write_output(o.out_dir, "correlation.svg", io::export_matrix(matrix, io::matrix_format::heatmap_svg, groups));
  }

  std::vector<sweep_point> points;
  if (!o.sweep.empty()) {
    sweep_axis axis;
    if (o.sweep == "subsystem")
      axis = sweep_axis::subsystem;
    else if (o.sweep == "system")
      axis = sweep_axis::system;
    else
      throw usage_error("--sweep must be 'subsystem' or 'system'");
    const range r = parse_range(o.range, "--range");
    if (r.from < 1)
      throw usage_error("--range must start at 1 or above");
    points = redundancy_sweep(m, axis, r.from, r.to, o.reliability);
    json rows_json = json::array();
    for (const auto &p : points)
      rows_json.push_back({{"count", p.count}, {"availability", p.availability}});
    report["sweep"] = {{"axis", o.sweep}, {"points", rows_json}};
    if (!o.out_dir.empty())
      write_output(o.out_dir, "sweep.csv", io::sweep_csv(points));
  }

  if (o.json) {
    out << report.dump(2) << "\n";
    return ok;
  }
  out << "devices (closed form, with redundancy):\n";
  for (const auto &d : m.devices)
    out << "  " << d.id << "  p=" << g9(d.reliability) << " k=" << d.redundancy << "  "
        << fmt(device_availability(d.reliability, d.redundancy), 6) << "\n";
  out << "robot availability (closed form): " << fmt(robot, 6) << "\n";
  out << "mission availability, " << m.n_systems << " system(s):\n";
  out << "  closed-form  " << fmt(mission, 6) << "\n";
  out << "  monte-carlo  " << fmt(mc.mission, 6) << "  (" << o.trials << " trials)\n";
  out << "  abs-diff     " << fmt(std::abs(mission - mc.mission), 6) << "\n";
  out << "correlation (capabilities x devices):\n";
  print_matrix(out, matrix);
  if (!points.empty()) {
    out << o.sweep << " redundancy sweep:\n";
    for (const auto &p : points)
      out << "  " << p.count << "  " << fmt(p.availability, 6) << "\n";
  }
  return ok;
}

struct compose_options {
  std::vector<std::string> files;
  std::string fusion;
  std::string out_file;
};

inline int cmd_compose(const compose_options &o, std::ostream &out, std::ostream &err) {
  std::vector<named_net> nets;
  for (const auto &f : o.files) {
    auto doc = load(f, err);
    auto it = doc.model.metadata.find("id");
    std::string id = it != doc.model.metadata.end() ? it->second : fs::path(f).stem().string();
    nets.push_back({id, std::move(doc.model)});
  }
  fusion_map fm;
  if (!o.fusion.empty()) {
    auto doc = load(o.fusion, err);
    if (!doc.fusion)
      throw model_failure(o.fusion + ": document has no fusion section");
    fm = *doc.fusion;
  }
  net merged;
  try {
    merged = merge_nets(nets, fm);
  } catch (const compose_error &e) {
    throw model_failure(e.what());
  }
  const std::string text = io::serialize_net(merged);
  if (!o.out_file.empty()) {
    const fs::path p(o.out_file);
    if (p.has_parent_path())
      write_output(p.parent_path(), p.filename().string(), text);
    else
      io::write_file(o.out_file, text);
  } else {
    out << text;
    return ok;
  }
  std::size_t fused = fm.places.size() + fm.resources.size();
  out << "merged " << nets.size() << " nets into " << merged.places.size() << " places, "
      << merged.resources.size() << " resources, " << merged.transitions.size() << " transitions ("
      << fused << " fusion groups)\n";
  for (const auto &g : fm.places) {
    out << "  place " << g.canonical << " <-";
    for (const auto &m : g.members)
      out << " " << m.net << ":" << m.local;
    if (g.authoritative)
      out << " [authoritative: " << *g.authoritative << "]";
    out << "\n";
  }
  for (const auto &g : fm.resources) {
    out << "  resource " << g.canonical << " <-";
    for (const auto &m : g.members)
      out << " " << m.net << ":" << m.local;
    if (g.authoritative)
      out << " [authoritative: " << *g.authoritative << "]";
    out << "\n";
  }
  return ok;
}

inline int cmd_reach(const std::string &file, std::size_t max_states, std::ostream &out, std::ostream &err,
                     bool as_json) {
  const auto doc = load(file, err);
  if (max_states == 0)
    throw usage_error("--max-states must be positive");
  const auto r = reachable_markings(doc.model, max_states);
  const std::size_t d = r.deadlock_count();
  if (as_json) {
    out << json{{"markings", r.markings.size()},
                {"deadlocks", d},
                {"truncated", r.truncated},
                {"dead_transitions", r.dead_transitions}}
               .dump(2)
        << "\n";
    return ok;
  }
  out << r.markings.size() << (r.markings.size() == 1 ? " marking, " : " markings, ") << d
      << (d == 1 ? " deadlock" : " deadlocks") << "\n";
  out << "truncated: " << (r.truncated ? "yes" : "no") << "\n";
  if (!r.dead_transitions.empty()) {
    out << "dead transitions:";
    for (const auto &t : r.dead_transitions)
      out << " " << t;
    out << "\n";
  }
  return ok;
}

inline int cmd_levels(const std::string &file, std::ostream &out, std::ostream &err) {
  const auto doc = load(file, err);
  for (const auto &g : levels_report(doc.model)) {
    out << g.level << " (" << g.size() << ")\n";
    auto list = [&](const char *what, const std::vector<std::string> &ids) {
      if (ids.empty())
        return;
      out << "  " << what << ":";
      for (const auto &id : ids)
        out << " " << id;
      out << "\n";
    };
    list("places", g.places);
    list("resources", g.resources);
    list("transitions", g.transitions);
  }
  return ok;
}

inline int cmd_case_models(const std::string &dir, std::ostream &out) {
  const auto b = case_study::build_case_models();
  for (const auto &[name, text] : b.files()) {
    write_output(dir, name, text);
    out << (fs::path(dir) / name).string() << "\n";
  }
  return ok;
}

//==============================================================================

inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Stochastic timed Petri nets with resources: simulation and analysis", "stpn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stpn 1.0.0");
  app.footer("Exit codes: 0 success, 1 model or usage error, 2 I/O error, 3 simulation outcome other than "
             "success.");

  auto *validate = app.add_subcommand("validate", "Check a document against the schema and the net rules");
  std::string validate_file;
  validate->add_option("file", validate_file, "Net document (.pnet)")->required();

  simulate_options so;
  auto *sim = app.add_subcommand("simulate", "Run one simulation and export its trace");
  sim->add_option("file", so.file, "Net document (.pnet)")->required();
  sim->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  sim->add_option("--max-time", so.max_time, "Simulation horizon")->capture_default_str();
  sim->add_option("--policy", so.policy, "Override the conflict policy: fixed_priority, uniform_random, "
                                         "priority_proportional");
  sim->add_option("--out-dir", so.out_dir, "Write events.csv, trajectories.csv and timeline.svg here");
  sim->add_option("--sample-interval", so.sample_interval, "Trajectory sampling interval")
      ->capture_default_str();
  sim->add_option("--max-events", so.max_events, "Event cap; the run is truncated beyond it")
      ->capture_default_str();
  sim->add_flag("--stop-at-deadline", so.stop_at_deadline, "Stop as soon as the goal deadline passes");
  std::string sim_format = "text";
  sim->add_option("--format", sim_format, "Summary format: text or json")->capture_default_str();

  mc_options mo;
  auto *mc = app.add_subcommand("mc", "Monte Carlo batch with sampled parameters");
  mc->add_option("file", mo.file, "Net document (.pnet)")->required();
  mc->add_option("--runs", mo.runs, "Number of runs")->capture_default_str();
  mc->add_option("--seed", mo.seed, "Master seed; run i uses a seed derived from it and i")->capture_default_str();
  mc->add_option("--max-time", mo.max_time, "Simulation horizon per run")->capture_default_str();
  mc->add_option("--policy", mo.policy, "Override the conflict policy");
  mc->add_option("--sampling", mo.sampling,
                 "Sampling file, or inline entry [name:]target=distribution; repeatable. Defaults to the "
                 "document's own sampling section");
  mc->add_option("--sweep", mo.sweep, "TARGET=FROM:TO, one batch per integer value, e.g. "
                                      "initial_tokens(robots)=1:4");
  mc->add_flag("--correlate", mo.correlate, "Correlation matrix over inputs and outputs");
  mc->add_flag("--spearman", mo.spearman, "Rank correlation instead of Pearson");
  mc->add_option("--time-stats", mo.time_stats, "Runs entering time statistics: successful or all")
      ->capture_default_str();
  mc->add_option("--jobs", mo.jobs, "Worker threads, 0 = all cores; results do not depend on it")
      ->capture_default_str();
  mc->add_option("--out-dir", mo.out_dir, "Write batch.csv, correlation.csv/.svg or sweep.csv here");
  std::string mc_format = "text";
  mc->add_option("--format", mc_format, "Summary format: text or json")->capture_default_str();

  reliability_options ro;
  auto *rel = app.add_subcommand("reliability", "Capability availability: closed form against Monte Carlo");
  rel->add_option("file", ro.file, "Document with an availability_model section")->required();
  rel->add_option("--trials", ro.trials, "Monte Carlo trials")->capture_default_str();
  rel->add_option("--seed", ro.seed, "Random seed")->capture_default_str();
  rel->add_option("--sweep", ro.sweep, "Redundancy sweep axis: subsystem or system");
  rel->add_option("--range", ro.range, "Sweep range FROM:TO")->capture_default_str();
  rel->add_option("--reliability", ro.reliability, "Device reliability used by the sweep");
  rel->add_option("--jobs", ro.jobs, "Worker threads, 0 = all cores")->capture_default_str();
  rel->add_option("--out-dir", ro.out_dir, "Write correlation.csv/.svg and sweep.csv here");
  std::string rel_format = "text";
  rel->add_option("--format", rel_format, "Report format: text or json")->capture_default_str();

  compose_options co;
  auto *comp = app.add_subcommand("compose", "Merge nets through a fusion map");
  comp->add_option("files", co.files, "Net documents; a net's id is metadata.id or the file stem")
      ->required();
  comp->add_option("--fusion", co.fusion, "Document with a fusion section");
  comp->add_option("--out", co.out_file, "Merged document; printed to stdout when omitted");

  std::string reach_file;
  std::size_t max_states = 100000;
  auto *reach = app.add_subcommand("reach", "Untimed reachability and deadlock report");
  reach->add_option("file", reach_file, "Net document (.pnet)")->required();
  reach->add_option("--max-states", max_states, "Exploration bound")->capture_default_str();
  std::string reach_format = "text";
  reach->add_option("--format", reach_format, "Report format: text or json")->capture_default_str();

  std::string levels_file;
  auto *levels = app.add_subcommand("levels", "List elements grouped by their level tag");
  levels->add_option("file", levels_file, "Net document (.pnet)")->required();

  std::string case_dir = "models/case_study";
  auto *cases = app.add_subcommand("case-models", "Write the case-study bundle");
  cases->add_option("--out-dir", case_dir, "Destination directory")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : model_error;
  }

  auto json_flag = [](const std::string &f) {
    if (f == "json")
      return true;
    if (f == "text")
      return false;
    throw usage_error("--format must be 'text' or 'json'");
  };

  try {
    if (*validate)
      return cmd_validate(validate_file, out, err);
    if (*sim) {
      so.json = json_flag(sim_format);
      return cmd_simulate(so, out, err);
    }
    if (*mc) {
      mo.json = json_flag(mc_format);
      return cmd_mc(mo, out, err);
    }
    if (*rel) {
      ro.json = json_flag(rel_format);
      return cmd_reliability(ro, out, err);
    }
    if (*comp)
      return cmd_compose(co, out, err);
    if (*reach)
      return cmd_reach(reach_file, max_states, out, err, json_flag(reach_format));
    if (*levels)
      return cmd_levels(levels_file, out, err);
    if (*cases)
      return cmd_case_models(case_dir, out);
  } catch (const io::io_error &e) {
    err << "error: " << e.what() << "\n";
    return io_failure;
  } catch (const usage_error &e) {
    err << "error: " << e.what() << "\n";
    return model_error;
  } catch (const model_failure &e) {
    err << "error: " << e.what() << "\n";
    return model_error;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return model_error;
  } catch (const std::runtime_error &e) {
    err << "error: " << e.what() << "\n";
    return model_error;
  }
  return model_error;
}

} // namespace stpn::cli
