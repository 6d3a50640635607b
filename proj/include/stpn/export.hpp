#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "availability.hpp"
#include "montecarlo.hpp"
#include "net.hpp"
#include "stats.hpp"
#include "trace.hpp"

namespace stpn::io {

enum class trace_format { events_csv, trajectories_csv, timeline_svg };
enum class matrix_format { csv, heatmap_svg };

[[nodiscard]] inline std::optional<trace_format> parse_trace_format(std::string_view s) {
  if (s == "events-csv")
    return trace_format::events_csv;
  if (s == "trajectories-csv")
    return trace_format::trajectories_csv;
  if (s == "timeline-svg")
    return trace_format::timeline_svg;
  return std::nullopt;
}

[[nodiscard]] inline std::optional<matrix_format> parse_matrix_format(std::string_view s) {
  if (s == "csv")
    return matrix_format::csv;
  if (s == "heatmap-svg")
    return matrix_format::heatmap_svg;
  return std::nullopt;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_row(const std::vector<std::string> &fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i)
      out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

inline std::string g9(double v) {
  if (std::isnan(v))
    return "NA";
  if (v == 0.0)
    return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

} // namespace detail

//==============================================================================
// Trace exports

// One row per token or resource delta; events without deltas get one row
// with empty target and delta. Columns: time,kind,transition,instance,target,delta
// where target is "place:<id>" or "resource:<id>".
[[nodiscard]] inline std::string events_csv(const net &n, const trace &tr) {
  std::string out = "time,kind,transition,instance,target,delta\n";
  for (const auto &e : tr.events) {
    const std::string time = detail::g9(e.time);
    const std::string kind(to_string(e.kind));
    const std::string tid = e.transition == no_transition ? "" : n.transitions.at(e.transition).id;
    const std::string inst = e.instance ? std::to_string(e.instance) : "";
    if (e.tokens.empty() && e.resources.empty()) {
      out += detail::csv_row({time, kind, tid, inst, "", ""});
      continue;
    }
    for (const auto &d : e.tokens)
      out += detail::csv_row({time, kind, tid, inst, "place:" + n.places.at(d.place).id, std::to_string(d.amount)});
    for (const auto &d : e.resources)
      out += detail::csv_row(
          {time, kind, tid, inst, "resource:" + n.resources.at(d.resource).id, detail::g9(d.amount)});
  }
  return out;
}

// Wide format: time, then one column per place and per resource in
// declaration order.
[[nodiscard]] inline std::string trajectories_csv(const net &n, const trace &tr) {
  std::vector<std::string> header{"time"};
  for (const auto &p : n.places)
    header.push_back(p.id);
  for (const auto &r : n.resources)
    header.push_back(r.id);
  std::string out = detail::csv_row(header);
  for (const auto &s : tr.trajectory) {
    std::vector<std::string> row{detail::g9(s.time)};
    for (auto v : s.tokens)
      row.push_back(std::to_string(v));
    for (auto v : s.levels)
      row.push_back(detail::g9(v));
    out += detail::csv_row(row);
  }
  return out;
}

struct timeline_bar {
  std::size_t transition = 0;
  std::uint64_t instance = 0; // 0 for inhibited spans
  double start = 0.0;
  double end = 0.0;
  enum class kind { running, suspended, inhibited } status = kind::running;
  std::size_t row = 0; // sub-row inside the transition lane
};

// Activity intervals reconstructed from the event log. Instances still active
// when the trace ends are closed at final_time.
[[nodiscard]] inline std::vector<timeline_bar> timeline_bars(const net &n, const trace &tr) {
  std::vector<timeline_bar> bars;
  struct open_instance {
    std::size_t transition;
    double since;
    bool suspended;
    std::size_t row;
  };
  std::map<std::uint64_t, open_instance> open;
  std::map<std::size_t, double> inhibited_since;
  // rows occupied per transition lane: row -> busy
  std::vector<std::vector<bool>> busy(n.transitions.size());

  auto close = [&](std::uint64_t id, const open_instance &o, double t) {
    bars.push_back({o.transition, id, o.since, t,
                    o.suspended ? timeline_bar::kind::suspended : timeline_bar::kind::running, o.row});
  };

  // Marking replayed from the deltas, used to close inhibited spans once
  // every inhibitor place is empty again.
  std::vector<std::int64_t> tokens = tr.initial_tokens;
  tokens.resize(n.places.size(), 0);
  std::vector<std::vector<std::size_t>> inhibitors(n.transitions.size());
  for (std::size_t t = 0; t < n.transitions.size(); ++t)
    for (const auto &p : n.transitions[t].inhibitors)
      if (auto i = n.place_index(p))
        inhibitors[t].push_back(*i);

  for (const auto &e : tr.events) {
    for (const auto &d : e.tokens)
      tokens[d.place] += d.amount;
    switch (e.kind) {
    case event_kind::fire: {
      auto &rows = busy[e.transition];
      std::size_t row = 0;
      while (row < rows.size() && rows[row])
        ++row;
      if (row == rows.size())
        rows.push_back(true);
      else
        rows[row] = true;
      open[e.instance] = {e.transition, e.time, false, row};
      if (auto it = inhibited_since.find(e.transition); it != inhibited_since.end()) {
        bars.push_back({e.transition, 0, it->second, e.time, timeline_bar::kind::inhibited, 0});
        inhibited_since.erase(it);
      }
      break;
    }
    case event_kind::suspend:
    case event_kind::resume: {
      auto it = open.find(e.instance);
      if (it == open.end())
        break;
      close(e.instance, it->second, e.time);
      it->second.since = e.time;
      it->second.suspended = e.kind == event_kind::suspend;
      break;
    }
    case event_kind::complete: {
      auto it = open.find(e.instance);
      if (it == open.end())
        break;
      close(e.instance, it->second, e.time);
      busy[it->second.transition][it->second.row] = false;
      open.erase(it);
      break;
    }
    case event_kind::inhibited:
      inhibited_since.emplace(e.transition, e.time);
      break;
    default:
      break;
    }
    for (auto it = inhibited_since.begin(); it != inhibited_since.end();) {
      const auto &inh = inhibitors[it->first];
      const bool clear = std::all_of(inh.begin(), inh.end(), [&](std::size_t p) { return tokens[p] == 0; });
      if (clear && e.kind != event_kind::inhibited) {
        bars.push_back({it->first, 0, it->second, e.time, timeline_bar::kind::inhibited, 0});
        it = inhibited_since.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (const auto &[id, o] : open)
    close(id, o, tr.final_time);
  for (const auto &[t, since] : inhibited_since)
    bars.push_back({t, 0, since, tr.final_time, timeline_bar::kind::inhibited, 0});
  std::stable_sort(bars.begin(), bars.end(), [](const timeline_bar &a, const timeline_bar &b) {
    return std::tie(a.transition, a.start, a.instance) < std::tie(b.transition, b.start, b.instance);
  });
  return bars;
}

// Static SVG, one lane per transition. Running bars green, suspended orange,
// inhibited gray behind the lane.
[[nodiscard]] inline std::string timeline_svg(const net &n, const trace &tr) {
  using detail::fixed;
  const auto bars = timeline_bars(n, tr);
  std::vector<std::size_t> rows(n.transitions.size(), 1);
  for (const auto &b : bars)
    rows[b.transition] = std::max(rows[b.transition], b.row + 1);

  const double left = 160, right = 20, top = 40, bar_h = 14, gap = 8, width = 960;
  const double span = std::max(tr.final_time, 1e-9);
  const double scale = (width - left - right) / span;
  std::vector<double> lane_y(n.transitions.size());
  double y = top;
  for (std::size_t t = 0; t < n.transitions.size(); ++t) {
    lane_y[t] = y;
    y += static_cast<double>(rows[t]) * bar_h + gap;
  }
  const double height = y + 40;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
         fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fixed(width, 0) + "\" height=\"" + fixed(height, 0) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(left, 0) + "\" y=\"20\">outcome: " + std::string(to_string(tr.result)) +
         ", final time " + fixed(tr.final_time, 3) + "</text>\n";

  for (std::size_t t = 0; t < n.transitions.size(); ++t) {
    const double lane_h = static_cast<double>(rows[t]) * bar_h;
    out += "<text x=\"" + fixed(left - 6, 0) + "\" y=\"" + fixed(lane_y[t] + lane_h / 2 + 4, 2) +
           "\" text-anchor=\"end\">" + detail::xml_escape(n.transitions[t].id) + "</text>\n";
    out += "<line x1=\"" + fixed(left, 0) + "\" x2=\"" + fixed(width - right, 0) + "\" y1=\"" +
           fixed(lane_y[t] + lane_h + gap / 2, 2) + "\" y2=\"" + fixed(lane_y[t] + lane_h + gap / 2, 2) +
           "\" stroke=\"#e0e0e0\"/>\n";
  }

  auto rect = [&](const timeline_bar &b, double yy, double h, const char *fill, const char *cls) {
    const double x0 = left + b.start * scale;
    const double w = std::max((b.end - b.start) * scale, 0.5);
    out += "<rect class=\"" + std::string(cls) + "\" x=\"" + fixed(x0, 2) + "\" y=\"" + fixed(yy, 2) +
           "\" width=\"" + fixed(w, 2) + "\" height=\"" + fixed(h, 2) + "\" fill=\"" + fill + "\">";
    out += "<title>" + detail::xml_escape(n.transitions[b.transition].id) +
           (b.instance ? " #" + std::to_string(b.instance) : std::string()) + " " + fixed(b.start, 3) + "-" +
           fixed(b.end, 3) + "</title></rect>\n";
  };
  for (const auto &b : bars)
    if (b.status == timeline_bar::kind::inhibited)
      rect(b, lane_y[b.transition], static_cast<double>(rows[b.transition]) * bar_h, "#bdbdbd", "inhibited");
  for (const auto &b : bars) {
    if (b.status == timeline_bar::kind::inhibited)
      continue;
    const double yy = lane_y[b.transition] + static_cast<double>(b.row) * bar_h + 1;
    if (b.status == timeline_bar::kind::running)
      rect(b, yy, bar_h - 2, "#43a047", "running");
    else
      rect(b, yy, bar_h - 2, "#fb8c00", "suspended");
  }

  // time axis
  const double axis_y = y + 6;
  out += "<line x1=\"" + fixed(left, 0) + "\" x2=\"" + fixed(width - right, 0) + "\" y1=\"" + fixed(axis_y, 2) +
         "\" y2=\"" + fixed(axis_y, 2) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 10; ++i) {
    const double t = span * i / 10.0;
    const double x = left + t * scale;
    out += "<line x1=\"" + fixed(x, 2) + "\" x2=\"" + fixed(x, 2) + "\" y1=\"" + fixed(axis_y, 2) + "\" y2=\"" +
           fixed(axis_y + 4, 2) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(x, 2) + "\" y=\"" + fixed(axis_y + 16, 2) + "\" text-anchor=\"middle\">" +
           fixed(tr.final_time > 0 ? t : 0.0, 1) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

[[nodiscard]] inline std::string export_trace(const net &n, const trace &tr, trace_format format) {
  switch (format) {
  case trace_format::events_csv:
    return events_csv(n, tr);
  case trace_format::trajectories_csv:
    return trajectories_csv(n, tr);
  case trace_format::timeline_svg:
    return timeline_svg(n, tr);
  }
  throw std::invalid_argument("export_trace: unknown format");
}

//==============================================================================
// Matrix exports

// Header row is an empty corner cell followed by the column labels; undefined
// cells are written as NA.
[[nodiscard]] inline std::string matrix_csv(const stats::correlation_matrix &m) {
  std::vector<std::string> header{""};
  header.insert(header.end(), m.col_labels.begin(), m.col_labels.end());
  std::string out = detail::csv_row(header);
  for (std::size_t i = 0; i < m.row_labels.size(); ++i) {
    std::vector<std::string> row{m.row_labels[i]};
    for (std::size_t j = 0; j < m.col_labels.size(); ++j)
      row.push_back(detail::g9(m.at(i, j)));
    out += detail::csv_row(row);
  }
  return out;
}

// Blue (-1) through white (0) to red (+1).
[[nodiscard]] inline std::string diverging_color(double r) {
  r = std::clamp(r, -1.0, 1.0);
  const int lo[3] = {33, 102, 172}, mid[3] = {247, 247, 247}, hi[3] = {178, 24, 43};
  const int *end = r < 0 ? lo : hi;
  const double f = std::abs(r);
  char buf[8];
  int c[3];
  for (int i = 0; i < 3; ++i)
    c[i] = static_cast<int>(std::lround(mid[i] + (end[i] - mid[i]) * f));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

// `row_groups`, when given, labels each row (e.g. its capability level);
// consecutive rows with the same label are bracketed together.
[[nodiscard]] inline std::string heatmap_svg(const stats::correlation_matrix &m,
                                             const std::vector<std::string> &row_groups = {}) {
  using detail::fixed;
  if (!row_groups.empty() && row_groups.size() != m.row_labels.size())
    throw std::invalid_argument("heatmap_svg: one group label per row required");
  const double cell = 44, group_w = row_groups.empty() ? 0 : 90, label_w = 130, top = 110;
  const double left = group_w + label_w;
  const double width = left + cell * static_cast<double>(m.col_labels.size()) + 120;
  const double height = top + cell * static_cast<double>(m.row_labels.size()) + 30;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
         fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<defs><pattern id=\"na\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
         "<rect width=\"6\" height=\"6\" fill=\"#d9d9d9\"/>"
         "<path d=\"M0,6 L6,0\" stroke=\"#8c8c8c\" stroke-width=\"1\"/></pattern></defs>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fixed(width, 0) + "\" height=\"" + fixed(height, 0) +
         "\" fill=\"white\"/>\n";

  for (std::size_t j = 0; j < m.col_labels.size(); ++j) {
    const double x = left + cell * static_cast<double>(j) + cell / 2;
    out += "<text transform=\"translate(" + fixed(x, 2) + "," + fixed(top - 6, 2) +
           ") rotate(-45)\">" + detail::xml_escape(m.col_labels[j]) + "</text>\n";
  }
  for (std::size_t i = 0; i < m.row_labels.size(); ++i) {
    const double y = top + cell * static_cast<double>(i);
    out += "<text x=\"" + fixed(left - 6, 2) + "\" y=\"" + fixed(y + cell / 2 + 4, 2) +
           "\" text-anchor=\"end\">" + detail::xml_escape(m.row_labels[i]) + "</text>\n";
    for (std::size_t j = 0; j < m.col_labels.size(); ++j) {
      const double x = left + cell * static_cast<double>(j);
      const double v = m.at(i, j);
      const bool defined = !std::isnan(v);
      out += "<rect x=\"" + fixed(x, 2) + "\" y=\"" + fixed(y, 2) + "\" width=\"" + fixed(cell, 2) +
             "\" height=\"" + fixed(cell, 2) + "\" fill=\"" + (defined ? diverging_color(v) : "url(#na)") +
             "\" stroke=\"white\"/>\n";
      out += "<text x=\"" + fixed(x + cell / 2, 2) + "\" y=\"" + fixed(y + cell / 2 + 4, 2) +
             "\" text-anchor=\"middle\">" + (defined ? fixed(v, 2) : std::string("n/a")) + "</text>\n";
    }
  }

  // level brackets
  for (std::size_t i = 0; i < row_groups.size();) {
    std::size_t j = i;
    while (j + 1 < row_groups.size() && row_groups[j + 1] == row_groups[i])
      ++j;
    const double y0 = top + cell * static_cast<double>(i) + 2;
    const double y1 = top + cell * static_cast<double>(j + 1) - 2;
    out += "<line x1=\"" + fixed(group_w - 6, 2) + "\" x2=\"" + fixed(group_w - 6, 2) + "\" y1=\"" + fixed(y0, 2) +
           "\" y2=\"" + fixed(y1, 2) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(group_w - 10, 2) + "\" y=\"" + fixed((y0 + y1) / 2 + 4, 2) +
           "\" text-anchor=\"end\" font-weight=\"bold\">" + detail::xml_escape(row_groups[i]) + "</text>\n";
    i = j + 1;
  }

  // color legend
  const double lx = left + cell * static_cast<double>(m.col_labels.size()) + 30;
  for (int k = 0; k <= 20; ++k) {
    const double r = 1.0 - k / 10.0;
    out += "<rect x=\"" + fixed(lx, 2) + "\" y=\"" + fixed(top + k * 8.0, 2) + "\" width=\"16\" height=\"8\" fill=\"" +
           diverging_color(r) + "\"/>\n";
  }
  out += "<text x=\"" + fixed(lx + 22, 2) + "\" y=\"" + fixed(top + 8, 2) + "\">+1</text>\n";
  out += "<text x=\"" + fixed(lx + 22, 2) + "\" y=\"" + fixed(top + 88, 2) + "\">0</text>\n";
  out += "<text x=\"" + fixed(lx + 22, 2) + "\" y=\"" + fixed(top + 168, 2) + "\">-1</text>\n";
  out += "<rect x=\"" + fixed(lx, 2) + "\" y=\"" + fixed(top + 180, 2) +
         "\" width=\"16\" height=\"12\" fill=\"url(#na)\"/>\n";
  out += "<text x=\"" + fixed(lx + 22, 2) + "\" y=\"" + fixed(top + 190, 2) + "\">undefined</text>\n";
  out += "</svg>\n";
  return out;
}

[[nodiscard]] inline std::string export_matrix(const stats::correlation_matrix &m, matrix_format format,
                                               const std::vector<std::string> &row_groups = {}) {
  switch (format) {
  case matrix_format::csv:
    return matrix_csv(m);
  case matrix_format::heatmap_svg:
    return heatmap_svg(m, row_groups);
  }
  throw std::invalid_argument("export_matrix: unknown format");
}

//==============================================================================
// Batch and sweep tables

// One row per run: run index, sampled inputs, outcome and outputs.
[[nodiscard]] inline std::string batch_csv(const batch_result &b) {
  std::vector<std::string> header{"run"};
  header.insert(header.end(), b.input_names.begin(), b.input_names.end());
  header.push_back("outcome");
  header.push_back("final_time");
  header.push_back("goal");
  header.push_back("goal_reached");
  for (const auto &r : b.resource_names)
    header.push_back("final:" + r);
  std::string out = detail::csv_row(header);
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    const auto &run = b.runs[i];
    std::vector<std::string> row{std::to_string(i)};
    for (double v : run.inputs)
      row.push_back(detail::g9(v));
    row.push_back(std::string(to_string(run.result)));
    row.push_back(detail::g9(run.final_time));
    row.push_back(run.goal ? "1" : "0");
    row.push_back(run.goal_reached ? "1" : "0");
    for (double v : run.final_levels)
      row.push_back(detail::g9(v));
    out += detail::csv_row(row);
  }
  return out;
}

[[nodiscard]] inline std::string sweep_csv(const std::vector<sweep_point> &points) {
  std::string out = "count,availability\n";
  for (const auto &p : points)
    out += std::to_string(p.count) + "," + detail::g9(p.availability) + "\n";
  return out;
}

} // namespace stpn::io
