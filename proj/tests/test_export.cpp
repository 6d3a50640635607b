#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stpn/export.hpp"
#include "stpn/sim.hpp"
#include "support/hand_nets.hpp"

using namespace stpn;
using namespace stpn::fixtures;

namespace {

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

trace run(const net &n, double max_time = 20) {
  sim_config c;
  c.max_time = max_time;
  return simulate(n, c);
}

std::size_t count(const std::string &text, std::string_view what) {
  std::size_t k = 0;
  for (auto at = text.find(what); at != std::string::npos; at = text.find(what, at + 1))
    ++k;
  return k;
}

} // namespace

TEST(EventsCsv, EmptyTraceIsHeaderOnly) {
  EXPECT_EQ(io::events_csv(chain_net(), trace{}), "time,kind,transition,instance,target,delta\n");
  EXPECT_EQ(io::trajectories_csv(chain_net(), trace{}), "time,p1,p2\n");
}

TEST(EventsCsv, RowsPerDelta) {
  const net n = energy_chain_net();
  const auto rows = lines(io::events_csv(n, run(n)));
  // fire: p1 -1 and E drawn; complete: p2 +1; goal_reached without deltas
  ASSERT_GE(rows.size(), 4u);
  EXPECT_EQ(rows[1], "0,fire,t,1,place:p1,-1");
  EXPECT_NE(std::find(rows.begin(), rows.end(), "2,complete,t,1,place:p2,1"), rows.end());
  EXPECT_EQ(rows.back(), "2,goal_reached,,,,");
}

TEST(EventsCsv, TwoEventTrace) {
  trace tr;
  tr.events.push_back({0, event_kind::fire, 0, 1, 0, {}, {}});
  tr.events.push_back({2, event_kind::complete, 0, 1, 1, {}, {}});
  const auto rows = lines(io::events_csv(chain_net(), tr));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2], "2,complete,t,1,,");
}

TEST(EventsCsv, QuotesAwkwardIds) {
  net n = chain_net();
  n.transitions[0].id = "say \"hi\", twice";
  trace tr;
  tr.events.push_back({0, event_kind::fire, 0, 1, 0, {}, {}});
  EXPECT_EQ(lines(io::events_csv(n, tr))[1], "0,fire,\"say \"\"hi\"\", twice\",1,,");
}

TEST(TrajectoriesCsv, OneColumnPerPlaceAndResource) {
  const net n = energy_chain_net();
  const auto rows = lines(io::trajectories_csv(n, run(n)));
  EXPECT_EQ(rows[0], "time,p1,p2,E");
  EXPECT_EQ(rows[1], "0,1,0,5");
  EXPECT_EQ(rows.back().substr(rows.back().size() - 6), ",0,1,3");
}

TEST(TimelineBars, SuspensionSplitsTheBar) {
  const net n = suspension_net();
  const auto bars = io::timeline_bars(n, run(n));
  std::vector<io::timeline_bar> t_bars;
  std::copy_if(bars.begin(), bars.end(), std::back_inserter(t_bars), [](const io::timeline_bar &b) { return b.transition == 0; });
  ASSERT_EQ(t_bars.size(), 3u);
  EXPECT_EQ(t_bars[0].status, io::timeline_bar::kind::running);
  EXPECT_EQ(t_bars[0].start, 0.0);
  EXPECT_EQ(t_bars[0].end, 1.0);
  EXPECT_EQ(t_bars[1].status, io::timeline_bar::kind::suspended);
  EXPECT_EQ(t_bars[1].end, 3.0);
  EXPECT_EQ(t_bars[2].status, io::timeline_bar::kind::running);
  EXPECT_EQ(t_bars[2].end, 6.0);
}

TEST(TimelineBars, InhibitedSpanEndsWhenInhibitorClears) {
  // t cannot start while q holds a token; u finishes at 2 and the instant w clears q
  net n;
  n.places = {{"a", "", 1, {}}, {"q", "", 1, {}}, {"done", "", 0, {}}, {"f", "", 1, {}}, {"g", "", 0, {}}};
  n.transitions = {timed("t", 1, {{"a", 1}}, {{"done", 1}}), timed("u", 2, {{"f", 1}}, {{"g", 1}}),
                   timed("w", 0, {{"g", 1}, {"q", 1}}, {})};
  n.transitions[0].inhibitors = {"q"};
  n.goal = at_least("done", 1);
  const auto bars = io::timeline_bars(n, run(n));
  const auto it = std::find_if(bars.begin(), bars.end(),
                               [](const io::timeline_bar &b) { return b.status == io::timeline_bar::kind::inhibited; });
  ASSERT_NE(it, bars.end());
  EXPECT_EQ(it->start, 0.0);
  EXPECT_EQ(it->end, 2.0);
}

TEST(TimelineSvg, DrawsEveryBar) {
  const net n = suspension_net();
  const trace tr = run(n);
  const std::string svg = io::timeline_svg(n, tr);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "class=\"suspended\""), 1u);
  EXPECT_EQ(count(svg, "class=\"running\""), io::timeline_bars(n, tr).size() - 1);
  EXPECT_EQ(io::timeline_svg(n, tr), svg);
}

TEST(ExportTrace, FormatsByName) {
  const net n = chain_net();
  const trace tr = run(n);
  EXPECT_EQ(io::export_trace(n, tr, *io::parse_trace_format("events-csv")), io::events_csv(n, tr));
  EXPECT_EQ(io::export_trace(n, tr, *io::parse_trace_format("timeline-svg")), io::timeline_svg(n, tr));
  EXPECT_FALSE(io::parse_trace_format("png").has_value());
}

TEST(MatrixCsv, SingleCell) {
  stats::correlation_matrix m{{"a"}, {"b"}, {0.5}, 10};
  EXPECT_EQ(io::matrix_csv(m), ",b\na,0.5\n");
  m.values[0] = std::nan("");
  EXPECT_EQ(io::matrix_csv(m), ",b\na,NA\n");
}

TEST(MatrixCsv, SymmetricMatrixReadsTheSameTransposed) {
  const std::vector<std::string> labels{"x", "y", "z"};
  const std::vector<std::vector<double>> cols{{1, 2, 3, 4, 5}, {2, 1, 4, 3, 6}, {5, 3, 2, 2, 1}};
  const auto m = stats::correlate_columns(labels, cols, stats::correlation_method::pearson);
  const auto rows = lines(io::matrix_csv(m));
  ASSERT_EQ(rows.size(), 4u);
  std::vector<std::vector<std::string>> cells;
  for (const auto &r : rows) {
    std::vector<std::string> c;
    std::istringstream in(r);
    for (std::string f; std::getline(in, f, ',');)
      c.push_back(f);
    cells.push_back(c);
  }
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t j = 1; j < 4; ++j)
      EXPECT_EQ(cells[i][j], cells[j][i]);
  EXPECT_EQ(cells[1][1], "1");
}

TEST(HeatmapSvg, UndefinedCellsUseThePattern) {
  stats::correlation_matrix m{{"a", "b"}, {"c", "d"}, {0.5, std::nan(""), -1.0, 0.0}, 10};
  const std::string svg = io::heatmap_svg(m, {"mission", "system"});
  // one per undefined cell plus the legend swatch
  EXPECT_EQ(count(svg, "fill=\"url(#na)\""), 2u);
  EXPECT_EQ(count(svg, ">n/a<"), 1u);
  EXPECT_NE(svg.find(io::diverging_color(-1.0)), std::string::npos);
  EXPECT_NE(svg.find(">mission<"), std::string::npos);
  EXPECT_THROW((void)io::heatmap_svg(m, {"only one"}), std::invalid_argument);
}

TEST(DivergingColor, Endpoints) {
  EXPECT_EQ(io::diverging_color(0.0), "#f7f7f7");
  EXPECT_EQ(io::diverging_color(1.0), "#b2182b");
  EXPECT_EQ(io::diverging_color(-1.0), "#2166ac");
  EXPECT_EQ(io::diverging_color(7.0), io::diverging_color(1.0));
}

TEST(SweepCsv, Rows) {
  EXPECT_EQ(io::sweep_csv({{1, 0.5}, {2, 0.75}}), "count,availability\n1,0.5\n2,0.75\n");
}
