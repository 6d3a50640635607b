#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "support/hand_nets.hpp"

using namespace stpn;
using namespace stpn::fixtures;
namespace fs = std::filesystem;

namespace {

struct result {
  int code;
  std::string out, err;
};

result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stpn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string &name, const std::string &text) {
    const auto p = (dir_ / name).string();
    io::write_file(p, text);
    return p;
  }
  std::string net_file(const std::string &name, const net &n) { return file(name, io::serialize_net(n)); }
  std::string path(const std::string &name) const { return (dir_ / name).string(); }
  static std::string model(const std::string &name) { return std::string(STPN_MODELS_DIR) + "/" + name; }

  fs::path dir_;
};

} // namespace

TEST_F(Cli, ValidateReportsCounts) {
  const auto r = run({"validate", net_file("chain.pnet", energy_chain_net())});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("valid (2 places, 1 resources, 1 transitions)"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateShippedFiles) {
  for (const char *f : {"mission.pnet", "system.pnet", "capability.pnet", "fusion.map", "q1_mission.sampling",
                        "q1_system.sampling", "q2_capability.model"})
    EXPECT_EQ(run({"validate", model(f)}).code, 0) << f;
}

TEST_F(Cli, BrokenReferenceExitsOne) {
  std::string text = io::serialize_net(chain_net());
  text.replace(text.find("place: \"p2\""), 11, "place: \"px\"");
  const auto r = run({"validate", file("broken.pnet", text)});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("px"), std::string::npos) << r.err;
  // diagnostics carry file:line:column
  EXPECT_NE(r.err.find("broken.pnet:"), std::string::npos) << r.err;
}

TEST_F(Cli, UnreadableFileExitsTwo) {
  EXPECT_EQ(run({"validate", path("missing.pnet")}).code, 2);
  EXPECT_EQ(run({"simulate", path("missing.pnet")}).code, 2);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  const auto f = net_file("chain.pnet", chain_net());
  EXPECT_EQ(run({"simulate", f, "--policy", "coin_toss"}).code, 1);
  EXPECT_EQ(run({"simulate", f, "--max-time", "0"}).code, 1);
  EXPECT_EQ(run({"mc", f, "--runs", "0"}).code, 1);
  EXPECT_EQ(run({"reach", f, "--format", "xml"}).code, 1);
}

TEST_F(Cli, SimulateChain) {
  const auto f = net_file("chain.pnet", energy_chain_net());
  const auto r = run({"simulate", f, "--seed", "7", "--out-dir", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "outcome success at time 2; E=3\n");
  for (const char *name : {"events.csv", "trajectories.csv", "timeline.svg"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / name)) << name;
  EXPECT_EQ(run({"simulate", f, "--seed", "7"}).out, r.out);
}

TEST_F(Cli, SimulateJson) {
  const auto r = run({"simulate", net_file("chain.pnet", chain_net()), "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("outcome"), "success");
  EXPECT_EQ(j.at("final_time"), 2.0);
}

TEST_F(Cli, NonSuccessExitsThree) {
  const auto r = run({"simulate", net_file("over.pnet", overdraw_net())});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("outcome resource_failure at time 6"), std::string::npos) << r.out;
}

TEST_F(Cli, ReachCounts) {
  const auto r = run({"reach", net_file("chain.pnet", chain_net())});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("2 markings, 1 deadlock\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("truncated: no"), std::string::npos);

  net cycle = chain_net();
  cycle.transitions.push_back(timed("back", 1, {{"p2", 1}}, {{"p1", 1}}));
  const auto c = run({"reach", net_file("cycle.pnet", cycle)});
  EXPECT_NE(c.out.find("2 markings, 0 deadlocks\n"), std::string::npos) << c.out;

  net grow;
  grow.places = {{"p", "", 0, {}}};
  grow.transitions = {timed("src", 1, {}, {{"p", 1}})};
  const auto g = run({"reach", net_file("grow.pnet", grow), "--max-states", "10"});
  EXPECT_NE(g.out.find("truncated: yes"), std::string::npos) << g.out;
}

TEST_F(Cli, McOnDeterministicNet) {
  const auto f = net_file("chain.pnet", chain_net());
  const auto r = run({"mc", f, "--runs", "20", "--jobs", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("runs 20, success rate 1.000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mean 2.000 sd 0.000"), std::string::npos) << r.out;
}

TEST_F(Cli, McIsDeterministicAcrossJobCounts) {
  const auto f = model("mission.pnet");
  const auto a = run({"mc", f, "--runs", "50", "--seed", "3", "--jobs", "1", "--sampling",
                      model("q1_mission.sampling"), "--correlate", "--format", "json"});
  const auto b = run({"mc", f, "--runs", "50", "--seed", "3", "--jobs", "3", "--sampling",
                      model("q1_mission.sampling"), "--correlate", "--format", "json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j.at("runs"), 50);
  EXPECT_TRUE(j.contains("correlation"));
}

TEST_F(Cli, McSweepWritesTable) {
  const auto r = run({"mc", model("mission.pnet"), "--runs", "30", "--sweep", "initial_tokens(robots)=1:3",
                      "--out-dir", path("sweep")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = io::read_file((dir_ / "sweep" / "sweep.csv").string());
  EXPECT_EQ(table.rfind("value,runs,success_rate", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

TEST_F(Cli, McRejectsUnknownTarget) {
  const auto r = run({"mc", net_file("chain.pnet", chain_net()), "--runs", "5", "--sampling",
                      "initial_tokens(ghost)=uniform(1,2)"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, Reliability) {
  availability_model m;
  m.devices = {{"a", 0.9, 2, std::nullopt}};
  m.capabilities = {{"mission", combinator::all_of, {"a"}, "mission"}};
  m.mission_capability = "mission";
  const auto f = file("one.model", io::serialize_availability(m));
  const auto r = run({"reliability", f, "--trials", "20000", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("mission_availability").at("closed_form").get<double>(), 0.99, 1e-12);
  EXPECT_NEAR(j.at("mission_availability").at("monte_carlo").get<double>(), 0.99, 0.01);

  const auto t = run({"reliability", model("q2_capability.model"), "--trials", "2000", "--sweep", "system",
                      "--range", "1:3", "--out-dir", path("rel")});
  EXPECT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("system redundancy sweep"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "rel" / "correlation.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "rel" / "sweep.csv"));

  EXPECT_EQ(run({"reliability", net_file("chain.pnet", chain_net())}).code, 1);
}

TEST_F(Cli, ComposeCaseStudy) {
  const auto r = run({"compose", model("mission.pnet"), model("system.pnet"), model("capability.pnet"),
                      "--fusion", model("fusion.map"), "--out", path("merged.pnet")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("merged 3 nets"), std::string::npos);
  const auto merged = io::parse_net(io::read_file(path("merged.pnet")));
  ASSERT_TRUE(merged.ok()) << merged.message();
  EXPECT_EQ(io::serialize_net(*merged.value), io::serialize_net(case_study::build_case_models().merged()));

  const auto l = run({"levels", path("merged.pnet")});
  EXPECT_EQ(l.out.rfind("mission (", 0), 0u) << l.out;
}

TEST_F(Cli, ComposeConflictExitsOne) {
  net a = chain_net(), b = chain_net();
  a.metadata["id"] = "a";
  b.metadata["id"] = "b";
  b.places[0].initial_tokens = 2;
  fusion_map f;
  f.places.push_back({"p1", {{"a", "p1"}, {"b", "p1"}}, std::nullopt});
  const auto r = run({"compose", net_file("a.pnet", a), net_file("b.pnet", b), "--fusion",
                      file("f.map", io::serialize_fusion(f))});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, CaseModelsMatchShippedFiles) {
  ASSERT_EQ(run({"case-models", "--out-dir", path("cases")}).code, 0);
  for (const auto &[name, text] : case_study::build_case_models().files()) {
    EXPECT_EQ(io::read_file((dir_ / "cases" / name).string()), text) << name;
    EXPECT_EQ(io::read_file(model(name)), text) << name;
  }
}
