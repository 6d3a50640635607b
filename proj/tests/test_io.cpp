#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "stpn/case_models.hpp"
#include "stpn/io.hpp"
#include "support/hand_nets.hpp"
#include "support/random_nets.hpp"
#include "support/structure.hpp"

using namespace stpn;
using namespace stpn::fixtures;

namespace {

const char *minimal = R"(format_version: 1
places:
  - id: a
    tokens: 1
  - id: b
transitions:
  - id: t
    duration: {kind: constant, value: 2}
    inputs: [{place: a}]
    outputs: [{place: b, weight: 1}]
goal:
  tokens: [{place: b, op: ">=", count: 1}]
)";

bool mentions(const std::vector<io::diagnostic> &ds, std::string_view text) {
  return std::any_of(ds.begin(), ds.end(), [&](const io::diagnostic &d) { return d.message.find(text) != std::string::npos; });
}

} // namespace

TEST(ParseNet, MinimalDocument) {
  const auto r = io::parse_net(minimal);
  ASSERT_TRUE(r.ok()) << r.message();
  const net &n = *r.value;
  net expected;
  expected.places = {{"a", "", 1, {}}, {"b", "", 0, {}}};
  expected.transitions = {timed("t", 2, {{"a", 1}}, {{"b", 1}})};
  expected.goal = at_least("b", 1);
  EXPECT_EQ(n, expected);
}

TEST(ParseNet, NegativeWeightPointsAtTheWeight) {
  std::string text = minimal;
  text.replace(text.find("weight: 1"), 9, "weight: -2");
  const auto r = io::parse_net(text);
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.diagnostics.size(), 1u) << r.message();
  EXPECT_EQ(r.diagnostics[0].line, 10);
  EXPECT_EQ(r.diagnostics[0].column, 34);
  EXPECT_TRUE(mentions(r.diagnostics, "weight must be a positive integer"));
}

TEST(ParseNet, UnknownFieldIsRejected) {
  std::string text = minimal;
  text.replace(text.find("    tokens: 1"), 13, "    tokenz: 1");
  const auto r = io::parse_net(text);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r.diagnostics, "unknown field 'tokenz'")) << r.message();
  EXPECT_EQ(r.diagnostics[0].line, 4);
}

TEST(ParseNet, FormatVersionGate) {
  std::string text = minimal;
  text.replace(0, 17, "format_version: 2");
  EXPECT_TRUE(mentions(io::parse_net(text).diagnostics, "unsupported format_version 2"));
  EXPECT_TRUE(mentions(io::parse_net(std::string(minimal).substr(18)).diagnostics, "format_version"));
}

TEST(ParseNet, SyntaxErrorHasLocation) {
  const auto r = io::parse_net("format_version: 1\nplaces: [\n");
  ASSERT_FALSE(r.ok());
  EXPECT_GT(r.diagnostics[0].line, 0);
  EXPECT_TRUE(mentions(r.diagnostics, "syntax error"));
}

TEST(ParseNet, SemanticErrorsAreLocated) {
  std::string text = minimal;
  text.replace(text.find("place: b, weight"), 8, "place: z");
  const auto r = io::parse_net(text);
  ASSERT_FALSE(r.ok());
  // reported on the transition that holds the dangling arc
  EXPECT_EQ(r.diagnostics[0].line, 7) << r.message();
}

TEST(ParseNet, ShippedMissionFile) {
  const auto text = io::read_file(std::string(STPN_MODELS_DIR) + "/mission.pnet");
  const auto r = io::parse_net(text);
  ASSERT_TRUE(r.ok()) << r.message();
  const net &n = *r.value;
  EXPECT_EQ(n.places[*n.place_index("boxes")].initial_tokens, 3);
  ASSERT_TRUE(n.goal.has_value());
  EXPECT_EQ(n.goal->deadline, 60.0);
}

TEST(ReadFile, MissingFileThrows) {
  EXPECT_THROW((void)io::read_file("/nonexistent/nowhere.pnet"), io::io_error);
}

TEST(Serialize, RoundTripsRandomNets) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const net n = random_net(seed);
    ASSERT_TRUE(validate_net(n).valid()) << seed;
    const std::string text = io::serialize_net(n);
    const auto back = io::parse_net(text);
    ASSERT_TRUE(back.ok()) << seed << "\n" << back.message() << text;
    EXPECT_EQ(normalized(*back.value), normalized(n)) << seed << "\n" << text;
  }
}

TEST(Serialize, CanonicalFormIsIdempotent) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::string once = io::serialize_net(random_net(seed));
    const std::string twice = io::serialize_net(*io::parse_net(once).value);
    EXPECT_EQ(once, twice) << seed;
  }
}

TEST(Serialize, IndependentOfDeclarationOrder) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    net n = random_net(seed);
    net shuffled = n;
    std::reverse(shuffled.places.begin(), shuffled.places.end());
    std::reverse(shuffled.resources.begin(), shuffled.resources.end());
    std::reverse(shuffled.transitions.begin(), shuffled.transitions.end());
    for (auto &t : shuffled.transitions) {
      std::reverse(t.inputs.begin(), t.inputs.end());
      std::reverse(t.outputs.begin(), t.outputs.end());
      std::reverse(t.rates.begin(), t.rates.end());
    }
    EXPECT_EQ(io::serialize_net(n), io::serialize_net(shuffled)) << seed;
  }
}

TEST(Serialize, NineSignificantDigits) {
  net n = energy_chain_net();
  n.resources[0].initial_level = 1.0 / 3.0;
  const std::string text = io::serialize_net(n);
  EXPECT_NE(text.find("initial: 0.333333333\n"), std::string::npos) << text;
  EXPECT_NE(text.find("max: \"unbounded\""), std::string::npos);
}

TEST(Serialize, AwkwardStringsSurvive) {
  net n = chain_net();
  for (const auto &s : awkward_names()) {
    n.places[0].name = s;
    n.metadata["note"] = s;
    const auto back = io::parse_net(io::serialize_net(n));
    ASSERT_TRUE(back.ok()) << s;
    EXPECT_EQ(back.value->places[0].name, s);
    EXPECT_EQ(back.value->metadata.at("note"), s);
  }
}

TEST(Serialize, SideSectionsRoundTrip) {
  const auto bundle = case_study::build_case_models();
  const auto fusion = io::parse_document(io::serialize_fusion(bundle.fusion));
  ASSERT_TRUE(fusion.ok()) << fusion.message();
  EXPECT_EQ(io::serialize_fusion(*fusion.value->fusion), io::serialize_fusion(bundle.fusion));

  const auto sampling = io::parse_document(io::serialize_sampling(bundle.q1_system));
  ASSERT_TRUE(sampling.ok()) << sampling.message();
  EXPECT_EQ(sampling.value->sampling->entries, bundle.q1_system.entries);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_model(seed);
    const auto text = io::serialize_availability(m);
    const auto back = io::parse_document(text);
    ASSERT_TRUE(back.ok()) << back.message() << text;
    EXPECT_EQ(io::serialize_availability(*back.value->availability), text) << seed;
  }
}

TEST(CaseFiles, ShippedFilesAreCanonical) {
  const auto files = case_study::build_case_models().files();
  EXPECT_EQ(files.size(), 7u);
  for (const auto &[name, text] : files) {
    const auto path = std::filesystem::path(STPN_MODELS_DIR) / name;
    EXPECT_EQ(io::read_file(path.string()), text) << name;
    const auto doc = io::parse_document(text);
    ASSERT_TRUE(doc.ok()) << name << "\n" << doc.message();
    EXPECT_EQ(io::serialize_document(*doc.value, name.size() > 5 && name.substr(name.size() - 5) == ".pnet"), text)
        << name;
  }
}
