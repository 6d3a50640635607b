#include <gtest/gtest.h>

#include <cmath>

#include "stpn/availability.hpp"
#include "stpn/case_models.hpp"
#include "stpn/sim.hpp"
#include "support/oracles.hpp"
#include "support/random_nets.hpp"

using namespace stpn;
using namespace stpn::fixtures;

TEST(DeviceAvailability, ClosedForm) {
  EXPECT_EQ(device_availability(1.0, 1), 1.0);
  EXPECT_NEAR(device_availability(0.9, 2), 0.99, 1e-15);
  EXPECT_EQ(device_availability(0.0, 3), 0.0);
  EXPECT_THROW((void)device_availability(1.1, 1), std::invalid_argument);
  EXPECT_THROW((void)device_availability(0.5, 0), std::invalid_argument);
  EXPECT_THROW((void)device_availability(std::nan(""), 1), std::invalid_argument);
}

TEST(DeviceAvailability, MatchesCopyEnumeration) {
  for (double p : {0.0, 0.1, 0.5, 0.9, 0.99, 1.0})
    for (std::int64_t k = 1; k <= 8; ++k)
      EXPECT_NEAR(device_availability(p, k), copies_up_probability(p, k), 1e-12) << p << " " << k;
}

TEST(DeviceAvailability, MatchesBernoulliDraws) {
  stpn::rng r{21};
  for (std::int64_t k = 1; k <= 5; ++k) {
    int up = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      bool any = false;
      for (std::int64_t c = 0; c < k; ++c)
        any = r.bernoulli(0.9) || any;
      up += any;
    }
    EXPECT_NEAR(up / static_cast<double>(n), device_availability(0.9, k), 0.003) << k;
  }
}

TEST(MissionAvailability, Examples) {
  EXPECT_EQ(mission_availability(product_model({1.0}, 1)), 1.0);
  EXPECT_NEAR(mission_availability(product_model({0.99, 0.99}, 1)), 0.9801, 1e-15);
  const auto four = product_model({0.9, 0.9, 0.9, 0.9}, 2);
  EXPECT_NEAR(mission_availability(four), mission_availability_by_enumeration(four), 1e-12);
  const double a = std::pow(0.9, 4);
  EXPECT_NEAR(mission_availability(four), 1 - (1 - a) * (1 - a), 1e-12);
}

TEST(MissionAvailability, RandomModelsMatchEnumeration) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto m = random_model(seed);
    ASSERT_TRUE(validate_model(m).valid()) << seed;
    EXPECT_NEAR(robot_availability(m), robot_availability_by_enumeration(m), 1e-12) << seed;
    EXPECT_NEAR(mission_availability(m), mission_availability_by_enumeration(m), 1e-12) << seed;
  }
}

TEST(MissionAvailability, RandomModelsMatchMonteCarlo) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_model(seed + 1000);
    const auto mc = reliability_mc(m, 100000, seed);
    EXPECT_NEAR(mc.mission, mission_availability(m), 0.01) << seed;
  }
}

TEST(CapabilityRollup, Examples) {
  const auto m = case_study::capability_model();
  device_states all{{"locomotion", true}, {"gripper", true}, {"mast", true}, {"camera", true}};
  for (const auto &[id, up] : capability_rollup(m, all))
    EXPECT_TRUE(up) << id;
  auto broken = all;
  broken["gripper"] = false;
  const auto caps = capability_rollup(m, broken);
  EXPECT_FALSE(caps.at("manipulation"));
  EXPECT_FALSE(caps.at("stacking"));
  EXPECT_TRUE(caps.at("detection"));
  EXPECT_TRUE(caps.at("approach"));
}

TEST(CapabilityRollup, MatchesTruthTable) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto m = random_model(seed);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m.devices.size()); mask += 1 + mask / 7) {
      device_states s;
      for (std::size_t i = 0; i < m.devices.size(); ++i)
        s[m.devices[i].id] = (mask >> i) & 1;
      const auto caps = capability_rollup(m, s);
      for (const auto &c : m.capabilities)
        EXPECT_EQ(caps.at(c.id), evaluate(m, c.id, s)) << seed << " " << c.id;
    }
  }
}

TEST(ValidateModel, ReportsStructuralErrors) {
  availability_model m = product_model({0.9});
  m.capabilities.push_back({"loop_a", combinator::all_of, {"loop_b"}, ""});
  m.capabilities.push_back({"loop_b", combinator::any_of, {"loop_a"}, ""});
  EXPECT_FALSE(validate_model(m).valid());

  availability_model dangling = product_model({0.9});
  dangling.capabilities[0].depends_on.push_back("ghost");
  EXPECT_FALSE(validate_model(dangling).valid());

  availability_model bad_p = product_model({1.5});
  EXPECT_FALSE(validate_model(bad_p).valid());

  availability_model no_root = product_model({0.9});
  no_root.mission_capability = "nothing";
  EXPECT_FALSE(validate_model(no_root).valid());
  EXPECT_THROW((void)mission_availability(no_root), std::invalid_argument);
}

TEST(ReliabilityMc, PerfectDevicesGiveUndefinedCorrelations) {
  const auto mc = reliability_mc(product_model({1.0, 1.0}), 500, 1);
  EXPECT_EQ(mc.mission, 1.0);
  for (std::size_t i = 0; i < mc.correlation.values.size(); ++i)
    EXPECT_TRUE(std::isnan(mc.correlation.values[i]));
}

TEST(ReliabilityMc, ClampedNormalMean) {
  availability_model m = product_model({0.9});
  m.devices[0].reliability_distribution = sampler{sampler_kind::normal, 0.9, 0.05};
  const auto mc = reliability_mc(m, 100000, 3);
  EXPECT_NEAR(mc.mission, clamped_normal_mean(0.9, 0.05), 0.005);
}

TEST(ReliabilityMc, CaseStudyDevicesCorrelatePositively) {
  const auto m = case_study::capability_model();
  const auto mc = reliability_mc(m, 1000, 0);
  for (const auto &d : mc.device_labels)
    EXPECT_GT(mc.correlation.at("stacking", d), 0.0) << d;
  EXPECT_EQ(mc.capability_labels.size(), 5u);
}

TEST(ReliabilityMc, IndependentOfJobCount) {
  const auto m = case_study::capability_model();
  const auto a = reliability_mc(m, 3000, 5, 1), b = reliability_mc(m, 3000, 5, 3);
  EXPECT_EQ(a.availability, b.availability);
  EXPECT_EQ(a.correlation.values.size(), b.correlation.values.size());
  for (std::size_t i = 0; i < a.correlation.values.size(); ++i)
    EXPECT_EQ(a.correlation.values[i], b.correlation.values[i]);
}

TEST(RedundancySweep, SubsystemIsMonotone) {
  const auto pts = redundancy_sweep(case_study::capability_model(), sweep_axis::subsystem, 1, 6, 0.95);
  ASSERT_EQ(pts.size(), 6u);
  for (std::size_t i = 1; i < pts.size(); ++i)
    EXPECT_GE(pts[i].availability, pts[i - 1].availability);
  EXPECT_NEAR(pts[0].availability, std::pow(0.95, 4), 1e-12);
  EXPECT_NEAR(pts[1].availability, std::pow(1 - 0.05 * 0.05, 4), 1e-12);
}

TEST(RedundancySweep, SystemPointsFollowClosedForm) {
  const auto m = case_study::capability_model();
  const double a = robot_availability(m);
  EXPECT_NEAR(a, std::pow(0.9, 4), 1e-12);
  const auto pts = redundancy_sweep(m, sweep_axis::system, 1, 5);
  for (const auto &p : pts)
    EXPECT_EQ(p.availability, 1 - std::pow(1 - a, static_cast<double>(p.count)));
  for (std::size_t i = 1; i < pts.size(); ++i)
    EXPECT_GT(pts[i].availability, pts[i - 1].availability);
  EXPECT_THROW((void)redundancy_sweep(m, sweep_axis::system, 0, 3), std::invalid_argument);
  EXPECT_THROW((void)redundancy_sweep(m, sweep_axis::system, 3, 2), std::invalid_argument);
}

TEST(CapabilityNet, ReachesMissionWithAllDevices) {
  const net n = to_capability_net(case_study::capability_model());
  ASSERT_TRUE(validate_net(n).valid());
  sim_config c;
  c.max_time = 10;
  const trace tr = simulate(n, c);
  EXPECT_EQ(tr.result, outcome::success);
  EXPECT_EQ(tr.final_tokens[*n.place_index("stacking_unavailable")], 0);
}

TEST(CapabilityNet, MissingDeviceBlocksMission) {
  const net n = to_capability_net(case_study::capability_model(), {{"gripper", 0}});
  sim_config c;
  c.max_time = 10;
  const trace tr = simulate(n, c);
  EXPECT_EQ(tr.result, outcome::deadlock);
  EXPECT_EQ(tr.final_tokens[*n.place_index("stacking_unavailable")], 1);
  EXPECT_EQ(tr.final_tokens[*n.place_index("manipulation_unavailable")], 1);
  EXPECT_EQ(tr.final_tokens[*n.place_index("detection_unavailable")], 0);
}

TEST(CapabilityNet, AgreesWithRollupOnRandomModels) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto m = random_model(seed, 6);
    m.n_systems = 1;
    stpn::rng r{seed};
    std::map<std::string, std::int64_t> copies;
    device_states s;
    for (const auto &d : m.devices) {
      const bool up = r.bernoulli(0.6);
      copies[d.id] = up ? d.redundancy : 0;
      s[d.id] = up;
    }
    const net n = to_capability_net(m, copies);
    sim_config c;
    c.max_time = 10;
    const trace tr = simulate(n, c);
    EXPECT_EQ(tr.result == outcome::success, capability_rollup(m, s).at(m.mission_capability)) << seed;
  }
}

TEST(CapabilityNet, SeveralRobotsArePrefixed) {
  auto m = case_study::capability_model();
  m.n_systems = 2;
  const net n = to_capability_net(m, {{"camera", 0}});
  EXPECT_TRUE(n.place_index("r1.camera").has_value());
  EXPECT_TRUE(n.place_index("r2.gripper").has_value());
  sim_config c;
  c.max_time = 10;
  EXPECT_EQ(simulate(n, c).result, outcome::deadlock);
}
