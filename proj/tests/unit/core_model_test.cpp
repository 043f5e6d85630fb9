#include <gtest/gtest.h>

#include <random>

#include "teeplace/core_model.hpp"
#include "test_support.hpp"

namespace teeplace {
namespace {

using testing::two_host_graph;

TEST(ValidateResourceGraph, TwoHostGraphAt30MbpsIsOk) {
  const auto r = validate_resource_graph(two_host_graph());
  EXPECT_TRUE(r.ok()) << (r.violations.empty() ? "" : r.violations.front());
}

TEST(ValidateResourceGraph, SingleTrustedDeviceWithoutLinksIsOk) {
  ResourceGraph g;
  g.hosts = {"A"};
  g.devices = {{"TEE_1", true, "A"}};
  EXPECT_TRUE(validate_resource_graph(g).ok());
}

TEST(ValidateResourceGraph, ZeroBandwidthIsAViolation) {
  auto g = two_host_graph();
  g.bandwidth[{"A", "B"}] = 0.0;
  const auto r = validate_resource_graph(g);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.violations.front().find("non-positive bandwidth"),
            std::string::npos);
}

TEST(ValidateResourceGraph, ReportsDuplicatesAndMissingLinks) {
  auto g = two_host_graph();
  g.devices.push_back({"E_1", false, "B"});
  g.bandwidth.erase({"B", "A"});
  const auto r = validate_resource_graph(g);
  ASSERT_EQ(r.violations.size(), 2u);
  EXPECT_NE(r.violations[0].find("duplicate device id 'E_1'"), std::string::npos);
  EXPECT_NE(r.violations[1].find("missing bandwidth B -> A"), std::string::npos);
}

TEST(ValidateResourceGraph, UnknownHost) {
  auto g = two_host_graph();
  g.devices.push_back({"GPU", false, "C"});
  EXPECT_FALSE(validate_resource_graph(g).ok());
}

TEST(ResourceGraph, TrustPartitionIsTotal) {
  const auto g = two_host_graph();
  const auto t = g.trusted_devices();
  const auto u = g.untrusted_devices();
  EXPECT_EQ(t.size() + u.size(), g.devices.size());
  for (const auto& d : g.devices) {
    const bool in_t = std::find(t.begin(), t.end(), d.id) != t.end();
    const bool in_u = std::find(u.begin(), u.end(), d.id) != u.end();
    EXPECT_NE(in_t, in_u) << d.id;
  }
  EXPECT_THROW(g.at("GPU_9"), StructuralError);
}

TEST(ExpandPlacement, SingleSegment) {
  const Placement p({{{1, 3}, "TEE_1"}});
  EXPECT_EQ(expand_placement(p, 3),
            (std::vector<DeviceId>{"TEE_1", "TEE_1", "TEE_1"}));
}

TEST(ExpandPlacement, TwoEnclaves) {
  const Placement p({{{1, 2}, "TEE_1"}, {{3, 4}, "TEE_2"}});
  EXPECT_EQ(expand_placement(p, 4),
            (std::vector<DeviceId>{"TEE_1", "TEE_1", "TEE_2", "TEE_2"}));
}

TEST(ExpandPlacement, RejectsUnmergedEqualNeighbours) {
  const Placement p({{{1, 1}, "TEE_1"}, {{2, 2}, "TEE_1"}});
  try {
    expand_placement(p, 2);
    FAIL() << "expected StructuralError";
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("unmerged adjacent equal-device"),
              std::string::npos);
  }
}

TEST(ExpandPlacement, RejectsGapsOverlapsAndWrongLength) {
  EXPECT_THROW(expand_placement(Placement({{{1, 1}, "A"}, {{3, 3}, "B"}}), 3),
               StructuralError);
  EXPECT_THROW(expand_placement(Placement({{{1, 2}, "A"}, {{2, 3}, "B"}}), 3),
               StructuralError);
  EXPECT_THROW(expand_placement(Placement({{{1, 2}, "A"}}), 3), StructuralError);
  EXPECT_THROW(expand_placement(Placement({{{2, 1}, "A"}}), 1), StructuralError);
  EXPECT_THROW(expand_placement(Placement(), 1), StructuralError);
}

// Re-segmenting an expanded canonical placement gives it back.
TEST(ExpandPlacement, CanonicalResegmentationRoundTrips) {
  std::mt19937_64 rng(7);
  const std::vector<DeviceId> devs{"A", "B", "C"};
  for (int trial = 0; trial < 300; ++trial) {
    const int m = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<DeviceId> per_layer;
    for (int x = 0; x < m; ++x) {
      per_layer.push_back(devs[std::uniform_int_distribution<int>(0, 2)(rng)]);
    }
    const Placement p = Placement::from_layer_devices(per_layer);
    ASSERT_NO_THROW(p.validate(m));
    EXPECT_EQ(p.expand(m), per_layer);
    EXPECT_EQ(Placement::from_layer_devices(p.expand(m)), p);
    int covered = 0;
    for (const auto& s : p.segments()) covered += s.range.size();
    EXPECT_EQ(covered, m);
  }
}

TEST(Placement, FromCutsAndToString) {
  const auto p = Placement::from_cuts({3}, {"TEE_1", "E_2"}, 4);
  EXPECT_EQ(p.to_string(), "L1->L3@TEE_1, L4@E_2");
  EXPECT_EQ(p.device_of(4), DeviceId("E_2"));
  EXPECT_THROW(p.device_of(5), StructuralError);
}

TEST(ValidateNetwork, CatchesBadIndicesAndMissingShapeParams) {
  NetworkProfile net;
  net.input_height = net.input_width = 8;
  net.input_channels = 1;
  LayerSpec conv;
  conv.index = 1;
  conv.kind = LayerKind::kConv;
  conv.shape.kernel = 3;
  LayerSpec fc;
  fc.index = 3;
  fc.kind = LayerKind::kFc;
  net.layers = {conv, fc};
  const auto problems = validate_network(net);
  ASSERT_EQ(problems.size(), 3u);
  EXPECT_NE(problems[0].find("conv requires out_channels"), std::string::npos);
  EXPECT_NE(problems[1].find("breaks the 1..M sequence"), std::string::npos);
  EXPECT_NE(problems[2].find("fc requires out_length"), std::string::npos);
  EXPECT_THROW(require_valid_network(net), StructuralError);
  EXPECT_THROW(require_valid_network(NetworkProfile{}), StructuralError);
}

TEST(Units, RoundToNearestNanosecond) {
  EXPECT_EQ(from_seconds(0.1).count(), 100'000'000);
  EXPECT_EQ(from_millis(2.5).count(), 2'500'000);
  EXPECT_EQ(from_seconds(1.4e-9).count(), 1);
  EXPECT_EQ(from_seconds(1.6e-9).count(), 2);
  EXPECT_DOUBLE_EQ(to_seconds(Nanos(1'650'000'000)), 1.65);
}

}  // namespace
}  // namespace teeplace
