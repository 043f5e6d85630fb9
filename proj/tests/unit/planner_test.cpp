#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "teeplace/cli_io.hpp"
#include "teeplace/planner.hpp"
#include "test_support.hpp"

namespace teeplace {
namespace {

using testing::two_host_graph;
using testing::ms;

std::map<DeviceId, Nanos> uniform_times(const ResourceGraph& g, Nanos tee,
                                        Nanos acc) {
  std::map<DeviceId, Nanos> t;
  for (const auto& d : g.devices) t[d.id] = d.trusted ? tee : acc;
  return t;
}

NetworkProfile load_profile(const std::string& name) {
  return parse_profile(read_text_file(testing::profile_path(name)));
}

PlanRequest two_host_request(NetworkProfile net, int64_t n) {
  PlanRequest r;
  r.net = std::move(net);
  r.graph = two_host_graph();
  r.tree = default_tree(r.graph);
  r.n = n;
  return r;
}

bool contains(const std::vector<Placement>& v, const std::string& s) {
  return std::any_of(v.begin(), v.end(),
                     [&](const Placement& p) { return p.to_string() == s; });
}

TEST(DefaultTree, TwoHostShape) {
  const auto t = default_tree(two_host_graph());
  EXPECT_EQ(t.start_device, DeviceId("TEE_1"));
  ASSERT_EQ(t.level_devices.size(), 2u);
  EXPECT_EQ(t.level_devices[0],
            (std::vector<DeviceId>{"E_1", "TEE_2", "E_2"}));
  EXPECT_EQ(t.level_devices[1], std::vector<DeviceId>{"E_2"});
  EXPECT_EQ(t.depth(), 3);

  ResourceGraph none;
  none.hosts = {"A"};
  none.devices = {{"E_1", false, "A"}};
  EXPECT_THROW(default_tree(none), InfeasibleError);
}

TEST(RestrictTree, DropsLevelsFromFirstEmpty) {
  const auto t = restrict_tree(default_tree(two_host_graph()), {"TEE_1", "TEE_2"});
  ASSERT_EQ(t.level_devices.size(), 1u);
  EXPECT_EQ(t.level_devices[0], std::vector<DeviceId>{"TEE_2"});
}

TEST(TreeConfig, Validation) {
  const auto g = two_host_graph();
  TreeConfig t{"E_1", {}, false};
  EXPECT_THROW(t.validate(g), ConfigError);
  t = {"TEE_1", {{}}, false};
  EXPECT_THROW(t.validate(g), ConfigError);
  t = {"TEE_1", {{"TPU"}}, false};
  EXPECT_THROW(t.validate(g), ConfigError);
  t = {"TPU", {}, false};
  EXPECT_THROW(t.validate(g), ConfigError);
}

TEST(EnumerateCandidates, DefaultTreeThreeLayers) {
  const auto g = two_host_graph();
  const auto t = uniform_times(g, ms(10), ms(1));
  const auto net = testing::chain({t, t, t});
  const auto c = enumerate_candidates(net, g, default_tree(g));
  EXPECT_EQ(c.front().to_string(), "L1->L3@TEE_1");
  EXPECT_TRUE(contains(c, "L1->L2@TEE_1, L3@E_2"));
  EXPECT_TRUE(contains(c, "L1@TEE_1, L2->L3@TEE_2"));
  EXPECT_TRUE(contains(c, "L1@TEE_1, L2@TEE_2, L3@E_2"));
  EXPECT_TRUE(contains(c, "L1@TEE_1, L2@E_1, L3@E_2"));
  EXPECT_EQ(c.size(), 9u);
  for (const auto& p : c) EXPECT_NO_THROW(p.validate(3));
}

TEST(EnumerateCandidates, SmallCases) {
  const auto g = two_host_graph();
  const auto t = uniform_times(g, ms(10), ms(1));
  EXPECT_EQ(enumerate_candidates(testing::chain({t}), g, default_tree(g)).size(),
            1u);
  const TreeConfig two_tees{"TEE_1", {{"TEE_2"}}, false};
  EXPECT_EQ(enumerate_candidates(testing::chain({t, t, t}), g, two_tees).size(),
            3u);
  const TreeConfig back{"TEE_1", {{"E_1"}}, true};
  const auto c = enumerate_candidates(testing::chain({t, t, t}), g, back);
  // Return level forces paths to end on TEE_1.
  for (const auto& p : c) EXPECT_EQ(p.segments().back().device, DeviceId("TEE_1"));
  EXPECT_EQ(c.size(), 2u);
}

TEST(EnumerateCandidates, CountBound) {
  const auto g = two_host_graph();
  const auto t = uniform_times(g, ms(10), ms(1));
  for (int m : {1, 2, 3, 5, 10, 20, 50}) {
    const auto net = testing::chain(std::vector(m, t));
    const auto c = enumerate_candidates(net, g, default_tree(g));
    EXPECT_LE(static_cast<int64_t>(c.size()), int64_t{m} * (m + 1) + 1) << m;
    std::vector<std::string> names;
    for (const auto& p : c) names.push_back(p.to_string());
    std::sort(names.begin(), names.end());
    EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
  }
}

TEST(Evaluate, CostsAndPrivacy) {
  const auto g = two_host_graph();
  auto t = uniform_times(g, ms(150), ms(50));
  auto net = testing::chain({t, t, t, t}, {112, 56, 14, 1});
  net.layers[2].explicit_output_bytes = 375'000;
  const auto sigs = propagate_shapes(net);
  const PrivacyPolicy policy;
  const auto e = evaluate(Placement({{{1, 3}, "TEE_1"}, {{4, 4}, "E_2"}}), net,
                          g, sigs, policy, 3);
  EXPECT_TRUE(e.admissible);
  EXPECT_EQ(e.sim, 14);
  EXPECT_EQ(e.t_chunk, 3 * ms(450) + ms(100) + ms(50));

  const auto bad = evaluate(Placement({{{1, 1}, "TEE_1"}, {{2, 4}, "E_2"}}),
                            net, g, sigs, policy, 3);
  EXPECT_FALSE(bad.admissible);
  EXPECT_EQ(bad.sim, 112);
}

// TEE_1 on host A; TEE_2 and E_2 on host B.
ResourceGraph split_host_graph() {
  ResourceGraph g;
  g.hosts = {"A", "B"};
  g.devices = {{"TEE_1", true, "A"}, {"TEE_2", true, "B"}, {"E_2", false, "B"}};
  g.bandwidth[{"A", "B"}] = testing::k30Mbps;
  g.bandwidth[{"B", "A"}] = testing::k30Mbps;
  return g;
}

TEST(Plan, ChunkSizeChangesTheBestPlacement) {
  const auto g = split_host_graph();
  std::map<DeviceId, Nanos> heavy{{"TEE_1", ms(1000)}, {"TEE_2", ms(1000)},
                                  {"E_2", ms(50)}};
  std::map<DeviceId, Nanos> light{{"TEE_1", ms(100)}, {"TEE_2", ms(100)},
                                  {"E_2", ms(10)}};
  auto net = testing::chain({heavy, heavy, light}, {100, 10, 1});
  for (auto& l : net.layers) l.explicit_output_bytes = 1000;

  PlanRequest r;
  r.net = net;
  r.graph = g;
  r.tree = default_tree(g);
  r.n = 1;
  const auto single = plan(r);
  EXPECT_EQ(single.best.placement.to_string(), "L1->L2@TEE_1, L3@E_2");

  r.n = 1000;
  const auto chunk = plan(r);
  EXPECT_EQ(chunk.best.placement.to_string(), "L1@TEE_1, L2@TEE_2, L3@E_2");
  EXPECT_LT(chunk.best.t_chunk,
            evaluate(single.best.placement, net, g, propagate_shapes(net),
                     r.policy, 1000)
                .t_chunk);
}

TEST(Plan, SingleTrustedDeviceRunsEverythingThere) {
  ResourceGraph g;
  g.hosts = {"A"};
  g.devices = {{"TEE_1", true, "A"}};
  const std::map<DeviceId, Nanos> t{{"TEE_1", ms(5)}};
  PlanRequest r;
  r.net = testing::chain({t, t, t});
  r.graph = g;
  r.tree = default_tree(g);
  r.n = 10;
  const auto rep = plan(r);
  EXPECT_EQ(rep.best.placement.to_string(), "L1->L3@TEE_1");
  EXPECT_EQ(rep.best.t_chunk, 10 * ms(15));
  EXPECT_EQ(rep.all_candidates.size(), 1u);
}

TEST(Plan, C1WithoutTrustedDevicesIsInfeasible) {
  const auto g = two_host_graph();
  const auto t = uniform_times(g, ms(10), ms(1));
  PlanRequest r;
  r.net = testing::chain({t, t});
  r.graph = g;
  r.tree = {"TEE_1", {{"E_1"}}, true};
  r.policy.mode = PrivacyMode::kC1Only;
  // Only the whole-network-on-TEE_1 path is C1; it stays feasible.
  EXPECT_EQ(plan(r).best.placement.to_string(), "L1->L2@TEE_1");

  ResourceGraph untrusted;
  untrusted.hosts = {"A"};
  untrusted.devices = {{"E_1", false, "A"}};
  EXPECT_THROW(default_tree(untrusted), InfeasibleError);
}

TEST(Plan, NeverPicksWorseThanAnyAdmissibleCandidate) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto r = testing::random_request(rng, 8, 4);
    try {
      const auto rep = plan(r);
      for (const auto& c : rep.all_candidates) {
        if (c.admissible) {
          EXPECT_LE(rep.best.t_chunk, c.t_chunk);
        }
      }
      EXPECT_TRUE(rep.best.admissible);
    } catch (const InfeasibleError&) {
    }
  }
}

TEST(BruteForce, AgreesWithPlanner) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 150; ++i) {
    const auto r = testing::random_request(rng, 8, 4);
    std::optional<PlanReport> a, b;
    try {
      a = plan(r);
    } catch (const InfeasibleError&) {
    }
    try {
      b = brute_force_plan(r, device_orders(r.tree));
    } catch (const InfeasibleError&) {
    }
    ASSERT_EQ(a.has_value(), b.has_value()) << i;
    if (!a) continue;
    EXPECT_EQ(a->best.t_chunk, b->best.t_chunk) << i;
    EXPECT_EQ(a->best.placement, b->best.placement) << i;
  }
}

TEST(BruteForce, RejectsLargeNetworks) {
  const auto g = two_host_graph();
  const auto t = uniform_times(g, ms(10), ms(1));
  auto r = two_host_request(testing::chain(std::vector(11, t)), 5);
  EXPECT_THROW(brute_force_plan(r, device_orders(r.tree)), ConfigError);
  EXPECT_NO_THROW(brute_force_plan(r, device_orders(r.tree), 11));
}

TEST(Plan, AddingAnAcceleratorNeverHurts) {
  std::mt19937_64 rng(23);
  auto full = two_host_graph();
  auto reduced = full;
  reduced.devices.pop_back();  // drop E_2
  for (int i = 0; i < 40; ++i) {
    std::uniform_int_distribution<int> t(1, 500), res(1, 224), m(2, 8);
    const int layers = m(rng);
    std::vector<std::map<DeviceId, Nanos>> times(layers);
    std::vector<int64_t> rs;
    for (auto& row : times) {
      for (const auto& d : full.devices) row[d.id] = ms(t(rng));
      rs.push_back(res(rng));
    }
    std::sort(rs.rbegin(), rs.rend());
    const auto net = testing::chain(times, rs);

    PlanRequest small;
    small.net = net;
    small.graph = reduced;
    small.tree = default_tree(reduced);
    small.n = 100;
    PlanRequest big = small;
    big.graph = full;
    big.tree = default_tree(full);
    EXPECT_LE(plan(big).best.t_chunk, plan(small).best.t_chunk);
  }
}

TEST(Plan, DeterministicAndThreadIndependent) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 30; ++i) {
    auto r = testing::random_request(rng, 8, 4);
    try {
      const auto a = plan(r);
      const auto b = plan(r);
      r.threads = 4;
      const auto c = plan(r);
      EXPECT_EQ(a.best.placement, b.best.placement);
      EXPECT_EQ(a.best.placement, c.best.placement);
      EXPECT_EQ(a.best.t_chunk, c.best.t_chunk);
      ASSERT_EQ(a.all_candidates.size(), c.all_candidates.size());
      for (std::size_t k = 0; k < a.all_candidates.size(); ++k) {
        EXPECT_EQ(a.all_candidates[k].placement, c.all_candidates[k].placement);
        EXPECT_EQ(a.all_candidates[k].t_chunk, c.all_candidates[k].t_chunk);
      }
    } catch (const InfeasibleError&) {
    }
  }
}

TEST(StrategyCompare, RowsAndOrdering) {
  const auto rows = strategy_compare(two_host_request(load_profile("toy5.json"), 1000));
  ASSERT_EQ(rows.size(), 5u);
  const std::vector<std::string> names{"1 TEE", "No pipelining", "1 TEE & 1 GPU",
                                       "2 TEEs", "Proposed"};
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].name, names[i]);
  EXPECT_DOUBLE_EQ(rows[0].speedup, 1.0);
  EXPECT_EQ(rows[0].placement->to_string(), "L1->L5@TEE_1");
  for (const auto& r : rows) {
    ASSERT_FALSE(r.skipped);
    EXPECT_LE(rows.back().t_chunk, r.t_chunk) << r.name;
  }
}

TEST(StrategyCompare, SkipsMissingDeviceClasses) {
  ResourceGraph g;
  g.hosts = {"A"};
  g.devices = {{"TEE_1", true, "A"}, {"TEE_2", true, "A"}};
  const std::map<DeviceId, Nanos> t{{"TEE_1", ms(5)}, {"TEE_2", ms(5)}};
  PlanRequest r;
  r.net = testing::chain({t, t});
  r.graph = g;
  r.tree = default_tree(g);
  r.n = 10;
  const auto rows = strategy_compare(r);
  EXPECT_TRUE(rows[2].skipped);
  EXPECT_EQ(rows[2].note, "skipped: device absent");
  EXPECT_FALSE(rows[3].skipped);
}

ObservedTimes profiled_times(const PlanReport& rep) {
  ObservedTimes obs;
  const auto& net = rep.request.net;
  for (int x = 1; x <= net.size(); ++x) {
    obs[x] = net.layer(x).time_on(rep.best.placement.device_of(x));
  }
  return obs;
}

TEST(Replan, KeepsPlanWithinTolerance) {
  const auto rep = plan(two_host_request(load_profile("toy5.json"), 1000));
  auto obs = profiled_times(rep);
  EXPECT_FALSE(replan_if_deviation(rep, obs).has_value());
  obs[1] = Nanos(obs[1].count() * 11 / 10);
  EXPECT_FALSE(replan_if_deviation(rep, obs).has_value());
  obs.erase(2);
  EXPECT_THROW(replan_if_deviation(rep, obs), StructuralError);
}

TEST(Replan, SlowdownTriggersReplanThatDominates) {
  for (const char* name : {"toy5.json", "alexnet_like.json", "googlenet_like.json"}) {
    const auto rep = plan(two_host_request(load_profile(name), 1000));
    for (int x = 1; x <= rep.request.net.size(); ++x) {
      auto obs = profiled_times(rep);
      obs[x] = 2 * obs[x];
      const auto next = replan_if_deviation(rep, obs, 0.2);
      ASSERT_TRUE(next.has_value()) << name << " layer " << x;
      const auto observed_net =
          apply_observed_times(rep.request.net, rep.best.placement, obs);
      const auto old_under_observed =
          evaluate(rep.best.placement, observed_net, rep.request.graph,
                   propagate_shapes(observed_net), rep.request.policy,
                   rep.request.n, rep.request.cost);
      EXPECT_LE(next->best.t_chunk, old_under_observed.t_chunk);
    }
  }
}

TEST(ApplyObservedTimes, TouchesOnlyPlacedDevices) {
  const auto g = two_host_graph();
  const auto t = uniform_times(g, ms(10), ms(1));
  const auto net = testing::chain({t, t});
  const Placement p({{{1, 1}, "TEE_1"}, {{2, 2}, "TEE_2"}});
  const auto out = apply_observed_times(net, p, {{1, ms(99)}, {2, ms(77)}});
  EXPECT_EQ(out.layer(1).time_on("TEE_1"), ms(99));
  EXPECT_EQ(out.layer(1).time_on("TEE_2"), ms(10));
  EXPECT_EQ(out.layer(2).time_on("TEE_2"), ms(77));
  EXPECT_EQ(out.layer(2).time_on("E_1"), ms(1));
  EXPECT_THROW(apply_observed_times(net, p, {{3, ms(1)}}), StructuralError);
}

}  // namespace
}  // namespace teeplace
