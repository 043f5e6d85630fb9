// Privacy-aware placement search.
//
// The search space is a placement tree rooted at a trusted start device. A
// path picks a device per tree level and a split point per level boundary;
// each path is one contiguous placement of the chain. Every path is costed
// with the pipeline model, checked against the privacy policy, and the
// fastest admissible path wins.

#ifndef TEEPLACE_PLANNER_HPP
#define TEEPLACE_PLANNER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "teeplace/core_model.hpp"
#include "teeplace/cost_model.hpp"
#include "teeplace/privacy.hpp"
#include "teeplace/shape_prop.hpp"

namespace teeplace {

struct TreeConfig {
  DeviceId start_device;
  /// Devices allowed at each level below the root, in order.
  std::vector<std::vector<DeviceId>> level_devices;
  /// When set, every path must end back on the start device.
  bool require_return_to_start = false;

  /// Throws ConfigError when the start device is unknown or untrusted, a
  /// level is empty, or a level names an unknown device.
  void validate(const ResourceGraph& graph) const;
  /// Maximum number of segments of a path.
  int depth() const;
};

/// Two-host default: start on the first trusted device; then any other
/// device; then the untrusted devices that share a host with another trusted
/// device. For {TEE_1, E_1 | TEE_2, E_2} this is TEE_1 -> {E_1, E_2, TEE_2}
/// -> {E_2}.
TreeConfig default_tree(const ResourceGraph& graph);

/// Keeps only `allowed` devices in every level, dropping the levels from the
/// first one that becomes empty.
TreeConfig restrict_tree(const TreeConfig& config,
                         const std::vector<DeviceId>& allowed);

struct CandidateEvaluation {
  Placement placement;
  Nanos t_chunk{0};
  int64_t sim = 0;
  bool admissible = false;
};

struct PlanRequest {
  NetworkProfile net;
  ResourceGraph graph;
  PrivacyPolicy policy;
  int64_t n = 1;
  TreeConfig tree;
  DecomposeOptions cost;
  /// Worker threads for candidate evaluation; results do not depend on it.
  int threads = 1;
};

struct StrategyRow {
  std::string name;
  bool skipped = false;
  std::string note;
  std::optional<Placement> placement;
  Nanos t_chunk{0};
  double speedup = 0.0;
};

struct PlanReport {
  CandidateEvaluation best;
  std::vector<CandidateEvaluation> all_candidates;
  std::vector<StrategyRow> strategy_rows;
  /// The inputs that produced this report, kept so it can be re-planned.
  PlanRequest request;
};

/// All canonical tree paths, whole-network-on-start first.
std::vector<Placement> enumerate_candidates(const NetworkProfile& net,
                                            const ResourceGraph& graph,
                                            const TreeConfig& config);

CandidateEvaluation evaluate(const Placement& candidate,
                             const NetworkProfile& net,
                             const ResourceGraph& graph,
                             const std::vector<LayerSignature>& signatures,
                             const PrivacyPolicy& policy, int64_t n,
                             const DecomposeOptions& cost = {});

/// True when `a` should be preferred over `b` among admissible candidates:
/// lower t_chunk, then fewer segments, then lexicographically smaller device
/// sequence.
bool better_candidate(const CandidateEvaluation& a,
                      const CandidateEvaluation& b);

/// Throws InfeasibleError when no candidate is admissible.
PlanReport plan(const PlanRequest& request);

/// Distinct canonical device sequences reachable in the tree.
std::vector<std::vector<DeviceId>> device_orders(const TreeConfig& config);

inline constexpr int kDefaultOracleBound = 10;

/// Exhaustive oracle: every way of cutting the chain into |order| non-empty
/// runs, for every device order, each costed by simulation. Throws
/// ConfigError above `max_layers`.
PlanReport brute_force_plan(const PlanRequest& request,
                            const std::vector<std::vector<DeviceId>>& orders,
                            int max_layers = kDefaultOracleBound);

/// Rows: "1 TEE", "No pipelining", "1 TEE & 1 GPU", "2 TEEs", "Proposed".
std::vector<StrategyRow> strategy_compare(const PlanRequest& request);

/// Observed per-frame time of each placed layer on its current device.
using ObservedTimes = std::map<int, Nanos>;

inline constexpr double kDefaultReplanTolerance = 0.2;

/// Re-plans with the observed times when any layer deviates from its profile
/// by more than `tolerance` (relative). Returns nullopt to keep the current
/// plan.
std::optional<PlanReport> replan_if_deviation(
    const PlanReport& current, const ObservedTimes& observed,
    double tolerance = kDefaultReplanTolerance);

/// The profile with observed times written over the entries of the devices
/// each layer is placed on.
NetworkProfile apply_observed_times(const NetworkProfile& net,
                                    const Placement& placement,
                                    const ObservedTimes& observed);

}  // namespace teeplace

#endif  // TEEPLACE_PLANNER_HPP
