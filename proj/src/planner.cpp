#include "teeplace/planner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <thread>

#include "teeplace/pipeline_sim.hpp"

namespace teeplace {
namespace {

std::vector<std::vector<DeviceId>> effective_levels(const TreeConfig& config) {
  auto levels = config.level_devices;
  if (config.require_return_to_start) levels.push_back({config.start_device});
  return levels;
}

bool may_end_on(const TreeConfig& config, const DeviceId& d) {
  return !config.require_return_to_start || d == config.start_device;
}

void require_valid_graph(const ResourceGraph& graph) {
  const auto v = validate_resource_graph(graph);
  if (v.ok()) return;
  std::string msg = "invalid resource graph";
  for (const auto& s : v.violations) msg += "\n  " + s;
  throw StructuralError(msg);
}

struct Prepared {
  std::vector<LayerSignature> signatures;
};

Prepared prepare(const PlanRequest& request) {
  require_valid_network(request.net);
  require_valid_graph(request.graph);
  if (request.n < 1) throw ConfigError("chunk size must be >= 1");
  if (request.policy.delta < 1) throw ConfigError("delta must be >= 1");
  return {propagate_shapes(request.net)};
}

PlanReport pick_best(std::vector<CandidateEvaluation> evaluated,
                     const PlanRequest& request) {
  const CandidateEvaluation* best = nullptr;
  for (const auto& c : evaluated) {
    if (!c.admissible) continue;
    if (best == nullptr || better_candidate(c, *best)) best = &c;
  }
  if (best == nullptr) {
    throw InfeasibleError(
        "infeasible under policy: no admissible placement among " +
        std::to_string(evaluated.size()) + " candidates");
  }
  PlanReport report;
  report.best = *best;
  report.all_candidates = std::move(evaluated);
  report.request = request;
  return report;
}

std::vector<CandidateEvaluation> evaluate_all(
    const std::vector<Placement>& candidates, const PlanRequest& request,
    const std::vector<LayerSignature>& signatures) {
  std::vector<CandidateEvaluation> out(candidates.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = evaluate(candidates[i], request.net, request.graph, signatures,
                        request.policy, request.n, request.cost);
    }
  };

  const std::size_t threads = static_cast<std::size_t>(
      std::max(1, request.threads));
  if (threads == 1 || candidates.size() < 2 * threads) {
    work(0, candidates.size());
    return out;
  }
  // Each worker writes a disjoint slice; the reduction stays sequential.
  std::vector<std::jthread> pool;
  const std::size_t chunk = (candidates.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < candidates.size(); begin += chunk) {
    pool.emplace_back(work, begin, std::min(candidates.size(), begin + chunk));
  }
  pool.clear();
  return out;
}

std::vector<DeviceId> tree_devices(const TreeConfig& config) {
  std::vector<DeviceId> out;
  for (const auto& level : config.level_devices) {
    for (const auto& d : level) {
      if (d != config.start_device &&
          std::find(out.begin(), out.end(), d) == out.end()) {
        out.push_back(d);
      }
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tree configuration

void TreeConfig::validate(const ResourceGraph& graph) const {
  const Device* start = graph.find(start_device);
  if (start == nullptr) {
    throw ConfigError("start device '" + start_device.name +
                      "' is not in the resource graph");
  }
  if (!start->trusted) {
    throw ConfigError("start device '" + start_device.name +
                      "' must be trusted");
  }
  for (std::size_t k = 0; k < level_devices.size(); ++k) {
    if (level_devices[k].empty()) {
      throw ConfigError("tree level " + std::to_string(k + 2) + " is empty");
    }
    for (const auto& d : level_devices[k]) {
      if (graph.find(d) == nullptr) {
        throw ConfigError("tree level " + std::to_string(k + 2) +
                          " names unknown device '" + d.name + "'");
      }
    }
  }
}

int TreeConfig::depth() const {
  return 1 + static_cast<int>(level_devices.size()) +
         (require_return_to_start ? 1 : 0);
}

TreeConfig default_tree(const ResourceGraph& graph) {
  const auto trusted = graph.trusted_devices();
  if (trusted.empty()) {
    throw InfeasibleError(
        "infeasible under policy: the resource graph has no trusted device "
        "to start processing on");
  }
  TreeConfig config;
  config.start_device = trusted.front();
  const HostId& start_host = graph.at(config.start_device).host;

  std::vector<DeviceId> second;
  for (const auto& d : graph.devices) {
    if (d.id != config.start_device) second.push_back(d.id);
  }
  if (second.empty()) return config;
  config.level_devices.push_back(second);

  std::set<HostId> remote_tee_hosts;
  for (const auto& d : graph.devices) {
    if (d.trusted && d.id != config.start_device && d.host != start_host) {
      remote_tee_hosts.insert(d.host);
    }
  }
  std::vector<DeviceId> third;
  for (const auto& d : graph.devices) {
    if (!d.trusted && remote_tee_hosts.count(d.host)) third.push_back(d.id);
  }
  if (!third.empty()) config.level_devices.push_back(third);
  return config;
}

TreeConfig restrict_tree(const TreeConfig& config,
                         const std::vector<DeviceId>& allowed) {
  TreeConfig out;
  out.start_device = config.start_device;
  out.require_return_to_start = config.require_return_to_start;
  for (const auto& level : config.level_devices) {
    std::vector<DeviceId> kept;
    for (const auto& d : level) {
      if (std::find(allowed.begin(), allowed.end(), d) != allowed.end()) {
        kept.push_back(d);
      }
    }
    if (kept.empty()) break;
    out.level_devices.push_back(std::move(kept));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration and evaluation

std::vector<Placement> enumerate_candidates(const NetworkProfile& net,
                                            const ResourceGraph& graph,
                                            const TreeConfig& config) {
  config.validate(graph);
  const int m = net.size();
  if (m < 1) throw StructuralError("network has no layers");
  const auto levels = effective_levels(config);

  std::vector<Placement> out;
  std::vector<Segment> path;

  // `level` is the index of the next level to draw from.
  std::function<void(std::size_t, const DeviceId&, int)> walk =
      [&](std::size_t level, const DeviceId& device, int first) {
        if (may_end_on(config, device)) {
          path.push_back({{first, m}, device});
          out.emplace_back(path);
          path.pop_back();
        }
        if (level >= levels.size()) return;
        for (int last = first; last < m; ++last) {
          path.push_back({{first, last}, device});
          for (const auto& next : levels[level]) {
            if (next != device) walk(level + 1, next, last + 1);
          }
          path.pop_back();
        }
      };
  walk(0, config.start_device, 1);
  return out;
}

CandidateEvaluation evaluate(const Placement& candidate,
                             const NetworkProfile& net,
                             const ResourceGraph& graph,
                             const std::vector<LayerSignature>& signatures,
                             const PrivacyPolicy& policy, int64_t n,
                             const DecomposeOptions& cost) {
  CandidateEvaluation e;
  e.placement = candidate;
  e.t_chunk =
      chunk_completion(decompose(candidate, graph, signatures, net, cost), n);
  e.sim = check_c2(candidate, graph, net, signatures, policy).max_similarity;
  e.admissible = admissible(candidate, graph, net, signatures, policy);
  return e;
}

bool better_candidate(const CandidateEvaluation& a,
                      const CandidateEvaluation& b) {
  if (a.t_chunk != b.t_chunk) return a.t_chunk < b.t_chunk;
  const auto& sa = a.placement.segments();
  const auto& sb = b.placement.segments();
  if (sa.size() != sb.size()) return sa.size() < sb.size();
  const auto da = a.placement.device_sequence();
  const auto db = b.placement.device_sequence();
  if (da != db) return da < db;
  // Same devices in the same order: prefer the earlier first cut.
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i].range.last != sb[i].range.last) {
      return sa[i].range.last < sb[i].range.last;
    }
  }
  return false;
}

PlanReport plan(const PlanRequest& request) {
  const auto prepared = prepare(request);
  const auto candidates =
      enumerate_candidates(request.net, request.graph, request.tree);
  return pick_best(evaluate_all(candidates, request, prepared.signatures),
                   request);
}

// ---------------------------------------------------------------------------
// Oracle

std::vector<std::vector<DeviceId>> device_orders(const TreeConfig& config) {
  const auto levels = effective_levels(config);
  std::set<std::vector<DeviceId>> seen;
  std::vector<std::vector<DeviceId>> out;
  std::vector<DeviceId> seq{config.start_device};

  std::function<void(std::size_t)> walk = [&](std::size_t level) {
    if (may_end_on(config, seq.back()) && seen.insert(seq).second) {
      out.push_back(seq);
    }
    if (level >= levels.size()) return;
    for (const auto& next : levels[level]) {
      if (next == seq.back()) continue;
      seq.push_back(next);
      walk(level + 1);
      seq.pop_back();
    }
  };
  walk(0);
  return out;
}

PlanReport brute_force_plan(const PlanRequest& request,
                            const std::vector<std::vector<DeviceId>>& orders,
                            int max_layers) {
  const int m = request.net.size();
  if (m > max_layers) {
    throw ConfigError("brute force oracle limited to " +
                      std::to_string(max_layers) + " layers, got " +
                      std::to_string(m));
  }
  const auto prepared = prepare(request);

  std::vector<CandidateEvaluation> evaluated;
  const uint32_t cut_positions = static_cast<uint32_t>(m - 1);
  for (const auto& order : orders) {
    if (order.empty() || static_cast<int>(order.size()) > m) continue;
    if (std::adjacent_find(order.begin(), order.end()) != order.end()) continue;
    for (const auto& d : order) request.graph.at(d);

    // Bit i set means a segment ends after layer i + 1.
    for (uint32_t mask = 0; mask < (1u << cut_positions); ++mask) {
      if (std::popcount(mask) != static_cast<int>(order.size()) - 1) continue;
      std::vector<int> cuts;
      for (uint32_t i = 0; i < cut_positions; ++i) {
        if (mask & (1u << i)) cuts.push_back(static_cast<int>(i) + 1);
      }
      const Placement p = Placement::from_cuts(cuts, order, m);
      const StagePlan stages = decompose(p, request.graph, prepared.signatures,
                                         request.net, request.cost);
      CandidateEvaluation e;
      e.placement = p;
      e.t_chunk = simulate(stages, request.n).completion;
      e.sim = check_c2(p, request.graph, request.net, prepared.signatures,
                       request.policy)
                  .max_similarity;
      e.admissible = admissible(p, request.graph, request.net,
                                prepared.signatures, request.policy);
      evaluated.push_back(std::move(e));
    }
  }
  return pick_best(std::move(evaluated), request);
}

// ---------------------------------------------------------------------------
// Strategy comparison

std::vector<StrategyRow> strategy_compare(const PlanRequest& request) {
  const auto prepared = prepare(request);
  const TreeConfig& full = request.tree;
  full.validate(request.graph);

  auto row_for = [&](std::string name, const Placement& p) {
    StrategyRow row;
    row.name = std::move(name);
    row.placement = p;
    row.t_chunk = evaluate(p, request.net, request.graph, prepared.signatures,
                           request.policy, request.n, request.cost)
                      .t_chunk;
    return row;
  };
  auto planned_with = [&](const TreeConfig& tree) {
    PlanRequest r = request;
    r.tree = tree;
    return plan(r).best;
  };
  auto skipped = [](std::string name, std::string note) {
    StrategyRow row;
    row.name = std::move(name);
    row.skipped = true;
    row.note = std::move(note);
    return row;
  };

  std::vector<StrategyRow> rows;

  const Placement whole({{{1, request.net.size()}, full.start_device}});
  rows.push_back(row_for("1 TEE", whole));

  {
    PlanRequest single = request;
    single.n = 1;
    auto row = row_for("No pipelining", plan(single).best.placement);
    row.note = "placement optimized for n=1";
    rows.push_back(std::move(row));
  }

  std::vector<DeviceId> accelerators;
  std::vector<DeviceId> other_tees;
  for (const auto& d : tree_devices(full)) {
    (request.graph.is_trusted(d) ? other_tees : accelerators).push_back(d);
  }

  if (accelerators.empty()) {
    rows.push_back(skipped("1 TEE & 1 GPU", "skipped: device absent"));
  } else {
    std::optional<CandidateEvaluation> best;
    DeviceId chosen;
    for (const auto& gpu : accelerators) {
      auto c = planned_with(restrict_tree(full, {full.start_device, gpu}));
      if (!best || better_candidate(c, *best)) {
        best = c;
        chosen = gpu;
      }
    }
    auto row = row_for("1 TEE & 1 GPU", best->placement);
    row.note = "accelerator " + chosen.name;
    rows.push_back(std::move(row));
  }

  if (other_tees.empty()) {
    rows.push_back(skipped("2 TEEs", "skipped: device absent"));
  } else {
    auto trusted = other_tees;
    trusted.push_back(full.start_device);
    rows.push_back(
        row_for("2 TEEs", planned_with(restrict_tree(full, trusted)).placement));
  }

  rows.push_back(row_for("Proposed", plan(request).best.placement));

  const Nanos baseline = rows.front().t_chunk;
  for (auto& r : rows) {
    if (!r.skipped && r.t_chunk.count() > 0) {
      r.speedup = static_cast<double>(baseline.count()) /
                  static_cast<double>(r.t_chunk.count());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Re-planning

NetworkProfile apply_observed_times(const NetworkProfile& net,
                                    const Placement& placement,
                                    const ObservedTimes& observed) {
  NetworkProfile out = net;
  for (const auto& [x, t] : observed) {
    if (x < 1 || x > out.size()) {
      throw StructuralError("observed time for unknown layer " +
                            std::to_string(x));
    }
    out.layers[x - 1].exec_time[placement.device_of(x)] = t;
  }
  return out;
}

std::optional<PlanReport> replan_if_deviation(const PlanReport& current,
                                              const ObservedTimes& observed,
                                              double tolerance) {
  const auto& net = current.request.net;
  const auto& placement = current.best.placement;
  bool deviates = false;
  for (int x = 1; x <= net.size(); ++x) {
    auto it = observed.find(x);
    if (it == observed.end()) {
      throw StructuralError("no observed time for placed layer " +
                            std::to_string(x));
    }
    const double profiled =
        static_cast<double>(net.layer(x).time_on(placement.device_of(x)).count());
    const double seen = static_cast<double>(it->second.count());
    if (std::abs(seen - profiled) / profiled > tolerance) deviates = true;
  }
  if (!deviates) return std::nullopt;

  PlanRequest next = current.request;
  next.net = apply_observed_times(net, placement, observed);
  return plan(next);
}

}  // namespace teeplace
