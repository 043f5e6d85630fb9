#include "teeplace/privacy.hpp"

#include <algorithm>

namespace teeplace {

Resolution input_resolution(const NetworkProfile& net,
                            const std::vector<LayerSignature>& signatures,
                            int x) {
  if (x <= 1) return {net.input_height, net.input_width};
  if (x - 1 > static_cast<int>(signatures.size())) {
    throw StructuralError("no signature for layer " + std::to_string(x - 1));
  }
  return signatures[x - 2].resolution;
}

bool check_c1(const Placement& p, const ResourceGraph& graph) {
  bool all_trusted = true;
  for (const auto& s : p.segments()) {
    // at() throws on unknown devices, so check every segment.
    if (!graph.at(s.device).trusted) all_trusted = false;
  }
  return all_trusted;
}

LeakageReport check_c2(const Placement& p, const ResourceGraph& graph,
                       const NetworkProfile& net,
                       const std::vector<LayerSignature>& signatures,
                       const PrivacyPolicy& policy) {
  LeakageReport report;
  for (const auto& s : p.segments()) {
    if (graph.at(s.device).trusted) continue;
    for (int x = s.range.first; x <= s.range.last; ++x) {
      const Resolution in = input_resolution(net, signatures, x);
      report.max_similarity =
          std::max({report.max_similarity, in.height, in.width});
      const bool below = in.height < policy.delta && in.width < policy.delta;
      if (x == 1 || !below) report.violating_layers.push_back(x);
    }
  }
  return report;
}

bool admissible(const Placement& p, const ResourceGraph& graph,
                const NetworkProfile& net,
                const std::vector<LayerSignature>& signatures,
                const PrivacyPolicy& policy) {
  if (check_c1(p, graph)) return true;
  if (policy.mode != PrivacyMode::kC2Allowed) return false;
  return check_c2(p, graph, net, signatures, policy).ok();
}

}  // namespace teeplace
