#ifndef TEEPLACE_PRIVACY_HPP
#define TEEPLACE_PRIVACY_HPP

#include <cstdint>
#include <vector>

#include "teeplace/core_model.hpp"
#include "teeplace/shape_prop.hpp"

namespace teeplace {

enum class PrivacyMode {
  kC1Only,     // every layer on a trusted device
  kC2Allowed,  // untrusted devices allowed once the data is below threshold
};

struct PrivacyPolicy {
  /// Resolution threshold per axis, in pixels.
  int64_t delta = 20;
  PrivacyMode mode = PrivacyMode::kC2Allowed;
};

struct LeakageReport {
  /// Largest input resolution (max of the two axes) seen by any layer on an
  /// untrusted device; zero when no layer is untrusted.
  int64_t max_similarity = 0;
  std::vector<int> violating_layers;

  bool ok() const { return violating_layers.empty(); }
};

/// Resolution of the data fed into layer `x`. For x == 1 this is the frame.
Resolution input_resolution(const NetworkProfile& net,
                            const std::vector<LayerSignature>& signatures,
                            int x);

bool check_c1(const Placement& p, const ResourceGraph& graph);

/// A layer on an untrusted device is a violation unless its input is
/// strictly below `policy.delta` on both axes. The first layer always reads
/// the original frame, so placing it on an untrusted device is a violation
/// regardless of any resolution override.
LeakageReport check_c2(const Placement& p, const ResourceGraph& graph,
                       const NetworkProfile& net,
                       const std::vector<LayerSignature>& signatures,
                       const PrivacyPolicy& policy);

bool admissible(const Placement& p, const ResourceGraph& graph,
                const NetworkProfile& net,
                const std::vector<LayerSignature>& signatures,
                const PrivacyPolicy& policy);

}  // namespace teeplace

#endif  // TEEPLACE_PRIVACY_HPP
