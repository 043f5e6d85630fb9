#include "teeplace/cost_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace teeplace {

std::string Stage::label() const {
  if (kind == StageKind::kCompute) return device.name;
  return src_host + "->" + dst_host;
}

StagePlan StagePlan::from_latencies(const std::vector<Nanos>& latencies) {
  StagePlan plan;
  for (std::size_t i = 0; i < latencies.size(); ++i) {
    Stage s;
    s.kind = StageKind::kCompute;
    s.device = DeviceId("S" + std::to_string(i));
    s.latency = latencies[i];
    plan.stages.push_back(s);
  }
  return plan;
}

std::vector<Nanos> StagePlan::latencies() const {
  std::vector<Nanos> out;
  out.reserve(stages.size());
  for (const auto& s : stages) out.push_back(s.latency);
  return out;
}

void StagePlan::validate() const {
  if (stages.empty()) throw StructuralError("stage plan is empty");
  if (stages.front().kind != StageKind::kCompute ||
      stages.back().kind != StageKind::kCompute) {
    throw StructuralError("stage plan must start and end with compute stages");
  }
  for (const auto& s : stages) {
    if (s.latency.count() < 0) {
      throw StructuralError("negative stage latency at " + s.label());
    }
  }
}

Nanos transfer_time(int64_t bytes, double bytes_per_second) {
  return Nanos(std::llround(static_cast<double>(bytes) * 1e9 / bytes_per_second));
}

StagePlan decompose(const Placement& p, const ResourceGraph& graph,
                    const std::vector<LayerSignature>& signatures,
                    const NetworkProfile& net, const DecomposeOptions& options) {
  p.validate(net.size());
  if (static_cast<int>(signatures.size()) != net.size()) {
    throw StructuralError("signatures do not cover the network");
  }

  StagePlan plan;
  plan.boundary_crypto_overhead = options.crypto_overhead;
  const auto& segs = p.segments();

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& seg = segs[i];
    const Device& dev = graph.at(seg.device);

    if (i > 0) {
      const Device& prev = graph.at(segs[i - 1].device);
      const int64_t bytes = signatures[seg.range.first - 2].output_bytes;
      std::optional<double> bw;
      if (prev.host != dev.host) {
        bw = graph.link_bandwidth(prev.host, dev.host);
      } else {
        bw = graph.intra_host_bandwidth;
      }
      if (bw) {
        Stage link;
        link.kind = StageKind::kTransmit;
        link.src_host = prev.host;
        link.dst_host = dev.host;
        link.bytes = bytes;
        link.latency = transfer_time(bytes, *bw);
        plan.stages.push_back(link);
      }
    }

    Stage compute;
    compute.kind = StageKind::kCompute;
    compute.device = seg.device;
    compute.layers = seg.range;
    for (int x = seg.range.first; x <= seg.range.last; ++x) {
      compute.latency += net.layer(x).time_on(seg.device);
    }
    // Layer times already include encrypting the output; the receiving
    // enclave pays for decryption.
    if (i > 0 && dev.trusted) compute.latency += options.crypto_overhead;
    plan.stages.push_back(compute);
  }
  return plan;
}

Nanos single_frame_latency(const StagePlan& plan) {
  Nanos total{0};
  for (const auto& s : plan.stages) total += s.latency;
  return total;
}

Nanos chunk_completion(const StagePlan& plan, int64_t n) {
  if (n < 1) throw std::invalid_argument("chunk size must be >= 1");
  if (plan.stages.empty()) return Nanos{0};
  return single_frame_latency(plan) + (n - 1) * bottleneck(plan).second;
}

std::pair<std::size_t, Nanos> bottleneck(const StagePlan& plan) {
  std::size_t best = 0;
  Nanos worst{0};
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    if (i == 0 || plan.stages[i].latency > worst) {
      best = i;
      worst = plan.stages[i].latency;
    }
  }
  return {best, worst};
}

}  // namespace teeplace
