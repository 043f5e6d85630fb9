// Analytic chunk completion time for a placed, pipelined layer chain.
//
// A placement decomposes into a sequence of stages: one compute stage per
// segment and one transmit stage per boundary that crosses hosts. Every stage
// serves one frame at a time in FIFO order, so for stage latencies L_1..L_K
// and a closed chunk of n frames
//
//   t_chunk(n) = sum_k L_k + (n - 1) * max_k L_k.
//
// With a single compute bottleneck feeding a link and a fast tail this is
// n * T_1 + tr + T_2, and t_chunk(n) / n tends to the bottleneck latency.

#ifndef TEEPLACE_COST_MODEL_HPP
#define TEEPLACE_COST_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "teeplace/core_model.hpp"
#include "teeplace/shape_prop.hpp"

namespace teeplace {

/// AES encrypt/decrypt cost per boundary.
inline constexpr Nanos kDefaultCryptoOverhead = Nanos(2'500'000);

enum class StageKind { kCompute, kTransmit };

struct Stage {
  StageKind kind = StageKind::kCompute;
  /// Compute stages only.
  DeviceId device;
  LayerRange layers;
  /// Transmit stages only.
  HostId src_host;
  HostId dst_host;
  int64_t bytes = 0;

  Nanos latency{0};

  /// Device id for compute stages, "src->dst" for transmit stages.
  std::string label() const;
};

struct StagePlan {
  std::vector<Stage> stages;
  /// Added to a trusted compute stage that receives data from another device.
  Nanos boundary_crypto_overhead = kDefaultCryptoOverhead;

  /// Compute stages with the given latencies, no transmit stages. Used by
  /// tests and synthetic experiments.
  static StagePlan from_latencies(const std::vector<Nanos>& latencies);

  std::vector<Nanos> latencies() const;
  /// Throws StructuralError when empty, when the first or last stage is a
  /// transmit stage, or on negative latencies.
  void validate() const;
};

struct DecomposeOptions {
  Nanos crypto_overhead = kDefaultCryptoOverhead;
};

/// Throws StructuralError for missing execution times, unknown devices and
/// missing bandwidth on a crossed host pair.
StagePlan decompose(const Placement& p, const ResourceGraph& graph,
                    const std::vector<LayerSignature>& signatures,
                    const NetworkProfile& net,
                    const DecomposeOptions& options = {});

/// Transfer time of `bytes` at `bytes_per_second`, rounded to the nearest
/// nanosecond.
Nanos transfer_time(int64_t bytes, double bytes_per_second);

Nanos single_frame_latency(const StagePlan& plan);

/// Throws std::invalid_argument when n < 1.
Nanos chunk_completion(const StagePlan& plan, int64_t n);

/// Maximum-latency stage; ties go to the lowest index.
std::pair<std::size_t, Nanos> bottleneck(const StagePlan& plan);

}  // namespace teeplace

#endif  // TEEPLACE_COST_MODEL_HPP
