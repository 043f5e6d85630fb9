// Discrete-event simulation of a StagePlan over a chunk of frames.
//
// Each stage is a single FIFO server. Frames are released into stage 0 (all
// at t = 0 by default), a finished frame is handed to the next stage's queue,
// and a stage starts its next queued frame as soon as it is idle. Time is kept
// in integer nanoseconds so results compare exactly with the analytic model.

#ifndef TEEPLACE_PIPELINE_SIM_HPP
#define TEEPLACE_PIPELINE_SIM_HPP

#include <cstdint>
#include <ostream>
#include <vector>

#include "teeplace/cost_model.hpp"

namespace teeplace {

struct SimEvent {
  int64_t frame = 0;  // 1-based
  std::size_t stage = 0;
  Nanos start{0};
  Nanos end{0};
  bool operator==(const SimEvent&) const = default;
};

struct SimResult {
  Nanos completion{0};
  /// Ordered by (stage, frame).
  std::vector<SimEvent> events;
  /// Busy time of each stage divided by the completion time.
  std::vector<double> per_stage_busy;
};

struct SimOptions {
  /// Frame f is released at (f - 1) * arrival_period.
  Nanos arrival_period{0};
};

/// Throws std::invalid_argument when n < 1.
SimResult simulate(const StagePlan& plan, int64_t n,
                   const SimOptions& options = {});

/// |simulated - analytic| / simulated completion; zero for an empty plan.
double validate_against_model(const StagePlan& plan, int64_t n);

/// CSV with header: frame,stage,kind,device,start_ns,end_ns
void write_trace_csv(std::ostream& os, const StagePlan& plan,
                     const SimResult& result);

}  // namespace teeplace

#endif  // TEEPLACE_PIPELINE_SIM_HPP
