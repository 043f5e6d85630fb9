#include "teeplace/pipeline_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace teeplace {
namespace {

enum class EventType { kArrive, kFinish };

struct QueuedEvent {
  Nanos time;
  uint64_t seq;  // insertion order, breaks time ties deterministically
  EventType type;
  std::size_t stage;
  int64_t frame;

  bool operator>(const QueuedEvent& o) const {
    return std::tie(time, seq) > std::tie(o.time, o.seq);
  }
};

struct StageServer {
  std::deque<int64_t> waiting;
  bool busy = false;
  Nanos busy_time{0};
};

class Simulator {
 public:
  Simulator(const StagePlan& plan, int64_t n, const SimOptions& options)
      : plan_(plan), n_(n), servers_(plan.stages.size()) {
    result_.events.resize(plan.stages.size() * static_cast<std::size_t>(n));
    for (int64_t f = 1; f <= n; ++f) {
      push(options.arrival_period * (f - 1), EventType::kArrive, 0, f);
    }
  }

  SimResult run() {
    while (!queue_.empty()) {
      const QueuedEvent ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      if (ev.type == EventType::kArrive) {
        servers_[ev.stage].waiting.push_back(ev.frame);
        try_start(ev.stage);
      } else {
        finish(ev.stage, ev.frame);
      }
    }
    result_.completion = Nanos{0};
    for (const auto& e : result_.events) {
      result_.completion = std::max(result_.completion, e.end);
    }
    for (const auto& s : servers_) {
      result_.per_stage_busy.push_back(
          result_.completion.count() > 0
              ? static_cast<double>(s.busy_time.count()) /
                    static_cast<double>(result_.completion.count())
              : 0.0);
    }
    return std::move(result_);
  }

 private:
  void push(Nanos t, EventType type, std::size_t stage, int64_t frame) {
    queue_.push({t, seq_++, type, stage, frame});
  }

  SimEvent& slot(std::size_t stage, int64_t frame) {
    return result_.events[stage * static_cast<std::size_t>(n_) +
                          static_cast<std::size_t>(frame - 1)];
  }

  void try_start(std::size_t stage) {
    auto& server = servers_[stage];
    if (server.busy || server.waiting.empty()) return;
    const int64_t frame = server.waiting.front();
    server.waiting.pop_front();
    server.busy = true;
    const Nanos latency = plan_.stages[stage].latency;
    server.busy_time += latency;
    slot(stage, frame) = {frame, stage, now_, now_ + latency};
    push(now_ + latency, EventType::kFinish, stage, frame);
  }

  void finish(std::size_t stage, int64_t frame) {
    servers_[stage].busy = false;
    if (stage + 1 < servers_.size()) {
      push(now_, EventType::kArrive, stage + 1, frame);
    }
    try_start(stage);
  }

  const StagePlan& plan_;
  int64_t n_;
  std::vector<StageServer> servers_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>,
                      std::greater<QueuedEvent>>
      queue_;
  uint64_t seq_ = 0;
  Nanos now_{0};
  SimResult result_;
};

}  // namespace

SimResult simulate(const StagePlan& plan, int64_t n, const SimOptions& options) {
  if (n < 1) throw std::invalid_argument("chunk size must be >= 1");
  if (options.arrival_period.count() < 0) {
    throw std::invalid_argument("arrival period must be >= 0");
  }
  if (plan.stages.empty()) return {};
  return Simulator(plan, n, options).run();
}

double validate_against_model(const StagePlan& plan, int64_t n) {
  const Nanos simulated = simulate(plan, n).completion;
  const Nanos analytic = chunk_completion(plan, n);
  if (simulated.count() == 0) return analytic.count() == 0 ? 0.0 : 1.0;
  return std::abs(static_cast<double>((simulated - analytic).count())) /
         static_cast<double>(simulated.count());
}

void write_trace_csv(std::ostream& os, const StagePlan& plan,
                     const SimResult& result) {
  os << "frame,stage,kind,device,start_ns,end_ns\n";
  for (const auto& e : result.events) {
    const Stage& s = plan.stages.at(e.stage);
    os << e.frame << ',' << e.stage << ','
       << (s.kind == StageKind::kCompute ? "compute" : "transmit") << ','
       << s.label() << ',' << e.start.count() << ',' << e.end.count() << '\n';
  }
}

}  // namespace teeplace
