// Domain types shared by the planner, cost model and simulator.
//
// Every type here is a plain value. Nothing mutates after construction, so
// instances can be shared freely between threads.

#ifndef TEEPLACE_CORE_MODEL_HPP
#define TEEPLACE_CORE_MODEL_HPP

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace teeplace {

using Nanos = std::chrono::nanoseconds;

/// Rounds to the nearest nanosecond.
Nanos from_seconds(double seconds);
Nanos from_millis(double millis);
double to_seconds(Nanos t);
double to_millis(Nanos t);

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed placement, unknown device, missing profile entry.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid tree configuration or oracle bound exceeded.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No candidate satisfies the privacy policy.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

struct DeviceId {
  std::string name;

  DeviceId() = default;
  DeviceId(std::string n) : name(std::move(n)) {}  // NOLINT: implicit by intent
  DeviceId(const char* n) : name(n) {}              // NOLINT

  auto operator<=>(const DeviceId&) const = default;
  bool operator==(const DeviceId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const DeviceId& id) {
  return os << id.name;
}

using HostId = std::string;

struct Device {
  DeviceId id;
  bool trusted = false;
  HostId host;
};

struct ResourceGraph {
  std::vector<HostId> hosts;
  std::vector<Device> devices;
  /// Directed (from_host, to_host) -> bytes per second.
  std::map<std::pair<HostId, HostId>, double> bandwidth;
  /// Bytes per second between devices on the same host; unset means transfers
  /// are free.
  std::optional<double> intra_host_bandwidth;

  const Device* find(const DeviceId& id) const;
  /// Throws StructuralError for unknown ids.
  const Device& at(const DeviceId& id) const;
  bool is_trusted(const DeviceId& id) const { return at(id).trusted; }
  std::vector<DeviceId> trusted_devices() const;
  std::vector<DeviceId> untrusted_devices() const;
  /// Throws StructuralError when the pair has no entry.
  double link_bandwidth(const HostId& from, const HostId& to) const;
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Violations are returned as data: duplicate or empty ids, unknown hosts,
/// missing and non-positive bandwidth entries.
ValidationResult validate_resource_graph(const ResourceGraph& graph);

enum class LayerKind { kConv, kPool, kRelu, kFc, kSoftmax, kOther };

std::string to_string(LayerKind kind);
/// Throws Error for unknown names.
LayerKind layer_kind_from_string(const std::string& name);

struct ShapeParams {
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  /// Conv output channels; for kOther an optional channel override.
  std::optional<int> out_channels;
  /// Fully connected output length.
  std::optional<int> out_length;
};

struct Resolution {
  int64_t height = 0;
  int64_t width = 0;
  auto operator<=>(const Resolution&) const = default;
};

struct LayerSpec {
  int index = 0;
  LayerKind kind = LayerKind::kOther;
  ShapeParams shape;
  /// Per-frame execution time on each device, output encryption included.
  std::map<DeviceId, Nanos> exec_time;
  std::optional<int64_t> explicit_output_bytes;
  std::optional<Resolution> explicit_resolution;

  /// Throws StructuralError when the layer has no profile for `device`.
  Nanos time_on(const DeviceId& device) const;
};

struct NetworkProfile {
  std::string name;
  std::vector<LayerSpec> layers;
  int64_t input_height = 0;
  int64_t input_width = 0;
  int64_t input_channels = 0;
  int64_t bytes_per_element = 4;

  int size() const { return static_cast<int>(layers.size()); }
  const LayerSpec& layer(int index) const { return layers.at(index - 1); }
};

/// Returns the list of problems with the network; empty when valid.
std::vector<std::string> validate_network(const NetworkProfile& net);
/// Throws StructuralError joining all problems.
void require_valid_network(const NetworkProfile& net);

struct ChunkSpec {
  int64_t n = 1;
};

/// Inclusive, 1-based.
struct LayerRange {
  int first = 1;
  int last = 1;
  int size() const { return last - first + 1; }
  bool contains(int x) const { return first <= x && x <= last; }
  bool operator==(const LayerRange&) const = default;
};

struct Segment {
  LayerRange range;
  DeviceId device;
  bool operator==(const Segment&) const = default;
};

/// Contiguous layer segments, each on one device, covering 1..M in order.
class Placement {
 public:
  Placement() = default;
  explicit Placement(std::vector<Segment> segments)
      : segments_(std::move(segments)) {}

  /// Merges runs of equal devices into the canonical form.
  static Placement from_layer_devices(const std::vector<DeviceId>& per_layer);
  /// Splits `layer_count` layers at the given boundaries (layer x ends a
  /// segment for every x in `cut_after`).
  static Placement from_cuts(const std::vector<int>& cut_after,
                             const std::vector<DeviceId>& devices,
                             int layer_count);

  const std::vector<Segment>& segments() const { return segments_; }
  int layer_count() const {
    return segments_.empty() ? 0 : segments_.back().range.last;
  }
  std::vector<DeviceId> device_sequence() const;
  const DeviceId& device_of(int layer) const;

  /// Throws StructuralError on gaps, overlaps, empty segments, coverage
  /// other than 1..m, or unmerged adjacent equal-device segments.
  void validate(int m) const;
  /// Per-layer device vector of length m; validates first.
  std::vector<DeviceId> expand(int m) const;

  std::string to_string() const;
  bool operator==(const Placement&) const = default;

 private:
  std::vector<Segment> segments_;
};

/// Free-function form of Placement::expand.
std::vector<DeviceId> expand_placement(const Placement& p, int m);

}  // namespace teeplace

#endif  // TEEPLACE_CORE_MODEL_HPP
