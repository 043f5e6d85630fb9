#include "teeplace/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace teeplace {

Nanos from_seconds(double seconds) {
  return Nanos(std::llround(seconds * 1e9));
}

Nanos from_millis(double millis) { return Nanos(std::llround(millis * 1e6)); }

double to_seconds(Nanos t) { return static_cast<double>(t.count()) / 1e9; }

double to_millis(Nanos t) { return static_cast<double>(t.count()) / 1e6; }

// ---------------------------------------------------------------------------
// ResourceGraph

const Device* ResourceGraph::find(const DeviceId& id) const {
  for (const auto& d : devices) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const Device& ResourceGraph::at(const DeviceId& id) const {
  const Device* d = find(id);
  if (d == nullptr) throw StructuralError("unknown device '" + id.name + "'");
  return *d;
}

std::vector<DeviceId> ResourceGraph::trusted_devices() const {
  std::vector<DeviceId> out;
  for (const auto& d : devices) {
    if (d.trusted) out.push_back(d.id);
  }
  return out;
}

std::vector<DeviceId> ResourceGraph::untrusted_devices() const {
  std::vector<DeviceId> out;
  for (const auto& d : devices) {
    if (!d.trusted) out.push_back(d.id);
  }
  return out;
}

double ResourceGraph::link_bandwidth(const HostId& from,
                                     const HostId& to) const {
  auto it = bandwidth.find({from, to});
  if (it == bandwidth.end()) {
    throw StructuralError("missing bandwidth for " + from + " -> " + to);
  }
  return it->second;
}

ValidationResult validate_resource_graph(const ResourceGraph& graph) {
  ValidationResult result;
  auto& v = result.violations;

  std::set<HostId> hosts;
  for (const auto& h : graph.hosts) {
    if (h.empty()) v.push_back("empty host id");
    if (!hosts.insert(h).second) v.push_back("duplicate host id '" + h + "'");
  }

  std::set<DeviceId> ids;
  for (const auto& d : graph.devices) {
    if (d.id.name.empty()) v.push_back("empty device id");
    if (!ids.insert(d.id).second) {
      v.push_back("duplicate device id '" + d.id.name + "'");
    }
    if (hosts.count(d.host) == 0) {
      v.push_back("device '" + d.id.name + "' on unknown host '" + d.host +
                  "'");
    }
  }

  for (const auto& [link, bw] : graph.bandwidth) {
    const auto& [from, to] = link;
    if (hosts.count(from) == 0 || hosts.count(to) == 0) {
      v.push_back("bandwidth entry " + from + " -> " + to +
                  " names an unknown host");
    }
    if (!(bw > 0.0)) {
      v.push_back("non-positive bandwidth " + from + " -> " + to);
    }
  }
  if (graph.intra_host_bandwidth && !(*graph.intra_host_bandwidth > 0.0)) {
    v.push_back("non-positive intra-host bandwidth");
  }

  for (const auto& a : graph.hosts) {
    for (const auto& b : graph.hosts) {
      if (a != b && graph.bandwidth.count({a, b}) == 0) {
        v.push_back("missing bandwidth " + a + " -> " + b);
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Layers

namespace {

constexpr std::pair<LayerKind, const char*> kKindNames[] = {
    {LayerKind::kConv, "conv"},   {LayerKind::kPool, "pool"},
    {LayerKind::kRelu, "relu"},   {LayerKind::kFc, "fc"},
    {LayerKind::kSoftmax, "softmax"}, {LayerKind::kOther, "other"},
};

}  // namespace

std::string to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "other";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw Error("unknown layer kind '" + name + "'");
}

Nanos LayerSpec::time_on(const DeviceId& device) const {
  auto it = exec_time.find(device);
  if (it == exec_time.end()) {
    throw StructuralError("layer " + std::to_string(index) +
                          " has no execution time for device '" + device.name +
                          "'");
  }
  return it->second;
}

std::vector<std::string> validate_network(const NetworkProfile& net) {
  std::vector<std::string> problems;
  if (net.layers.empty()) problems.push_back("network has no layers");
  if (net.input_height < 1 || net.input_width < 1 || net.input_channels < 1) {
    problems.push_back("input dimensions must be >= 1");
  }
  if (net.bytes_per_element < 1) {
    problems.push_back("bytes_per_element must be >= 1");
  }

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const std::string where = "layer " + std::to_string(i + 1);
    if (l.index != static_cast<int>(i) + 1) {
      problems.push_back(where + ": index " + std::to_string(l.index) +
                         " breaks the 1..M sequence");
    }
    const bool windowed =
        l.kind == LayerKind::kConv || l.kind == LayerKind::kPool;
    if (windowed) {
      if (l.shape.kernel < 1) problems.push_back(where + ": kernel must be >= 1");
      if (l.shape.stride < 1) problems.push_back(where + ": stride must be >= 1");
      if (l.shape.padding < 0) {
        problems.push_back(where + ": padding must be >= 0");
      }
    }
    if (l.kind == LayerKind::kConv && !l.shape.out_channels) {
      problems.push_back(where + ": conv requires out_channels");
    }
    if (l.shape.out_channels && *l.shape.out_channels < 1) {
      problems.push_back(where + ": out_channels must be >= 1");
    }
    if (l.kind == LayerKind::kFc && (!l.shape.out_length || *l.shape.out_length < 1)) {
      problems.push_back(where + ": fc requires out_length >= 1");
    }
    for (const auto& [dev, t] : l.exec_time) {
      if (t.count() <= 0) {
        problems.push_back(where + ": non-positive execution time on " +
                           dev.name);
      }
    }
    if (l.explicit_output_bytes && *l.explicit_output_bytes < 1) {
      problems.push_back(where + ": output_bytes must be >= 1");
    }
    if (l.explicit_resolution && (l.explicit_resolution->height < 1 ||
                                  l.explicit_resolution->width < 1)) {
      problems.push_back(where + ": resolution must be >= 1x1");
    }
  }
  return problems;
}

void require_valid_network(const NetworkProfile& net) {
  auto problems = validate_network(net);
  if (problems.empty()) return;
  std::string msg = "invalid network";
  for (const auto& p : problems) msg += "\n  " + p;
  throw StructuralError(msg);
}

// ---------------------------------------------------------------------------
// Placement

Placement Placement::from_layer_devices(const std::vector<DeviceId>& per_layer) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < per_layer.size(); ++i) {
    const int x = static_cast<int>(i) + 1;
    if (!segs.empty() && segs.back().device == per_layer[i]) {
      segs.back().range.last = x;
    } else {
      segs.push_back({{x, x}, per_layer[i]});
    }
  }
  return Placement(std::move(segs));
}

Placement Placement::from_cuts(const std::vector<int>& cut_after,
                               const std::vector<DeviceId>& devices,
                               int layer_count) {
  if (devices.size() != cut_after.size() + 1) {
    throw StructuralError("need exactly one more device than cut points");
  }
  std::vector<Segment> segs;
  int first = 1;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const int last = i < cut_after.size() ? cut_after[i] : layer_count;
    segs.push_back({{first, last}, devices[i]});
    first = last + 1;
  }
  return Placement(std::move(segs));
}

std::vector<DeviceId> Placement::device_sequence() const {
  std::vector<DeviceId> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) out.push_back(s.device);
  return out;
}

const DeviceId& Placement::device_of(int layer) const {
  for (const auto& s : segments_) {
    if (s.range.contains(layer)) return s.device;
  }
  throw StructuralError("layer " + std::to_string(layer) +
                        " is not covered by the placement");
}

void Placement::validate(int m) const {
  if (segments_.empty()) throw StructuralError("placement has no segments");
  int expected = 1;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (s.range.last < s.range.first) {
      throw StructuralError("empty segment " + std::to_string(s.range.first) +
                            ".." + std::to_string(s.range.last));
    }
    if (s.range.first > expected) {
      throw StructuralError("coverage gap before layer " +
                            std::to_string(s.range.first));
    }
    if (s.range.first < expected) {
      throw StructuralError("segments overlap at layer " +
                            std::to_string(s.range.first));
    }
    if (i > 0 && segments_[i - 1].device == s.device) {
      throw StructuralError("unmerged adjacent equal-device segments on '" +
                            s.device.name + "'");
    }
    expected = s.range.last + 1;
  }
  if (expected - 1 != m) {
    throw StructuralError("placement covers 1.." + std::to_string(expected - 1) +
                          " but the network has " + std::to_string(m) +
                          " layers");
  }
}

std::vector<DeviceId> Placement::expand(int m) const {
  validate(m);
  std::vector<DeviceId> out;
  out.reserve(m);
  for (const auto& s : segments_) {
    for (int x = s.range.first; x <= s.range.last; ++x) out.push_back(s.device);
  }
  return out;
}

std::string Placement::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (i) os << ", ";
    os << "L" << s.range.first;
    if (s.range.last != s.range.first) os << "->L" << s.range.last;
    os << "@" << s.device.name;
  }
  return os.str();
}

std::vector<DeviceId> expand_placement(const Placement& p, int m) {
  return p.expand(m);
}

}  // namespace teeplace
