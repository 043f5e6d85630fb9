#include "teeplace/cli_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace teeplace {
namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

/// Field accessor that reports the JSON path on every failure.
class Field {
 public:
  Field(const Json& node, std::string path)
      : node_(&node), path_(std::move(path)) {}

  const Json& node() const { return *node_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_ + ": " + what);
  }

  bool has(const char* key) const {
    return node_->is_object() && node_->contains(key);
  }

  Field at(const char* key) const {
    if (!node_->is_object()) fail("expected an object");
    if (!node_->contains(key)) fail(std::string("missing field '") + key + "'");
    return {node_->at(key), path_ + "." + key};
  }

  Field at(std::size_t i) const {
    return {node_->at(i), path_ + "[" + std::to_string(i) + "]"};
  }

  std::size_t array_size() const {
    if (!node_->is_array()) fail("expected an array");
    return node_->size();
  }

  int64_t integer() const {
    if (!node_->is_number_integer()) fail("expected an integer");
    return node_->get<int64_t>();
  }

  int small_int() const {
    const int64_t v = integer();
    if (v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max()) {
      fail("integer out of range");
    }
    return static_cast<int>(v);
  }

  double number() const {
    if (!node_->is_number()) fail("expected a number");
    return node_->get<double>();
  }

  std::string string() const {
    if (!node_->is_string()) fail("expected a string");
    return node_->get<std::string>();
  }

  bool boolean() const {
    if (!node_->is_boolean()) fail("expected true or false");
    return node_->get<bool>();
  }

 private:
  const Json* node_;
  std::string path_;
};

/// Integral values are written without a fractional part.
Json number_json(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
    return Json(static_cast<int64_t>(v));
  }
  return Json(v);
}

Json millis_json(Nanos t) {
  if (t.count() % 1'000'000 == 0) return Json(t.count() / 1'000'000);
  return Json(to_millis(t));
}

Json mbps_json(double bytes_per_second) {
  return number_json(bytes_per_second / kBytesPerSecondPerMbps);
}

double parse_mbps(const Field& f) {
  const double mbps = f.number();
  return mbps * kBytesPerSecondPerMbps;
}

std::vector<DeviceId> device_list(const Field& f) {
  std::vector<DeviceId> out;
  for (std::size_t i = 0; i < f.array_size(); ++i) {
    out.emplace_back(f.at(i).string());
  }
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": syntax error at " + line_col(text, e.byte) +
                     ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Profile

NetworkProfile profile_from_json(const Json& doc) {
  const Field root(doc, "profile");
  NetworkProfile net;
  if (root.has("name")) net.name = root.at("name").string();
  const Field input = root.at("input");
  net.input_height = input.at("height").integer();
  net.input_width = input.at("width").integer();
  net.input_channels = input.at("channels").integer();
  if (root.has("bytes_per_element")) {
    net.bytes_per_element = root.at("bytes_per_element").integer();
  }

  const Field layers = root.at("layers");
  for (std::size_t i = 0; i < layers.array_size(); ++i) {
    const Field lf = layers.at(i);
    LayerSpec layer;
    layer.index = lf.at("index").small_int();
    const Field kind = lf.at("kind");
    try {
      layer.kind = layer_kind_from_string(kind.string());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      kind.fail(e.what());
    }
    if (lf.has("input_from") &&
        lf.at("input_from").integer() != layer.index - 1) {
      lf.at("input_from")
          .fail("only linear chains are supported: layer " +
                std::to_string(layer.index) + " must read from layer " +
                std::to_string(layer.index - 1));
    }

    const bool windowed =
        layer.kind == LayerKind::kConv || layer.kind == LayerKind::kPool;
    if (windowed) {
      layer.shape.kernel = lf.at("kernel").small_int();
      layer.shape.stride = lf.at("stride").small_int();
      layer.shape.padding = lf.at("padding").small_int();
    }
    if (lf.has("out_channels")) {
      layer.shape.out_channels = lf.at("out_channels").small_int();
    }
    if (lf.has("out_length")) {
      layer.shape.out_length = lf.at("out_length").small_int();
    }
    if (lf.has("output_bytes")) {
      layer.explicit_output_bytes = lf.at("output_bytes").integer();
    }
    if (lf.has("resolution")) {
      const Field r = lf.at("resolution");
      if (r.array_size() != 2) r.fail("expected [height, width]");
      layer.explicit_resolution = Resolution{r.at(std::size_t{0}).integer(),
                                             r.at(std::size_t{1}).integer()};
    }

    const Field times = lf.at("exec_ms");
    if (!times.node().is_object()) times.fail("expected an object");
    for (const auto& [device, value] : times.node().items()) {
      const Field t(value, times.path() + "." + device);
      const double ms = t.number();
      if (!(ms > 0.0)) t.fail("execution time must be positive");
      layer.exec_time[DeviceId(device)] = from_millis(ms);
    }
    net.layers.push_back(std::move(layer));
  }

  auto problems = validate_network(net);
  if (!problems.empty()) {
    std::string msg = "profile: invalid network";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ParseError(msg);
  }
  return net;
}

Json profile_to_json(const NetworkProfile& net) {
  Json doc = Json::object();
  if (!net.name.empty()) doc["name"] = net.name;
  doc["input"] = {{"height", net.input_height},
                  {"width", net.input_width},
                  {"channels", net.input_channels}};
  doc["bytes_per_element"] = net.bytes_per_element;
  Json layers = Json::array();
  for (const auto& l : net.layers) {
    Json j = Json::object();
    j["index"] = l.index;
    j["kind"] = to_string(l.kind);
    if (l.kind == LayerKind::kConv || l.kind == LayerKind::kPool) {
      j["kernel"] = l.shape.kernel;
      j["stride"] = l.shape.stride;
      j["padding"] = l.shape.padding;
    }
    if (l.shape.out_channels) j["out_channels"] = *l.shape.out_channels;
    if (l.shape.out_length) j["out_length"] = *l.shape.out_length;
    if (l.explicit_output_bytes) j["output_bytes"] = *l.explicit_output_bytes;
    if (l.explicit_resolution) {
      j["resolution"] = {l.explicit_resolution->height,
                         l.explicit_resolution->width};
    }
    Json times = Json::object();
    for (const auto& [d, t] : l.exec_time) times[d.name] = millis_json(t);
    j["exec_ms"] = std::move(times);
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  return doc;
}

NetworkProfile parse_profile(const std::string& text) {
  return profile_from_json(parse_json(text, "profile"));
}

std::string serialize_profile(const NetworkProfile& net) {
  return profile_to_json(net).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Resources

ResourceGraph resources_from_json(const Json& doc) {
  const Field root(doc, "resources");
  ResourceGraph g;
  const Field hosts = root.at("hosts");
  for (std::size_t i = 0; i < hosts.array_size(); ++i) {
    g.hosts.push_back(hosts.at(i).string());
  }
  const Field devices = root.at("devices");
  for (std::size_t i = 0; i < devices.array_size(); ++i) {
    const Field d = devices.at(i);
    g.devices.push_back(
        {DeviceId(d.at("id").string()), d.at("trusted").boolean(),
         d.at("host").string()});
  }
  if (root.has("links")) {
    const Field links = root.at("links");
    for (std::size_t i = 0; i < links.array_size(); ++i) {
      const Field l = links.at(i);
      auto key = std::make_pair(l.at("from").string(), l.at("to").string());
      if (g.bandwidth.count(key)) l.fail("duplicate link");
      g.bandwidth[key] = parse_mbps(l.at("mbps"));
    }
  }
  if (root.has("intra_host_mbps")) {
    g.intra_host_bandwidth = parse_mbps(root.at("intra_host_mbps"));
  }

  const auto v = validate_resource_graph(g);
  if (!v.ok()) {
    std::string msg = "resources: invalid resource graph";
    for (const auto& s : v.violations) msg += "\n  " + s;
    throw ParseError(msg);
  }
  return g;
}

Json resources_to_json(const ResourceGraph& graph) {
  Json doc = Json::object();
  doc["hosts"] = graph.hosts;
  Json devices = Json::array();
  for (const auto& d : graph.devices) {
    devices.push_back(
        {{"id", d.id.name}, {"trusted", d.trusted}, {"host", d.host}});
  }
  doc["devices"] = std::move(devices);
  Json links = Json::array();
  for (const auto& [pair, bw] : graph.bandwidth) {
    links.push_back(
        {{"from", pair.first}, {"to", pair.second}, {"mbps", mbps_json(bw)}});
  }
  doc["links"] = std::move(links);
  if (graph.intra_host_bandwidth) {
    doc["intra_host_mbps"] = mbps_json(*graph.intra_host_bandwidth);
  }
  return doc;
}

ResourceGraph parse_resources(const std::string& text) {
  return resources_from_json(parse_json(text, "resources"));
}

std::string serialize_resources(const ResourceGraph& graph) {
  return resources_to_json(graph).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Placement and tree

Placement placement_from_json(const Json& doc) {
  Field root(doc, "placement");
  if (root.has("placement")) root = root.at("placement");
  const Field segs = root.at("segments");
  std::vector<Segment> out;
  for (std::size_t i = 0; i < segs.array_size(); ++i) {
    const Field s = segs.at(i);
    out.push_back({{s.at("first").small_int(), s.at("last").small_int()},
                   DeviceId(s.at("device").string())});
  }
  return Placement(std::move(out));
}

Json placement_to_json(const Placement& p) {
  Json segs = Json::array();
  for (const auto& s : p.segments()) {
    segs.push_back({{"first", s.range.first},
                    {"last", s.range.last},
                    {"device", s.device.name}});
  }
  return Json{{"segments", std::move(segs)}};
}

TreeConfig tree_from_json(const Json& doc) {
  const Field root(doc, "tree");
  TreeConfig config;
  config.start_device = DeviceId(root.at("start").string());
  if (root.has("levels")) {
    const Field levels = root.at("levels");
    for (std::size_t i = 0; i < levels.array_size(); ++i) {
      config.level_devices.push_back(device_list(levels.at(i)));
    }
  }
  if (root.has("return_to_start")) {
    config.require_return_to_start = root.at("return_to_start").boolean();
  }
  return config;
}

Json tree_to_json(const TreeConfig& config) {
  Json levels = Json::array();
  for (const auto& level : config.level_devices) {
    Json names = Json::array();
    for (const auto& d : level) names.push_back(d.name);
    levels.push_back(std::move(names));
  }
  return Json{{"start", config.start_device.name},
              {"levels", std::move(levels)},
              {"return_to_start", config.require_return_to_start}};
}

PrivacyMode privacy_mode_from_string(const std::string& s) {
  if (s == "c1" || s == "C1_only") return PrivacyMode::kC1Only;
  if (s == "c2" || s == "C2_allowed") return PrivacyMode::kC2Allowed;
  throw ParseError("unknown privacy mode '" + s + "' (expected c1 or c2)");
}

std::string to_string(PrivacyMode mode) {
  return mode == PrivacyMode::kC1Only ? "c1" : "c2";
}

}  // namespace teeplace
