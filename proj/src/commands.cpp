#include "teeplace/commands.hpp"

#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "teeplace/cli_io.hpp"
#include "teeplace/pipeline_sim.hpp"

namespace teeplace {
namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

PrivacyPolicy policy_from(const PolicyFlags& flags) {
  PrivacyPolicy p;
  if (flags.delta < 1) throw ConfigError("--delta must be >= 1");
  p.delta = flags.delta;
  p.mode = privacy_mode_from_string(flags.mode);
  return p;
}

DecomposeOptions cost_from(const PolicyFlags& flags) {
  if (flags.crypto_ms < 0) throw ConfigError("--crypto-ms must be >= 0");
  return {from_millis(flags.crypto_ms)};
}

std::string seconds_str(Nanos t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << to_seconds(t);
  return os.str();
}

std::string shape_str(const TensorShape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

std::string resolution_str(const Resolution& r) {
  return std::to_string(r.height) + "x" + std::to_string(r.width);
}

Json stages_json(const StagePlan& plan) {
  Json stages = Json::array();
  for (const auto& s : plan.stages) {
    Json j = Json::object();
    j["kind"] = s.kind == StageKind::kCompute ? "compute" : "transmit";
    j["label"] = s.label();
    if (s.kind == StageKind::kCompute) {
      j["first"] = s.layers.first;
      j["last"] = s.layers.last;
    } else {
      j["bytes"] = s.bytes;
    }
    j["latency_ns"] = s.latency.count();
    stages.push_back(std::move(j));
  }
  return stages;
}

void print_stages(std::ostream& out, const StagePlan& plan,
                  const std::vector<double>* busy = nullptr) {
  out << "  #  kind      where              latency_s";
  if (busy) out << "   busy";
  out << "\n";
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    std::string where = s.label();
    if (s.kind == StageKind::kCompute) {
      where += " L" + std::to_string(s.layers.first) + "-L" +
               std::to_string(s.layers.last);
    }
    out << "  " << std::setw(2) << i << " " << std::left << std::setw(9)
        << (s.kind == StageKind::kCompute ? "compute" : "transmit") << " "
        << std::setw(18) << where << std::right << " " << std::setw(10)
        << seconds_str(s.latency);
    if (busy) {
      out << "  " << std::fixed << std::setprecision(3) << (*busy)[i];
    }
    out << "\n";
  }
}

TreeConfig load_tree(const std::optional<std::string>& path,
                     const ResourceGraph& graph) {
  if (!path) return default_tree(graph);
  return tree_from_json(parse_json(read_text_file(*path), *path));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_shapes(const ShapesOptions& options, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const NetworkProfile net = parse_profile(read_text_file(options.profile_path));
    const auto sigs = propagate_shapes(net);

    std::string device;
    if (options.device) {
      device = *options.device;
    } else if (options.resources_path) {
      const auto graph = parse_resources(read_text_file(*options.resources_path));
      const auto trusted = graph.trusted_devices();
      if (trusted.empty()) throw ConfigError("resources have no trusted device");
      device = trusted.front().name;
    } else {
      std::set<std::string> names;
      for (const auto& l : net.layers) {
        for (const auto& [d, t] : l.exec_time) names.insert(d.name);
      }
      if (names.size() != 1) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("choose a reference device with --device (profiled: " +
                          list + ")");
      }
      device = *names.begin();
    }

    Nanos total{0};
    for (const auto& l : net.layers) total += l.time_on(device);
    std::vector<double> cumulative;
    Nanos running{0};
    for (const auto& l : net.layers) {
      running += l.time_on(device);
      cumulative.push_back(static_cast<double>(running.count()) /
                           static_cast<double>(total.count()));
    }

    const auto resolutions = resolution_profile(sigs);
    std::optional<std::size_t> first_private;
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
      const auto& r = resolutions[i].second;
      if (r.height < options.delta && r.width < options.delta) {
        first_private = i;
        break;
      }
    }

    if (options.format == OutputFormat::kJson) {
      Json rows = Json::array();
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        const auto& s = sigs[i];
        rows.push_back({{"index", s.layer_index},
                        {"kind", to_string(net.layer(s.layer_index).kind)},
                        {"output_shape",
                         {s.output_shape.height, s.output_shape.width,
                          s.output_shape.channels}},
                        {"output_bytes", s.output_bytes},
                        {"resolution", {s.resolution.height, s.resolution.width}},
                        {"cumulative_fraction", cumulative[i]}});
      }
      Json doc{{"device", device}, {"delta", options.delta}, {"layers", rows}};
      doc["first_private_layer"] =
          first_private ? Json(sigs[*first_private].layer_index) : Json(nullptr);
      out << doc.dump(2) << "\n";
      return kExitOk;
    }

    if (options.format == OutputFormat::kCsv) {
      out << "index,kind,output_shape,output_bytes,resolution,cumulative_fraction\n";
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        const auto& s = sigs[i];
        out << s.layer_index << ',' << to_string(net.layer(s.layer_index).kind)
            << ',' << shape_str(s.output_shape) << ',' << s.output_bytes << ','
            << resolution_str(s.resolution) << ',' << std::setprecision(6)
            << cumulative[i] << "\n";
      }
      return kExitOk;
    }

    out << "layer  kind     output          bytes        resolution  cum_" << device
        << "\n";
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      const auto& s = sigs[i];
      out << std::setw(5) << s.layer_index << "  " << std::left << std::setw(8)
          << to_string(net.layer(s.layer_index).kind) << " " << std::setw(15)
          << shape_str(s.output_shape) << " " << std::right << std::setw(10)
          << s.output_bytes << "   " << std::left << std::setw(10)
          << resolution_str(s.resolution) << std::right << "  " << std::fixed
          << std::setprecision(4) << cumulative[i] << "\n";
    }
    if (first_private) {
      out << "first output below " << options.delta << "x" << options.delta
          << ": layer " << sigs[*first_private].layer_index << " at "
          << std::fixed << std::setprecision(1)
          << 100.0 * cumulative[*first_private] << "% of " << device
          << " time\n";
    } else {
      out << "no output falls below " << options.delta << "x" << options.delta
          << "\n";
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_plan(const PlanOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    PlanRequest request;
    request.net = parse_profile(read_text_file(options.profile_path));
    request.graph = parse_resources(read_text_file(options.resources_path));
    request.policy = policy_from(options.policy);
    request.cost = cost_from(options.policy);
    request.n = options.n;
    request.threads = options.threads;
    if (request.n < 1) throw ConfigError("--n must be >= 1");
    request.tree = load_tree(options.tree_path, request.graph);

    const PlanReport report = plan(request);
    const auto sigs = propagate_shapes(request.net);
    const StagePlan stages = decompose(report.best.placement, request.graph,
                                       sigs, request.net, request.cost);
    const auto [bidx, blat] = bottleneck(stages);

    if (options.format == OutputFormat::kJson) {
      Json doc = Json::object();
      doc["n"] = request.n;
      doc["delta"] = request.policy.delta;
      doc["mode"] = to_string(request.policy.mode);
      doc["crypto_overhead_ns"] = request.cost.crypto_overhead.count();
      doc["placement"] = placement_to_json(report.best.placement);
      doc["t_chunk_ns"] = report.best.t_chunk.count();
      doc["t_chunk_s"] = to_seconds(report.best.t_chunk);
      doc["single_frame_ns"] = single_frame_latency(stages).count();
      doc["max_similarity"] = report.best.sim;
      doc["bottleneck_stage"] = bidx;
      doc["stages"] = stages_json(stages);
      doc["tree"] = tree_to_json(request.tree);
      doc["candidate_count"] = report.all_candidates.size();
      Json cands = Json::array();
      for (const auto& c : report.all_candidates) {
        cands.push_back({{"placement", c.placement.to_string()},
                         {"t_chunk_ns", c.t_chunk.count()},
                         {"max_similarity", c.sim},
                         {"admissible", c.admissible}});
      }
      doc["candidates"] = std::move(cands);
      out << doc.dump(2) << "\n";
      return kExitOk;
    }

    if (options.format == OutputFormat::kCsv) {
      out << "placement,t_chunk_ns,max_similarity,admissible,best\n";
      for (const auto& c : report.all_candidates) {
        out << csv_field(c.placement.to_string()) << ',' << c.t_chunk.count()
            << ',' << c.sim << ',' << (c.admissible ? "true" : "false") << ','
            << (c.placement == report.best.placement ? "true" : "false")
            << "\n";
      }
      return kExitOk;
    }

    out << "best placement: " << report.best.placement.to_string() << "\n";
    out << "  segment  layers      device   trusted\n";
    const auto& segs = report.best.placement.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& s = segs[i];
      out << "  " << std::setw(7) << i << "  " << std::left << std::setw(10)
          << (std::to_string(s.range.first) + ".." + std::to_string(s.range.last))
          << "  " << std::setw(8) << s.device.name << " " << std::right
          << (request.graph.is_trusted(s.device) ? "yes" : "no") << "\n";
    }
    out << "stages:\n";
    print_stages(out, stages);
    out << "predicted t_chunk (n=" << request.n
        << "): " << seconds_str(report.best.t_chunk) << " s ("
        << report.best.t_chunk.count() << " ns)\n";
    out << "single-frame latency: " << seconds_str(single_frame_latency(stages))
        << " s\n";
    out << "bottleneck: stage " << bidx << " (" << seconds_str(blat) << " s)\n";
    out << "max leakage (input resolution on untrusted devices): "
        << report.best.sim << "\n";
    out << "candidates evaluated: " << report.all_candidates.size() << "\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_simulate(const SimulateOptions& options, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const NetworkProfile net = parse_profile(read_text_file(options.profile_path));
    const ResourceGraph graph =
        parse_resources(read_text_file(options.resources_path));
    const Json doc = parse_json(read_text_file(options.placement_path),
                                options.placement_path);
    const Placement placement = placement_from_json(doc);
    if (placement.layer_count() != net.size()) {
      throw StructuralError("placement/profile mismatch: placement covers " +
                            std::to_string(placement.layer_count()) +
                            " layers, profile has " + std::to_string(net.size()));
    }
    placement.validate(net.size());

    int64_t n = kDefaultChunkSize;
    if (options.n) {
      n = *options.n;
    } else if (doc.is_object() && doc.contains("n") &&
               doc["n"].is_number_integer()) {
      n = doc["n"].get<int64_t>();
    }
    if (n < 1) throw ConfigError("--n must be >= 1");

    const PrivacyPolicy policy = policy_from(options.policy);
    const auto sigs = propagate_shapes(net);
    if (!admissible(placement, graph, net, sigs, policy)) {
      const auto leak = check_c2(placement, graph, net, sigs, policy);
      std::string layers;
      for (int x : leak.violating_layers) {
        layers += (layers.empty() ? "" : ",") + std::to_string(x);
      }
      if (!options.allow_violating) {
        throw InfeasibleError("placement violates the " +
                              to_string(policy.mode) +
                              " policy (layers " + layers +
                              "); pass --allow-violating to simulate anyway");
      }
      err << "warning: placement violates the policy (layers " << layers
          << ")\n";
    }

    const StagePlan stages =
        decompose(placement, graph, sigs, net, cost_from(options.policy));
    const SimResult result = simulate(stages, n);
    if (options.trace_path) {
      std::ostringstream csv;
      write_trace_csv(csv, stages, result);
      write_text_file(*options.trace_path, csv.str());
    }

    if (options.format == OutputFormat::kJson) {
      Json st = stages_json(stages);
      for (std::size_t i = 0; i < st.size(); ++i) {
        st[i]["busy"] = result.per_stage_busy[i];
      }
      Json j{{"n", n},
             {"placement", placement_to_json(placement)},
             {"completion_ns", result.completion.count()},
             {"completion_s", to_seconds(result.completion)},
             {"single_frame_ns", single_frame_latency(stages).count()},
             {"stages", st}};
      out << j.dump(2) << "\n";
      return kExitOk;
    }

    out << "placement: " << placement.to_string() << "\n";
    print_stages(out, stages, &result.per_stage_busy);
    out << "measured completion (n=" << n << "): "
        << seconds_str(result.completion) << " s (" << result.completion.count()
        << " ns)\n";
    out << "single-frame latency: " << seconds_str(single_frame_latency(stages))
        << " s\n";
    if (options.trace_path) {
      out << "trace: " << result.events.size() << " events written to "
          << *options.trace_path << "\n";
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_report(const ReportOptions& options, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    PlanRequest request;
    request.net = parse_profile(read_text_file(options.profile_path));
    request.graph = parse_resources(read_text_file(options.resources_path));
    request.policy = policy_from(options.policy);
    request.cost = cost_from(options.policy);
    request.n = options.n;
    if (request.n < 1) throw ConfigError("--n must be >= 1");
    request.tree = load_tree(options.tree_path, request.graph);

    const auto rows = strategy_compare(request);

    if (options.format == OutputFormat::kCsv) {
      out << "strategy,t_chunk_ms,speedup\n";
      for (const auto& r : rows) {
        out << csv_field(r.name) << ',';
        if (r.skipped) {
          out << csv_field(r.note) << ",\n";
          continue;
        }
        out << std::setprecision(12) << to_millis(r.t_chunk) << ','
            << std::setprecision(6) << r.speedup << "\n";
      }
      return kExitOk;
    }

    if (options.format == OutputFormat::kJson) {
      Json arr = Json::array();
      for (const auto& r : rows) {
        Json j{{"strategy", r.name}, {"skipped", r.skipped}, {"note", r.note}};
        if (!r.skipped) {
          j["t_chunk_ns"] = r.t_chunk.count();
          j["speedup"] = r.speedup;
          j["placement"] = r.placement->to_string();
        }
        arr.push_back(std::move(j));
      }
      out << Json{{"n", request.n}, {"rows", arr}}.dump(2) << "\n";
      return kExitOk;
    }

    out << "strategy comparison (n=" << request.n << ")\n";
    out << "  strategy        t_chunk_s       speedup  placement\n";
    for (const auto& r : rows) {
      out << "  " << std::left << std::setw(14) << r.name << std::right;
      if (r.skipped) {
        out << "  " << r.note << "\n";
        continue;
      }
      out << "  " << std::setw(12) << seconds_str(r.t_chunk) << "  "
          << std::setw(8) << std::fixed << std::setprecision(3) << r.speedup
          << "x  " << r.placement->to_string() << "\n";
    }
    return kExitOk;
  });
}

}  // namespace teeplace
