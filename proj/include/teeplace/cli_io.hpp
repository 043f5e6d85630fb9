// JSON documents read and written by the command-line tool.
//
// Units on disk: execution times in milliseconds, bandwidth in megabits per
// second (1 Mbps = 125000 bytes/s). In memory: nanoseconds and bytes/s.
// Serializers emit a fixed key order, so a document written by this module
// parses and re-serializes to the same text.

#ifndef TEEPLACE_CLI_IO_HPP
#define TEEPLACE_CLI_IO_HPP

#include <optional>
#include <string>

#include "json.hpp"
#include "teeplace/core_model.hpp"
#include "teeplace/planner.hpp"

namespace teeplace {

using Json = nlohmann::ordered_json;

/// Malformed document. The message names the line/column or the field.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kBytesPerSecondPerMbps = 125000.0;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Parses JSON text; syntax errors carry line and column.
Json parse_json(const std::string& text, const std::string& source = "input");

NetworkProfile profile_from_json(const Json& doc);
Json profile_to_json(const NetworkProfile& net);
NetworkProfile parse_profile(const std::string& text);
std::string serialize_profile(const NetworkProfile& net);

ResourceGraph resources_from_json(const Json& doc);
Json resources_to_json(const ResourceGraph& graph);
ResourceGraph parse_resources(const std::string& text);
std::string serialize_resources(const ResourceGraph& graph);

/// Accepts either {"segments": [...]} or a document with a "placement" key
/// (the output of `plan --json`).
Placement placement_from_json(const Json& doc);
Json placement_to_json(const Placement& p);

TreeConfig tree_from_json(const Json& doc);
Json tree_to_json(const TreeConfig& config);

PrivacyMode privacy_mode_from_string(const std::string& s);
std::string to_string(PrivacyMode mode);

}  // namespace teeplace

#endif  // TEEPLACE_CLI_IO_HPP
