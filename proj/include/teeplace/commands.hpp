// Subcommands of the `teeplace` tool. Each returns the process exit code and
// writes to the given streams, so tests can run them in-process.

#ifndef TEEPLACE_COMMANDS_HPP
#define TEEPLACE_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace teeplace {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInfeasible = 3;

inline constexpr int64_t kDefaultChunkSize = 1000;

enum class OutputFormat { kText, kJson, kCsv };

struct PolicyFlags {
  int64_t delta = 20;
  std::string mode = "c2";
  double crypto_ms = 2.5;
};

struct ShapesOptions {
  std::string profile_path;
  /// Device whose times drive the cumulative fraction column.
  std::optional<std::string> device;
  /// Used to pick the first trusted device when `device` is unset.
  std::optional<std::string> resources_path;
  int64_t delta = 20;
  OutputFormat format = OutputFormat::kText;
};

struct PlanOptions {
  std::string profile_path;
  std::string resources_path;
  std::optional<std::string> tree_path;
  int64_t n = kDefaultChunkSize;
  PolicyFlags policy;
  OutputFormat format = OutputFormat::kText;
  int threads = 1;
};

struct SimulateOptions {
  std::string profile_path;
  std::string resources_path;
  std::string placement_path;
  /// Falls back to the "n" field of the placement document, then the default.
  std::optional<int64_t> n;
  PolicyFlags policy;
  std::optional<std::string> trace_path;
  bool allow_violating = false;
  OutputFormat format = OutputFormat::kText;
};

struct ReportOptions {
  std::string profile_path;
  std::string resources_path;
  std::optional<std::string> tree_path;
  int64_t n = kDefaultChunkSize;
  PolicyFlags policy;
  OutputFormat format = OutputFormat::kText;
};

int cmd_shapes(const ShapesOptions& options, std::ostream& out,
               std::ostream& err);
int cmd_plan(const PlanOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& options, std::ostream& out,
                 std::ostream& err);
int cmd_report(const ReportOptions& options, std::ostream& out,
               std::ostream& err);

}  // namespace teeplace

#endif  // TEEPLACE_COMMANDS_HPP
