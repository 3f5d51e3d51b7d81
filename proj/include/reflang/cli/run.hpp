#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reflang/cli/config.hpp"

namespace reflang::cli {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "REFLANG_OUTPUT_ROOT";

enum class Command { simulate, converge, skorohod, verify, occupancy };

Command parse_command(const std::string& name);
std::string to_string(Command command);

/// Exit statuses of run().
enum Status : int {
  kOk = 0,
  kFailure = 1,       // simulation or I/O error
  kUsage = 2,         // bad configuration or flags
  kCheckFailed = 3,   // verify found a violated condition
};

struct RunOptions {
  std::filesystem::path out;  // empty: config output, then $REFLANG_OUTPUT_ROOT, then ./reflang-out
  std::size_t threads = 1;
};

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunResult {
  int status = kOk;
  std::string message;
  std::filesystem::path directory;
  std::vector<OutputFile> outputs;  // data files, in write order (not the manifest)
};

/// Output directory that run() will use.
std::filesystem::path resolve_output(const RunConfig& config, const RunOptions& options);

/// Runs a command and writes its CSV files, optional SVG plots and
/// manifest.json into the output directory. Configuration and simulation
/// failures are reported through the status rather than thrown.
RunResult run(Command command, const RunConfig& config, const RunOptions& options);

/// Tool version string.
const char* version();

}  // namespace reflang::cli
