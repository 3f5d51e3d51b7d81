#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reflang/ensemble.hpp"

namespace reflang::cli {

/// Syntax error in a configuration file; line() is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, const std::string& what);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

enum class RunMode { free, reflected, folded, limit, converge, occupancy, verify };

RunMode parse_mode(const std::string& name);
std::string to_string(RunMode mode);

/// Everything a run needs. Built only through parse_config / parse_config_text,
/// which validate it.
struct RunConfig {
  RunMode mode = RunMode::reflected;
  std::string field_name;
  ParamMap field_params;
  FieldSpec field;
  SimParams params;
  std::vector<double> q0;
  std::vector<double> p0;
  Scheme scheme = Scheme::exponential;
  std::vector<double> sample_times;
  std::size_t keep_paths = 1;

  // converge
  std::vector<double> mu_list;
  double dt_ratio = 20.0;
  int bootstrap = 200;
  std::size_t reference_paths = 50'000;

  // occupancy
  std::vector<double> deltas{0.4, 0.2, 0.1};

  // verify / skorohod: a CSV path (t, w1..wr[, ...]) resolved against the
  // config file's directory; empty means simulate.
  std::string input;
  double tol = -1.0;  // negative: 0 for mapped input, 5 dt max|p| for decompositions

  std::string output;  // output directory; overridden by --out
  bool plots = true;

  /// Key/value pairs as written in the file, in file order.
  std::vector<std::pair<std::string, std::string>> echo;
  std::filesystem::path source;

  [[nodiscard]] PhaseState initial_state() const;
  [[nodiscard]] EnsembleConfig ensemble(std::size_t threads) const;
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Keys accepted in a configuration file.
const std::vector<std::string>& config_keys();

}  // namespace reflang::cli
