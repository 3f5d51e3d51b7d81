#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "reflang/cli/run.hpp"

using namespace reflang::cli;

int main(int argc, char** argv) {
  CLI::App app{"Langevin dynamics with elastic reflection at a hyperplane: simulation, "
               "small-mass convergence studies and Skorohod-map checks."};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::string config_path;
  RunOptions options;
  std::string out;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "run a free, reflected, folded or limit ensemble"},
      {"converge", "distance of q1(T) to the reflected limit over a mu list"},
      {"skorohod", "apply the Skorohod map to an input path, or simulate the limit SDE"},
      {"verify", "check Skorohod conditions on a CSV or on decomposed reflected paths"},
      {"occupancy", "time spent near the phase-space origin for shrinking boxes"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "TOML configuration file")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--out", out,
                    fmt::format("output directory (default: config 'output', then ${}/<config "
                                "name>, then reflang-out/<config name>)",
                                kOutputRootEnv));
    sub->add_option("--threads", options.threads, "worker threads")
        ->check(CLI::PositiveNumber)
        ->default_val(1);
  }

  CLI11_PARSE(app, argc, argv);

  const auto* chosen = app.get_subcommands().front();
  options.out = out;
  RunConfig config;
  try {
    config = parse_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "reflang: " << e.what() << '\n';
    return kUsage;
  }

  const auto result = run(parse_command(chosen->get_name()), config, options);
  if (result.status != kOk) {
    std::cerr << "reflang: " << result.message << '\n';
    if (result.status != kCheckFailed) return result.status;
  }
  for (const auto& f : result.outputs) {
    std::cout << (result.directory / f.name).string() << "  " << f.sha256 << '\n';
  }
  if (!result.directory.empty() && result.status != kUsage) {
    std::cout << (result.directory / "manifest.json").string() << '\n';
  }
  return result.status;
}
