#include "reflang/cli/run.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "reflang/cli/output.hpp"

#ifndef REFLANG_VERSION
#define REFLANG_VERSION "0.0.0"
#endif

namespace reflang::cli {

namespace fs = std::filesystem;

const char* version() { return REFLANG_VERSION; }

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::simulate;
  if (name == "converge") return Command::converge;
  if (name == "skorohod") return Command::skorohod;
  if (name == "verify") return Command::verify;
  if (name == "occupancy") return Command::occupancy;
  throw std::invalid_argument(fmt::format("unknown command '{}'", name));
}

std::string to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::converge: return "converge";
    case Command::skorohod: return "skorohod";
    case Command::verify: return "verify";
    case Command::occupancy: return "occupancy";
  }
  return "?";
}

fs::path resolve_output(const RunConfig& config, const RunOptions& options) {
  if (!options.out.empty()) return options.out;
  if (!config.output.empty()) return config.output;
  const std::string stem = config.source.empty() ? "run" : config.source.stem().string();
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
    return fs::path(root) / stem;
  }
  return fs::path("reflang-out") / stem;
}

namespace {

std::string timestamp() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

class Writer {
 public:
  Writer(fs::path dir, bool plots) : dir_(std::move(dir)), plots_(plots) {
    fs::create_directories(dir_);
  }

  void file(const std::string& name, const std::string& bytes) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    outputs_.push_back({name, sha256_hex(bytes), bytes.size()});
  }

  void csv(const std::string& name, const CsvTable& table) { file(name, table.text()); }

  void svg(const std::string& name, const std::vector<Series>& series, const PlotSpec& spec) {
    if (plots_) file(name, line_plot_svg(series, spec));
  }

  [[nodiscard]] const fs::path& dir() const { return dir_; }
  [[nodiscard]] std::vector<OutputFile>& outputs() { return outputs_; }

 private:
  fs::path dir_;
  bool plots_;
  std::vector<OutputFile> outputs_;
};

Mode ensemble_mode(RunMode m) {
  switch (m) {
    case RunMode::free: return Mode::free;
    case RunMode::folded: return Mode::folded;
    case RunMode::limit: return Mode::limit;
    default: return Mode::reflected;
  }
}

void write_summary(Writer& w, const EnsembleSummary& sum) {
  CsvTable summary({"t", "q1_mean", "q1_se", "p_sq_mean", "p_sq_se"});
  for (std::size_t k = 0; k < sum.sample_times.size(); ++k) {
    const auto q = estimate_mean(sum.q_marginals[k]);
    summary.cell(sum.sample_times[k]).cell(q.mean).cell(q.se);
    summary.cell(sum.p_sq[k].mean).cell(sum.p_sq[k].se);
    summary.end_row();
  }
  w.csv("summary.csv", summary);

  CsvTable stats({"statistic", "value", "se"});
  auto row = [&](const std::string& name, double v, double se) {
    stats.cell(name).cell(v).cell(se);
    stats.end_row();
  };
  row("n_paths", static_cast<double>(sum.n_paths), 0.0);
  row("sup_mu_p_sq", sum.sup_mu_p_sq.mean, sum.sup_mu_p_sq.se);
  row("mean_events", sum.event_count.mean, sum.event_count.se);
  row("events_p50", sum.event_count_p50, 0.0);
  row("events_p99", sum.event_count_p99, 0.0);
  row("events_max", static_cast<double>(sum.event_count_max), 0.0);
  row("psi_final", sum.psi_final.mean, sum.psi_final.se);
  row("min_origin_sq", sum.min_origin_sq, 0.0);
  row("folded_steps", static_cast<double>(sum.folded_steps), 0.0);
  w.csv("stats.csv", stats);

  CsvTable marg({"path_id", "t", "q1"});
  for (std::size_t i = 0; i < sum.n_paths; ++i) {
    for (std::size_t k = 0; k < sum.sample_times.size(); ++k) {
      marg.cell(i).cell(sum.sample_times[k]).cell(sum.q_marginals[k][i]);
      marg.end_row();
    }
  }
  w.csv("marginals.csv", marg);
}

void simulate(Writer& w, const RunConfig& cfg, std::size_t threads) {
  EnsembleConfig ec = cfg.ensemble(threads);
  ec.mode = ensemble_mode(cfg.mode);
  const auto sum = run_ensemble(ec);
  const int r = cfg.field.dim();

  std::vector<Series> lines;
  if (ec.mode == Mode::limit) {
    for (std::size_t i = 0; i < sum.limit_paths.size(); ++i) {
      const auto& sol = sum.limit_paths[i];
      w.csv(fmt::format("skorohod_path{}.csv", i), skorohod_table(sol));
      Series s{fmt::format("path {}", i), sol.t, {}};
      for (const auto& q : sol.q) s.y.push_back(q[0]);
      lines.push_back(std::move(s));
    }
  } else {
    CsvTable traj(trajectory_header(r));
    CsvTable events(event_header());
    for (std::size_t i = 0; i < sum.trajectories.size(); ++i) {
      append_trajectory(traj, i, sum.trajectories[i]);
      append_events(events, i, sum.trajectories[i]);
      Series s{fmt::format("path {}", i), {}, {}};
      for (const auto& st : sum.trajectories[i].states) {
        s.x.push_back(st.t);
        s.y.push_back(st.q[0]);
      }
      lines.push_back(std::move(s));
    }
    w.csv("trajectories.csv", traj);
    w.csv("events.csv", events);
  }
  write_summary(w, sum);
  if (!lines.empty()) {
    if (lines.size() > 6) lines.resize(6);
    w.svg("trajectories.svg", lines,
          {fmt::format("q1 vs t ({}, mu = {:g})", to_string(ec.mode), cfg.params.mu), "t", "q1"});
  }
}

void converge(Writer& w, const RunConfig& cfg, std::size_t threads) {
  EnsembleConfig ec = cfg.ensemble(threads);
  ec.mode = Mode::reflected;
  ec.keep_paths = 0;
  ConvergenceOptions opts;
  opts.dt_ratio = cfg.dt_ratio;
  opts.bootstrap = cfg.bootstrap;
  opts.reference_paths = cfg.reference_paths;
  const auto table = convergence_study(ec, cfg.mu_list, opts);

  CsvTable csv({"mu", "ks", "ks_se", "w1", "sup_mu_p_sq", "mean_events"});
  CsvTable detail({"mu", "dt", "ks", "ks_se", "w1", "w1_se", "sup_mu_p_sq", "sup_mu_p_sq_se",
                   "mean_events", "mean_events_se", "psi_final", "reference"});
  Series ks{"KS", {}, {}};
  Series w1{"W1", {}, {}};
  for (const auto& row : table.rows) {
    csv.cell(row.mu).cell(row.ks).cell(row.ks_se).cell(row.w1).cell(row.sup_mu_p_sq.mean);
    csv.cell(row.events.mean);
    csv.end_row();
    detail.cell(row.mu).cell(row.dt).cell(row.ks).cell(row.ks_se).cell(row.w1).cell(row.w1_se);
    detail.cell(row.sup_mu_p_sq.mean).cell(row.sup_mu_p_sq.se);
    detail.cell(row.events.mean).cell(row.events.se).cell(row.psi_final.mean);
    detail.cell(std::string(table.analytic_reference ? "analytic" : "limit"));
    detail.end_row();
    ks.x.push_back(row.mu);
    ks.y.push_back(row.ks);
    w1.x.push_back(row.mu);
    w1.y.push_back(row.w1);
  }
  w.csv("convergence.csv", csv);
  w.csv("convergence_detail.csv", detail);
  w.svg("ks_vs_mu.svg", {ks, w1}, {"distance to the reflected limit vs mu", "mu", "distance", true, true});
}

void occupancy(Writer& w, const RunConfig& cfg, std::size_t threads) {
  EnsembleConfig ec = cfg.ensemble(threads);
  ec.mode = Mode::reflected;
  ec.keep_paths = 0;
  const auto res = occupancy_study(ec, cfg.deltas);
  CsvTable csv({"delta", "occupation", "se"});
  Series s{"occupation", {}, {}};
  for (std::size_t k = 0; k < res.deltas.size(); ++k) {
    csv.cell(res.deltas[k]).cell(res.occupation[k].mean).cell(res.occupation[k].se);
    csv.end_row();
    s.x.push_back(res.deltas[k]);
    s.y.push_back(res.occupation[k].mean);
  }
  w.csv("occupancy.csv", csv);
  CsvTable fit({"statistic", "value"});
  fit.cell(std::string("loglog_slope")).cell(res.slope);
  fit.end_row();
  w.csv("occupancy_fit.csv", fit);
  w.svg("occupancy.svg", {s}, {"occupation time vs delta", "delta", "occupation", true, true});
}

CsvTable report_table(const SkorohodReport& rep) {
  CsvTable csv({"check", "passed", "max_violation"});
  auto row = [&](const char* name, bool ok, double v) {
    csv.cell(std::string(name)).cell(std::string(ok ? "true" : "false")).cell(v);
    csv.end_row();
  };
  row("additivity", rep.additivity, rep.max_additivity);
  row("monotonicity", rep.monotonicity, rep.max_monotonicity);
  row("complementarity", rep.complementarity, rep.max_complementarity);
  return csv;
}

fs::path input_path(const RunConfig& cfg) {
  fs::path p(cfg.input);
  if (p.is_relative() && !cfg.source.empty()) p = cfg.source.parent_path() / p;
  return p;
}

bool skorohod(Writer& w, const RunConfig& cfg, std::size_t threads) {
  if (cfg.input.empty()) {
    simulate(w, cfg, threads);
    return true;
  }
  const auto sol = read_skorohod_csv(input_path(cfg));
  w.csv("skorohod.csv", skorohod_table(skorohod_map(sol.t, sol.w)));
  return true;
}

bool verify(Writer& w, const RunConfig& cfg, std::size_t threads) {
  if (!cfg.input.empty()) {
    const auto sol = read_skorohod_csv(input_path(cfg));
    const auto rep = verify_skorohod(sol, std::max(0.0, cfg.tol));
    w.csv("verify.csv", report_table(rep));
    return rep.passed();
  }
  EnsembleConfig ec = cfg.ensemble(threads);
  ec.mode = Mode::reflected;
  const double factor = cfg.tol < 0.0 ? 5.0 : cfg.tol;
  const auto rows = decomposition_study(ec, factor);
  CsvTable csv({"path_id", "residual", "max_abs_p", "additivity", "monotonicity",
                "complementarity"});
  bool ok = true;
  for (const auto& row : rows) {
    csv.cell(row.path).cell(row.residual).cell(row.max_abs_p);
    csv.cell(row.report.max_additivity).cell(row.report.max_monotonicity);
    csv.cell(row.report.max_complementarity);
    csv.end_row();
    ok = ok && row.report.passed();
  }
  w.csv("decomposition.csv", csv);
  return ok;
}

std::string mode_mismatch(Command command, RunMode mode) {
  const bool ok = [&] {
    switch (command) {
      case Command::simulate:
        return mode == RunMode::free || mode == RunMode::reflected || mode == RunMode::folded ||
               mode == RunMode::limit;
      case Command::converge: return mode == RunMode::converge;
      case Command::skorohod: return mode == RunMode::limit;
      case Command::verify: return mode == RunMode::verify;
      case Command::occupancy: return mode == RunMode::occupancy;
    }
    return false;
  }();
  if (ok) return {};
  return fmt::format("command '{}' cannot run a config with mode = \"{}\"", to_string(command),
                     to_string(mode));
}

}  // namespace

RunResult run(Command command, const RunConfig& config, const RunOptions& options) {
  RunResult result;
  if (auto msg = mode_mismatch(command, config.mode); !msg.empty()) {
    result.status = kUsage;
    result.message = msg;
    return result;
  }
  if (options.threads < 1) {
    result.status = kUsage;
    result.message = "--threads must be at least 1";
    return result;
  }
  result.directory = resolve_output(config, options);
  const std::string started = timestamp();
  try {
    Writer w(result.directory, config.plots);
    bool passed = true;
    switch (command) {
      case Command::simulate: simulate(w, config, options.threads); break;
      case Command::converge: converge(w, config, options.threads); break;
      case Command::occupancy: occupancy(w, config, options.threads); break;
      case Command::skorohod: passed = skorohod(w, config, options.threads); break;
      case Command::verify: passed = verify(w, config, options.threads); break;
    }
    result.outputs = w.outputs();

    nlohmann::ordered_json manifest;
    manifest["tool"] = "reflang";
    manifest["version"] = version();
    manifest["command"] = to_string(command);
    manifest["config_file"] = config.source.string();
    nlohmann::ordered_json echo = nlohmann::ordered_json::object();
    for (const auto& [key, value] : config.echo) echo[key] = value;
    manifest["config"] = echo;
    manifest["threads"] = options.threads;
    manifest["started"] = started;
    manifest["finished"] = timestamp();
    manifest["outputs"] = nlohmann::ordered_json::array();
    for (const auto& f : result.outputs) {
      manifest["outputs"].push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    std::ofstream(result.directory / "manifest.json") << manifest.dump(2) << '\n';

    if (!passed) {
      result.status = kCheckFailed;
      result.message = "verification failed";
    }
  } catch (const std::invalid_argument& e) {
    result.status = kUsage;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.status = kFailure;
    result.message = e.what();
  }
  return result;
}

}  // namespace reflang::cli
