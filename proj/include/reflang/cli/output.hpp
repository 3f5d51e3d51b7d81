#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reflang/integrator.hpp"
#include "reflang/skorohod.hpp"

namespace reflang::cli {

/// 17 significant digits, so a double survives a text round trip.
std::string format_double(double x);

/// Accumulates a CSV table in memory; write() emits it in one go.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& cell(double x);
  CsvTable& cell(std::size_t x);
  CsvTable& cell(const std::string& x);
  void end_row();

  [[nodiscard]] const std::string& text() const { return text_; }
  [[nodiscard]] std::size_t rows() const { return rows_; }

 private:
  std::string text_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
};

/// Trajectory rows (path_id, t, q1..qr, p1..pr, psi).
void append_trajectory(CsvTable& table, std::size_t path_id, const Trajectory& traj);
std::vector<std::string> trajectory_header(int r);

/// Event rows (path_id, k, tau, p1_minus, psi_increment).
void append_events(CsvTable& table, std::size_t path_id, const Trajectory& traj);
std::vector<std::string> event_header();

/// (t, w1..wr, q1..qr, phi1, tv).
CsvTable skorohod_table(const SkorohodSolution& sol);

/// Reads a CSV with a header containing t and w1..wr, and optionally
/// q1..qr, phi1 and tv. Without q columns the map is applied to w.
SkorohodSolution read_skorohod_csv(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Static SVG line plot of one or more series.
std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec);

}  // namespace reflang::cli
