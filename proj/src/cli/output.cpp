#include "reflang/cli/output.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace reflang::cli {

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

CsvTable& CsvTable::cell(const std::string& x) {
  if (in_row_ == columns_) throw std::logic_error("csv: too many cells in row");
  if (in_row_++) text_ += ',';
  text_ += x;
  return *this;
}

CsvTable& CsvTable::cell(double x) { return cell(format_double(x)); }
CsvTable& CsvTable::cell(std::size_t x) { return cell(std::to_string(x)); }

void CsvTable::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv: short row");
  text_ += '\n';
  in_row_ = 0;
  ++rows_;
}

std::vector<std::string> trajectory_header(int r) {
  std::vector<std::string> h{"path_id", "t"};
  for (int i = 1; i <= r; ++i) h.push_back(fmt::format("q{}", i));
  for (int i = 1; i <= r; ++i) h.push_back(fmt::format("p{}", i));
  h.emplace_back("psi");
  return h;
}

void append_trajectory(CsvTable& table, std::size_t path_id, const Trajectory& traj) {
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& s = traj.states[n];
    table.cell(path_id).cell(s.t);
    for (int i = 0; i < s.dim(); ++i) table.cell(s.q[i]);
    for (int i = 0; i < s.dim(); ++i) table.cell(s.p[i]);
    table.cell(traj.psi[n]);
    table.end_row();
  }
}

std::vector<std::string> event_header() {
  return {"path_id", "k", "tau", "p1_minus", "psi_increment"};
}

void append_events(CsvTable& table, std::size_t path_id, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.events.size(); ++k) {
    const auto& ev = traj.events[k];
    table.cell(path_id).cell(k).cell(ev.tau).cell(ev.p_minus[0]).cell(ev.psi_increment);
    table.end_row();
  }
}

CsvTable skorohod_table(const SkorohodSolution& sol) {
  const int r = sol.w.empty() ? 1 : static_cast<int>(sol.w[0].size());
  std::vector<std::string> h{"t"};
  for (int i = 1; i <= r; ++i) h.push_back(fmt::format("w{}", i));
  for (int i = 1; i <= r; ++i) h.push_back(fmt::format("q{}", i));
  h.emplace_back("phi1");
  h.emplace_back("tv");
  CsvTable table(h);
  for (std::size_t n = 0; n < sol.size(); ++n) {
    table.cell(sol.t[n]);
    for (int i = 0; i < r; ++i) table.cell(sol.w[n][i]);
    for (int i = 0; i < r; ++i) table.cell(sol.q[n][i]);
    table.cell(sol.phi[n][0]).cell(sol.total_variation[n]);
    table.end_row();
  }
  return table;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

SkorohodSolution read_skorohod_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(fmt::format("{}: empty file", path.string()));
  const auto header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.contains("t") || !col.contains("w1")) {
    throw std::runtime_error(fmt::format("{}: header needs t and w1", path.string()));
  }
  int r = 0;
  while (col.contains(fmt::format("w{}", r + 1))) ++r;
  if (r > kMaxDim) throw std::runtime_error(fmt::format("{}: too many w columns", path.string()));
  bool has_q = col.contains("q1") && col.contains("phi1");
  for (int i = 1; i <= r && has_q; ++i) has_q = col.contains(fmt::format("q{}", i));

  std::vector<double> t;
  std::vector<Vector> w, q, phi;
  std::vector<double> tv;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(
          fmt::format("{}:{}: expected {} fields", path.string(), lineno, header.size()));
    }
    auto num = [&](const std::string& name) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[col.at(name)], &used);
        if (used != cells[col.at(name)].size()) throw std::invalid_argument("trailing text");
        return v;
      } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("{}:{}: bad number in column {}", path.string(),
                                             lineno, name));
      }
    };
    t.push_back(num("t"));
    Vector wv(r), qv(r), pv = Vector::Zero(r);
    for (int i = 0; i < r; ++i) wv[i] = num(fmt::format("w{}", i + 1));
    w.push_back(wv);
    if (has_q) {
      for (int i = 0; i < r; ++i) qv[i] = num(fmt::format("q{}", i + 1));
      pv[0] = num("phi1");
      q.push_back(qv);
      phi.push_back(pv);
      tv.push_back(col.contains("tv") ? num("tv") : pv[0]);
    }
  }
  if (t.empty()) throw std::runtime_error(fmt::format("{}: no rows", path.string()));
  if (!has_q) return skorohod_map(t, w);
  SkorohodSolution sol;
  sol.t = std::move(t);
  sol.w = std::move(w);
  sol.q = std::move(q);
  sol.phi = std::move(phi);
  sol.total_variation = std::move(tv);
  return sol;
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                         "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  [[nodiscard]] double map(double v, double a, double b) const {
    const double x = log ? std::log10(v) : v;
    return a + (x - lo) / (hi - lo) * (b - a);
  }
};

Axis make_axis(const std::vector<Series>& series, bool y, bool log) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : y ? s.y : s.x) {
      if (log && !(v > 0.0)) continue;
      const double x = log ? std::log10(v) : v;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (hi == lo) hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  ax.lo = lo;
  ax.hi = hi;
  return ax;
}

std::vector<double> ticks(const Axis& ax) {
  std::vector<double> out;
  if (ax.log) {
    for (double e = ax.lo; e <= ax.hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
    return out;
  }
  const double span = ax.hi - ax.lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(ax.lo / step) * step; v <= ax.hi + 1e-12; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  const Axis ax = make_axis(series, false, spec.log_x);
  const Axis ay = make_axis(series, true, spec.log_y);
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     num(0.5 * (x0 + x1)), escape(spec.title));
  out += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      num(x0), num(y1), num(x1 - x0), num(y0 - y1));

  for (double v : ticks(ax)) {
    const double x = ax.map(v, x0, x1);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
                       num(x), num(y0), num(y0 + 5));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(x),
                       num(y0 + 18), fmt::format("{:g}", v));
  }
  for (double v : ticks(ay)) {
    const double y = ay.map(v, y0, y1);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
                       num(x0 - 5), num(y), num(x0));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(x0 - 8),
                       num(y + 4), fmt::format("{:g}", v));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     num(0.5 * (x0 + x1)), num(kHeight - 12), escape(spec.x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      num(0.5 * (y0 + y1)), escape(spec.y_label));

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((spec.log_x && !(s.x[i] > 0.0)) || (spec.log_y && !(s.y[i] > 0.0))) continue;
      if (!points.empty()) points += ' ';
      points += num(ax.map(s.x[i], x0, x1)) + "," + num(ay.map(s.y[i], y0, y1));
    }
    const char* color = kColors[k % kColors.size()];
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
                       color, points);
    if (!s.label.empty()) {
      const double ly = y1 + 16 + 16 * static_cast<double>(k);
      out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", num(x1 - 120), num(ly),
                         color, escape(s.label));
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace reflang::cli
