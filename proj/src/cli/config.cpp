#include "reflang/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

namespace reflang::cli {

ConfigError::ConfigError(const std::string& origin, int line, const std::string& what)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", origin, line, what)
                                  : fmt::format("{}: {}", origin, what)),
      line_(line) {}

namespace {

const std::vector<std::pair<RunMode, std::string>>& mode_names() {
  static const std::vector<std::pair<RunMode, std::string>> names{
      {RunMode::free, "free"},           {RunMode::reflected, "reflected"},
      {RunMode::folded, "folded"},       {RunMode::limit, "limit"},
      {RunMode::converge, "converge"},   {RunMode::occupancy, "occupancy"},
      {RunMode::verify, "verify"},
  };
  return names;
}

// One value of the flat TOML subset: string, boolean, number or array of
// numbers. Integers keep their exact text so 64-bit seeds survive.
struct Value {
  enum class Kind { string, boolean, number, array } kind = Kind::number;
  std::string text;  // source text of the value
  std::string str;
  bool boolean = false;
  double number = 0.0;
  bool integer = false;
  std::vector<double> array;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

class Parser {
 public:
  Parser(std::string origin) : origin_(std::move(origin)) {}

  std::map<std::string, Value> parse(const std::string& text) {
    std::map<std::string, Value> out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string_view s = trim(strip_comment(raw));
      if (s.empty()) continue;
      if (s.front() == '[') fail(line, "tables are not supported; use flat keys");
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) fail(line, "expected key = value");
      const std::string key(trim(s.substr(0, eq)));
      if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
          })) {
        fail(line, fmt::format("bad key '{}'", key));
      }
      std::string value(trim(s.substr(eq + 1)));
      const int start = line;
      // Arrays may continue over several lines.
      if (!value.empty() && value.front() == '[') {
        while (value.find(']') == std::string::npos && std::getline(in, raw)) {
          ++line;
          value += ' ';
          value += trim(strip_comment(raw));
        }
      }
      if (out.contains(key)) fail(start, fmt::format("duplicate key '{}'", key));
      Value v = parse_value(value, start);
      v.text = value;
      out.emplace(key, std::move(v));
    }
    return out;
  }

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ConfigError(origin_, line, what);
  }

 private:
  Value parse_value(std::string_view s, int line) const {
    Value v;
    v.line = line;
    if (s.empty()) fail(line, "missing value");
    if (s.front() == '"') {
      if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
      v.kind = Value::Kind::string;
      for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) {
          const char c = s[++i];
          switch (c) {
            case 'n': v.str += '\n'; break;
            case 't': v.str += '\t'; break;
            case '"': v.str += '"'; break;
            case '\\': v.str += '\\'; break;
            default: fail(line, fmt::format("unknown escape \\{}", c));
          }
        } else if (s[i] == '"') {
          fail(line, "unexpected quote inside string");
        } else {
          v.str += s[i];
        }
      }
      return v;
    }
    if (s == "true" || s == "false") {
      v.kind = Value::Kind::boolean;
      v.boolean = s == "true";
      return v;
    }
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated array");
      v.kind = Value::Kind::array;
      std::string_view body = trim(s.substr(1, s.size() - 2));
      while (!body.empty()) {
        const auto comma = body.find(',');
        const auto item = trim(body.substr(0, comma));
        if (item.empty()) {
          if (comma == std::string_view::npos) break;
          fail(line, "empty array element");
        }
        v.array.push_back(parse_number(item, line).number);
        if (comma == std::string_view::npos) break;
        body = trim(body.substr(comma + 1));
      }
      return v;
    }
    return parse_number(s, line);
  }

  Value parse_number(std::string_view s, int line) const {
    Value v;
    v.line = line;
    v.kind = Value::Kind::number;
    std::string clean;
    for (char c : s) {
      if (c != '_') clean += c;
    }
    if (!clean.empty() && clean.front() == '+') clean.erase(0, 1);
    const bool integer = clean.find_first_of(".eE") == std::string::npos;
    const char* first = clean.data();
    const char* last = clean.data() + clean.size();
    std::from_chars_result res{};
    if (integer) {
      std::int64_t i = 0;
      res = std::from_chars(first, last, i);
      if (res.ec == std::errc() && res.ptr == last) {
        v.integer = true;
        v.number = static_cast<double>(i);
        return v;
      }
    }
    res = std::from_chars(first, last, v.number);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v.number)) {
      fail(line, fmt::format("'{}' is not a number", s));
    }
    return v;
  }

  std::string origin_;
};

class Reader {
 public:
  Reader(std::map<std::string, Value> values, std::string origin)
      : values_(std::move(values)), origin_(std::move(origin)) {}

  [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }

  const Value& get(const std::string& key, Value::Kind kind, const char* what) {
    const auto& v = values_.at(key);
    used_.push_back(key);
    if (v.kind != kind) fail(v.line, fmt::format("'{}' must be {}", key, what));
    return v;
  }

  std::optional<std::string> string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get(key, Value::Kind::string, "a string").str;
  }
  std::optional<bool> boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get(key, Value::Kind::boolean, "true or false").boolean;
  }
  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get(key, Value::Kind::number, "a number").number;
  }
  std::optional<std::int64_t> integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& v = get(key, Value::Kind::number, "an integer");
    if (!v.integer) fail(v.line, fmt::format("'{}' must be an integer", key));
    std::int64_t i = 0;
    std::string clean;
    for (char c : v.text) {
      if (c != '_' && c != '+') clean += c;
    }
    std::from_chars(clean.data(), clean.data() + clean.size(), i);
    return i;
  }
  std::optional<std::vector<double>> array(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& v = values_.at(key);
    if (v.kind == Value::Kind::number) {
      used_.push_back(key);
      return std::vector<double>{v.number};
    }
    return get(key, Value::Kind::array, "an array of numbers").array;
  }

  [[nodiscard]] int line(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ConfigError(origin_, line, what);
  }

  void reject_unknown() const {
    const auto& known = config_keys();
    for (const auto& [key, v] : values_) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        fail(v.line, fmt::format("unknown key '{}'", key));
      }
    }
  }

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<int, std::pair<std::string, std::string>>> rows;
    for (const auto& [key, v] : values_) rows.push_back({v.line, {key, v.text}});
    std::sort(rows.begin(), rows.end());
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& r : rows) out.push_back(std::move(r.second));
    return out;
  }

 private:
  std::map<std::string, Value> values_;
  std::vector<std::string> used_;
  std::string origin_;
};

std::size_t count(Reader& rd, const std::string& key, std::int64_t lo) {
  const auto v = rd.integer(key);
  if (*v < lo) rd.fail(rd.line(key), fmt::format("'{}' must be at least {}", key, lo));
  return static_cast<std::size_t>(*v);
}

}  // namespace

RunMode parse_mode(const std::string& name) {
  for (const auto& [mode, n] : mode_names()) {
    if (n == name) return mode;
  }
  throw std::invalid_argument(fmt::format("unknown mode '{}'", name));
}

std::string to_string(RunMode mode) {
  for (const auto& [m, n] : mode_names()) {
    if (m == mode) return n;
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "mode",   "field",      "r",         "c",          "A",          "a",
      "sigma",  "mu",         "dt",        "T",          "seed",       "n_paths",
      "q0",     "p0",         "scheme",    "sample_times", "keep_paths", "mu_list",
      "dt_ratio", "bootstrap", "reference_paths", "deltas", "input",   "tol",
      "output", "plots",
  };
  return keys;
}

PhaseState RunConfig::initial_state() const {
  Vector q(static_cast<Eigen::Index>(q0.size()));
  Vector p(static_cast<Eigen::Index>(p0.size()));
  for (std::size_t i = 0; i < q0.size(); ++i) q[static_cast<Eigen::Index>(i)] = q0[i];
  for (std::size_t i = 0; i < p0.size(); ++i) p[static_cast<Eigen::Index>(i)] = p0[i];
  return make_state(q, p);
}

EnsembleConfig RunConfig::ensemble(std::size_t threads) const {
  EnsembleConfig c;
  switch (mode) {
    case RunMode::free: c.mode = Mode::free; break;
    case RunMode::folded: c.mode = Mode::folded; break;
    case RunMode::limit: c.mode = Mode::limit; break;
    default: c.mode = Mode::reflected; break;
  }
  c.field = field;
  c.init = initial_state();
  c.params = params;
  c.scheme = scheme;
  c.sample_times = sample_times;
  c.threads = threads;
  c.keep_paths = keep_paths;
  return c;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  Parser parser(origin);
  Reader rd(parser.parse(text), origin);
  rd.reject_unknown();

  RunConfig cfg;
  cfg.echo = rd.echo();

  if (auto m = rd.string("mode")) {
    try {
      cfg.mode = parse_mode(*m);
    } catch (const std::invalid_argument& e) {
      rd.fail(rd.line("mode"), e.what());
    }
  } else {
    rd.fail(0, "missing required key 'mode'");
  }

  cfg.field_name = rd.string("field").value_or("zero-drift-identity");
  const auto r = rd.has("r") ? count(rd, "r", 1) : std::size_t{1};
  cfg.field_params["r"] = {static_cast<double>(r)};
  for (const char* key : {"c", "A", "a", "sigma"}) {
    if (auto v = rd.array(key)) cfg.field_params[key] = *v;
  }
  try {
    cfg.field = make_field(cfg.field_name, cfg.field_params);
  } catch (const std::invalid_argument& e) {
    rd.fail(rd.line("field"), e.what());
  }

  if (!rd.has("seed")) rd.fail(0, "missing required key 'seed'");
  {
    const auto seed = rd.integer("seed");
    if (*seed < 0) rd.fail(rd.line("seed"), "'seed' must be nonnegative");
    cfg.params.seed = static_cast<std::uint64_t>(*seed);
  }
  cfg.params.mu = rd.number("mu").value_or(cfg.params.mu);
  cfg.params.dt = rd.number("dt").value_or(cfg.params.dt);
  cfg.params.T = rd.number("T").value_or(cfg.params.T);
  if (rd.has("n_paths")) cfg.params.n_paths = count(rd, "n_paths", 1);

  cfg.q0 = rd.array("q0").value_or(std::vector<double>(r, 0.0));
  cfg.p0 = rd.array("p0").value_or(std::vector<double>(r, 0.0));
  if (cfg.q0.size() != r) rd.fail(rd.line("q0"), fmt::format("'q0' needs {} entries", r));
  if (cfg.p0.size() != r) rd.fail(rd.line("p0"), fmt::format("'p0' needs {} entries", r));

  if (auto s = rd.string("scheme")) {
    if (*s == "exponential") {
      cfg.scheme = Scheme::exponential;
    } else if (*s == "euler") {
      cfg.scheme = Scheme::euler;
    } else {
      rd.fail(rd.line("scheme"), fmt::format("unknown scheme '{}'", *s));
    }
  }
  cfg.sample_times = rd.array("sample_times").value_or(std::vector<double>{});
  if (rd.has("keep_paths")) cfg.keep_paths = count(rd, "keep_paths", 0);
  cfg.mu_list = rd.array("mu_list").value_or(std::vector<double>{});
  cfg.dt_ratio = rd.number("dt_ratio").value_or(cfg.dt_ratio);
  if (rd.has("bootstrap")) cfg.bootstrap = static_cast<int>(count(rd, "bootstrap", 2));
  if (rd.has("reference_paths")) cfg.reference_paths = count(rd, "reference_paths", 1);
  cfg.deltas = rd.array("deltas").value_or(cfg.deltas);
  cfg.input = rd.string("input").value_or("");
  cfg.tol = rd.number("tol").value_or(cfg.tol);
  cfg.output = rd.string("output").value_or("");
  cfg.plots = rd.boolean("plots").value_or(true);

  // Validation, naming the offending key.
  auto check = [&](bool ok, const std::string& key, const std::string& what) {
    if (!ok) rd.fail(rd.line(key), fmt::format("'{}': {}", key, what));
  };
  check(cfg.params.mu > 0.0, "mu", "must be positive");
  check(cfg.params.T > 0.0, "T", "must be positive");
  check(cfg.params.dt > 0.0, "dt", "must be positive");
  if (cfg.mode != RunMode::converge && cfg.input.empty()) {
    try {
      (void)cfg.params.steps();
    } catch (const std::invalid_argument& e) {
      rd.fail(rd.line("dt"), fmt::format("'dt': {}", e.what()));
    }
  }
  if (cfg.scheme == Scheme::euler && cfg.mode != RunMode::converge &&
      cfg.mode != RunMode::limit) {
    check(cfg.params.dt <= cfg.params.mu / 10.0, "dt", "euler scheme needs dt <= mu / 10");
  }
  if (cfg.mode == RunMode::converge) {
    check(!cfg.mu_list.empty(), "mu_list", "required in converge mode");
    for (std::size_t i = 0; i < cfg.mu_list.size(); ++i) {
      check(cfg.mu_list[i] > 0.0, "mu_list", "entries must be positive");
      if (i > 0) check(cfg.mu_list[i] < cfg.mu_list[i - 1], "mu_list", "must be strictly decreasing");
    }
    check(cfg.dt_ratio >= 1.0, "dt_ratio", "must be at least 1");
    if (!cfg.field.zero_drift() || !cfg.field.identity_diffusion()) {
      check(cfg.field.identity_diffusion(), "sigma",
            "a simulated limit reference needs the identity diffusion");
    }
  }
  const bool mapped_input = !cfg.input.empty();
  const bool reflected_start =
      cfg.mode != RunMode::free && cfg.mode != RunMode::limit && !mapped_input;
  if (reflected_start) {
    check(cfg.q0[0] >= 0.0, "q0", "first component must be >= 0");
    check(cfg.q0[0] != 0.0 || cfg.p0[0] != 0.0, "p0",
          "q0[0] = p0[0] = 0 is the phase-space origin");
  }
  if (cfg.mode == RunMode::limit) check(cfg.q0[0] >= 0.0, "q0", "first component must be >= 0");
  check(cfg.input.empty() || cfg.mode == RunMode::verify || cfg.mode == RunMode::limit, "input",
        "only verify and limit (skorohod command) read an input path");
  if (cfg.mode == RunMode::folded || cfg.mode == RunMode::limit) {
    check(cfg.field.identity_diffusion(), "sigma", "this mode needs the identity diffusion");
  }
  for (double t : cfg.sample_times) {
    check(t >= 0.0 && t <= cfg.params.T, "sample_times", "entries must lie in [0, T]");
  }
  if (cfg.mode == RunMode::occupancy) {
    check(cfg.deltas.size() >= 2, "deltas", "needs at least two entries");
    for (double d : cfg.deltas) check(d > 0.0 && d < 1.0, "deltas", "entries must lie in (0, 1)");
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config_text(ss.str(), path.string());
  cfg.source = path;
  return cfg;
}

}  // namespace reflang::cli
