#include "slabflow/config.hpp"

#include "slabflow/error.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace slabflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_integer(std::string_view text, const std::string& key) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::string parse_string(std::string_view text) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
  return std::string(text);
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

InflowProfile parse_profile(std::string_view v, const std::string& key) {
  if (v == "ramp") return InflowProfile::Ramp;
  if (v == "step") return InflowProfile::Step;
  if (v == "cosine") return InflowProfile::Cosine;
  throw ConfigError(key, "expected ramp, step or cosine");
}

PressureGuess parse_guess(std::string_view v, const std::string& key) {
  if (v == "verbatim") return PressureGuess::Verbatim;
  if (v == "complement") return PressureGuess::Complement;
  throw ConfigError(key, "expected verbatim or complement");
}

SnapshotMode parse_snapshots(std::string_view v, const std::string& key) {
  if (v == "none") return SnapshotMode::None;
  if (v == "final") return SnapshotMode::Final;
  if (v == "all") return SnapshotMode::All;
  throw ConfigError(key, "expected none, final or all");
}

}  // namespace

const char* to_string(InflowProfile p) {
  switch (p) {
    case InflowProfile::Ramp:
      return "ramp";
    case InflowProfile::Step:
      return "step";
    case InflowProfile::Cosine:
      return "cosine";
  }
  return "?";
}

const char* to_string(PressureGuess g) { return g == PressureGuess::Verbatim ? "verbatim" : "complement"; }

const char* to_string(SnapshotMode m) {
  switch (m) {
    case SnapshotMode::None:
      return "none";
    case SnapshotMode::Final:
      return "final";
    case SnapshotMode::All:
      return "all";
  }
  return "?";
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double parse_number(std::string_view text, const std::string& key) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "sigma",  "dt",       "xi",     "q",         "t_final", "v_char",    "h0",
      "iters_per_slab", "h_min", "h_max", "l_low", "l_high", "max_sweeps", "profile",
      "p_init", "out",      "snapshots", "seed",   "threads"};
  return keys;
}

void set_config_value(SimConfig& c, const std::string& key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "sigma") c.sigma = parse_number(v, key);
  else if (key == "dt") c.dt = parse_number(v, key);
  else if (key == "xi") c.xi = parse_number(v, key);
  else if (key == "q") c.q = parse_number(v, key);
  else if (key == "t_final") c.t_final = parse_number(v, key);
  else if (key == "v_char") c.v_char = parse_number(v, key);
  else if (key == "h0") c.h0 = parse_number(v, key);
  else if (key == "iters_per_slab") c.iters_per_slab = parse_integer<int>(v, key);
  else if (key == "h_min") c.h_min = parse_number(v, key);
  else if (key == "h_max") c.h_max = parse_number(v, key);
  else if (key == "l_low") c.l_low = parse_number(v, key);
  else if (key == "l_high") c.l_high = parse_number(v, key);
  else if (key == "max_sweeps") c.max_sweeps = parse_integer<int>(v, key);
  else if (key == "profile") c.profile = parse_profile(parse_string(v), key);
  else if (key == "p_init") c.p_init = parse_guess(parse_string(v), key);
  else if (key == "out") c.out = parse_string(v);
  else if (key == "snapshots") c.snapshots = parse_snapshots(parse_string(v), key);
  else if (key == "seed") c.seed = parse_integer<std::uint64_t>(v, key);
  else if (key == "threads") c.threads = parse_integer<int>(v, key);
  else throw ConfigError(key, "unknown configuration key");
}

std::string get_config_value(const SimConfig& c, const std::string& key) {
  if (key == "sigma") return c.sigma ? format_number(*c.sigma) : "";
  if (key == "dt") return format_number(c.dt);
  if (key == "xi") return format_number(c.xi);
  if (key == "q") return format_number(c.q);
  if (key == "t_final") return format_number(c.t_final);
  if (key == "v_char") return format_number(c.v_char);
  if (key == "h0") return format_number(c.h0);
  if (key == "iters_per_slab") return std::to_string(c.iters_per_slab);
  if (key == "h_min") return format_number(c.h_min);
  if (key == "h_max") return format_number(c.h_max);
  if (key == "l_low") return format_number(c.l_low);
  if (key == "l_high") return format_number(c.l_high);
  if (key == "max_sweeps") return std::to_string(c.max_sweeps);
  if (key == "profile") return quote(to_string(c.profile));
  if (key == "p_init") return quote(to_string(c.p_init));
  if (key == "out") return quote(c.out);
  if (key == "snapshots") return quote(to_string(c.snapshots));
  if (key == "seed") return std::to_string(c.seed);
  if (key == "threads") return std::to_string(c.threads);
  throw ConfigError(key, "unknown configuration key");
}

SimConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  SimConfig c;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quotes = !in_quotes;
      if (line[i] == '#' && !in_quotes) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) throw ConfigError(key, "repeated key");
    set_config_value(c, key, line.substr(eq + 1));
  }
  for (const auto& [key, value] : overrides) set_config_value(c, key, value);
  c.validate();
  return c;
}

SimConfig parse_config_file(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string serialize_config(const SimConfig& c) {
  std::string out;
  for (const auto& key : config_keys()) {
    if (key == "sigma" && !c.sigma) continue;
    out += key + " = " + get_config_value(c, key) + "\n";
  }
  return out;
}

}  // namespace slabflow
