#include "qrf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qrf {

namespace {

enum class KeyKind { Real, Positive, Int, EvenInt, Text };

struct KeySpec {
  const char* name;
  KeyKind kind;
  double def;
  double lo;
  double hi;
  const char* text_def;
};

constexpr double kInf = 1e300;

// grid.<L>.n / grid.<L>.dx default to grid.n / grid.dx unless listed here
const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = {
      {"scenario", KeyKind::Text, 0, 0, 0, ""},
      {"case", KeyKind::Text, 0, 0, 0, "a"},
      {"run.out", KeyKind::Text, 0, 0, 0, "out"},
      {"run.seed", KeyKind::Int, 0, 0, 4294967295.0, nullptr},
      {"grid.n", KeyKind::EvenInt, 256, 4, 4096, nullptr},
      {"grid.dx", KeyKind::Positive, 0.1, 0, kInf, nullptr},
      {"grid.A.n", KeyKind::EvenInt, NAN, 4, 4096, nullptr},
      {"grid.A.dx", KeyKind::Positive, NAN, 0, kInf, nullptr},
      {"grid.B.n", KeyKind::EvenInt, NAN, 4, 4096, nullptr},
      {"grid.B.dx", KeyKind::Positive, NAN, 0, kInf, nullptr},
      {"grid.C.n", KeyKind::EvenInt, NAN, 4, 4096, nullptr},
      {"grid.C.dx", KeyKind::Positive, NAN, 0, kInf, nullptr},
      {"grid.M.n", KeyKind::EvenInt, 64, 4, 4096, nullptr},
      {"grid.M.dx", KeyKind::Positive, 0.3, 0, kInf, nullptr},
      {"constants.hbar", KeyKind::Positive, 1.0, 0, kInf, nullptr},
      {"constants.c", KeyKind::Positive, 137.0, 0, kInf, nullptr},
      {"masses.mA", KeyKind::Positive, 1.0, 0, kInf, nullptr},
      {"masses.mB", KeyKind::Positive, 1.0, 0, kInf, nullptr},
      {"masses.mC", KeyKind::Positive, 1.0, 0, kInf, nullptr},
      {"masses.mM", KeyKind::Positive, 1.0, 0, kInf, nullptr},
      {"state.x0", KeyKind::Real, 2.0, -kInf, kInf, nullptr},
      {"state.p0", KeyKind::Real, 0.0, -kInf, kInf, nullptr},
      {"state.sigma", KeyKind::Positive, 0.5, 0, kInf, nullptr},
      {"state.separation", KeyKind::Positive, 16.0, 0, kInf, nullptr},
      {"state.X", KeyKind::Real, 1.0, -kInf, kInf, nullptr},
      {"state.p1", KeyKind::Real, 2.0, -kInf, kInf, nullptr},
      {"state.p2", KeyKind::Real, -2.0, -kInf, kInf, nullptr},
      {"state.samples", KeyKind::Int, 10, 1, 1000, nullptr},
      {"evolution.t", KeyKind::Real, 1.0, -kInf, kInf, nullptr},
      {"evolution.tau", KeyKind::Real, 0.0, -kInf, kInf, nullptr},
      {"evolution.dt", KeyKind::Positive, 1e-3, 0, 1.0, nullptr},
      {"wep.a1", KeyKind::Real, -1.0, -kInf, kInf, nullptr},
      {"wep.a2", KeyKind::Real, 2.0, -kInf, kInf, nullptr},
      {"wep.a", KeyKind::Real, 1.0, -kInf, kInf, nullptr},
      {"wep.t", KeyKind::Real, 0.5, -kInf, kInf, nullptr},
      {"wep.k", KeyKind::Positive, 0.1, 0, kInf, nullptr},
      {"photon.n", KeyKind::EvenInt, 128, 4, 4096, nullptr},
      {"photon.omega0", KeyKind::Positive, 0.5, 0, kInf, nullptr},
      {"photon.domega", KeyKind::Positive, 0.01, 0, kInf, nullptr},
      {"photon.omega_b", KeyKind::Positive, 1.0, 0, kInf, nullptr},
      {"photon.sigma", KeyKind::Positive, 0.01, 0, kInf, nullptr},
      {"photon.window", KeyKind::Positive, 0.05, 0, kInf, nullptr},
      {"photon.v1", KeyKind::Real, 10.0, -kInf, kInf, nullptr},
      {"photon.v2", KeyKind::Real, -10.0, -kInf, kInf, nullptr},
      {"photon.sigma_p", KeyKind::Positive, 0.5, 0, kInf, nullptr},
      {"measurement.pointer_width", KeyKind::Real, 0.0, 0, kInf, nullptr},
      {"measurement.apparatus_x0", KeyKind::Real, 0.0, -kInf, kInf, nullptr},
      {"measurement.apparatus_sigma", KeyKind::Positive, 0.8, 0, kInf, nullptr},
  };
  return keys;
}

const KeySpec* find_key(const std::string& k) {
  for (const auto& s : registry())
    if (k == s.name) return &s;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// shortest text that parses back to v
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> p)
    : std::runtime_error([&] {
        std::string m = "invalid configuration:";
        for (const auto& s : p) m += "\n  " + s;
        return m;
      }()),
      problems(std::move(p)) {}

double ScenarioConfig::get(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw std::out_of_range("config: no numeric key '" + key + "'");
  return it->second;
}

int ScenarioConfig::get_int(const std::string& key) const { return static_cast<int>(std::lround(get(key))); }

std::string ScenarioConfig::get_string(const std::string& key) const {
  const auto it = strings.find(key);
  if (it == strings.end()) throw std::out_of_range("config: no text key '" + key + "'");
  return it->second;
}

void ScenarioConfig::set(const std::string& key, double v) {
  if (!values.count(key)) throw std::out_of_range("config: no numeric key '" + key + "'");
  values[key] = v;
}

Grid1D ScenarioConfig::grid(const std::string& label) const {
  const std::string nk = "grid." + label + ".n", dk = "grid." + label + ".dx";
  const int n = values.count(nk) ? get_int(nk) : get_int("grid.n");
  const double dx = values.count(dk) ? get(dk) : get("grid.dx");
  return Grid1D(n, dx, hbar());
}

double ScenarioConfig::mass(const std::string& label) const { return get("masses.m" + label); }

std::uint64_t ScenarioConfig::seed() const { return static_cast<std::uint64_t>(std::llround(get("run.seed"))); }

std::string ScenarioConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : strings)
    if (!v.empty()) os << k << " = " << v << "\n";
  for (const auto& [k, v] : values) os << k << " = " << fmt(v) << "\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : registry()) {
    if (s.kind == KeyKind::Text)
      out.emplace_back(s.name, s.text_def);
    else
      out.emplace_back(s.name, std::isnan(s.def) ? "inherits grid.*" : fmt(s.def));
  }
  return out;
}

ScenarioConfig default_config() { return validate_config(""); }

ScenarioConfig validate_config(const std::string& text) {
  ScenarioConfig cfg;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  std::map<std::string, std::pair<double, int>> raw;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        problems.push_back("line " + std::to_string(lineno) + ": malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    const KeySpec* spec = find_key(key);
    if (!spec) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    if (cfg.set_keys.count(key)) {
      problems.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    cfg.set_keys.insert(key);
    if (spec->kind == KeyKind::Text) {
      if (val.empty()) problems.push_back("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
      cfg.strings[key] = val;
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != val.size() || !std::isfinite(v)) {
      problems.push_back("line " + std::to_string(lineno) + ": '" + key + "' needs a number, got '" + val + "'");
      continue;
    }
    raw[key] = {v, lineno};
  }
  for (const auto& s : registry()) {
    if (s.kind == KeyKind::Text) {
      if (!cfg.strings.count(s.name)) cfg.strings[s.name] = s.text_def;
      continue;
    }
    const auto it = raw.find(s.name);
    if (it == raw.end()) {
      if (!std::isnan(s.def)) cfg.values[s.name] = s.def;
      continue;
    }
    const double v = it->second.first;
    const std::string where = "line " + std::to_string(it->second.second) + ": " + s.name;
    bool ok = true;
    if (s.kind == KeyKind::Int || s.kind == KeyKind::EvenInt) {
      if (v != std::floor(v)) {
        problems.push_back(where + " must be an integer (got " + fmt(v) + ")");
        ok = false;
      } else if (s.kind == KeyKind::EvenInt && std::fmod(v, 2.0) != 0.0) {
        problems.push_back(where + ": n must be even (got " + fmt(v) + ")");
        ok = false;
      }
    }
    if (s.kind == KeyKind::Positive && !(v > 0.0)) {
      problems.push_back(where + " must be positive (got " + fmt(v) + ")");
      ok = false;
    } else if (ok && (v < s.lo || v > s.hi)) {
      problems.push_back(where + " out of range [" + fmt(s.lo) + ", " + fmt(s.hi) + "] (got " + fmt(v) + ")");
      ok = false;
    }
    if (ok) cfg.values[s.name] = v;
  }
  if (!problems.empty()) throw ConfigError(problems);
  // per-system grids inherit the global grid
  for (const char* l : {"A", "B", "C"}) {
    const std::string nk = std::string("grid.") + l + ".n", dk = std::string("grid.") + l + ".dx";
    if (!cfg.values.count(nk)) cfg.values[nk] = cfg.values["grid.n"];
    if (!cfg.values.count(dk)) cfg.values[dk] = cfg.values["grid.dx"];
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << f.rdbuf();
  return validate_config(ss.str());
}

}  // namespace qrf
