#pragma once

// Experiment configuration: a flat key=value file with one section per
// experiment. Keys before the first section apply to every experiment; keys
// inside [eN] apply to that experiment only. Every key is also accepted as a
// command-line flag (--key value, underscores or dashes).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psido/util.hpp"

namespace psido::harness {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct KeyInfo {
  const char* name;
  const char* help;
};

/// Every recognized key, in echo order.
inline const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys{
      {"dim", "spatial dimension n (1 or 2)"},
      {"half_period", "grid half period L; the domain is [-L, L)^n"},
      {"ladder", "refinement ladder of points per axis, e.g. 64,128,256"},
      {"symbol", "symbol family (see list-symbols)"},
      {"m_offset", "order offset added to the critical order"},
      {"rho", "symbol parameter rho"},
      {"delta", "x-regularity parameter delta (x_miyachi only)"},
      {"x_epsilon", "x-modulation amplitude (x_miyachi only)"},
      {"cutoff_radius", "low-frequency cutoff radius of the oscillatory family"},
      {"p", "Lebesgue exponent"},
      {"r", "exponent r of the weighted estimate, 1 <= r <= 2"},
      {"weight", "weight family: none or power"},
      {"weight_exponent", "power weight exponent a in |x|^a"},
      {"weight_sweep", "power weight exponents for the boundary sweep"},
      {"p_values", "exponents for the unweighted sweep (inf = BMO endpoint)"},
      {"battery", "test battery: standard or modes"},
      {"extras", "adversarial battery members: none or a list of delta,focusing"},
      {"seed", "seed of the random band-limited battery members"},
      {"family", "cube family: dyadic or dense"},
      {"boundary", "cube boundary policy: clip or periodic"},
      {"shell_constant", "Littlewood-Paley constant C > 1"},
      {"contrast_offset", "order offset of the contrast series (0 disables)"},
      {"drift_threshold", "relative drift below which a ladder is BOUNDED"},
      {"growth_threshold", "last/first ratio at or above which a ladder is UNBOUNDED-TREND"},
      {"shells", "shell indices for kernel moments"},
      {"moment_order", "highest kernel moment order"},
      {"slope_tolerance", "tolerance on the zeroth moment slope"},
      {"step_tolerance", "tolerance on each moment-order slope step"},
      {"output_dir", "output directory (overridden by PSIDO_OUTPUT_DIR)"},
  };
  return keys;
}

inline std::map<std::string, std::string> default_values(const std::string& experiment) {
  std::map<std::string, std::string> d{
      {"dim", "1"},
      {"half_period", "3.141592653589793"},
      {"ladder", "64,128,256"},
      {"symbol", "miyachi"},
      {"m_offset", "0"},
      {"rho", "0.5"},
      {"delta", "0"},
      {"x_epsilon", "0.5"},
      {"cutoff_radius", "1"},
      {"p", "2"},
      {"r", "2"},
      {"weight", "none"},
      {"weight_exponent", "0"},
      {"weight_sweep", "-0.5,0,0.5,1.5,2"},
      {"p_values", "1.5,2,4,inf"},
      {"battery", "standard"},
      {"extras", "delta,focusing"},
      {"seed", "1"},
      {"family", "dyadic"},
      {"boundary", "clip"},
      {"shell_constant", "2"},
      {"contrast_offset", "0.3"},
      {"drift_threshold", "0.25"},
      {"growth_threshold", "1.5"},
      {"shells", "2,3,4,5,6"},
      {"moment_order", "2"},
      {"slope_tolerance", "0.3"},
      {"step_tolerance", "0.4"},
      {"output_dir", "psido_out"},
  };
  if (experiment == "e2") {
    d["p"] = "4";
    d["weight"] = "power";
    d["weight_exponent"] = "0.25";
  } else if (experiment == "e3") {
    d["p"] = "4";
    d["contrast_offset"] = "0.2";
  } else if (experiment == "e4") {
    d["ladder"] = "256";
  }
  return d;
}

inline bool known_experiment(const std::string& id) {
  return id == "e1" || id == "e2" || id == "e3" || id == "e4" || id == "e5";
}

inline bool known_key(const std::string& k) {
  for (const auto& info : config_keys())
    if (k == info.name) return true;
  return false;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

}  // namespace detail

/// Resolved configuration: every key has a value. `lines` remembers where a
/// value came from so that validation errors can point at it.
struct ExperimentConfig {
  std::string experiment = "e1";
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;
  std::map<std::string, bool> explicit_keys;

  bool is_set(const std::string& key) const { return explicit_keys.count(key) > 0; }

  const std::string& text(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("unknown key '" + key + "'");
    return it->second;
  }

  int line_of(const std::string& key) const {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  }

  double number(const std::string& key) const {
    try {
      return detail::parse_double(text(key));
    } catch (const std::logic_error&) {
      throw ConfigError("key '" + key + "': expected a number, got '" + text(key) + "'", line_of(key));
    }
  }

  long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || !std::isfinite(v))
      throw ConfigError("key '" + key + "': expected an integer, got '" + text(key) + "'", line_of(key));
    return static_cast<long>(v);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : detail::split(text(key), ',')) {
      try {
        out.push_back(detail::parse_double(item));
      } catch (const std::logic_error&) {
        throw ConfigError("key '" + key + "': expected a list of numbers, got '" + text(key) + "'", line_of(key));
      }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list", line_of(key));
    return out;
  }

  std::vector<std::string> words(const std::string& key) const { return detail::split(text(key), ','); }

  void set(const std::string& key, const std::string& value, int line = 0) {
    if (!known_key(key)) throw ConfigError("unknown key '" + key + "'", line);
    values[key] = detail::trim(value);
    lines[key] = line;
    explicit_keys[key] = true;
  }

  /// Canonical "key=value" lines in key order; hashed for file names.
  std::string canonical() const {
    std::string s = "experiment=" + experiment + "\n";
    for (const auto& [k, v] : values) s += k + "=" + v + "\n";
    return s;
  }
};

inline ExperimentConfig default_config(const std::string& experiment) {
  if (!known_experiment(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");
  ExperimentConfig c;
  c.experiment = experiment;
  c.values = default_values(experiment);
  return c;
}

/// Applies the global section and the [experiment] section of `text`.
inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::string section;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto h = s.find_first_of("#;"); h != std::string::npos) s = s.substr(0, h);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = detail::trim(s.substr(1, s.size() - 2));
      if (!known_experiment(section)) throw ConfigError("unknown section '" + section + "'", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + s + "'", line);
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    if (!known_key(key)) throw ConfigError("unknown key '" + key + "'", line);
    if (value.empty()) throw ConfigError("key '" + key + "' has no value", line);
    if (section.empty() || section == cfg.experiment) cfg.set(key, value, line);
  }
}

inline ExperimentConfig load_config(const std::string& experiment, const std::string& path) {
  ExperimentConfig cfg = default_config(experiment);
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  apply_config_text(cfg, ss.str());
  return cfg;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << fnv1a(cfg.canonical());
  return s.str();
}

}  // namespace psido::harness
