#pragma once

// Flat `key = value` benchmark configuration. Lists are comma-separated,
// `#` starts a comment, unknown keys are rejected. See configs/paper_grid.cfg.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pairedtest/bench.hpp"
#include "pairedtest/error.hpp"

namespace pairedtest {

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct BenchConfig {
  std::vector<int> n{30};
  std::vector<int> d{10, 20, 30, 60};
  std::vector<double> std{1.0, 2.0};
  double rho = 0.5;
  double shifted_fraction = 0.10;
  std::vector<double> shifts = equispaced(11);
  int trials = 200;
  double alpha = 0.05;
  std::vector<BenchMethod> methods{BenchMethod::Mwsr, BenchMethod::MwsrRaw, BenchMethod::MtWsr,
                                   BenchMethod::MtTTest, BenchMethod::Ht2};
  std::uint64_t seed = 20230101;
  bool record_runtime = false;

  /// `points` values i / (points - 1) on [0, 1].
  static std::vector<double> equispaced(int points) {
    std::vector<double> v;
    if (points == 1) return {0.0};
    for (int i = 0; i < points; ++i) v.push_back(static_cast<double>(i) / (points - 1));
    return v;
  }

  /// Cartesian product n x d x std, in that nesting order.
  std::vector<ScenarioConfig> scenarios() const {
    std::vector<ScenarioConfig> out;
    for (int nn : n)
      for (int dd : d)
        for (double s : std) {
          ScenarioConfig c;
          c.n = nn;
          c.d = dd;
          c.std = s;
          c.rho = rho;
          c.shifted_fraction = shifted_fraction;
          out.push_back(c);
        }
    return out;
  }
};

namespace detail {

inline std::string cfg_trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> cfg_split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(cfg_trim(item));
  return out;
}

template <class T>
T cfg_number(const std::string& text, const std::string& where) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != e)
    throw ConfigError(where + ": '" + text + "' is not a valid number");
  return v;
}

template <class T>
std::vector<T> cfg_list(const std::string& text, const std::string& where) {
  std::vector<T> out;
  for (const auto& item : cfg_split(text)) out.push_back(cfg_number<T>(item, where));
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

}  // namespace detail

inline BenchConfig parse_bench_config(std::istream& in, const std::string& source = "config") {
  BenchConfig cfg;
  std::set<std::string> seen;
  bool have_shifts = false, have_points = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::cfg_trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::cfg_trim(line.substr(0, eq));
    const std::string value = detail::cfg_trim(line.substr(eq + 1));
    const std::string where = source + ":" + std::to_string(line_no) + ": key '" + key + "'";
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key");

    if (key == "n") {
      cfg.n = detail::cfg_list<int>(value, where);
    } else if (key == "d") {
      cfg.d = detail::cfg_list<int>(value, where);
    } else if (key == "std") {
      cfg.std = detail::cfg_list<double>(value, where);
    } else if (key == "rho") {
      cfg.rho = detail::cfg_number<double>(value, where);
    } else if (key == "shifted_fraction") {
      cfg.shifted_fraction = detail::cfg_number<double>(value, where);
    } else if (key == "shifts") {
      cfg.shifts = detail::cfg_list<double>(value, where);
      have_shifts = true;
    } else if (key == "shift_points") {
      const int points = detail::cfg_number<int>(value, where);
      if (points < 1) throw ConfigError(where + ": must be >= 1");
      cfg.shifts = BenchConfig::equispaced(points);
      have_points = true;
    } else if (key == "trials") {
      cfg.trials = detail::cfg_number<int>(value, where);
      if (cfg.trials < 1) throw ConfigError(where + ": must be >= 1");
    } else if (key == "alpha") {
      cfg.alpha = detail::cfg_number<double>(value, where);
      if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError(where + ": must lie in (0, 1)");
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& name : detail::cfg_split(value)) {
        const auto m = parse_bench_method(name);
        if (!m) throw ConfigError(where + ": unknown method '" + name + "'");
        cfg.methods.push_back(*m);
      }
      if (cfg.methods.empty()) throw ConfigError(where + ": empty list");
    } else if (key == "seed") {
      cfg.seed = detail::cfg_number<std::uint64_t>(value, where);
    } else if (key == "record_runtime") {
      if (value == "true") cfg.record_runtime = true;
      else if (value == "false") cfg.record_runtime = false;
      else throw ConfigError(where + ": expected true or false");
    } else {
      throw ConfigError(where + ": unknown key");
    }
  }
  if (have_shifts && have_points)
    throw ConfigError(source + ": 'shifts' and 'shift_points' are mutually exclusive");
  try {
    for (const auto& s : cfg.scenarios()) s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_bench_config(in, path);
}

inline BenchReport run_bench(const BenchConfig& cfg, const RunOptions& run = {}) {
  RunOptions opts = run;
  opts.record_runtime = cfg.record_runtime;
  return run_power_curve(cfg.scenarios(), cfg.shifts, cfg.trials, cfg.alpha, cfg.methods, cfg.seed,
                         opts);
}

}  // namespace pairedtest
