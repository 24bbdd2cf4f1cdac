#pragma once

// Monte-Carlo power study: detection rates per (method, scenario, shift) and
// per-feature importance summaries, with plot-ready CSV output.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "pairedtest/baselines.hpp"
#include "pairedtest/error.hpp"
#include "pairedtest/mwsr.hpp"
#include "pairedtest/synthgen.hpp"

namespace pairedtest {

enum class BenchMethod { Mwsr, MwsrRaw, MtWsr, MtTTest, Ht2 };

inline std::string_view to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::Mwsr: return "mwsr";
    case BenchMethod::MwsrRaw: return "mwsr-raw";
    case BenchMethod::MtWsr: return "mt-wsr";
    case BenchMethod::MtTTest: return "mt-ttest";
    case BenchMethod::Ht2: return "ht2";
  }
  return "?";
}

inline std::optional<BenchMethod> parse_bench_method(std::string_view s) {
  for (auto m : {BenchMethod::Mwsr, BenchMethod::MwsrRaw, BenchMethod::MtWsr,
                 BenchMethod::MtTTest, BenchMethod::Ht2})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string scenario_id(const ScenarioConfig& s) {
  return "n" + std::to_string(s.n) + "_d" + std::to_string(s.d) + "_std" + format_number(s.std) +
         "_rho" + format_number(s.rho);
}

struct BenchRow {
  BenchMethod method = BenchMethod::Mwsr;
  int n = 0;
  int d = 0;
  double std = 0.0;
  double rho = 0.0;
  double shift = 0.0;
  int trials = 0;
  double alpha = 0.0;
  int detections = 0;
  /// Trials where the method raised (HT2 singularity, degenerate MWSR rule).
  int errors = 0;
  double detection_rate = 0.0;
  /// NaN when timing was not recorded.
  double mean_runtime_s = std::numeric_limits<double>::quiet_NaN();
};

struct ImportanceRow {
  std::string scenario_id;
  double shift = 0.0;
  int feature_index = 0;
  std::string feature_name;
  /// Mean |I*_k| over trials where MWSR produced a rule; NaN if it never ran.
  double mwsr_mean_abs_importance = std::numeric_limits<double>::quiet_NaN();
  /// Fraction of trials with feature k Bonferroni-significant; NaN if MT never ran.
  double mt_significant_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<ImportanceRow> importance_summary;
  std::string config_digest;
};

struct RunOptions {
  int workers = 1;
  bool record_runtime = false;
};

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

inline std::string power_digest(const std::vector<ScenarioConfig>& grid,
                                std::span<const double> shifts, int trials, double alpha,
                                const std::vector<BenchMethod>& methods,
                                std::uint64_t master_seed, bool record_runtime) {
  std::ostringstream os;
  os << "grid=";
  for (const auto& s : grid)
    os << s.n << '/' << s.d << '/' << format_number(s.std) << '/' << format_number(s.rho) << '/'
       << format_number(s.shifted_fraction) << ';';
  os << "|shifts=";
  for (double v : shifts) os << format_number(v) << ';';
  os << "|trials=" << trials << "|alpha=" << format_number(alpha) << "|methods=";
  for (auto m : methods) os << to_string(m) << ';';
  os << "|seed=" << master_seed << "|runtime=" << (record_runtime ? 1 : 0);
  return hex64(fnv1a64(os.str()));
}

namespace detail {

struct MethodTrial {
  bool significant = false;
  bool error = false;
  double seconds = 0.0;
};

struct TrialResult {
  std::vector<MethodTrial> methods;
  std::vector<double> abs_importance;  // empty unless an MWSR variant succeeded
  std::vector<char> mt_significant;    // empty unless an MT variant ran
};

inline TrialResult run_trial(const ScenarioConfig& cfg, double alpha,
                             const std::vector<BenchMethod>& methods, bool timed,
                             std::optional<BenchMethod> importance_from,
                             std::optional<BenchMethod> mt_from) {
  const PairedSample sample = generate_scenario(cfg);
  TrialResult tr;
  tr.methods.resize(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const auto start = timed ? std::chrono::steady_clock::now()
                             : std::chrono::steady_clock::time_point{};
    MethodTrial& out = tr.methods[m];
    try {
      switch (methods[m]) {
        case BenchMethod::Mwsr:
        case BenchMethod::MwsrRaw: {
          MwsrOptions opt;
          opt.alpha = alpha;
          opt.normalize_pairs = methods[m] == BenchMethod::Mwsr;
          const MwsrResult r = mwsr_test(sample, opt);
          out.significant = r.outcome.significant;
          if (importance_from == methods[m]) {
            tr.abs_importance.resize(static_cast<std::size_t>(r.importance.size()));
            for (Eigen::Index k = 0; k < r.importance.size(); ++k)
              tr.abs_importance[static_cast<std::size_t>(k)] = std::fabs(r.importance(k));
          }
          break;
        }
        case BenchMethod::MtWsr:
        case BenchMethod::MtTTest: {
          const MtResult r = multiple_testing(
              sample, alpha, methods[m] == BenchMethod::MtWsr ? UniTest::Wsr : UniTest::TTest);
          out.significant = r.overall_significant;
          if (mt_from == methods[m]) {
            tr.mt_significant.assign(static_cast<std::size_t>(cfg.d), 0);
            for (std::size_t k : r.significant_features) tr.mt_significant[k] = 1;
          }
          break;
        }
        case BenchMethod::Ht2:
          out.significant = hotelling_t2_paired(sample, alpha).significant;
          break;
      }
    } catch (const Error&) {
      out.error = true;
      out.significant = false;
    }
    if (timed)
      out.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return tr;
}

template <class F>
void parallel_for(std::size_t count, int workers, F&& body) {
  const std::size_t nthreads =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                                                     count));
  if (nthreads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Runs every (scenario, shift, trial) once with a seed derived from its
/// indices, then aggregates in index order. Results do not depend on the
/// worker count.
inline BenchReport run_power_curve(const std::vector<ScenarioConfig>& grid,
                                   std::span<const double> shifts, int trials, double alpha,
                                   std::vector<BenchMethod> methods, std::uint64_t master_seed,
                                   const RunOptions& run = {}) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (shifts.empty()) throw DomainError("shift grid is empty");
  if (grid.empty()) throw DomainError("scenario grid is empty");
  if (methods.empty()) throw DomainError("no methods requested");
  check_alpha(alpha);
  for (const auto& s : grid) s.validate();
  {
    std::set<BenchMethod> uniq(methods.begin(), methods.end());
    methods.assign(uniq.begin(), uniq.end());
  }
  const auto has = [&](BenchMethod m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };
  std::optional<BenchMethod> importance_from;
  if (has(BenchMethod::Mwsr)) importance_from = BenchMethod::Mwsr;
  else if (has(BenchMethod::MwsrRaw)) importance_from = BenchMethod::MwsrRaw;
  std::optional<BenchMethod> mt_from;
  if (has(BenchMethod::MtWsr)) mt_from = BenchMethod::MtWsr;
  else if (has(BenchMethod::MtTTest)) mt_from = BenchMethod::MtTTest;

  const std::size_t n_shift = shifts.size();
  const auto n_trial = static_cast<std::size_t>(trials);
  const std::size_t total = grid.size() * n_shift * n_trial;
  std::vector<detail::TrialResult> results(total);
  detail::parallel_for(total, run.workers, [&](std::size_t idx) {
    const std::size_t t = idx % n_trial;
    const std::size_t h = (idx / n_trial) % n_shift;
    const std::size_t s = idx / (n_trial * n_shift);
    ScenarioConfig cfg = grid[s];
    cfg.shift = shifts[h];
    cfg.seed = derive_seed(master_seed, s, h, t);
    results[idx] = detail::run_trial(cfg, alpha, methods, run.record_runtime, importance_from,
                                     mt_from);
  });

  BenchReport report;
  report.config_digest =
      power_digest(grid, shifts, trials, alpha, methods, master_seed, run.record_runtime);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const ScenarioConfig& sc = grid[s];
    const auto d = static_cast<std::size_t>(sc.d);
    for (std::size_t h = 0; h < n_shift; ++h) {
      const std::size_t base = (s * n_shift + h) * n_trial;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        BenchRow row;
        row.method = methods[m];
        row.n = sc.n;
        row.d = sc.d;
        row.std = sc.std;
        row.rho = sc.rho;
        row.shift = shifts[h];
        row.trials = trials;
        row.alpha = alpha;
        double seconds = 0.0;
        for (std::size_t t = 0; t < n_trial; ++t) {
          const auto& mt = results[base + t].methods[m];
          row.detections += mt.significant ? 1 : 0;
          row.errors += mt.error ? 1 : 0;
          seconds += mt.seconds;
        }
        row.detection_rate = static_cast<double>(row.detections) / static_cast<double>(trials);
        if (run.record_runtime) row.mean_runtime_s = seconds / static_cast<double>(trials);
        report.rows.push_back(row);
      }
      std::vector<double> imp_sum(d, 0.0), mt_sum(d, 0.0);
      int imp_count = 0, mt_count = 0;
      for (std::size_t t = 0; t < n_trial; ++t) {
        const auto& tr = results[base + t];
        if (!tr.abs_importance.empty()) {
          ++imp_count;
          for (std::size_t k = 0; k < d; ++k) imp_sum[k] += tr.abs_importance[k];
        }
        if (!tr.mt_significant.empty()) {
          ++mt_count;
          for (std::size_t k = 0; k < d; ++k) mt_sum[k] += tr.mt_significant[k];
        }
      }
      const std::string sid = scenario_id(sc);
      const auto names = PairedSample::default_names(sc.d);
      for (std::size_t k = 0; k < d; ++k) {
        ImportanceRow ir;
        ir.scenario_id = sid;
        ir.shift = shifts[h];
        ir.feature_index = static_cast<int>(k);
        ir.feature_name = names[k];
        if (imp_count > 0) ir.mwsr_mean_abs_importance = imp_sum[k] / imp_count;
        if (mt_count > 0) ir.mt_significant_fraction = mt_sum[k] / mt_count;
        report.importance_summary.push_back(std::move(ir));
      }
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const BenchRow& a, const BenchRow& b) {
                     return std::make_tuple(to_string(a.method), a.d, a.std, a.shift, a.n, a.rho) <
                            std::make_tuple(to_string(b.method), b.d, b.std, b.shift, b.n, b.rho);
                   });
  return report;
}

/// Per-feature importance for one scenario across a shift grid: MWSR mean
/// |I*_k| and the MT (WSR, Bonferroni) per-feature significance fraction.
inline std::vector<ImportanceRow> importance_study(const ScenarioConfig& cfg,
                                                   std::span<const double> shifts, int trials,
                                                   std::uint64_t master_seed, double alpha = 0.05,
                                                   const RunOptions& run = {}) {
  if (shifts.empty()) throw DomainError("shift grid is empty");
  return run_power_curve({cfg}, shifts, trials, alpha, {BenchMethod::Mwsr, BenchMethod::MtWsr},
                         master_seed, run)
      .importance_summary;
}

inline constexpr std::string_view kPowerCsvHeader =
    "method,n,d,std,rho,shift,trials,alpha,detections,errors,detection_rate,mean_runtime_s";
inline constexpr std::string_view kImportanceCsvHeader =
    "scenario_id,shift,feature_index,feature_name,mwsr_mean_abs_importance,mt_significant_"
    "fraction";

inline void emit_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << kPowerCsvHeader << '\n';
  for (const auto& r : report.rows)
    out << to_string(r.method) << ',' << r.n << ',' << r.d << ',' << format_number(r.std) << ','
        << format_number(r.rho) << ',' << format_number(r.shift) << ',' << r.trials << ','
        << format_number(r.alpha) << ',' << r.detections << ',' << r.errors << ','
        << format_number(r.detection_rate) << ',' << format_number(r.mean_runtime_s) << '\n';
  if (!out) throw InputError("write failed for '" + path + "'");
}

inline void emit_importance_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << kImportanceCsvHeader << '\n';
  for (const auto& r : report.importance_summary)
    out << r.scenario_id << ',' << format_number(r.shift) << ',' << r.feature_index << ','
        << r.feature_name << ',' << format_number(r.mwsr_mean_abs_importance) << ','
        << format_number(r.mt_significant_fraction) << '\n';
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace pairedtest
