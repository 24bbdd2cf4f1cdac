#pragma once

// Univariate Wilcoxon signed-rank test, Walsh averages and the
// Hodges-Lehmann location estimate.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairedtest/error.hpp"
#include "pairedtest/numkernels.hpp"

namespace pairedtest {

enum class Tail { TwoSided, Greater, Less };
enum class WsrMode { Auto, Exact, Normal };
enum class PValueMode { Exact, Normal, None };
enum class Method { WsrExact, WsrNormal, Ht2, MtBonferroni, Mwsr };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::WsrExact: return "wsr-exact";
    case Method::WsrNormal: return "wsr-normal";
    case Method::Ht2: return "ht2";
    case Method::MtBonferroni: return "mt-bonferroni";
    case Method::Mwsr: return "mwsr";
  }
  return "?";
}

inline std::string_view to_string(PValueMode m) {
  switch (m) {
    case PValueMode::Exact: return "exact";
    case PValueMode::Normal: return "normal";
    case PValueMode::None: return "none";
  }
  return "?";
}

inline std::string_view to_string(Tail t) {
  switch (t) {
    case Tail::TwoSided: return "two-sided";
    case Tail::Greater: return "greater";
    case Tail::Less: return "less";
  }
  return "?";
}

struct WsrStatistic {
  double t_plus = 0.0;
  std::size_t n_effective = 0;
  bool had_ties = false;
  bool had_zeros = false;
  std::vector<std::size_t> tie_groups;
};

/// Result of any single hypothesis test in the toolkit.
struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  double effect_size = 0.0;
  double alpha = 0.05;
  bool significant = false;
  Method method = Method::WsrNormal;
  /// How the p-value was obtained; None for tests without a rank null.
  PValueMode p_mode = PValueMode::None;
  std::vector<std::string> warnings;
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("alpha must lie in (0, 1), got " + std::to_string(alpha));
}

/// Exact mode is refused above this many non-zero differences.
inline constexpr std::size_t kExactCap = 25;

inline WsrStatistic signed_rank_statistic(std::span<const double> z, double theta0 = 0.0) {
  if (z.empty()) throw DomainError("signed-rank statistic of an empty sample");
  WsrStatistic st;
  std::vector<double> abs_vals;
  std::vector<bool> positive;
  abs_vals.reserve(z.size());
  positive.reserve(z.size());
  for (double v : z) {
    if (!std::isfinite(v)) throw ValidationError("non-finite difference");
    const double s = v - theta0;
    if (s == 0.0) {
      st.had_zeros = true;
      continue;
    }
    abs_vals.push_back(std::fabs(s));
    positive.push_back(s > 0.0);
  }
  if (abs_vals.empty())
    throw DegenerateError("all differences are zero; signed-rank statistic is undefined");
  const RankVector r = midranks(abs_vals);
  for (std::size_t i = 0; i < abs_vals.size(); ++i)
    if (positive[i]) st.t_plus += r.ranks[i];
  st.n_effective = abs_vals.size();
  st.had_ties = r.had_ties;
  st.tie_groups = r.tie_groups;
  return st;
}

/// Null distribution of T+ for n distinct ranks: entry t counts the sign
/// assignments with T+ = t. Built by convolving ranks 1..n one at a time.
inline std::vector<std::uint64_t> signed_rank_null_counts(std::size_t n) {
  if (n > 62) throw DomainError("signed_rank_null_counts supports n <= 62");
  const std::size_t max_t = n * (n + 1) / 2;
  std::vector<std::uint64_t> counts(max_t + 1, 0);
  counts[0] = 1;
  std::size_t reach = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    reach += k;
    for (std::size_t t = reach; t >= k; --t) counts[t] += counts[t - k];
  }
  return counts;
}

struct PValue {
  double value = 1.0;
  PValueMode mode = PValueMode::Exact;
  /// Set when exact evaluation was requested but ties forced the normal path.
  bool fell_back_to_normal = false;
};

inline double wsr_normal_pvalue(const WsrStatistic& stat, Tail tail = Tail::TwoSided) {
  const double n = static_cast<double>(stat.n_effective);
  const double mean = n * (n + 1.0) / 4.0;
  double tie_adj = 0.0;
  for (std::size_t g : stat.tie_groups) {
    const double t = static_cast<double>(g);
    tie_adj += (t * t * t - t) / 48.0;
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_adj;
  if (!(var > 0.0)) throw DegenerateError("signed-rank statistic has zero variance");
  const double sd = std::sqrt(var);
  const double diff = stat.t_plus - mean;
  double p = 1.0;
  switch (tail) {
    case Tail::TwoSided: {
      const double zscore = std::max(std::fabs(diff) - 0.5, 0.0) / sd;
      p = 2.0 * normal_cdf(-zscore);
      break;
    }
    case Tail::Greater:
      p = normal_cdf(-(diff - 0.5) / sd);
      break;
    case Tail::Less:
      p = normal_cdf((diff + 0.5) / sd);
      break;
  }
  return std::min(p, 1.0);
}

/// Exact p-value from the T+ null distribution. Tied ranks fall back to the
/// normal approximation and mark the result.
inline PValue wsr_exact_pvalue(const WsrStatistic& stat, Tail tail = Tail::TwoSided,
                               std::size_t cap = kExactCap) {
  if (stat.had_ties) return PValue{wsr_normal_pvalue(stat, tail), PValueMode::Normal, true};
  if (stat.n_effective > cap)
    throw ModeError("exact p-value requested for n = " + std::to_string(stat.n_effective) +
                    " > " + std::to_string(cap) + "; use the normal approximation");
  const auto counts = signed_rank_null_counts(stat.n_effective);
  const double total = std::ldexp(1.0, static_cast<int>(stat.n_effective));
  const auto t = static_cast<std::size_t>(std::llround(stat.t_plus));
  std::uint64_t le = 0, ge = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k <= t) le += counts[k];
    if (k >= t) ge += counts[k];
  }
  const double p_le = static_cast<double>(le) / total;
  const double p_ge = static_cast<double>(ge) / total;
  double p = 1.0;
  switch (tail) {
    case Tail::TwoSided: p = 2.0 * std::min(p_le, p_ge); break;
    case Tail::Greater: p = p_ge; break;
    case Tail::Less: p = p_le; break;
  }
  return PValue{std::min(p, 1.0), PValueMode::Exact, false};
}

/// All N(N+1)/2 averages (z_i + z_j)/2 with i <= j, in (i, j) order.
inline std::vector<double> walsh_averages(std::span<const double> z) {
  if (z.empty()) throw DomainError("Walsh averages of an empty sample");
  std::vector<double> out;
  out.reserve(z.size() * (z.size() + 1) / 2);
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i; j < z.size(); ++j) out.push_back(0.5 * (z[i] + z[j]));
  return out;
}

inline double hodges_lehmann(std::span<const double> z) { return median(walsh_averages(z)); }

inline TestOutcome wsr_test(std::span<const double> z, double theta0 = 0.0, double alpha = 0.05,
                            WsrMode mode = WsrMode::Auto, Tail tail = Tail::TwoSided) {
  check_alpha(alpha);
  const WsrStatistic st = signed_rank_statistic(z, theta0);
  TestOutcome out;
  out.alpha = alpha;
  out.statistic = st.t_plus;
  if (st.had_zeros) out.warnings.push_back("zero differences dropped");

  bool exact = false;
  switch (mode) {
    case WsrMode::Auto: exact = st.n_effective <= kExactCap && !st.had_ties; break;
    case WsrMode::Exact: exact = true; break;
    case WsrMode::Normal: exact = false; break;
  }
  if (exact) {
    const PValue p = wsr_exact_pvalue(st, tail);
    out.p_value = p.value;
    out.p_mode = p.mode;
    if (p.fell_back_to_normal) out.warnings.push_back("ties present; normal approximation used");
  } else {
    out.p_value = wsr_normal_pvalue(st, tail);
    out.p_mode = PValueMode::Normal;
  }
  out.method = out.p_mode == PValueMode::Exact ? Method::WsrExact : Method::WsrNormal;
  out.effect_size = hodges_lehmann(z);
  out.significant = out.p_value < alpha;
  return out;
}

}  // namespace pairedtest
