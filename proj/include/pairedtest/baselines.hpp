#pragma once

// Comparison methods: paired Hotelling T^2 and per-feature multiple testing
// with a Bonferroni threshold.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairedtest/error.hpp"
#include "pairedtest/numkernels.hpp"
#include "pairedtest/stattypes.hpp"
#include "pairedtest/wsr.hpp"

namespace pairedtest {

struct Ht2Result {
  TestOutcome outcome;  // statistic = F, effect_size = T^2
  double t2 = 0.0;
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
};

/// Paired Hotelling T^2 = N zbar' S^-1 zbar, referred to F(d, N - d).
inline Ht2Result hotelling_t2_details(const PairedSample& sample, double alpha = 0.05) {
  check_alpha(alpha);
  const Eigen::Index n = sample.n();
  const Eigen::Index d = sample.d();
  if (n < 2) throw InsufficientDataError("Hotelling T^2 needs at least 2 pairs");
  const Matrix z = differences(sample).z;
  const Vector zbar = z.colwise().mean().transpose();
  const Vector v = spd_solve(sample_covariance(z), zbar);
  if (n <= d)
    throw SingularityError("singular covariance matrix: N = " + std::to_string(n) +
                           " <= d = " + std::to_string(d));
  Ht2Result r;
  r.t2 = static_cast<double>(n) * zbar.dot(v);
  r.df1 = static_cast<int>(d);
  r.df2 = static_cast<int>(n - d);
  r.f = r.t2 * static_cast<double>(n - d) / (static_cast<double>(d) * static_cast<double>(n - 1));
  r.outcome.statistic = r.f;
  r.outcome.effect_size = r.t2;
  r.outcome.p_value = f_sf(r.f, r.df1, r.df2);
  r.outcome.alpha = alpha;
  r.outcome.significant = r.outcome.p_value < alpha;
  r.outcome.method = Method::Ht2;
  r.outcome.p_mode = PValueMode::None;
  return r;
}

inline TestOutcome hotelling_t2_paired(const PairedSample& sample, double alpha = 0.05) {
  return hotelling_t2_details(sample, alpha).outcome;
}

struct PairedT {
  double t = 0.0;
  double p_value = 1.0;
  int df = 0;
  bool degenerate = false;
};

/// Two-sided one-sample t test on differences, variance with N - 1.
inline PairedT paired_t_test(std::span<const double> z) {
  if (z.size() < 2) throw InsufficientDataError("paired t test needs at least 2 pairs");
  const double n = static_cast<double>(z.size());
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  PairedT r;
  r.df = static_cast<int>(z.size()) - 1;
  if (!(sd > 0.0)) {
    r.degenerate = true;
    r.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  r.p_value = t_two_sided_sf(r.t, r.df);
  return r;
}

enum class UniTest { Wsr, TTest };

inline std::string_view to_string(UniTest u) { return u == UniTest::Wsr ? "wsr" : "ttest"; }

struct MtResult {
  std::vector<double> per_feature_p;
  double corrected_alpha = 0.0;
  std::vector<std::size_t> significant_features;
  bool overall_significant = false;
  UniTest uni_test = UniTest::Wsr;
  /// Features whose univariate test was undefined; their p is reported as 1.
  std::vector<std::size_t> degenerate_features;
};

inline MtResult multiple_testing(const PairedSample& sample, double alpha = 0.05,
                                 UniTest uni_test = UniTest::Wsr) {
  check_alpha(alpha);
  if (sample.n() < 2) throw InsufficientDataError("multiple testing needs at least 2 pairs");
  MtResult r;
  r.uni_test = uni_test;
  r.corrected_alpha = alpha / static_cast<double>(sample.d());
  r.per_feature_p.resize(static_cast<std::size_t>(sample.d()), 1.0);
  for (Eigen::Index k = 0; k < sample.d(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const std::vector<double> z = difference_column(sample, k);
    if (uni_test == UniTest::Wsr) {
      try {
        r.per_feature_p[kk] = wsr_test(z, 0.0, alpha, WsrMode::Auto).p_value;
      } catch (const DegenerateError&) {
        r.per_feature_p[kk] = 1.0;
        r.degenerate_features.push_back(kk);
      }
    } else {
      const PairedT t = paired_t_test(z);
      r.per_feature_p[kk] = t.p_value;
      if (t.degenerate) r.degenerate_features.push_back(kk);
    }
    if (r.per_feature_p[kk] < r.corrected_alpha) r.significant_features.push_back(kk);
  }
  r.overall_significant = !r.significant_features.empty();
  return r;
}

}  // namespace pairedtest
