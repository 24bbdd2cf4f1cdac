#pragma once

// Multivariate Wilcoxon signed-rank (MWSR) test.
//
// Step 1 builds the perpendicular bisecting hyperplane of every (x_i, y_i)
// segment, aggregates them into a pseudomedian rule by taking coefficient-wise
// medians over all Walsh averages (C_i + C_j)/2, i <= j, and scores both
// samples by signed distance to that rule. Step 2 runs a Wilcoxon signed-rank
// test on the per-subject score differences. The rule's normalized
// coefficients double as a signed feature-importance vector.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "pairedtest/error.hpp"
#include "pairedtest/numkernels.hpp"
#include "pairedtest/stattypes.hpp"
#include "pairedtest/wsr.hpp"

namespace pairedtest {

/// Linear decision rule w.x + b.
struct Hyperplane {
  Vector w;
  double b = 0.0;

  double decision(const Eigen::Ref<const Vector>& point) const { return w.dot(point) + b; }
  Eigen::Index dim() const noexcept { return w.size(); }
};

struct ScorePair {
  std::vector<double> s1;  // scores of the x rows
  std::vector<double> s2;  // scores of the y rows

  std::vector<double> differences() const {
    std::vector<double> out(s1.size());
    for (std::size_t i = 0; i < s1.size(); ++i) out[i] = s2[i] - s1[i];
    return out;
  }
};

enum class DegeneratePolicy { Drop, Abort };

struct MwsrOptions {
  double alpha = 0.05;
  DegeneratePolicy degenerate_policy = DegeneratePolicy::Drop;
  /// Scale every per-pair normal to unit length before aggregation. When
  /// false, w_i = y_i - x_i and distant pairs carry more weight.
  bool normalize_pairs = true;
  WsrMode mode = WsrMode::Auto;
};

struct MwsrResult {
  Hyperplane rule;
  ScorePair scores;
  TestOutcome outcome;
  Vector importance;
  /// theta* along the unit normal of the rule, in feature units.
  Vector effect_in_features;
  std::vector<std::size_t> dropped_rows;
};

namespace detail {

inline bool coincident(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double scale = std::max(std::fabs(a(k)), std::fabs(b(k)));
    if (std::fabs(b(k) - a(k)) > 1e-12 * scale) return false;
  }
  return true;
}

inline double norm_or_throw(const Vector& w) {
  const double nrm = w.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw DegenerateError("decision rule has an all-zero coefficient vector");
  return nrm;
}

}  // namespace detail

/// Hyperplane equidistant from x_i and y_i, normal pointing from x_i to y_i,
/// so the decision value is negative at x_i and positive at y_i.
inline Hyperplane perpendicular_bisector(const Eigen::Ref<const Vector>& x_i,
                                         const Eigen::Ref<const Vector>& y_i,
                                         bool normalize = true, std::size_t row = 0) {
  if (x_i.size() != y_i.size()) throw DomainError("bisector endpoints differ in dimension");
  if (detail::coincident(x_i, y_i))
    throw DegeneratePairError("pair at row " + std::to_string(row) + " is coincident (x == y)",
                              row);
  Vector w = y_i - x_i;
  if (normalize) w /= w.norm();
  const Vector mid = 0.5 * (x_i + y_i);
  const double b = -w.dot(mid);
  return Hyperplane{std::move(w), b};
}

/// Component-wise averages (C_i + C_j)/2 for all i <= j, in (i, j) order.
/// Averages are not renormalized.
inline std::vector<Hyperplane> walsh_hyperplane_averages(const std::vector<Hyperplane>& rules) {
  if (rules.empty()) throw DomainError("no hyperplanes to average");
  const Eigen::Index d = rules.front().dim();
  for (const auto& r : rules)
    if (r.dim() != d) throw DomainError("hyperplanes differ in dimension");
  std::vector<Hyperplane> out;
  out.reserve(rules.size() * (rules.size() + 1) / 2);
  for (std::size_t i = 0; i < rules.size(); ++i)
    for (std::size_t j = i; j < rules.size(); ++j)
      out.push_back(Hyperplane{0.5 * (rules[i].w + rules[j].w), 0.5 * (rules[i].b + rules[j].b)});
  return out;
}

/// Coefficient-wise median over all Walsh averages of the rules. Each
/// coefficient is handled independently, so this equals the Hodges-Lehmann
/// estimate of that coefficient across rules; the M averaged hyperplanes are
/// never materialized.
inline Hyperplane pseudomedian_rule(const std::vector<Hyperplane>& rules) {
  if (rules.empty()) throw DomainError("no hyperplanes to aggregate");
  const Eigen::Index d = rules.front().dim();
  for (const auto& r : rules)
    if (r.dim() != d) throw DomainError("hyperplanes differ in dimension");
  std::vector<double> coef(rules.size());
  Hyperplane out{Vector(d), 0.0};
  for (Eigen::Index k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < rules.size(); ++i) coef[i] = rules[i].w(k);
    out.w(k) = hodges_lehmann(coef);
  }
  for (std::size_t i = 0; i < rules.size(); ++i) coef[i] = rules[i].b;
  out.b = hodges_lehmann(coef);
  return out;
}

/// Signed distances of every x and y row to the rule.
inline ScorePair score(const Hyperplane& rule, const PairedSample& sample) {
  if (rule.dim() != sample.d())
    throw DomainError("rule has dimension " + std::to_string(rule.dim()) + ", sample has " +
                      std::to_string(sample.d()));
  const double nrm = detail::norm_or_throw(rule.w);
  ScorePair sp;
  const Vector sx = (sample.x() * rule.w).array() + rule.b;
  const Vector sy = (sample.y() * rule.w).array() + rule.b;
  sp.s1.resize(static_cast<std::size_t>(sample.n()));
  sp.s2.resize(static_cast<std::size_t>(sample.n()));
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    sp.s1[static_cast<std::size_t>(i)] = sx(i) / nrm;
    sp.s2[static_cast<std::size_t>(i)] = sy(i) / nrm;
  }
  return sp;
}

/// Unit-normalized signed coefficients: magnitude ranks features, sign gives
/// the direction of the shift. The intercept is not part of it.
inline Vector feature_importance(const Hyperplane& rule) {
  return rule.w / detail::norm_or_throw(rule.w);
}

/// One bisector per non-degenerate pair, following the degenerate policy.
inline std::vector<Hyperplane> pair_bisectors(const PairedSample& sample, const MwsrOptions& opt,
                                              std::vector<std::size_t>* dropped = nullptr) {
  std::vector<Hyperplane> rules;
  rules.reserve(static_cast<std::size_t>(sample.n()));
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    try {
      rules.push_back(perpendicular_bisector(sample.x().row(i).transpose(),
                                             sample.y().row(i).transpose(), opt.normalize_pairs,
                                             static_cast<std::size_t>(i)));
    } catch (const DegeneratePairError&) {
      if (opt.degenerate_policy == DegeneratePolicy::Abort) throw;
      if (dropped) dropped->push_back(static_cast<std::size_t>(i));
    }
  }
  return rules;
}

inline MwsrResult mwsr_test(const PairedSample& sample, const MwsrOptions& opt = {}) {
  check_alpha(opt.alpha);
  MwsrResult res;
  const std::vector<Hyperplane> rules = pair_bisectors(sample, opt, &res.dropped_rows);
  if (rules.size() < 2)
    throw InsufficientDataError("MWSR needs at least 2 non-degenerate pairs, got " +
                                std::to_string(rules.size()));

  res.rule = pseudomedian_rule(rules);
  res.scores = score(res.rule, sample);
  res.outcome = wsr_test(res.scores.differences(), 0.0, opt.alpha, opt.mode);
  res.outcome.method = Method::Mwsr;
  if (!res.dropped_rows.empty())
    res.outcome.warnings.push_back(std::to_string(res.dropped_rows.size()) +
                                   " coincident pair(s) dropped");
  res.importance = feature_importance(res.rule);
  res.effect_in_features = res.outcome.effect_size * res.importance;
  return res;
}

inline MwsrResult mwsr_test(const PairedSample& sample, double alpha,
                            DegeneratePolicy policy = DegeneratePolicy::Drop) {
  MwsrOptions opt;
  opt.alpha = alpha;
  opt.degenerate_policy = policy;
  return mwsr_test(sample, opt);
}

}  // namespace pairedtest
