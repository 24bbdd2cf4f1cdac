#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pairedtest/mwsr.hpp"

namespace pairedtest {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix random_matrix(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(g);
  return m;
}

PairedSample random_sample(std::mt19937_64& g, Eigen::Index n, Eigen::Index d, double shift) {
  Matrix x = random_matrix(g, n, d);
  Matrix y = random_matrix(g, n, d);
  y.rightCols(std::max<Eigen::Index>(1, d / 10)).array() += shift;
  return PairedSample(x, y);
}

Matrix random_rotation(std::mt19937_64& g, Eigen::Index d) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(g, d, d));
  return qr.householderQ();
}

TEST(Bisector, AxisAligned) {
  const Hyperplane h = perpendicular_bisector(vec({0, 0}), vec({2, 0}));
  EXPECT_EQ(h.w, vec({1, 0}));
  EXPECT_EQ(h.b, -1.0);
}

TEST(Bisector, OneDimensionalMidpointRule) {
  const Hyperplane h = perpendicular_bisector(vec({1}), vec({3}));
  EXPECT_EQ(h.w(0), 1.0);
  EXPECT_EQ(h.b, -2.0);
  EXPECT_EQ(h.decision(vec({5})), 3.0);
}

TEST(Bisector, Diagonal) {
  const Hyperplane h = perpendicular_bisector(vec({1, 1}), vec({3, 3}));
  EXPECT_NEAR(h.w(0), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(h.w(1), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(h.b, -2 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(h.decision(vec({2, 2})), 0.0, 1e-14);
  EXPECT_NEAR(std::fabs(h.decision(vec({1, 1}))), std::fabs(h.decision(vec({3, 3}))), 1e-14);
}

TEST(Bisector, CoincidentPairCarriesRow) {
  try {
    perpendicular_bisector(vec({1, 2}), vec({1, 2}), true, 7);
    FAIL() << "expected DegeneratePairError";
  } catch (const DegeneratePairError& e) {
    EXPECT_EQ(e.row(), 7u);
  }
}

TEST(Bisector, UnnormalizedKeepsSegmentLength) {
  const Hyperplane h = perpendicular_bisector(vec({0, 0}), vec({3, 4}), false);
  EXPECT_EQ(h.w, vec({3, 4}));
  EXPECT_NEAR(h.decision(vec({1.5, 2})), 0.0, 1e-15);
}

TEST(Bisector, EquidistanceOrientationUnitNorm) {
  std::mt19937_64 g(31);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index d = 1 + rep % 12;
    const Vector x = random_matrix(g, d, 1, 3.0);
    const Vector y = random_matrix(g, d, 1, 3.0);
    const Hyperplane h = perpendicular_bisector(x, y);
    EXPECT_NEAR(h.w.norm(), 1.0, 1e-12);
    const double dx = h.decision(x), dy = h.decision(y);
    EXPECT_LT(dx, 0.0);
    EXPECT_GT(dy, 0.0);
    EXPECT_NEAR(std::fabs(dx), std::fabs(dy), 1e-10);
    EXPECT_NEAR(h.decision(0.5 * (x + y)), 0.0, 1e-10);
  }
}

TEST(WalshHyperplanes, Examples) {
  const Hyperplane a{vec({1, 0}), 0.0}, b{vec({0, 1}), 2.0};
  const auto one = walsh_hyperplane_averages({a});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].w, a.w);

  const auto same = walsh_hyperplane_averages({a, a});
  ASSERT_EQ(same.size(), 3u);
  for (const auto& h : same) {
    EXPECT_EQ(h.w, a.w);
    EXPECT_EQ(h.b, a.b);
  }

  const auto avg = walsh_hyperplane_averages({a, b});
  ASSERT_EQ(avg.size(), 3u);
  EXPECT_EQ(avg[0].w, vec({1, 0}));
  EXPECT_EQ(avg[0].b, 0.0);
  EXPECT_EQ(avg[1].w, vec({0.5, 0.5}));
  EXPECT_EQ(avg[1].b, 1.0);
  EXPECT_EQ(avg[2].w, vec({0, 1}));
  EXPECT_EQ(avg[2].b, 2.0);

  EXPECT_THROW(walsh_hyperplane_averages({a, Hyperplane{vec({1}), 0}}), DomainError);
  EXPECT_THROW(walsh_hyperplane_averages({}), DomainError);
}

TEST(WalshHyperplanes, CountIsTriangular) {
  for (std::size_t n = 1; n <= 40; ++n) {
    std::vector<Hyperplane> rules(n, Hyperplane{vec({1, 2}), 0.5});
    EXPECT_EQ(walsh_hyperplane_averages(rules).size(), n * (n + 1) / 2);
  }
}

TEST(PseudomedianRule, Examples) {
  const Hyperplane r{vec({0.3, -0.4}), 1.25};
  const Hyperplane single = pseudomedian_rule({r});
  EXPECT_EQ(single.w, r.w);
  EXPECT_EQ(single.b, r.b);
  const Hyperplane triple = pseudomedian_rule({r, r, r});
  EXPECT_EQ(triple.w, r.w);
  EXPECT_EQ(triple.b, r.b);

  const Hyperplane agg =
      pseudomedian_rule({{vec({1}), -1}, {vec({1}), -2}, {vec({1}), -6}});
  EXPECT_EQ(agg.w(0), 1.0);
  EXPECT_EQ(agg.b, -2.75);
  EXPECT_EQ(-agg.b, hodges_lehmann(std::vector<double>{1, 2, 6}));
}

// Route 1 materializes every averaged hyperplane and takes coefficient-wise
// medians; route 2 (pseudomedian_rule) runs Hodges-Lehmann per coefficient.
TEST(PseudomedianRule, MatchesMaterializedWalshMedianAndIsBracketed) {
  std::mt19937_64 g(77);
  for (int rep = 0; rep < 60; ++rep) {
    const Eigen::Index d = 1 + rep % 8;
    const std::size_t n = 1 + static_cast<std::size_t>(rep % 23);
    std::vector<Hyperplane> rules;
    for (std::size_t i = 0; i < n; ++i)
      rules.push_back({random_matrix(g, d, 1), random_matrix(g, 1, 1)(0, 0)});
    const auto avgs = walsh_hyperplane_averages(rules);
    const Hyperplane agg = pseudomedian_rule(rules);
    for (Eigen::Index k = 0; k <= d; ++k) {
      std::vector<double> coef;
      for (const auto& h : avgs) coef.push_back(k < d ? h.w(k) : h.b);
      const double got = k < d ? agg.w(k) : agg.b;
      EXPECT_EQ(got, oracle::sorted_median(coef));
      EXPECT_GE(got, *std::min_element(coef.begin(), coef.end()));
      EXPECT_LE(got, *std::max_element(coef.begin(), coef.end()));
    }
  }
}

TEST(Score, Examples) {
  Matrix x(1, 2), y(1, 2);
  x << 0, 0;
  y << 2, 0;
  const PairedSample s(x, y);
  const ScorePair sp = score({vec({1, 0}), -1}, s);
  EXPECT_EQ(sp.s1[0], -1.0);
  EXPECT_EQ(sp.s2[0], 1.0);

  Matrix p(1, 2), q(1, 2);
  p << 1, 1;
  q << 0, 0;
  EXPECT_DOUBLE_EQ(score({vec({3, 4}), 0}, PairedSample(p, q)).s1[0], 7.0 / 5.0);

  EXPECT_THROW(score({vec({0, 0}), 1}, s), DegenerateError);
  EXPECT_THROW(score({vec({1}), 1}, s), DomainError);
}

TEST(Score, PositiveScalingOfRuleLeavesScores) {
  std::mt19937_64 g(12);
  const PairedSample s = random_sample(g, 15, 4, 0.3);
  const Hyperplane h{random_matrix(g, 4, 1), 0.7};
  const ScorePair base = score(h, s);
  for (double k : {0.5, 2.0, 1e3}) {
    const ScorePair sc = score({k * h.w, k * h.b}, s);
    for (std::size_t i = 0; i < base.s1.size(); ++i) {
      EXPECT_NEAR(sc.s1[i], base.s1[i], 1e-12 * (1 + std::fabs(base.s1[i])));
      EXPECT_NEAR(sc.s2[i], base.s2[i], 1e-12 * (1 + std::fabs(base.s2[i])));
    }
  }
}

TEST(FeatureImportance, Examples) {
  EXPECT_EQ(feature_importance({vec({1, 0, 0}), 3}), vec({1, 0, 0}));
  const Vector imp = feature_importance({vec({3, 4}), 0});
  EXPECT_DOUBLE_EQ(imp(0), 0.6);
  EXPECT_DOUBLE_EQ(imp(1), 0.8);
  EXPECT_EQ(feature_importance({vec({-3, -4}), 1}), -imp);
  EXPECT_THROW(feature_importance({vec({0, 0}), 0}), DegenerateError);
}

TEST(MwsrTest, OneDimensionalReductionToHodgesLehmannOfMidpoints) {
  std::mt19937_64 g(101);
  std::uniform_real_distribution<double> gap(0.05, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 5 + rep % 40;
    Matrix x = random_matrix(g, n, 1, 2.0), y(n, 1);
    std::vector<double> mids;
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i, 0) = x(i, 0) + gap(g);
      mids.push_back(0.5 * (x(i, 0) + y(i, 0)));
    }
    const PairedSample s(x, y);
    const MwsrResult r = mwsr_test(s, 0.05);
    EXPECT_EQ(r.rule.w(0), 1.0);
    EXPECT_NEAR(-r.rule.b, hodges_lehmann(mids), 1e-10);
    EXPECT_EQ(r.outcome.p_value, wsr_test(r.scores.differences()).p_value);
    EXPECT_EQ(r.outcome.method, Method::Mwsr);
  }
}

TEST(MwsrTest, PureTranslationMatchesProjectedWsr) {
  std::mt19937_64 g(55);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index d = 2 + rep % 6, n = 12 + rep;
    const Matrix x = random_matrix(g, n, d);
    const Vector dir = random_matrix(g, d, 1);
    std::uniform_real_distribution<double> amount(0.2, 2.0);
    Matrix y = x;
    std::vector<double> proj;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = amount(g);
      y.row(i) += c * dir.transpose();
      proj.push_back(c * dir.norm());
    }
    const MwsrResult r = mwsr_test(PairedSample(x, y), 0.05);
    const Vector unit = dir / dir.norm();
    EXPECT_TRUE(r.importance.isApprox(unit, 1e-10) || r.importance.isApprox(-unit, 1e-10));
    EXPECT_EQ(r.outcome.p_value, wsr_test(proj).p_value);
  }
}

TEST(MwsrTest, DegeneratePolicies) {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  try {
    mwsr_test(PairedSample(x, x), 0.05, DegeneratePolicy::Abort);
    FAIL() << "expected DegeneratePairError";
  } catch (const DegeneratePairError& e) {
    EXPECT_EQ(e.row(), 0u);
  }
  EXPECT_THROW(mwsr_test(PairedSample(x, x), 0.05, DegeneratePolicy::Drop),
               InsufficientDataError);

  Matrix y = x;
  y(1, 0) += 1.0;
  y(2, 1) -= 2.0;
  const MwsrResult r = mwsr_test(PairedSample(x, y), 0.05);
  EXPECT_EQ(r.dropped_rows, (std::vector<std::size_t>{0}));
  EXPECT_EQ(r.scores.s1.size(), 3u);
  EXPECT_FALSE(r.outcome.warnings.empty());
  EXPECT_THROW(mwsr_test(PairedSample(x, y), 1.5), DomainError);
}

TEST(MwsrTest, ResultInvariants) {
  std::mt19937_64 g(8);
  for (int rep = 0; rep < 30; ++rep) {
    const PairedSample s = random_sample(g, 10 + rep, 2 + rep % 9, 0.5);
    const MwsrResult r = mwsr_test(s, 0.05);
    EXPECT_EQ(r.scores.s1.size(), static_cast<std::size_t>(s.n()));
    EXPECT_NEAR(r.importance.norm(), 1.0, 1e-12);
    EXPECT_TRUE(r.importance.isApprox(r.rule.w / r.rule.w.norm()));
    EXPECT_EQ(r.outcome.significant, r.outcome.p_value < 0.05);
    EXPECT_TRUE(r.effect_in_features.isApprox(r.outcome.effect_size * r.importance));
  }
}

TEST(MwsrTest, TranslationInvariance) {
  std::mt19937_64 g(19);
  for (int rep = 0; rep < 40; ++rep) {
    const PairedSample s = random_sample(g, 5 + rep % 26, 2 + rep % 9, 0.4);
    const Eigen::RowVectorXd c = random_matrix(g, 1, s.d(), 5.0);
    const PairedSample moved(s.x().rowwise() + c, s.y().rowwise() + c);
    const MwsrResult a = mwsr_test(s, 0.05), b = mwsr_test(moved, 0.05);
    const auto da = a.scores.differences(), db = b.scores.differences();
    for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], db[i], 1e-10);
    EXPECT_NEAR(a.outcome.p_value, b.outcome.p_value, 1e-10);
  }
}

TEST(MwsrTest, RotationMapsBisectorsAndPreservesDecisionValues) {
  std::mt19937_64 g(23);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index d = 2 + rep % 9;
    const PairedSample s = random_sample(g, 12, d, 0.5);
    const Matrix q = random_rotation(g, d);
    const PairedSample rot(s.x() * q.transpose(), s.y() * q.transpose());
    const auto ra = pair_bisectors(s, {}), rb = pair_bisectors(rot, {});
    for (std::size_t i = 0; i < ra.size(); ++i) {
      EXPECT_TRUE((q * ra[i].w - rb[i].w).lpNorm<Eigen::Infinity>() < 1e-10);
      for (Eigen::Index j = 0; j < s.n(); ++j) {
        EXPECT_NEAR(ra[i].decision(s.x().row(j).transpose()),
                    rb[i].decision(rot.x().row(j).transpose()), 1e-10);
        EXPECT_NEAR(ra[i].decision(s.y().row(j).transpose()),
                    rb[i].decision(rot.y().row(j).transpose()), 1e-10);
      }
    }
  }
}

// Coordinate-wise medians commute with permutations and sign flips of the
// axes, so p* is unchanged under signed permutation matrices.
TEST(MwsrTest, SignedPermutationInvariance) {
  std::mt19937_64 g(29);
  for (int rep = 0; rep < 40; ++rep) {
    const Eigen::Index d = 2 + rep % 9;
    const PairedSample s = random_sample(g, 8 + rep % 23, d, 0.5);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), g);
    Matrix q = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
      q(k, perm[static_cast<std::size_t>(k)]) = (g() & 1) ? 1.0 : -1.0;
    const PairedSample rot(s.x() * q.transpose(), s.y() * q.transpose());
    const MwsrResult a = mwsr_test(s, 0.05), b = mwsr_test(rot, 0.05);
    EXPECT_TRUE((q * a.rule.w - b.rule.w).lpNorm<Eigen::Infinity>() < 1e-12);
    EXPECT_EQ(a.outcome.p_value, b.outcome.p_value);
  }
}

TEST(MwsrTest, RowPermutationInvariance) {
  std::mt19937_64 g(37);
  for (int rep = 0; rep < 20; ++rep) {
    const PairedSample s = random_sample(g, 20, 5, 0.6);
    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    Matrix px(20, 5), py(20, 5);
    for (int i = 0; i < 20; ++i) {
      px.row(i) = s.x().row(perm[static_cast<std::size_t>(i)]);
      py.row(i) = s.y().row(perm[static_cast<std::size_t>(i)]);
    }
    const MwsrResult a = mwsr_test(s, 0.05), b = mwsr_test(PairedSample(px, py), 0.05);
    EXPECT_EQ(a.rule.w, b.rule.w);
    EXPECT_EQ(a.outcome.p_value, b.outcome.p_value);
  }
}

TEST(MwsrTest, ScaledRuleGivesIdenticalPValue) {
  std::mt19937_64 g(41);
  for (int rep = 0; rep < 20; ++rep) {
    const PairedSample s = random_sample(g, 30, 10, 0.5);
    const MwsrResult r = mwsr_test(s, 0.05);
    for (double k : {0.25, 3.0, 1e4}) {
      const ScorePair sp = score({k * r.rule.w, k * r.rule.b}, s);
      EXPECT_EQ(wsr_test(sp.differences()).p_value, r.outcome.p_value);
    }
  }
}

TEST(MwsrTest, UnnormalizedVariantRuns) {
  std::mt19937_64 g(43);
  const PairedSample s = random_sample(g, 30, 10, 1.0);
  MwsrOptions opt;
  opt.normalize_pairs = false;
  const MwsrResult r = mwsr_test(s, opt);
  EXPECT_NEAR(r.importance.norm(), 1.0, 1e-12);
  EXPECT_GE(r.outcome.p_value, 0.0);
}

}  // namespace
}  // namespace pairedtest
