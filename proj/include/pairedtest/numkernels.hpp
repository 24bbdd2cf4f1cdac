#pragma once

// Numerical primitives: midranks, medians, normal/t/F distribution
// functions, covariance and a Cholesky-based SPD solve.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pairedtest/error.hpp"

namespace pairedtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ascending ranks, ties replaced by the average of the ranks they span.
struct RankVector {
  std::vector<double> ranks;
  bool had_ties = false;
  /// Sizes of every tie group with more than one member.
  std::vector<std::size_t> tie_groups;
};

inline RankVector midranks(std::span<const double> values) {
  if (values.empty()) throw DomainError("midranks of an empty vector");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  RankVector out;
  out.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) out.ranks[order[k]] = r;
    if (j - i > 1) {
      out.had_ties = true;
      out.tie_groups.push_back(j - i);
    }
    i = j;
  }
  return out;
}

/// Middle element for odd lengths, mean of the two central elements otherwise.
inline double median(std::span<const double> values) {
  if (values.empty()) throw DomainError("median of an empty vector");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(|T| > |t|) for Student's t with df degrees of freedom.
inline double t_two_sided_sf(double t, int df) {
  if (df < 1) throw DomainError("t distribution requires df >= 1, got " + std::to_string(df));
  const double v = static_cast<double>(df);
  return incomplete_beta(0.5 * v, 0.5, v / (v + t * t));
}

inline double t_cdf(double x, int df) {
  if (df < 1) throw DomainError("t distribution requires df >= 1, got " + std::to_string(df));
  const double tail = 0.5 * t_two_sided_sf(x, df);
  return x >= 0.0 ? 1.0 - tail : tail;
}

inline double f_cdf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw DomainError("F distribution requires d1, d2 >= 1");
  if (!(x >= 0.0)) throw DomainError("F distribution is supported on x >= 0");
  const double a = static_cast<double>(d1);
  const double b = static_cast<double>(d2);
  return incomplete_beta(0.5 * a, 0.5 * b, a * x / (a * x + b));
}

/// Upper tail 1 - f_cdf(x, d1, d2), evaluated without cancellation.
inline double f_sf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw DomainError("F distribution requires d1, d2 >= 1");
  if (!(x >= 0.0)) throw DomainError("F distribution is supported on x >= 0");
  const double a = static_cast<double>(d1);
  const double b = static_cast<double>(d2);
  return incomplete_beta(0.5 * b, 0.5 * a, b / (a * x + b));
}

/// Unbiased (N - 1) covariance of the rows of z. Symmetric to the bit.
inline Matrix sample_covariance(const Matrix& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  if (n < 2) throw DomainError("sample covariance needs at least 2 rows");
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Matrix centered = z.rowwise() - mean;
  Matrix cov(d, d);
  const double denom = static_cast<double>(n - 1);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = a; b < d; ++b) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
      cov(a, b) = s / denom;
      cov(b, a) = cov(a, b);
    }
  return cov;
}

/// Relative pivot threshold for spd_solve, applied to trace(a)/d.
inline constexpr double kSingularityEpsilon = 1e-12;

/// Solves a v = b through a Cholesky factorization. Any pivot at or below
/// kSingularityEpsilon * trace(a) / d raises SingularityError.
inline Vector spd_solve(const Matrix& a, const Vector& b) {
  const Eigen::Index d = a.rows();
  if (d == 0 || a.cols() != d) throw DomainError("spd_solve needs a non-empty square matrix");
  if (b.size() != d) throw DomainError("spd_solve: right-hand side has wrong length");
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double scale = std::max({std::fabs(a(i, j)), std::fabs(a(j, i)), 1.0});
      if (std::fabs(a(i, j) - a(j, i)) > 1e-12 * scale)
        throw DomainError("spd_solve needs a symmetric matrix");
    }
  const double threshold = kSingularityEpsilon * a.trace() / static_cast<double>(d);
  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > threshold) || !(threshold > 0.0))
      throw SingularityError("singular covariance matrix: pivot " + std::to_string(pivot) +
                             " at index " + std::to_string(j) +
                             " (inverse of the sample covariance does not exist)");
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  Vector v = b;
  for (Eigen::Index i = 0; i < d; ++i) {
    double s = v(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= l(i, k) * v(k);
    v(i) = s / l(i, i);
  }
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    double s = v(i);
    for (Eigen::Index k = i + 1; k < d; ++k) s -= l(k, i) * v(k);
    v(i) = s / l(i, i);
  }
  return v;
}

}  // namespace pairedtest
