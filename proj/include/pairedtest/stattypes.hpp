#pragma once

// Paired-sample data model, CSV ingestion and pooled standardization.

#include <Eigen/Dense>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pairedtest/error.hpp"

namespace pairedtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Two aligned N x d measurement matrices. Row i of x and row i of y belong
/// to the same subject. Validated on construction and immutable afterwards.
class PairedSample {
 public:
  PairedSample(Matrix x, Matrix y, std::vector<std::string> feature_names)
      : x_(std::move(x)), y_(std::move(y)), names_(std::move(feature_names)) {
    validate();
  }

  /// Feature names default to x1..xd.
  PairedSample(Matrix x, Matrix y) : PairedSample(x, y, default_names(x.cols())) {}

  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  Eigen::Index n() const noexcept { return x_.rows(); }
  Eigen::Index d() const noexcept { return x_.cols(); }

  static std::vector<std::string> default_names(Eigen::Index d) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(d, 0)));
    for (Eigen::Index k = 0; k < d; ++k) names.push_back("x" + std::to_string(k + 1));
    return names;
  }

 private:
  void validate() const {
    if (x_.rows() < 1 || x_.cols() < 1)
      throw ValidationError("paired sample needs at least one row and one column");
    if (x_.rows() != y_.rows() || x_.cols() != y_.cols())
      throw PairingError("x is " + std::to_string(x_.rows()) + "x" + std::to_string(x_.cols()) +
                         " but y is " + std::to_string(y_.rows()) + "x" +
                         std::to_string(y_.cols()));
    if (static_cast<Eigen::Index>(names_.size()) != x_.cols())
      throw SchemaError("expected " + std::to_string(x_.cols()) + " feature names, got " +
                        std::to_string(names_.size()));
    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
      if (name.empty()) throw SchemaError("empty feature name");
      if (!seen.insert(name).second) throw SchemaError("duplicate feature name '" + name + "'");
    }
    check_finite(x_, "x");
    check_finite(y_, "y");
  }

  static void check_finite(const Matrix& m, const char* which) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index k = 0; k < m.cols(); ++k)
        if (!std::isfinite(m(i, k)))
          throw ValidationError(std::string("non-finite value in ") + which + " at row " +
                                std::to_string(i + 1) + ", column " + std::to_string(k + 1));
  }

  Matrix x_;
  Matrix y_;
  std::vector<std::string> names_;
};

/// Paired differences y - x, one row per subject.
struct DifferenceSample {
  Matrix z;
};

inline DifferenceSample differences(const PairedSample& sample) {
  return DifferenceSample{sample.y() - sample.x()};
}

/// Column k of the differences as a plain vector.
inline std::vector<double> difference_column(const PairedSample& sample, Eigen::Index k) {
  std::vector<double> out(static_cast<std::size_t>(sample.n()));
  for (Eigen::Index i = 0; i < sample.n(); ++i)
    out[static_cast<std::size_t>(i)] = sample.y()(i, k) - sample.x()(i, k);
  return out;
}

/// Centers and scales every feature by the mean and population standard
/// deviation of the 2N pooled values (x column followed by y column).
inline PairedSample standardize(const PairedSample& sample) {
  Matrix x = sample.x();
  Matrix y = sample.y();
  const double pooled_n = 2.0 * static_cast<double>(sample.n());
  for (Eigen::Index k = 0; k < sample.d(); ++k) {
    const double mean = (x.col(k).sum() + y.col(k).sum()) / pooled_n;
    const double ss = (x.col(k).array() - mean).square().sum() +
                      (y.col(k).array() - mean).square().sum();
    const double sd = std::sqrt(ss / pooled_n);
    if (!(sd > 0.0))
      throw DegenerateError("feature '" + sample.feature_names()[static_cast<std::size_t>(k)] +
                            "' (column " + std::to_string(k + 1) +
                            ") has zero pooled standard deviation");
    x.col(k) = (x.col(k).array() - mean) / sd;
    y.col(k) = (y.col(k).array() - mean) / sd;
  }
  return PairedSample(std::move(x), std::move(y), sample.feature_names());
}

namespace csv {

/// Splits one RFC-4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported.
inline std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_record(line);
    if (!have_header) {
      for (auto& f : fields) t.header.push_back(trim(f));
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(path + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(t.header.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::string cell = trim(fields[k]);
      const char* begin = cell.c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(begin, &end);
      if (cell.empty() || end != begin + cell.size())
        throw ParseError(path + ": non-numeric cell '" + cell + "' at row " +
                         std::to_string(t.rows.size() + 1) + ", column " + std::to_string(k + 1) +
                         " ('" + t.header[k] + "')");
      if (!std::isfinite(v))
        throw ValidationError(path + ": non-finite value at row " +
                              std::to_string(t.rows.size() + 1) + ", column " +
                              std::to_string(k + 1) + " ('" + t.header[k] + "')");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(path + ": missing header row");
  return t;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_matrix(const std::string& path, const Matrix& m,
                         const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  for (std::size_t k = 0; k < header.size(); ++k)
    out << (k ? "," : "") << quote_if_needed(header[k]);
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << format_double(m(i, k));
    out << '\n';
  }
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace csv

/// Loads two CSVs with identical headers, paired by row index.
inline PairedSample load_paired_csv(const std::string& path_a, const std::string& path_b) {
  const csv::Table a = csv::read_table(path_a);
  const csv::Table b = csv::read_table(path_b);
  if (a.header.size() != b.header.size())
    throw SchemaError("header width mismatch: '" + path_a + "' has " +
                      std::to_string(a.header.size()) + " columns, '" + path_b + "' has " +
                      std::to_string(b.header.size()));
  for (std::size_t k = 0; k < a.header.size(); ++k)
    if (a.header[k] != b.header[k])
      throw SchemaError("header mismatch at column " + std::to_string(k + 1) + ": '" +
                        a.header[k] + "' vs '" + b.header[k] + "'");
  if (a.rows.size() != b.rows.size())
    throw PairingError("row count mismatch: " + std::to_string(a.rows.size()) + " vs " +
                       std::to_string(b.rows.size()));
  const auto n = static_cast<Eigen::Index>(a.rows.size());
  const auto d = static_cast<Eigen::Index>(a.header.size());
  Matrix x(n, d), y(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) {
      x(i, k) = a.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      y(i, k) = b.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  return PairedSample(std::move(x), std::move(y), a.header);
}

inline void write_paired_csv(const PairedSample& sample, const std::string& path_a,
                             const std::string& path_b) {
  csv::write_matrix(path_a, sample.x(), sample.feature_names());
  csv::write_matrix(path_b, sample.y(), sample.feature_names());
}

}  // namespace pairedtest
