#pragma once

// `paired-test` command-line front end. Exit codes: 0 success (whatever the
// test decided), 2 input/usage error, 3 method-level error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pairedtest/baselines.hpp"
#include "pairedtest/bench.hpp"
#include "pairedtest/bench_config.hpp"
#include "pairedtest/mwsr.hpp"
#include "pairedtest/stattypes.hpp"
#include "pairedtest/wsr.hpp"

namespace pairedtest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitMethod = 3;

using nlohmann::json;

struct TestArgs {
  std::string method;
  std::string x_path;
  std::string y_path;
  double alpha = 0.05;
  bool standardize = false;
  std::string mode = "auto";
  std::string uni_test = "wsr";
  std::string degenerate = "drop";
  bool raw_pairs = false;
  std::string out_path;
  std::string format = "text";
};

struct BenchArgs {
  std::string config_path;
  std::string out_dir;
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

inline WsrMode parse_mode(const std::string& s) {
  if (s == "auto") return WsrMode::Auto;
  if (s == "exact") return WsrMode::Exact;
  if (s == "normal") return WsrMode::Normal;
  throw DomainError("unknown --mode '" + s + "'");
}

inline json outcome_json(const TestOutcome& o) {
  return json{{"statistic", o.statistic},   {"p_value", o.p_value},
              {"effect_size", o.effect_size}, {"alpha", o.alpha},
              {"significant", o.significant}, {"method", std::string(to_string(o.method))},
              {"p_mode", std::string(to_string(o.p_mode))}, {"warnings", o.warnings}};
}

inline json mwsr_report(const MwsrResult& r, const PairedSample& s) {
  const auto& names = s.feature_names();
  json rule{{"features", names}, {"w", std::vector<double>(r.rule.w.data(), r.rule.w.data() + r.rule.w.size())}, {"b", r.rule.b}};
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(r.importance(static_cast<Eigen::Index>(a))) >
           std::fabs(r.importance(static_cast<Eigen::Index>(b)));
  });
  json importance = json::array();
  for (std::size_t k : order) {
    const double v = r.importance(static_cast<Eigen::Index>(k));
    importance.push_back({{"feature", names[k]}, {"signed", v}, {"abs", std::fabs(v)}});
  }
  json theta_features = json::object();
  for (std::size_t k = 0; k < names.size(); ++k)
    theta_features[names[k]] = r.effect_in_features(static_cast<Eigen::Index>(k));
  return json{{"method", "mwsr"},
              {"n", s.n()},
              {"d", s.d()},
              {"p_value", r.outcome.p_value},
              {"theta_star", r.outcome.effect_size},
              {"theta_star_features", theta_features},
              {"significant", r.outcome.significant},
              {"outcome", outcome_json(r.outcome)},
              {"rule", rule},
              {"scores", {{"s1", r.scores.s1}, {"s2", r.scores.s2}}},
              {"importance", importance},
              {"dropped_rows", r.dropped_rows}};
}

inline json ht2_report(const Ht2Result& r, const PairedSample& s) {
  return json{{"method", "ht2"}, {"n", s.n()},        {"d", s.d()},
              {"t2", r.t2},      {"f", r.f},          {"df", {r.df1, r.df2}},
              {"p_value", r.outcome.p_value},         {"significant", r.outcome.significant},
              {"outcome", outcome_json(r.outcome)}};
}

inline json mt_report(const MtResult& r, const PairedSample& s, double alpha) {
  const auto& names = s.feature_names();
  json per = json::array();
  for (std::size_t k = 0; k < names.size(); ++k)
    per.push_back({{"feature", names[k]},
                   {"p_value", r.per_feature_p[k]},
                   {"significant", r.per_feature_p[k] < r.corrected_alpha}});
  std::vector<std::string> sig, degenerate;
  for (std::size_t k : r.significant_features) sig.push_back(names[k]);
  for (std::size_t k : r.degenerate_features) degenerate.push_back(names[k]);
  return json{{"method", "mt"},
              {"uni_test", std::string(to_string(r.uni_test))},
              {"n", s.n()},
              {"d", s.d()},
              {"alpha", alpha},
              {"corrected_alpha", r.corrected_alpha},
              {"per_feature", per},
              {"significant_features", sig},
              {"overall_significant", r.overall_significant},
              {"degenerate_features", degenerate}};
}

inline json wsr_report(const TestOutcome& o, const WsrStatistic& st, const PairedSample& s) {
  return json{{"method", "wsr"},
              {"feature", s.feature_names().front()},
              {"n", s.n()},
              {"n_effective", st.n_effective},
              {"t_plus", o.statistic},
              {"p_value", o.p_value},
              {"p_mode", std::string(to_string(o.p_mode))},
              {"effect_size", o.effect_size},
              {"significant", o.significant},
              {"outcome", outcome_json(o)}};
}

inline void print_text(const json& rep, std::ostream& out) {
  out << std::setprecision(6);
  const std::string method = rep.at("method");
  out << "method: " << method << '\n';
  if (method == "mwsr") {
    out << "p*: " << rep["p_value"].get<double>() << " ("
        << rep["outcome"]["p_mode"].get<std::string>() << ")\n"
        << "theta*: " << rep["theta_star"].get<double>() << " (score units)\n"
        << "significant: " << (rep["significant"].get<bool>() ? "yes" : "no") << '\n'
        << "rule intercept: " << rep["rule"]["b"].get<double>() << '\n'
        << "feature importance (sorted by |w|):\n";
    for (const auto& f : rep["importance"])
      out << "  " << std::left << std::setw(16) << f["feature"].get<std::string>() << std::right
          << std::setw(12) << f["signed"].get<double>() << '\n';
  } else if (method == "ht2") {
    out << "T2: " << rep["t2"].get<double>() << "\nF: " << rep["f"].get<double>() << " (df "
        << rep["df"][0].get<int>() << ", " << rep["df"][1].get<int>() << ")\n"
        << "p: " << rep["p_value"].get<double>() << '\n'
        << "significant: " << (rep["significant"].get<bool>() ? "yes" : "no") << '\n';
  } else if (method == "mt") {
    out << "univariate test: " << rep["uni_test"].get<std::string>() << '\n'
        << "corrected alpha: " << rep["corrected_alpha"].get<double>() << '\n';
    for (const auto& f : rep["per_feature"])
      out << "  " << std::left << std::setw(16) << f["feature"].get<std::string>() << std::right
          << std::setw(12) << f["p_value"].get<double>() << (f["significant"].get<bool>() ? "  *" : "")
          << '\n';
    out << "overall significant: " << (rep["overall_significant"].get<bool>() ? "yes" : "no")
        << '\n';
  } else {
    out << "T+: " << rep["t_plus"].get<double>() << " (n = " << rep["n_effective"].get<int>()
        << ")\np: " << rep["p_value"].get<double>() << " (" << rep["p_mode"].get<std::string>()
        << ")\neffect size: " << rep["effect_size"].get<double>() << '\n'
        << "significant: " << (rep["significant"].get<bool>() ? "yes" : "no") << '\n';
  }
  for (const auto& w : rep.contains("outcome") ? rep["outcome"]["warnings"] : json::array())
    out << "warning: " << w.get<std::string>() << '\n';
}

inline json run_test(const TestArgs& a) {
  check_alpha(a.alpha);
  const WsrMode mode = parse_mode(a.mode);
  if (a.uni_test != "wsr" && a.uni_test != "ttest")
    throw DomainError("unknown --uni-test '" + a.uni_test + "'");
  if (a.degenerate != "drop" && a.degenerate != "abort")
    throw DomainError("unknown --degenerate '" + a.degenerate + "'");
  PairedSample sample = load_paired_csv(a.x_path, a.y_path);
  if (a.standardize) sample = standardize(sample);

  json rep;
  if (a.method == "mwsr") {
    MwsrOptions opt;
    opt.alpha = a.alpha;
    opt.mode = mode;
    opt.normalize_pairs = !a.raw_pairs;
    opt.degenerate_policy =
        a.degenerate == "abort" ? DegeneratePolicy::Abort : DegeneratePolicy::Drop;
    rep = mwsr_report(mwsr_test(sample, opt), sample);
  } else if (a.method == "ht2") {
    rep = ht2_report(hotelling_t2_details(sample, a.alpha), sample);
  } else if (a.method == "mt") {
    rep = mt_report(
        multiple_testing(sample, a.alpha, a.uni_test == "wsr" ? UniTest::Wsr : UniTest::TTest),
        sample, a.alpha);
  } else if (a.method == "wsr") {
    if (sample.d() != 1)
      throw DomainError("wsr needs single-column inputs, got " + std::to_string(sample.d()) +
                        " columns");
    const auto z = difference_column(sample, 0);
    rep = wsr_report(wsr_test(z, 0.0, a.alpha, mode), signed_rank_statistic(z), sample);
  } else {
    throw DomainError("unknown test method '" + a.method + "'");
  }
  rep["standardized"] = a.standardize;
  return rep;
}

inline std::string run_bench_cmd(const BenchArgs& a, std::ostream& out) {
  BenchConfig cfg = load_bench_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers < 1) throw DomainError("--workers must be >= 1");
  std::filesystem::create_directories(a.out_dir);
  const BenchReport report = run_bench(cfg, RunOptions{a.workers, cfg.record_runtime});
  const std::filesystem::path dir(a.out_dir);
  emit_csv(report, (dir / "power.csv").string());
  emit_importance_csv(report, (dir / "importance.csv").string());
  {
    std::ofstream digest(dir / "config_digest.txt");
    digest << report.config_digest << '\n';
  }
  out << "config_digest: " << report.config_digest << '\n'
      << "wrote " << (dir / "power.csv").string() << " (" << report.rows.size() << " rows), "
      << (dir / "importance.csv").string() << '\n';
  return report.config_digest;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Paired-sample hypothesis tests for multidimensional data", "paired-test"};
  app.require_subcommand(1);

  TestArgs targs;
  auto* test = app.add_subcommand("test", "Run one test on a pair of CSV files");
  test->add_option("method", targs.method, "mwsr | ht2 | mt | wsr")
      ->required()
      ->check(CLI::IsMember({"mwsr", "ht2", "mt", "wsr"}));
  test->add_option("--x", targs.x_path, "CSV of the first measurement")->required();
  test->add_option("--y", targs.y_path, "CSV of the second measurement")->required();
  test->add_option("--alpha", targs.alpha, "Significance level in (0, 1)");
  test->add_flag("--standardize", targs.standardize, "Pooled per-feature standardization");
  test->add_option("--mode", targs.mode, "WSR p-value mode: auto | exact | normal");
  test->add_option("--uni-test", targs.uni_test, "Univariate test for mt: wsr | ttest");
  test->add_option("--degenerate", targs.degenerate, "Coincident pairs in mwsr: drop | abort");
  test->add_flag("--raw-pairs", targs.raw_pairs, "mwsr: do not normalize per-pair hyperplanes");
  test->add_option("--out", targs.out_path, "Write the JSON report here");
  test->add_option("--format", targs.format, "stdout format: text | json")
      ->check(CLI::IsMember({"text", "json"}));

  BenchArgs bargs;
  std::uint64_t seed_value = 0;
  auto* bench = app.add_subcommand("bench", "Run the Monte-Carlo power benchmark");
  bench->add_option("--config", bargs.config_path, "Benchmark config file")->required();
  bench->add_option("--out-dir", bargs.out_dir, "Output directory")->required();
  bench->add_option("--workers", bargs.workers, "Worker threads");
  auto* seed_opt = bench->add_option("--seed", seed_value, "Override the master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*test) {
      const json rep = run_test(targs);
      if (!targs.out_path.empty()) {
        std::ofstream f(targs.out_path);
        if (!f) throw InputError("cannot write '" + targs.out_path + "'");
        f << rep.dump(2) << '\n';
      }
      if (targs.format == "json") out << rep.dump(2) << '\n';
      else print_text(rep, out);
    } else if (*bench) {
      if (seed_opt->count() > 0) bargs.seed = seed_value;
      run_bench_cmd(bargs, out);
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const MethodError& e) {
    err << "method error: " << e.what() << '\n';
    return kExitMethod;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace pairedtest::cli
