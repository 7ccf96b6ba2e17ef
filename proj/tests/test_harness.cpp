#include <gtest/gtest.h>

#include <cmath>

#include "psido/harness/experiments.hpp"
#include "psido/harness/report.hpp"

using namespace psido;
using namespace psido::harness;

namespace {

ExperimentConfig config(const std::string& exp, const std::string& text) {
  ExperimentConfig c = default_config(exp);
  apply_config_text(c, text);
  return c;
}

int error_line(const std::string& exp, const std::string& text) {
  try {
    validate(config(exp, text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Config, DefaultsCoverEveryKey) {
  for (const char* exp : {"e1", "e2", "e3", "e4", "e5"}) {
    const ExperimentConfig c = default_config(exp);
    EXPECT_EQ(c.values.size(), config_keys().size());
    for (const auto& k : config_keys()) EXPECT_TRUE(c.values.count(k.name)) << k.name;
    EXPECT_NO_THROW(validate(c)) << exp;
  }
  EXPECT_THROW(default_config("e6"), ConfigError);
}

TEST(Config, SectionsCommentsAndOverrides) {
  const ExperimentConfig c = config("e2",
                                    "# global\n"
                                    "ladder = 32, 64   ; trailing comment\n"
                                    "p = 3\n"
                                    "[e1]\n"
                                    "p = 7\n"
                                    "[e2]\n"
                                    "rho = 0.25\n");
  EXPECT_EQ(c.numbers("ladder"), (std::vector<double>{32, 64}));
  EXPECT_EQ(c.number("p"), 3.0);
  EXPECT_EQ(c.number("rho"), 0.25);
  EXPECT_EQ(c.line_of("rho"), 7);
  EXPECT_TRUE(c.is_set("p"));
  EXPECT_FALSE(c.is_set("dim"));
  EXPECT_TRUE(std::isinf(config("e5", "p_values = 2, inf\n").numbers("p_values")[1]));
}

TEST(Config, ErrorsNameTheLine) {
  auto line_of_parse_error = [](const std::string& text) {
    try {
      config("e1", text);
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("line " + std::to_string(e.line())), std::string::npos);
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of_parse_error("dim = 1\nbogus = 3\n"), 2);
  EXPECT_EQ(line_of_parse_error("\n\n[e9]\n"), 3);
  EXPECT_EQ(line_of_parse_error("dim 1\n"), 1);
  EXPECT_EQ(line_of_parse_error("dim =\n"), 1);
  EXPECT_EQ(line_of_parse_error("[e1\n"), 1);
}

TEST(Config, ValidationNamesTheOffendingLine) {
  EXPECT_EQ(error_line("e1", "dim = 3\n"), 1);
  EXPECT_EQ(error_line("e1", "\nrho = 1\n"), 2);
  EXPECT_EQ(error_line("e1", "ladder = 64,48\n"), 1);
  EXPECT_EQ(error_line("e1", "symbol = nope\n"), 1);
  EXPECT_EQ(error_line("e1", "family = huge\n"), 1);
  EXPECT_EQ(error_line("e1", "boundary = reflect\n"), 1);
  EXPECT_EQ(error_line("e1", "extras = spike\n"), 1);
  EXPECT_EQ(error_line("e1", "m_offset = abc\n"), 1);
  EXPECT_EQ(error_line("e2", "r = 2.5\n"), 1);
  EXPECT_EQ(error_line("e2", "p = 2\nr = 2\n"), 1);
  // |x|^1 is not in A_2 on the line
  EXPECT_EQ(error_line("e2", "p = 4\nr = 2\nweight_exponent = 1\n"), 3);
  EXPECT_EQ(error_line("e2", "weight_exponent = -1\n"), 1);
  EXPECT_EQ(error_line("e5", "p_values = 2, 0.5\n"), 1);
  EXPECT_EQ(error_line("e1", "shell_constant = 1\n"), 1);
}

TEST(Config, HashIsStableAndSensitive) {
  const ExperimentConfig a = default_config("e1");
  EXPECT_EQ(config_hash(a), config_hash(default_config("e1")));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(default_config("e5")));
  EXPECT_NE(config_hash(a), config_hash(config("e1", "seed = 2\n")));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(CriticalOrders, Formulas) {
  EXPECT_DOUBLE_EQ(critical_sharp(1, 0.5), -0.25);
  EXPECT_DOUBLE_EQ(critical_sharp(2, 0.0), -1.0);
  EXPECT_DOUBLE_EQ(critical_weighted(1, 0.5, 2.0), -0.25);
  EXPECT_DOUBLE_EQ(critical_weighted(1, 0.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(critical_lp(1, 0.5, 0.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(critical_lp(1, 0.5, 0.0, 4.0), -0.125);
  EXPECT_DOUBLE_EQ(critical_lp(1, 0.5, 0.0, INFINITY), -0.25);
  EXPECT_DOUBLE_EQ(critical_lp(1, 0.0, 0.5, 4.0), -0.25 - 0.125);
  EXPECT_DOUBLE_EQ(critical_lp(1, 0.5, 0.5, 1.5), -0.5 * (2.0 / 3.0 - 0.5));
}

TEST(Verdicts, Classification) {
  auto verdict = [](std::vector<double> v, const std::string& expect) {
    Series s;
    s.expectation = expect;
    std::size_t N = 64;
    for (double x : v) {
      LadderPoint p;
      p.N = N;
      N *= 2;
      p.max_ratio = x;
      s.points.push_back(p);
    }
    summarize(s, Thresholds{});
    return std::make_pair(s.verdict, s.pass);
  };
  EXPECT_EQ(verdict({1.0, 1.1, 1.2}, "bounded"), std::make_pair(std::string("BOUNDED"), true));
  EXPECT_EQ(verdict({1.0, 1.3, 1.6}, "unbounded"), std::make_pair(std::string("UNBOUNDED-TREND"), true));
  EXPECT_EQ(verdict({1.0, 1.3, 1.4}, "bounded"), std::make_pair(std::string("INCONCLUSIVE"), false));
  EXPECT_EQ(verdict({1.0, 1.3, 1.4}, "none"), std::make_pair(std::string("INCONCLUSIVE"), true));
  EXPECT_EQ(verdict({1.0, 1.3, 1.5}, "unbounded").first, "UNBOUNDED-TREND");
}

TEST(Battery, StandardModesAndExtras) {
  const GridSpec g = make_grid(1, 64, pi);
  const OperatorHandle op = make_operator(make_miyachi_symbol(-0.25, 0.5), g);
  const auto standard = make_battery(default_config("e1"), g, &op);
  EXPECT_EQ(standard.size(), 20u);
  EXPECT_EQ(standard[18].name, "delta");
  EXPECT_EQ(standard[19].name, "focusing");
  for (const auto& b : standard) EXPECT_GT(max_abs(b.field), 0.0) << b.name;
  // the focusing field makes T_a u peak at the origin with value (2L)^{-1} sum |a|
  const SampledField t = apply(op, standard[19].field);
  const std::size_t origin = grid_index(g, {0.0, 0.0});
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(std::abs(t[i]), std::abs(t[origin]) * (1 + 1e-12));
  const auto modes = make_battery(config("e1", "battery = modes\nextras = none\n"), g, nullptr);
  ASSERT_EQ(modes.size(), 4u);
  EXPECT_EQ(modes[3].name, "mode_k8");
}

TEST(Battery, IsResolutionIndependent) {
  const ExperimentConfig c = config("e1", "extras = none\n");
  const auto a = make_battery(c, make_grid(1, 64, pi), nullptr);
  const auto b = make_battery(c, make_grid(1, 128, pi), nullptr);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(std::abs(a[k].field[i] - b[k].field[2 * i]), 0.0, 1e-12) << a[k].name;
}

TEST(E1, IdentitySymbolRatioIsAtMostTwo) {
  // (u)^# <= 2 M u <= 2 M_2 u pointwise
  const ExperimentReport r = run_experiment(config("e1", "symbol = constant\nladder = 64,128\ncontrast_offset = 0\n"));
  ASSERT_EQ(r.series.size(), 1u);
  for (const auto& p : r.series[0].points) {
    EXPECT_LE(p.max_ratio, 2.0);
    EXPECT_EQ(p.ratios.size(), 20u);
  }
  EXPECT_EQ(r.series[0].verdict, "BOUNDED");
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.config.at("experiment"), "e1");
}

TEST(E2, ModesBatteryOnTrivialWeightIsTheSymbolSize) {
  // constant weight, Bessel symbol <xi>^m: ratio on mode k is <k>^m, largest at k = 1
  const ExperimentReport r = run_experiment(
      config("e2", "symbol = bessel\nweight_exponent = 0\nbattery = modes\nextras = none\nladder = 32,64\n"
                   "m_offset = -1\ncontrast_offset = 0\n"));
  ASSERT_FALSE(r.aborted) << r.diagnostic;
  const double m = critical_weighted(1, 1.0, 2.0) - 1.0;
  for (const auto& p : r.series[0].points) EXPECT_NEAR(p.max_ratio, std::pow(2.0, m / 2.0), 1e-12);
  EXPECT_EQ(r.series[0].verdict, "BOUNDED");
}

TEST(E2, AbortsWhenThePrecheckFails) {
  // claimed in A_2 (a < 1) but only marginally: with a strict drift threshold the pre-check refuses
  const ExperimentReport r =
      run_experiment(config("e2", "weight_exponent = 0.95\nladder = 64,256,1024\ndrift_threshold = 0.01\n"));
  EXPECT_TRUE(r.aborted);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.diagnostic.find("pre-check"), std::string::npos);
  EXPECT_TRUE(r.series.empty());
}

TEST(E3, WeightSweepClassifiesAgainstTheBoundary) {
  const ExperimentReport r = run_experiment(
      config("e3", "ladder = 64,128,256\nweight_sweep = -1, 0, 2\nextras = none\n"));
  std::map<std::string, const Series*> by;
  for (const auto& s : r.series) by[s.name] = &s;
  ASSERT_TRUE(by.count("weight_a-1"));
  EXPECT_EQ(by["weight_a-1"]->verdict, "NOT-A-WEIGHT");
  EXPECT_EQ(by["weight_a0"]->expectation, "bounded");
  EXPECT_EQ(by["weight_a0"]->metrics.at("inside_class"), 1.0);
  // boundary for p/r = 2 on the line is a = 1; a = 2 is outside
  EXPECT_EQ(by["weight_a2"]->expectation, "precheck_fails");
  EXPECT_EQ(by["weight_a2"]->verdict, "PRECHECK-FAILED");
  EXPECT_TRUE(by["weight_a2"]->pass);
}

TEST(E4, MatchesAtRhoZeroAndAbortsOnInsufficientSmoothness) {
  const ExperimentReport ok = run_experiment(config("e4", "rho = 0\n"));
  ASSERT_FALSE(ok.aborted) << ok.diagnostic;
  ASSERT_EQ(ok.series.size(), 3u);
  for (const auto& s : ok.series) EXPECT_EQ(s.verdict, "MATCH") << s.name;
  const ExperimentReport bad = run_experiment(config("e4", "moment_order = 3\n"));
  EXPECT_TRUE(bad.aborted);
  EXPECT_NE(bad.diagnostic.find("insufficient"), std::string::npos);
  EXPECT_THROW(run_experiment(config("e4", "ladder = 64\n")), ConfigError);  // shell 6 does not exist at N = 64
}

TEST(E5, IdentityIsBoundedOnEveryLp) {
  const ExperimentReport r =
      run_experiment(config("e5", "symbol = constant\nladder = 64,128\np_values = 1.5, 4\ncontrast_offset = 0\n"));
  ASSERT_EQ(r.series.size(), 2u);
  for (const auto& s : r.series)
    for (const auto& p : s.points) EXPECT_NEAR(p.max_ratio, 1.0, 1e-12);
}

TEST(Report, JsonRoundTripIncludingNonFinite) {
  ExperimentReport r;
  r.experiment = "e1";
  r.config = {{"dim", "1"}, {"experiment", "e1"}};
  r.tolerances = {{"drift_threshold", 0.25}};
  Series s;
  s.name = "critical";
  s.m = -0.25;
  s.expectation = "bounded";
  s.points.push_back({64, {{"gaussian", 1.25, 0}, {"delta", INFINITY, 3}}, INFINITY, "delta"});
  s.metrics = {{"drift", 0.1}, {"growth", -INFINITY}};
  s.verdict = "BOUNDED";
  s.note = "quote \" and, comma";
  r.series.push_back(s);
  r.notes = {"a", "b"};
  r.runtime_seconds = 0.5;
  r.diagnostic = "";
  const ExperimentReport back = report_from_text(report_to_text(r));
  EXPECT_EQ(back, r);
  EXPECT_NO_THROW(nlohmann::json::parse(report_to_text(r)));
}

TEST(Report, CsvHeaderAndDeterminism) {
  const ExperimentConfig c = config("e1", "symbol = constant\nladder = 64,128\ncontrast_offset = 0\nextras = delta\n");
  const std::string a = report_to_csv(run_experiment(c));
  const std::string b = report_to_csv(run_experiment(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), table_header);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 19);
  const std::string svg = report_to_svg(run_experiment(c));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(SymbolFamilies, AllBuildAndNameThemselves) {
  for (const auto& f : symbol_families()) {
    const ExperimentConfig c = config("e1", std::string("symbol = ") + f.name + "\ndelta = 0.5\n");
    const SymbolSpec a = build_symbol(c, -0.25);
    EXPECT_FALSE(a.description.empty());
    EXPECT_TRUE(std::isfinite(std::abs(a({0.1, 0}, {5.0, 0}))));
  }
}
