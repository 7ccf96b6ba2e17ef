#pragma once

// Experiment reports and their three renderings: JSON (lossless round trip),
// a CSV data table with the fixed header
//   experiment,series,m,N,function,ratio
// and an SVG plot of max ratio against N per series.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "psido/util.hpp"

namespace psido::harness {

struct FunctionRatio {
  std::string function;
  double ratio = 0.0;
  std::size_t excluded = 0;  // points dropped by the denominator floor
  bool operator==(const FunctionRatio&) const = default;
};

struct LadderPoint {
  std::size_t N = 0;
  std::vector<FunctionRatio> ratios;
  double max_ratio = 0.0;
  std::string argmax;
  bool operator==(const LadderPoint&) const = default;
};

struct Series {
  std::string name;
  double m = 0.0;
  std::string expectation;  // bounded, unbounded, match, precheck_fails or none
  std::vector<LadderPoint> points;
  std::map<std::string, double> metrics;
  std::string verdict;
  bool pass = true;
  std::string note;
  bool operator==(const Series&) const = default;
};

struct ExperimentReport {
  std::string experiment;
  std::map<std::string, std::string> config;
  std::map<std::string, double> tolerances;
  std::vector<Series> series;
  std::vector<std::string> notes;
  double runtime_seconds = 0.0;
  bool aborted = false;
  std::string diagnostic;
  bool pass = true;
  bool operator==(const ExperimentReport&) const = default;
};

inline constexpr const char* table_header = "experiment,series,m,N,function,ratio";

// ---------------------------------------------------------------------------
// JSON

namespace detail {

// JSON has no infinities; non-finite numbers travel as strings.
inline nlohmann::json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double num(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

inline nlohmann::json num_map(const std::map<std::string, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[k] = num(v);
  return j;
}

inline std::map<std::string, double> num_map(const nlohmann::json& j) {
  std::map<std::string, double> m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = num(it.value());
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentReport& r) {
  using nlohmann::json;
  json series = json::array();
  for (const auto& s : r.series) {
    json points = json::array();
    for (const auto& p : s.points) {
      json ratios = json::array();
      for (const auto& f : p.ratios)
        ratios.push_back({{"function", f.function}, {"ratio", detail::num(f.ratio)}, {"excluded", f.excluded}});
      points.push_back({{"N", p.N}, {"ratios", ratios}, {"max_ratio", detail::num(p.max_ratio)}, {"argmax", p.argmax}});
    }
    series.push_back({{"name", s.name},
                      {"m", detail::num(s.m)},
                      {"expectation", s.expectation},
                      {"points", points},
                      {"metrics", detail::num_map(s.metrics)},
                      {"verdict", s.verdict},
                      {"pass", s.pass},
                      {"note", s.note}});
  }
  return {{"experiment", r.experiment},
          {"config", r.config},
          {"tolerances", detail::num_map(r.tolerances)},
          {"series", series},
          {"notes", r.notes},
          {"runtime_seconds", r.runtime_seconds},
          {"aborted", r.aborted},
          {"diagnostic", r.diagnostic},
          {"pass", r.pass}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.config = j.at("config").get<std::map<std::string, std::string>>();
  r.tolerances = detail::num_map(j.at("tolerances"));
  for (const auto& js : j.at("series")) {
    Series s;
    s.name = js.at("name").get<std::string>();
    s.m = detail::num(js.at("m"));
    s.expectation = js.at("expectation").get<std::string>();
    for (const auto& jp : js.at("points")) {
      LadderPoint p;
      p.N = jp.at("N").get<std::size_t>();
      for (const auto& jf : jp.at("ratios"))
        p.ratios.push_back({jf.at("function").get<std::string>(), detail::num(jf.at("ratio")),
                            jf.at("excluded").get<std::size_t>()});
      p.max_ratio = detail::num(jp.at("max_ratio"));
      p.argmax = jp.at("argmax").get<std::string>();
      s.points.push_back(std::move(p));
    }
    s.metrics = detail::num_map(js.at("metrics"));
    s.verdict = js.at("verdict").get<std::string>();
    s.pass = js.at("pass").get<bool>();
    s.note = js.at("note").get<std::string>();
    r.series.push_back(std::move(s));
  }
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.runtime_seconds = j.at("runtime_seconds").get<double>();
  r.aborted = j.at("aborted").get<bool>();
  r.diagnostic = j.at("diagnostic").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  return r;
}

inline std::string report_to_text(const ExperimentReport& r) { return to_json(r).dump(2) + "\n"; }

inline ExperimentReport report_from_text(const std::string& text) {
  return report_from_json(nlohmann::json::parse(text));
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string report_to_csv(const ExperimentReport& r) {
  std::string out = std::string(table_header) + "\n";
  for (const auto& s : r.series)
    for (const auto& p : s.points)
      for (const auto& f : p.ratios)
        out += detail::csv_field(r.experiment) + "," + detail::csv_field(s.name) + "," + detail::g17(s.m) + "," +
               std::to_string(p.N) + "," + detail::csv_field(f.function) + "," + detail::g17(f.ratio) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// SVG

inline std::string report_to_svg(const ExperimentReport& r) {
  const double W = 640, H = 400, left = 70, right = 180, top = 40, bottom = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : r.series)
    for (const auto& p : s.points) {
      if (!(p.max_ratio > 0.0) || !std::isfinite(p.max_ratio)) continue;
      xmin = std::min(xmin, std::log2(static_cast<double>(p.N)));
      xmax = std::max(xmax, std::log2(static_cast<double>(p.N)));
      ymin = std::min(ymin, std::log2(p.max_ratio));
      ymax = std::max(ymax, std::log2(p.max_ratio));
    }
  if (xmin > xmax) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (W - left - right); };
  auto Y = [&](double v) { return H - bottom - (v - ymin) / (ymax - ymin) * (H - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"22\" font-size=\"14\">" << r.experiment << ": max ratio vs N</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
    << "\" stroke=\"black\"/>\n";
  for (double v = std::ceil(xmin); v <= xmax + 1e-9; v += 1.0)
    s << "<text x=\"" << X(v) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">" << std::exp2(v)
      << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = ymin + k * (ymax - ymin) / 4;
    s << "<text x=\"" << left - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << std::exp2(v)
      << "</text>\n";
  }
  s << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">N (log scale)</text>\n";
  std::size_t ci = 0;
  for (const auto& sr : r.series) {
    const char* col = colors[ci % 7];
    std::string pts;
    for (const auto& p : sr.points) {
      if (!(p.max_ratio > 0.0) || !std::isfinite(p.max_ratio)) continue;
      const double x = X(std::log2(static_cast<double>(p.N))), y = Y(std::log2(p.max_ratio));
      pts += std::to_string(x) + "," + std::to_string(y) + " ";
      s << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    if (!pts.empty())
      s << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(ci);
    s << "<text x=\"" << W - right + 10 << "\" y=\"" << ly + 4 << "\" fill=\"" << col << "\">" << sr.name << " ("
      << sr.verdict << ")</text>\n";
    ++ci;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace psido::harness
