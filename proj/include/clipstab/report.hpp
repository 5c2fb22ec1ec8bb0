#pragma once

// ScalingReport and its CSV / JSON / SVG serializations. Every floating-point
// value is written with 17 significant digits so files round-trip exactly.

#include <clipstab/core.hpp>
#include <clipstab/scaling.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace clipstab {

inline constexpr const char* kCodeVersion = "clipstab 1.0.0";

struct ReportRow {
  double lambda = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ScalingReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double rms = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::string code_version = kCodeVersion;
  bool partial = false;
  std::string error;
  std::vector<std::pair<std::string, double>> metrics;  // named scalar results

  double metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return v;
    throw ConfigError("report has no metric '" + key + "'");
  }

  /// Fits the exponent of estimate against λ over rows with positive estimates.
  void fit() {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : rows) {
      xs.push_back(r.lambda);
      ys.push_back(r.estimate);
    }
    const auto f = fit_loglog(xs, ys);
    exponent = f.exponent;
    intercept = f.intercept;
    rms = f.rms;
  }
};

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_report_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double d = std::stod(s, &pos);
  if (pos != s.size()) throw ConfigError("malformed number '" + s + "'");
  return d;
}

inline constexpr const char* kCsvHeader = "experiment,lambda,m,n,estimate,std_error,exponent,seed";

inline std::string to_csv(const ScalingReport& r) {
  std::ostringstream o;
  o << kCsvHeader << "\n";
  for (const auto& row : r.rows)
    o << r.experiment << ',' << format_double(row.lambda) << ',' << row.m << ',' << row.n << ','
      << format_double(row.estimate) << ',' << format_double(row.std_error) << ',' << format_double(r.exponent) << ','
      << row.seed << "\n";
  if (r.rows.empty()) return o.str();
  o << "# exponent=" << format_double(r.exponent) << "\n";
  o << "# intercept=" << format_double(r.intercept) << "\n";
  o << "# rms=" << format_double(r.rms) << "\n";
  o << "# config_hash=" << r.config_hash << "\n";
  o << "# master_seed=" << r.master_seed << "\n";
  o << "# code_version=" << r.code_version << "\n";
  o << "# partial=" << (r.partial ? 1 : 0) << "\n";
  if (!r.error.empty()) o << "# error=" << r.error << "\n";
  for (const auto& [k, v] : r.metrics) o << "# metric." << k << "=" << format_double(v) << "\n";
  return o.str();
}

inline ScalingReport read_csv(const std::string& text) {
  ScalingReport r;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != kCsvHeader) throw ConfigError("CSV report: missing header");
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string val = line.substr(eq + 1);
      if (key == "exponent") r.exponent = parse_report_double(val);
      else if (key == "intercept") r.intercept = parse_report_double(val);
      else if (key == "rms") r.rms = parse_report_double(val);
      else if (key == "config_hash") r.config_hash = std::stoull(val);
      else if (key == "master_seed") r.master_seed = std::stoull(val);
      else if (key == "code_version") r.code_version = val;
      else if (key == "partial") r.partial = val == "1";
      else if (key == "error") r.error = val;
      else if (key.rfind("metric.", 0) == 0) r.metrics.emplace_back(key.substr(7), parse_report_double(val));
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ConfigError("CSV report: expected 8 columns in '" + line + "'");
    r.experiment = f[0];
    ReportRow row;
    row.lambda = parse_report_double(f[1]);
    row.m = std::stoull(f[2]);
    row.n = std::stoull(f[3]);
    row.estimate = parse_report_double(f[4]);
    row.std_error = parse_report_double(f[5]);
    r.exponent = parse_report_double(f[6]);
    row.seed = std::stoull(f[7]);
    r.rows.push_back(row);
  }
  return r;
}

namespace detail {

inline nlohmann::ordered_json json_number(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

inline double json_to_double(const nlohmann::ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline std::string to_json(const ScalingReport& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.experiment;
  j["exponent"] = detail::json_number(r.exponent);
  j["intercept"] = detail::json_number(r.intercept);
  j["rms"] = detail::json_number(r.rms);
  j["config_hash"] = r.config_hash;
  j["master_seed"] = r.master_seed;
  j["code_version"] = r.code_version;
  j["partial"] = r.partial;
  j["error"] = r.error;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json e;
    e["lambda"] = detail::json_number(row.lambda);
    e["m"] = row.m;
    e["n"] = row.n;
    e["estimate"] = detail::json_number(row.estimate);
    e["std_error"] = detail::json_number(row.std_error);
    e["seed"] = row.seed;
    rows.push_back(e);
  }
  j["rows"] = rows;
  auto metrics = nlohmann::ordered_json::array();
  for (const auto& [k, v] : r.metrics) metrics.push_back({{"name", k}, {"value", detail::json_number(v)}});
  j["metrics"] = metrics;
  return j.dump(2) + "\n";
}

inline ScalingReport read_json(const std::string& text) {
  ScalingReport r;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    r.experiment = j.at("experiment").get<std::string>();
    r.exponent = detail::json_to_double(j.at("exponent"));
    r.intercept = detail::json_to_double(j.at("intercept"));
    r.rms = detail::json_to_double(j.at("rms"));
    r.config_hash = j.at("config_hash").get<std::uint64_t>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.code_version = j.at("code_version").get<std::string>();
    r.partial = j.at("partial").get<bool>();
    r.error = j.at("error").get<std::string>();
    for (const auto& e : j.at("rows")) {
      ReportRow row;
      row.lambda = detail::json_to_double(e.at("lambda"));
      row.m = e.at("m").get<std::size_t>();
      row.n = e.at("n").get<std::size_t>();
      row.estimate = detail::json_to_double(e.at("estimate"));
      row.std_error = detail::json_to_double(e.at("std_error"));
      row.seed = e.at("seed").get<std::uint64_t>();
      r.rows.push_back(row);
    }
    for (const auto& e : j.at("metrics"))
      r.metrics.emplace_back(e.at("name").get<std::string>(), detail::json_to_double(e.at("value")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("JSON report: ") + e.what());
  }
  return r;
}

/// Log-log scatter of estimate against λ with the fitted line.
inline std::string to_svg(const ScalingReport& r) {
  const double w = 480;
  const double h = 360;
  const double pad = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows)
    if (row.lambda > 0 && row.estimate > 0) pts.emplace_back(std::log10(row.lambda), std::log10(row.estimate));
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << r.experiment
    << " exponent=" << format_double(r.exponent) << "</text>\n";
  o << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
    << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" font-size=\"12\">log10 lambda</text>\n";
  o << "<text x=\"5\" y=\"" << h / 2 << "\" font-size=\"12\">log10 est</text>\n";
  if (!pts.empty()) {
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto sx = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); };
    auto sy = [&](double y) { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); };
    for (const auto& [x, y] : pts)
      o << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    if (std::isfinite(r.exponent) && std::isfinite(r.intercept)) {
      // intercept is a natural-log value; convert the line to base 10
      auto line = [&](double lx) { return r.intercept / std::log(10.0) + r.exponent * lx; };
      o << "<line x1=\"" << sx(x0) << "\" y1=\"" << sy(line(x0)) << "\" x2=\"" << sx(x1) << "\" y2=\""
        << sy(line(x1)) << "\" stroke=\"firebrick\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

inline std::string render_report(const ScalingReport& r, const std::string& format) {
  if (format == "csv") return to_csv(r);
  if (format == "json") return to_json(r);
  if (format == "svg") return to_svg(r);
  throw ConfigError("unknown report format '" + format + "'");
}

/// Writes <dir>/<experiment>.<format> and returns the path.
inline std::string emit_report(const ScalingReport& r, const std::string& format, const std::string& dir) {
  const std::string body = render_report(r, format);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = (std::filesystem::path(dir) / (r.experiment + "." + format)).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report '" + path + "'");
  out << body;
  if (!out) throw Error("I/O error while writing report '" + path + "'");
  return path;
}

}  // namespace clipstab
