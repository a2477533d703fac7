#pragma once

// Convergence reports: rows, least-squares slope fits, pass bands, and
// lossless serialization (JSON for machines, CSV for rows, a gnuplot script
// for eyeballs). report.json carries only deterministic content; wall-clock
// timings live in rows.csv.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thinheat/errors.hpp"

namespace thinheat {

struct FitResult {
  double slope = 0.0;
  double r2 = 0.0;
};

// Least squares of log(error) against log(parameter). Throws DegenerateFit
// when fewer than 3 rows or any error is nonpositive (below the noise floor;
// such data is reported, not fitted).
inline FitResult fit_slope(const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 3) throw DegenerateFit("fit_slope: need at least 3 rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (auto [p, e] : rows) {
    if (p <= 0.0) throw DegenerateFit("fit_slope: nonpositive parameter");
    if (e <= 0.0) throw DegenerateFit("fit_slope: error at or below zero (noise floor)");
    double x = std::log(p), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double n = static_cast<double>(rows.size());
  double vxx = sxx - sx * sx / n, vxy = sxy - sx * sy / n, vyy = syy - sy * sy / n;
  if (vxx <= 0.0) throw DegenerateFit("fit_slope: parameters are not distinct");
  FitResult f;
  f.slope = vxy / vxx;
  f.r2 = (vyy > 0.0) ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return f;
}

struct ReportRow {
  double param = 0.0;
  double error = 0.0;
  double disc_error_est = 0.0;
  double runtime_s = 0.0;                  // CSV only
  std::map<std::string, double> extra;     // ordered for determinism
};

struct ConvergenceReport {
  std::string experiment;
  std::string label;
  std::vector<ReportRow> rows;
  std::optional<FitResult> fit;
  std::optional<std::pair<double, double>> slope_band;
  std::optional<double> r2_min;
  bool pass = false;
  bool degenerate = false;
  std::vector<std::string> notes;
  nlohmann::ordered_json provenance;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["label"] = label;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["param"] = r.param;
      row["error"] = r.error;
      row["disc_error_est"] = r.disc_error_est;
      for (const auto& [k, v] : r.extra) row[k] = v;
      j["rows"].push_back(row);
    }
    if (fit) {
      j["fit"]["slope"] = fit->slope;
      j["fit"]["r2"] = fit->r2;
    } else {
      j["fit"] = nullptr;
    }
    if (slope_band) j["slope_band"] = {slope_band->first, slope_band->second};
    if (r2_min) j["r2_min"] = *r2_min;
    j["pass"] = pass;
    j["degenerate"] = degenerate;
    j["notes"] = notes;
    j["provenance"] = provenance;
    return j;
  }

  static ConvergenceReport from_json(const nlohmann::ordered_json& j) {
    ConvergenceReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.label = j.at("label").get<std::string>();
    for (const auto& row : j.at("rows")) {
      ReportRow rr;
      rr.param = row.at("param").get<double>();
      rr.error = row.at("error").get<double>();
      rr.disc_error_est = row.at("disc_error_est").get<double>();
      for (auto it = row.begin(); it != row.end(); ++it)
        if (it.key() != "param" && it.key() != "error" && it.key() != "disc_error_est")
          rr.extra[it.key()] = it.value().get<double>();
      r.rows.push_back(rr);
    }
    if (!j.at("fit").is_null())
      r.fit = FitResult{j["fit"]["slope"].get<double>(), j["fit"]["r2"].get<double>()};
    if (j.contains("slope_band"))
      r.slope_band = {j["slope_band"][0].get<double>(), j["slope_band"][1].get<double>()};
    if (j.contains("r2_min")) r.r2_min = j["r2_min"].get<double>();
    r.pass = j.at("pass").get<bool>();
    r.degenerate = j.at("degenerate").get<bool>();
    for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    r.provenance = j.at("provenance");
    return r;
  }

  std::string to_csv() const {
    std::vector<std::string> keys;
    for (const auto& r : rows)
      for (const auto& [k, v] : r.extra)
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    std::string out = "param,error,disc_error_est,runtime_seconds";
    for (const auto& k : keys) out += "," + k;
    out += "\n";
    char buf[64];
    auto put = [&](double v, bool comma) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (comma) out += ",";
      out += buf;
    };
    for (const auto& r : rows) {
      put(r.param, false);
      put(r.error, true);
      put(r.disc_error_est, true);
      put(r.runtime_s, true);
      for (const auto& k : keys) {
        auto it = r.extra.find(k);
        put(it == r.extra.end() ? 0.0 : it->second, true);
      }
      out += "\n";
    }
    return out;
  }

  std::string to_plot_script() const {
    std::string s;
    s += "# gnuplot script: log-log error vs parameter\n";
    s += "set logscale xy\nset xlabel 'parameter'\nset ylabel 'error'\n";
    s += "set title '" + experiment + " / " + label + "'\n";
    if (fit) {
      char buf[append_len];
      std::snprintf(buf, sizeof buf, "# fitted slope %.4f, r2 %.6f\n", fit->slope, fit->r2);
      s += buf;
    }
    s += "plot '-' using 1:2 with linespoints title 'error'\n";
    char buf[append_len];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.12g %.12g\n", r.param, r.error);
      s += buf;
    }
    s += "e\n";
    return s;
  }

 private:
  static constexpr std::size_t append_len = 96;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + path);
  f << content;
}

}  // namespace thinheat
