#pragma once

// Regression specifications (JSON), the four activity presets, assembly of
// the district data table and the report renderings.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "streetsafe/activity.hpp"
#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/geodata.hpp"
#include "streetsafe/stepwise.hpp"
#include "streetsafe/transform.hpp"
#include "streetsafe/weights.hpp"

namespace streetsafe::regression {

using nlohmann::json;

struct Variable {
  std::string name;   ///< key resolved against the district table
  std::string label;  ///< display name
  stats::Transform transform = stats::Transform::none;
};

struct RegressionSpec {
  std::string name;
  std::string title;
  Variable dependent;
  std::vector<Variable> covariates;
  stats::StepwiseConfig stepwise;
  double log_offset = 0.0;
  bool apply_urban_filter = true;
  /// Tag (e.g. "city") whose values define separately fitted groups.
  std::optional<std::string> split_by;
};

inline Variable var(std::string name, std::string label, stats::Transform t = stats::Transform::none) {
  return {std::move(name), std::move(label), t};
}

/**
 * Built-in specifications: "people" (R_p), "women" (R_f), "young" (R_<30)
 * and "elderly" (R_>50). Transform tags follow the published model tables:
 * log for the people model's densities and the young model, cube root for
 * the resident-share covariates of the women and elderly models.
 */
inline RegressionSpec preset(const std::string& name) {
  using stats::Transform;
  RegressionSpec s;
  s.name = name;
  if (name == "people") {
    s.title = "Presence of people";
    s.dependent = var("R_p", "Presence of people", Transform::log);
    s.covariates = {var("pop_density", "Population density", Transform::log),
                    var("employee_density", "Employees density", Transform::log),
                    var("deprivation", "Deprivation"), var("dist_centre", "Distance centre"),
                    var("safety", "Safety appearance")};
  } else if (name == "women") {
    s.title = "Presence of women";
    s.dependent = var("R_f", "Presence of women");
    s.covariates = {var("pct_women", "% of women (residents)", Transform::cube_root),
                    var("deprivation", "Deprivation"), var("dist_centre", "Distance centre"),
                    var("safety", "Safety perception")};
  } else if (name == "young") {
    s.title = "Presence of people younger than 30";
    s.dependent = var("R_young", "Presence of people younger than 30", Transform::log);
    s.covariates = {var("pct_young", "% of younger residents", Transform::log),
                    var("deprivation", "Deprivation"), var("dist_centre", "Distance centre"),
                    var("safety", "Safety perception")};
  } else if (name == "elderly") {
    s.title = "Presence of elderly people";
    s.dependent = var("R_old", "Presence of elderly people");
    s.covariates = {var("pct_elderly", "% of elderly residents", Transform::cube_root),
                    var("deprivation", "Deprivation"), var("dist_centre", "Distance centre"),
                    var("safety", "Safety perception")};
  } else {
    throw InvalidInput("unknown regression preset '" + name + "' (people|women|young|elderly)");
  }
  return s;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"people", "women", "young", "elderly"};
  return names;
}

namespace detail {

inline Variable parse_variable(const json& j, const std::string& source, const std::string& field) {
  if (j.is_string()) return {j.get<std::string>(), j.get<std::string>(), stats::Transform::none};
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
    throw SchemaError(source, field, "expected a name or {\"name\":..,\"transform\":..}");
  Variable v;
  v.name = j.at("name").get<std::string>();
  v.label = j.value("label", v.name);
  try {
    v.transform = stats::parse_transform(j.value("transform", "none"));
  } catch (const InvalidInput& e) {
    throw SchemaError(source, field + ".transform", e.what());
  }
  return v;
}

}  // namespace detail

/**
 * A specification document is either {"preset": "<name>", ...overrides} or a
 * full spec:
 *   {"name": "...", "dependent": {"name": "R_p", "transform": "log"},
 *    "covariates": [{"name": "safety"}, ...],
 *    "stop_p": 0.10, "n_permutations": 999, "candidate_ratio": 0.25,
 *    "seed": 1, "log_offset": 0, "urban_filter": true,
 *    "row_standardize": false, "split_by": "city"}
 */
inline RegressionSpec parse_spec(const json& j, const std::string& source) {
  if (j.is_string()) return preset(j.get<std::string>());
  if (!j.is_object()) throw SchemaError(source, "spec", "expected an object or preset name");
  RegressionSpec s;
  if (j.contains("preset")) {
    try {
      s = preset(j.at("preset").get<std::string>());
    } catch (const InvalidInput& e) {
      throw SchemaError(source, "preset", e.what());
    }
  } else {
    if (!j.contains("dependent")) throw SchemaError(source, "dependent", "missing");
    if (!j.contains("covariates") || !j.at("covariates").is_array() || j.at("covariates").empty())
      throw SchemaError(source, "covariates", "missing or empty");
  }
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (s.name.empty()) s.name = "regression";
  if (j.contains("title")) s.title = j.at("title").get<std::string>();
  if (j.contains("dependent")) s.dependent = detail::parse_variable(j.at("dependent"), source, "dependent");
  if (j.contains("covariates")) {
    s.covariates.clear();
    for (std::size_t i = 0; i < j.at("covariates").size(); ++i)
      s.covariates.push_back(
          detail::parse_variable(j.at("covariates")[i], source, "covariates[" + std::to_string(i) + "]"));
  }
  if (s.title.empty()) s.title = s.dependent.label;
  auto num = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) throw SchemaError(source, key, "expected a number");
    target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  num("stop_p", s.stepwise.stop_p);
  num("n_permutations", s.stepwise.n_permutations);
  num("candidate_ratio", s.stepwise.candidate_ratio);
  num("seed", s.stepwise.seed);
  num("log_offset", s.log_offset);
  if (j.contains("max_eigenvectors")) s.stepwise.max_eigenvectors = j.at("max_eigenvectors").get<int>();
  if (j.contains("urban_filter")) s.apply_urban_filter = j.at("urban_filter").get<bool>();
  if (j.contains("row_standardize")) s.stepwise.row_standardize = j.at("row_standardize").get<bool>();
  if (j.contains("split_by") && !j.at("split_by").is_null()) s.split_by = j.at("split_by").get<std::string>();
  try {
    s.stepwise.validate();
  } catch (const InvalidInput& e) {
    throw SchemaError(source, "stepwise", e.what());
  }
  return s;
}

/// Regression input: districts joined with their activity metrics.
struct DistrictTable {
  std::vector<geodata::District> districts;
  std::map<std::string, activity::ActivityMetrics> metrics;
};

/// Activity metrics CSV as written by the metrics stage; rows flagged
/// missing (or with empty fields) are skipped.
inline std::map<std::string, activity::ActivityMetrics> parse_metrics(const csv::Table& t) {
  const auto id = t.column("district_id");
  const auto rp = t.column("R_p");
  const auto rf = t.column("R_f");
  const auto ry = t.column("R_young");
  const auto ro = t.column("R_old");
  std::map<std::string, activity::ActivityMetrics> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.rows()[r];
    if (row[rp].empty() || row[rf].empty() || row[ry].empty() || row[ro].empty()) continue;
    if (t.has_column("missing") && row[t.column("missing")] == "1") continue;
    activity::ActivityMetrics m;
    m.R_p = t.number(r, rp);
    m.R_f = t.number(r, rf);
    m.R_young = t.number(r, ry);
    m.R_old = t.number(r, ro);
    if (t.has_column("people") && !row[t.column("people")].empty()) m.people = t.number(r, t.column("people"));
    out[row[id]] = m;
  }
  return out;
}

/// Value of a named variable for one district, if available.
inline std::optional<double> lookup(const geodata::District& d, const activity::ActivityMetrics* m,
                                    const std::string& name) {
  const auto& c = d.census;
  if (m) {
    if (name == "R_p") return m->R_p;
    if (name == "R_f") return m->R_f;
    if (name == "R_young") return m->R_young;
    if (name == "R_old") return m->R_old;
  }
  if (name == "pop_density") {
    if (!c.population) return std::nullopt;
    return *c.population / d.area_km2();
  }
  if (name == "employee_density") {
    if (!c.employees) return std::nullopt;
    return *c.employees / d.area_km2();
  }
  if (name == "safety") {
    auto it = d.values.find("safety_score");
    if (it == d.values.end()) return std::nullopt;
    return it->second;
  }
  if (name == "population") return c.population;
  if (name == "employees") return c.employees;
  if (name == "deprivation") return c.deprivation;
  if (name == "pct_women") return c.pct_women;
  if (name == "pct_young") return c.pct_young;
  if (name == "pct_elderly") return c.pct_elderly;
  if (name == "dist_centre") return c.dist_centre;
  if (name == "urban_fraction") return c.urban_fraction;
  if (name == "area_i") return d.area_km2();
  auto it = d.values.find(name);
  if (it != d.values.end()) return it->second;
  return std::nullopt;
}

struct Outcome {
  std::string name;
  std::string title;
  std::string group;  ///< split_by value, empty when pooled
  RegressionSpec spec;
  stats::RegressionResult result;
  std::vector<std::string> district_ids;  ///< rows used, in order
  std::vector<std::string> dropped;       ///< excluded: missing value or not urban
  std::vector<std::string> warnings;
};

/// Fits one specification on one set of districts.
inline Outcome fit(const RegressionSpec& spec, const std::vector<geodata::District>& districts,
                   const std::map<std::string, activity::ActivityMetrics>& metrics, const std::string& group = {}) {
  Outcome out;
  out.name = spec.name;
  out.title = spec.title;
  out.group = group;
  out.spec = spec;

  std::vector<const geodata::District*> rows;
  std::vector<std::vector<double>> values;
  for (const auto& d : districts) {
    if (spec.apply_urban_filter) {
      if (!d.census.urban_fraction) {
        out.warnings.push_back("district '" + d.id + "' has no urban_fraction; excluded");
        out.dropped.push_back(d.id);
        continue;
      }
      if (!(*d.census.urban_fraction > 0.5)) {
        out.dropped.push_back(d.id);
        continue;
      }
    }
    const auto mit = metrics.find(d.id);
    const activity::ActivityMetrics* m = mit == metrics.end() ? nullptr : &mit->second;
    std::vector<const Variable*> wanted{&spec.dependent};
    for (const auto& v : spec.covariates) wanted.push_back(&v);
    std::vector<double> row;
    bool complete = true;
    for (const Variable* v : wanted) {
      const auto x = lookup(d, m, v->name);
      if (!x || !std::isfinite(*x)) {
        complete = false;
        break;
      }
      row.push_back(*x);
    }
    if (!complete) {
      out.dropped.push_back(d.id);
      continue;
    }
    rows.push_back(&d);
    values.push_back(std::move(row));
  }

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(spec.covariates.size());
  if (n < p + 3) {
    throw InvalidInput("regression '" + spec.name + "'" + (group.empty() ? "" : " [" + group + "]") + ": only " +
                       std::to_string(n) + " complete districts");
  }
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    y[i] = values[i][0];
    for (int j = 0; j < p; ++j) X(i, j) = values[i][j + 1];
  }
  auto apply = [&](const Eigen::VectorXd& col, const Variable& v) {
    try {
      return stats::transform(col, v.transform, spec.log_offset);
    } catch (const DomainError& e) {
      throw DomainError("variable '" + v.name + "': " + e.what());
    }
  };
  y = apply(y, spec.dependent);
  for (int j = 0; j < p; ++j) X.col(j) = apply(X.col(j), spec.covariates[j]);

  std::vector<geo::MultiPolygon> shapes;
  shapes.reserve(rows.size());
  for (const auto* d : rows) {
    shapes.push_back(d->geometry);
    out.district_ids.push_back(d->id);
  }
  auto queen = stats::queen_weights(shapes);
  out.warnings.insert(out.warnings.end(), queen.warnings.begin(), queen.warnings.end());

  std::vector<std::string> names;
  for (const auto& v : spec.covariates) names.push_back(v.name);
  out.result = stats::stepwise_filter_regress(y, X, names, queen.weights, spec.stepwise);
  return out;
}

/// Pooled fit, or one fit per value of `spec.split_by`.
inline std::vector<Outcome> run(const RegressionSpec& spec, const DistrictTable& table) {
  if (!spec.split_by) return {fit(spec, table.districts, table.metrics)};
  std::map<std::string, std::vector<geodata::District>> groups;
  for (const auto& d : table.districts) {
    auto it = d.tags.find(*spec.split_by);
    if (it == d.tags.end())
      throw SchemaError("districts", *spec.split_by, "district '" + d.id + "' lacks the split_by property");
    groups[it->second].push_back(d);
  }
  std::vector<Outcome> out;
  for (const auto& [g, ds] : groups) out.push_back(fit(spec, ds, table.metrics, g));
  return out;
}

// --- reports ------------------------------------------------------------------

inline json moran_json(const stats::MoranResult& m) {
  return {{"I", m.I}, {"expected", m.expected}, {"p_value", m.p_value}, {"n_permutations", m.n_permutations}};
}

inline json coefficient_json(const stats::Coefficient& c, const std::string& label) {
  return {{"name", c.name}, {"label", label},     {"beta", c.beta},
          {"std_error", c.std_error}, {"t", c.t}, {"p_value", c.p_value}};
}

inline json to_json(const Outcome& o) {
  json j;
  j["name"] = o.name;
  j["title"] = o.title;
  if (!o.group.empty()) j["group"] = o.group;
  j["dependent"] = {{"name", o.spec.dependent.name}, {"transform", stats::to_string(o.spec.dependent.transform)}};
  j["n"] = o.result.n;
  json coefs = json::array();
  for (std::size_t i = 0; i < o.result.coefficients.size(); ++i) {
    json c = coefficient_json(o.result.coefficients[i], o.spec.covariates[i].label);
    c["transform"] = stats::to_string(o.spec.covariates[i].transform);
    coefs.push_back(c);
  }
  j["coefficients"] = coefs;
  j["intercept"] = coefficient_json(o.result.intercept, "(intercept)");
  j["r2"] = o.result.r2;
  j["adj_r2"] = o.result.adj_r2;
  j["n_eigenvectors_selected"] = o.result.n_eigenvectors_selected();
  j["selected_eigenvectors"] = o.result.selected;
  j["candidate_eigenvectors"] = o.result.candidates;
  j["initial_moran"] = moran_json(o.result.initial_moran);
  j["residual_moran"] = moran_json(o.result.residual_moran);
  j["dropped"] = o.dropped;
  j["warnings"] = o.warnings;
  return j;
}

inline std::string stars(double p) {
  if (p < 0.001) return "**";
  if (p < 0.01) return "*";
  return "";
}

inline std::string transform_mark(stats::Transform t) {
  switch (t) {
    case stats::Transform::log: return " (log)";
    case stats::Transform::cube_root: return " (cbrt)";
    default: return "";
  }
}

/// Model table: β with significance stars, filter size, fit and residual
/// autocorrelation.
inline std::string to_table(const Outcome& o) {
  std::ostringstream ss;
  char buf[160];
  const int width = 44;
  const std::string rule(static_cast<std::size_t>(width), '-');
  ss << o.title << transform_mark(o.spec.dependent.transform);
  if (!o.group.empty()) ss << " [" << o.group << "]";
  ss << '\n' << rule << '\n';
  for (std::size_t i = 0; i < o.result.coefficients.size(); ++i) {
    const auto& c = o.result.coefficients[i];
    const std::string label = o.spec.covariates[i].label + transform_mark(o.spec.covariates[i].transform);
    std::snprintf(buf, sizeof buf, "%-32s %8.3f%-2s\n", label.c_str(), c.beta, stars(c.p_value).c_str());
    ss << buf;
  }
  ss << rule << '\n';
  std::snprintf(buf, sizeof buf, "%-32s %8d\n", "Spatial Eigenvectors", o.result.n_eigenvectors_selected());
  ss << buf;
  std::snprintf(buf, sizeof buf, "%-32s %8.2f\n", "Adj-R2", o.result.adj_r2);
  ss << buf;
  std::snprintf(buf, sizeof buf, "%-26s %7.2f (%.2f)\n", "Moran's I (p-value)", o.result.residual_moran.I,
                o.result.residual_moran.p_value);
  ss << buf;
  ss << rule << '\n' << "n = " << o.result.n << "; * p<0.01, ** p<0.001\n";
  return ss.str();
}

}  // namespace streetsafe::regression
