#pragma once

// Pipeline stages behind the command-line tool. Each stage reads and
// validates all of its inputs, computes, and only then writes its outputs
// plus a run manifest (input hashes, parameters, output list).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "streetsafe/activity.hpp"
#include "streetsafe/correlation.hpp"
#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/geodata.hpp"
#include "streetsafe/geojson.hpp"
#include "streetsafe/image.hpp"
#include "streetsafe/occlusion.hpp"
#include "streetsafe/process_scorer.hpp"
#include "streetsafe/random.hpp"
#include "streetsafe/ranking.hpp"
#include "streetsafe/regression.hpp"
#include "streetsafe/scorer.hpp"

namespace streetsafe::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  fs::path out = "out";

  // inputs
  fs::path votes;
  fs::path region;
  fs::path images;     ///< image manifest: image_id,lat,lon,heading,path
  fs::path records;    ///< score records CSV
  fs::path districts;  ///< districts GeoJSON (aggregated one for `regress`)
  fs::path cells;      ///< CDR cell polygons GeoJSON
  fs::path counts;     ///< hourly counts CSV
  fs::path metrics;    ///< activity metrics CSV
  fs::path image;      ///< single image for `occlude`

  // scorer
  std::string scorer_cmd;
  std::string synthetic;  ///< synthetic scorer kind, used when scorer_cmd is empty
  bool augment = true;    ///< crop averaging in `score`
  int scorer_timeout_ms = 30000;

  ranking::RatingConfig rating;
  double grid_density = 100.0;
  scorer::CropConfig crops;
  occlusion::OcclusionConfig occlusion;
  activity::WindowRule window = activity::WindowRule::mean_daily;
  std::string cell_id_key = "cell_id";
  std::vector<regression::RegressionSpec> regressions;

  // validate
  fs::path validate_a, validate_b;
  std::string validate_key = "id";
  std::string validate_column_a = "score";
  std::string validate_column_b = "score";
  std::string validate_label;
};

namespace detail {

template <class T>
void take(const json& j, const char* key, T& target, const std::string& source) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(source, key, e.what());
  }
}

inline void take_path(const json& j, const char* key, fs::path& target, const fs::path& base,
                      const std::string& source) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  if (!j.at(key).is_string()) throw SchemaError(source, key, "expected a path string");
  fs::path p = j.at(key).get<std::string>();
  target = p.is_relative() ? base / p : p;
}

inline activity::WindowRule parse_window(const std::string& s, const std::string& source) {
  if (s == "mean_daily") return activity::WindowRule::mean_daily;
  if (s == "sum") return activity::WindowRule::sum;
  throw SchemaError(source, "window", "expected mean_daily|sum, got '" + s + "'");
}

}  // namespace detail

/**
 * Reads a JSON config. Relative paths resolve against the config file's
 * directory. Unknown keys are ignored.
 */
inline PipelineConfig parse_config(const json& j, const fs::path& base, const std::string& source) {
  if (!j.is_object()) throw SchemaError(source, "config", "expected an object");
  PipelineConfig c;
  detail::take(j, "seed", c.seed, source);
  detail::take(j, "jobs", c.jobs, source);
  detail::take_path(j, "out", c.out, base, source);
  if (!j.contains("out")) c.out = base / "out";
  detail::take_path(j, "votes", c.votes, base, source);
  detail::take_path(j, "region", c.region, base, source);
  detail::take_path(j, "images", c.images, base, source);
  detail::take_path(j, "records", c.records, base, source);
  detail::take_path(j, "districts", c.districts, base, source);
  detail::take_path(j, "cells", c.cells, base, source);
  detail::take_path(j, "counts", c.counts, base, source);
  detail::take_path(j, "metrics", c.metrics, base, source);
  detail::take_path(j, "image", c.image, base, source);
  detail::take(j, "scorer_cmd", c.scorer_cmd, source);
  detail::take(j, "synthetic", c.synthetic, source);
  detail::take(j, "augment", c.augment, source);
  detail::take(j, "scorer_timeout_ms", c.scorer_timeout_ms, source);
  detail::take(j, "grid_density", c.grid_density, source);
  detail::take(j, "cell_id_key", c.cell_id_key, source);
  if (j.contains("window")) c.window = detail::parse_window(j.at("window").get<std::string>(), source);

  if (j.contains("ranking")) {
    const json& r = j.at("ranking");
    detail::take(r, "mu0", c.rating.mu0, source);
    detail::take(r, "sigma0", c.rating.sigma0, source);
    detail::take(r, "beta", c.rating.beta, source);
    detail::take(r, "tau", c.rating.tau, source);
    detail::take(r, "draw_probability", c.rating.draw_probability, source);
    detail::take(r, "sweeps", c.rating.sweeps, source);
    if (r.contains("score_basis")) {
      const auto b = r.at("score_basis").get<std::string>();
      if (b == "conservative") c.rating.basis = ranking::ScoreBasis::conservative;
      else if (b == "mean") c.rating.basis = ranking::ScoreBasis::mean;
      else throw SchemaError(source, "ranking.score_basis", "expected conservative|mean");
    }
  }
  if (j.contains("crops")) {
    const json& r = j.at("crops");
    detail::take(r, "k1", c.crops.k1, source);
    detail::take(r, "k2", c.crops.k2, source);
    detail::take(r, "n", c.crops.n, source);
    if (r.contains("max_iou") && !r.at("max_iou").is_null()) c.crops.max_iou = r.at("max_iou").get<double>();
  }
  if (j.contains("occlusion")) {
    const json& r = j.at("occlusion");
    detail::take(r, "n_patches", c.occlusion.n_patches, source);
    detail::take(r, "min_size", c.occlusion.min_size, source);
    detail::take(r, "max_size", c.occlusion.max_size, source);
    detail::take(r, "augmented", c.occlusion.augmented, source);
  }
  if (j.contains("regressions")) {
    const json& r = j.at("regressions");
    if (!r.is_array()) throw SchemaError(source, "regressions", "expected an array");
    for (const auto& spec : r) c.regressions.push_back(regression::parse_spec(spec, source));
  }
  if (j.contains("validate")) {
    const json& r = j.at("validate");
    detail::take_path(r, "a", c.validate_a, base, source);
    detail::take_path(r, "b", c.validate_b, base, source);
    detail::take(r, "key", c.validate_key, source);
    detail::take(r, "column_a", c.validate_column_a, source);
    detail::take(r, "column_b", c.validate_column_b, source);
    detail::take(r, "label", c.validate_label, source);
  }
  return c;
}

inline PipelineConfig read_config(const fs::path& path) {
  const json j = geojson::read_json(path.string());
  return parse_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path(), path.string());
}

/// Propagates the global seed into every stochastic stage.
inline void apply_seed(PipelineConfig& c) {
  c.rating.seed = derive_seed(c.seed, std::string_view("rank"));
  c.crops.seed = derive_seed(c.seed, std::string_view("crops"));
  c.occlusion.seed = derive_seed(c.seed, std::string_view("occlusion"));
  c.occlusion.crops = c.crops;
  for (auto& r : c.regressions) {
    r.stepwise.seed = derive_seed(c.seed, "regress:" + r.name);
    r.stepwise.jobs = c.jobs;
  }
}

// --- files and manifest -----------------------------------------------------------

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw SchemaError(p.string(), "file", "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw InvalidInput(std::string("missing input: ") + what);
  if (!fs::is_regular_file(p)) throw SchemaError(p.string(), what, "file does not exist");
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Collects outputs in memory; `commit` writes them and the manifest.
class Run {
 public:
  Run(std::string command, const PipelineConfig& config) : command_(std::move(command)), config_(config) {}

  void input(const std::string& role, const fs::path& p) {
    inputs_.push_back({{"role", role}, {"path", p.string()}, {"fnv1a64", hex64(stable_hash(read_file(p)))}});
  }
  void param(const std::string& key, json value) { params_[key] = std::move(value); }
  void output(const std::string& name, std::string content) { outputs_.emplace_back(name, std::move(content)); }
  void note(const std::string& message) { notes_.push_back(message); }

  const std::vector<std::pair<std::string, std::string>>& outputs() const { return outputs_; }

  json manifest() const {
    json files = json::array();
    for (const auto& [name, content] : outputs_)
      files.push_back({{"path", name}, {"fnv1a64", hex64(stable_hash(content))}});
    return {{"command", command_}, {"version", kVersion}, {"seed", config_.seed}, {"inputs", inputs_},
            {"parameters", params_}, {"outputs", files}, {"notes", notes_}};
  }

  void commit() const {
    fs::create_directories(config_.out);
    for (const auto& [name, content] : outputs_) write(config_.out / name, content);
    write(config_.out / ("manifest_" + command_ + ".json"), manifest().dump(2) + "\n");
  }

 private:
  static void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << content;
    if (!out) throw Error("write failed: " + p.string());
  }

  std::string command_;
  const PipelineConfig& config_;
  json inputs_ = json::array();
  json params_ = json::object();
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::vector<std::string> notes_;
};

// --- stages -----------------------------------------------------------------------

/// votes CSV -> scores.csv
inline Run rank(const PipelineConfig& c) {
  Run run("rank", c);
  require_file(c.votes, "votes");
  run.input("votes", c.votes);
  const auto votes = ranking::parse_votes(csv::Table::read(c.votes.string()));
  const auto report = ranking::score_images(votes, c.rating);
  run.param("draw_probability", c.rating.draw_probability);
  run.param("score_basis", c.rating.basis == ranking::ScoreBasis::conservative ? "conservative" : "mean");
  run.param("sweeps", c.rating.sweeps);
  for (const auto& e : report.rejected) run.note("vote " + std::to_string(e.index + 1) + ": " + e.message);
  run.output("scores.csv", ranking::scores_csv(report));
  return run;
}

/// region GeoJSON -> points.csv (one row per location and heading)
inline Run grid(const PipelineConfig& c) {
  Run run("grid", c);
  require_file(c.region, "region");
  run.input("region", c.region);
  const auto region = geojson::parse_region(geojson::read_json(c.region.string()), c.region.string());
  const auto points = geodata::generate_grid(region, c.grid_density);
  run.param("density_per_km2", c.grid_density);
  csv::Writer w({"location_id", "image_id", "lat", "lon", "heading"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string loc = "L" + std::to_string(i);
    for (double h : points[i].headings) {
      const std::string hs = std::to_string(static_cast<int>(h));
      w.row({loc, loc + "_" + hs, csv::format_number(points[i].lat), csv::format_number(points[i].lon), hs});
    }
  }
  run.param("n_locations", points.size());
  run.output("points.csv", w.str());
  return run;
}

/// Factory for scorer handles: one per worker thread.
inline std::function<std::unique_ptr<scorer::Scorer>()> scorer_factory(const PipelineConfig& c) {
  if (!c.scorer_cmd.empty()) {
    scorer::ProcessScorerOptions opt;
    opt.timeout_ms = c.scorer_timeout_ms;
    const std::string cmd = c.scorer_cmd;
    return [cmd, opt] { return std::make_unique<scorer::ProcessScorer>(cmd, opt); };
  }
  if (c.synthetic.empty()) throw InvalidInput("no scorer: set scorer_cmd or synthetic");
  (void)scorer::synthetic_scorer(c.synthetic);  // validate the kind up front
  const std::string kind = c.synthetic;
  return [kind] { return scorer::synthetic_scorer(kind); };
}

/// image manifest -> records.csv. Rows whose image file is missing are
/// discarded and counted.
inline Run score(const PipelineConfig& c) {
  Run run("score", c);
  require_file(c.images, "images");
  run.input("images", c.images);
  const csv::Table t = csv::Table::read(c.images.string());
  const auto ii = t.column("image_id"), la = t.column("lat"), lo = t.column("lon"), he = t.column("heading"),
             pa = t.column("path");
  const fs::path base = c.images.parent_path();

  struct Job {
    geodata::ScoreRecord record;
    fs::path path;
  };
  std::vector<Job> jobs;
  std::size_t discarded = 0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.rows()[r];
    geodata::ScoreRecord rec{row[ii], t.number(r, la), t.number(r, lo), t.number(r, he), 0.0};
    if (row[pa].empty()) {
      ++discarded;
      continue;
    }
    fs::path p = row[pa];
    if (p.is_relative()) p = base / p;
    if (!fs::is_regular_file(p)) {
      ++discarded;
      continue;
    }
    jobs.push_back({std::move(rec), std::move(p)});
  }
  c.crops.validate();
  auto make = scorer_factory(c);

  const int workers = std::max(1, std::min<int>(c.jobs, static_cast<int>(jobs.size())));
  std::vector<std::string> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  auto work = [&](int w) {
    try {
      auto s = make();
      for (std::size_t k = static_cast<std::size_t>(w); k < jobs.size(); k += static_cast<std::size_t>(workers)) {
        const Image img = load_image(jobs[k].path.string());
        try {
          jobs[k].record.score = c.augment ? scorer::score_augmented(img, *s, c.crops, jobs[k].record.image_id)
                                           : s->score(img);
        } catch (const Error& e) {
          throw ScoringError("image '" + jobs[k].record.image_id + "': " + e.what());
        }
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(w)] = e.what();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ScoringError(e);

  std::vector<geodata::ScoreRecord> records;
  records.reserve(jobs.size());
  for (auto& j : jobs) records.push_back(j.record);
  run.param("scorer", c.scorer_cmd.empty() ? "synthetic:" + c.synthetic : c.scorer_cmd);
  run.param("augment", c.augment);
  run.param("crops", {{"k1", c.crops.k1}, {"k2", c.crops.k2}, {"n", c.crops.n}});
  run.param("discarded_images", discarded);
  run.output("records.csv", geojson::score_records_csv(records));
  return run;
}

/// records CSV + districts GeoJSON -> districts_scored.geojson
inline Run aggregate(const PipelineConfig& c) {
  Run run("aggregate", c);
  require_file(c.records, "records");
  require_file(c.districts, "districts");
  run.input("records", c.records);
  run.input("districts", c.districts);
  const auto records = geojson::parse_score_records(csv::Table::read(c.records.string()));
  json doc = geojson::read_json(c.districts.string());
  const auto districts = geojson::parse_districts(doc, c.districts.string());
  const auto agg = geodata::aggregate_scores(records, districts);

  json& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    json& props = features[i]["properties"];
    if (!props.is_object()) props = json::object();
    const auto it = agg.scores.find(districts[i].id);
    if (it == agg.scores.end()) {
      props["safety_score"] = nullptr;
      props["n_images"] = 0;
      props["n_locations"] = 0;
    } else {
      props["safety_score"] = it->second.safety_score;
      props["n_images"] = it->second.n_images;
      props["n_locations"] = it->second.n_locations;
    }
  }
  json report = {{"missing_districts", agg.missing},
                 {"dropped_locations", agg.dropped_locations},
                 {"dropped_images", agg.dropped_images},
                 {"rejected", json::array()}};
  for (const auto& e : agg.rejected)
    report["rejected"].push_back({{"row", e.index + 1}, {"image_id", e.image_id}, {"error", e.message}});
  for (const auto& e : agg.rejected)
    run.note("record " + std::to_string(e.index + 1) + " (" + e.image_id + "): " + e.message);
  run.output("districts_scored.geojson", doc.dump(1) + "\n");
  run.output("aggregation_report.json", report.dump(2) + "\n");
  return run;
}

/// Cell polygons GeoJSON keyed by `id_key`.
inline std::map<std::string, geo::MultiPolygon> read_cells(const fs::path& path, const std::string& id_key) {
  const json doc = geojson::read_json(path.string());
  std::map<std::string, geo::MultiPolygon> out;
  const json& features = geojson::features_of(doc, path.string());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string id = geojson::feature_id(features[i], id_key, path.string(), i);
    if (out.contains(id)) throw SchemaError(path.string(), id_key, "duplicate cell id '" + id + "'");
    out[id] = geojson::parse_geometry(features[i].value("geometry", json()), path.string());
  }
  return out;
}

/// cells + hourly counts + districts -> metrics.csv
inline Run metrics(const PipelineConfig& c) {
  Run run("metrics", c);
  require_file(c.cells, "cells");
  require_file(c.counts, "counts");
  require_file(c.districts, "districts");
  run.input("cells", c.cells);
  run.input("counts", c.counts);
  run.input("districts", c.districts);
  const auto shapes = read_cells(c.cells, c.cell_id_key);
  const auto counts = activity::parse_hourly_counts(csv::Table::read(c.counts.string()), c.window);
  const auto districts = geojson::read_districts(c.districts.string());

  std::vector<activity::CdrCell> cells;
  for (const auto& [id, geom] : shapes) {
    const auto it = counts.find(id);
    cells.push_back({id, geom, it == counts.end() ? activity::CountTable{} : it->second});
  }
  for (const auto& [id, table] : counts)
    if (!shapes.contains(id)) throw SchemaError(c.counts.string(), "cell_id", "unknown cell '" + id + "'");

  const auto dc = activity::district_counts(cells, districts);
  const auto result = activity::compute_metrics(dc, districts);
  for (const auto& w : dc.warnings) run.note(w);
  run.param("window", c.window == activity::WindowRule::mean_daily ? "mean_daily" : "sum");
  run.param("unallocated_people", dc.unallocated.total());
  run.param("missing_districts", result.missing);
  run.output("metrics.csv", activity::metrics_csv(result, districts));
  return run;
}

/// aggregated districts + metrics -> regression_<name>.{json,txt}
inline Run regress(const PipelineConfig& c) {
  Run run("regress", c);
  require_file(c.districts, "districts");
  require_file(c.metrics, "metrics");
  run.input("districts", c.districts);
  run.input("metrics", c.metrics);
  regression::DistrictTable table;
  table.districts = geojson::read_districts(c.districts.string());
  table.metrics = regression::parse_metrics(csv::Table::read(c.metrics.string()));

  std::vector<regression::RegressionSpec> specs = c.regressions;
  if (specs.empty()) {
    for (const auto& name : regression::preset_names()) specs.push_back(regression::preset(name));
    for (auto& s : specs) {
      s.stepwise.seed = derive_seed(c.seed, "regress:" + s.name);
      s.stepwise.jobs = c.jobs;
    }
  }
  json names = json::array();
  for (const auto& spec : specs) {
    const auto outcomes = regression::run(spec, table);
    json doc = json::array();
    std::string text;
    for (const auto& o : outcomes) {
      doc.push_back(regression::to_json(o));
      text += regression::to_table(o) + "\n";
    }
    run.output("regression_" + spec.name + ".json", (spec.split_by ? doc : doc[0]).dump(2) + "\n");
    run.output("regression_" + spec.name + ".txt", text);
    names.push_back(spec.name);
  }
  run.param("specifications", names);
  return run;
}

/// image -> mask_positive.png, mask_negative.png, occlusion_trials.csv
inline Run occlude(const PipelineConfig& c) {
  Run run("occlude", c);
  require_file(c.image, "image");
  run.input("image", c.image);
  const Image img = load_image(c.image.string());
  auto s = scorer_factory(c)();
  const auto result = occlusion::sensitivity_map(img, *s, c.occlusion, c.image.filename().string());

  auto png = [&](const std::vector<double>& mask) {
    return streetsafe::detail::encode_png(img.width(), img.height(), 1, occlusion::to_gray(mask));
  };
  run.output("mask_positive.png", png(result.masks.positive));
  run.output("mask_negative.png", png(result.masks.negative));
  run.output("occlusion_trials.csv", occlusion::trials_csv(result));
  run.param("baseline", result.baseline);
  run.param("n_patches", c.occlusion.n_patches);
  run.param("patch_size", {c.occlusion.min_size, c.occlusion.max_size});
  run.param("augmented", c.occlusion.augmented);
  return run;
}

/// key -> value from a CSV column or a GeoJSON property; rows with an empty
/// or null value are skipped.
inline std::map<std::string, double> read_keyed_values(const fs::path& path, const std::string& key,
                                                       const std::string& column) {
  std::map<std::string, double> out;
  const std::string ext = path.extension().string();
  if (ext == ".geojson" || ext == ".json") {
    const json doc = geojson::read_json(path.string());
    const json& features = geojson::features_of(doc, path.string());
    for (std::size_t i = 0; i < features.size(); ++i) {
      const std::string id = geojson::feature_id(features[i], key, path.string(), i);
      const json props = features[i].value("properties", json::object());
      if (!props.contains(column)) throw SchemaError(path.string(), column, "feature '" + id + "' lacks it");
      if (props.at(column).is_null()) continue;
      if (!props.at(column).is_number()) throw SchemaError(path.string(), column, "feature '" + id + "': not a number");
      out[id] = props.at(column).get<double>();
    }
    return out;
  }
  const csv::Table t = csv::Table::read(path.string());
  const auto ki = t.column(key), vi = t.column(column);
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (t.rows()[r][vi].empty()) continue;
    out[t.rows()[r][ki]] = t.number(r, vi);
  }
  return out;
}

/// Two score files joined on a key -> Pearson report.
inline Run validate(const PipelineConfig& c) {
  Run run("validate", c);
  require_file(c.validate_a, "a");
  require_file(c.validate_b, "b");
  run.input("a", c.validate_a);
  run.input("b", c.validate_b);
  const auto a = read_keyed_values(c.validate_a, c.validate_key, c.validate_column_a);
  const auto b = read_keyed_values(c.validate_b, c.validate_key, c.validate_column_b);
  std::vector<double> va, vb;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end()) continue;
    va.push_back(v);
    vb.push_back(it->second);
  }
  const auto r = stats::pearson(Eigen::Map<const Eigen::VectorXd>(va.data(), static_cast<Eigen::Index>(va.size())),
                                Eigen::Map<const Eigen::VectorXd>(vb.data(), static_cast<Eigen::Index>(vb.size())));
  const std::string label = c.validate_label.empty() ? c.validate_a.stem().string() : c.validate_label;
  json j = {{"label", label}, {"pearson_r", r.r}, {"p_value", r.p_value}, {"n", r.n},
            {"unmatched_a", a.size() - va.size()}, {"unmatched_b", b.size() - vb.size()}};
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-20s %10s %12s %6s\n%-20s %10.3f %12.3g %6d\n", "", "Pearson r", "p-value", "n",
                label.c_str(), r.r, r.p_value, r.n);
  run.output("validation.json", j.dump(2) + "\n");
  run.output("validation.txt", buf);
  return run;
}

inline Run run_stage(const std::string& command, const PipelineConfig& c) {
  if (command == "rank") return rank(c);
  if (command == "grid") return grid(c);
  if (command == "score") return score(c);
  if (command == "aggregate") return aggregate(c);
  if (command == "metrics") return metrics(c);
  if (command == "regress") return regress(c);
  if (command == "occlude") return occlude(c);
  if (command == "validate") return validate(c);
  throw InvalidInput("unknown command '" + command + "'");
}

}  // namespace streetsafe::pipeline
