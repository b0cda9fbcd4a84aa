// streetsafe: command-line front end for the pipeline stages.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "streetsafe/pipeline.hpp"

namespace pl = streetsafe::pipeline;
namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::string votes, region, images, records, districts, cells, counts, metrics, image;
  std::string scorer_cmd, synthetic;
  std::optional<bool> augment;
  std::optional<double> density;
  std::optional<int> crops_n, n_patches;
  std::optional<bool> occlusion_augmented;
  std::string window;
  std::vector<std::string> presets;
  std::vector<std::string> spec_files;
  std::string validate_a, validate_b, key, column_a, column_b, label;
};

void set_path(fs::path& target, const std::string& v) {
  if (!v.empty()) target = v;
}

pl::PipelineConfig build_config(const Overrides& o) {
  pl::PipelineConfig c = o.config.empty() ? pl::PipelineConfig{} : pl::read_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  if (c.jobs < 1) throw streetsafe::InvalidInput("--jobs must be >= 1");
  set_path(c.out, o.out);
  set_path(c.votes, o.votes);
  set_path(c.region, o.region);
  set_path(c.images, o.images);
  set_path(c.records, o.records);
  set_path(c.districts, o.districts);
  set_path(c.cells, o.cells);
  set_path(c.counts, o.counts);
  set_path(c.metrics, o.metrics);
  set_path(c.image, o.image);
  if (!o.scorer_cmd.empty()) c.scorer_cmd = o.scorer_cmd;
  if (!o.synthetic.empty()) {
    c.synthetic = o.synthetic;
    if (o.scorer_cmd.empty()) c.scorer_cmd.clear();
  }
  if (o.augment) c.augment = *o.augment;
  if (o.density) c.grid_density = *o.density;
  if (o.crops_n) c.crops.n = *o.crops_n;
  if (o.n_patches) c.occlusion.n_patches = *o.n_patches;
  if (o.occlusion_augmented) c.occlusion.augmented = *o.occlusion_augmented;
  if (!o.window.empty()) c.window = pl::detail::parse_window(o.window, "--window");
  if (!o.presets.empty() || !o.spec_files.empty()) c.regressions.clear();
  for (const auto& p : o.presets) c.regressions.push_back(streetsafe::regression::preset(p));
  for (const auto& f : o.spec_files)
    c.regressions.push_back(streetsafe::regression::parse_spec(streetsafe::geojson::read_json(f), f));
  set_path(c.validate_a, o.validate_a);
  set_path(c.validate_b, o.validate_b);
  if (!o.key.empty()) c.validate_key = o.key;
  if (!o.column_a.empty()) c.validate_column_a = o.column_a;
  if (!o.column_b.empty()) c.validate_column_b = o.column_b;
  if (!o.label.empty()) c.validate_label = o.label;
  if (c.regressions.empty())
    for (const auto& name : streetsafe::regression::preset_names())
      c.regressions.push_back(streetsafe::regression::preset(name));
  pl::apply_seed(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streetsafe: perceived safety and urban activity pipeline"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "global seed (overrides config)");
  app.add_option("--jobs", o.jobs, "worker threads (overrides config)");
  app.add_option("--out", o.out, "output directory (overrides config)");

  auto* rank = app.add_subcommand("rank", "pairwise votes -> image scores (scores.csv)");
  rank->add_option("--votes", o.votes, "CSV left_id,right_id,outcome");

  auto* grid = app.add_subcommand("grid", "region -> sample points (points.csv)");
  grid->add_option("--region", o.region, "GeoJSON region");
  grid->add_option("--density", o.density, "points per km2 (default 100)");

  auto* score = app.add_subcommand("score", "images + scorer -> score records (records.csv)");
  score->add_option("--images", o.images, "CSV image_id,lat,lon,heading,path");
  score->add_option("--scorer-cmd", o.scorer_cmd, "scorer/1 command line");
  score->add_option("--synthetic", o.synthetic, "synthetic scorer: constant:C | green-mean | region-box");
  score->add_option("--augment", o.augment, "average over random crops (default true)");
  score->add_option("--crops", o.crops_n, "crops per image");

  auto* aggregate = app.add_subcommand("aggregate", "records -> districts_scored.geojson");
  aggregate->add_option("--records", o.records, "records CSV");
  aggregate->add_option("--districts", o.districts, "districts GeoJSON");

  auto* metrics = app.add_subcommand("metrics", "cell counts -> metrics.csv");
  metrics->add_option("--cells", o.cells, "cell polygons GeoJSON");
  metrics->add_option("--counts", o.counts, "CSV cell_id,timestamp,gender,age_band,count");
  metrics->add_option("--districts", o.districts, "districts GeoJSON");
  metrics->add_option("--window", o.window, "mean_daily | sum");

  auto* regress = app.add_subcommand("regress", "spatially filtered regressions");
  regress->add_option("--districts", o.districts, "aggregated districts GeoJSON");
  regress->add_option("--metrics", o.metrics, "metrics CSV");
  regress->add_option("--preset", o.presets, "people | women | young | elderly (repeatable)");
  regress->add_option("--spec", o.spec_files, "regression spec JSON (repeatable)");

  auto* occlude = app.add_subcommand("occlude", "image -> occlusion masks");
  occlude->add_option("--image", o.image, "PNG or JPEG");
  occlude->add_option("--scorer-cmd", o.scorer_cmd, "scorer/1 command line");
  occlude->add_option("--synthetic", o.synthetic, "synthetic scorer kind");
  occlude->add_option("--patches", o.n_patches, "number of occlusion trials");
  occlude->add_option("--augmented", o.occlusion_augmented, "score trials with crop averaging");

  auto* validate = app.add_subcommand("validate", "Pearson correlation between two score files");
  validate->add_option("--a", o.validate_a, "CSV or GeoJSON");
  validate->add_option("--b", o.validate_b, "CSV or GeoJSON");
  validate->add_option("--key", o.key, "join key (default id)");
  validate->add_option("--column-a", o.column_a, "value column in a (default score)");
  validate->add_option("--column-b", o.column_b, "value column in b (default score)");
  validate->add_option("--label", o.label, "row label in the report");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const pl::PipelineConfig config = build_config(o);
    const pl::Run run = pl::run_stage(command, config);
    run.commit();
    for (const auto& [name, content] : run.outputs()) std::cout << (config.out / name).string() << '\n';
    if (command == "regress") {
      for (const auto& [name, content] : run.outputs())
        if (name.ends_with(".txt")) std::cout << '\n' << content;
    }
    if (command == "validate") std::cout << run.outputs()[1].second;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "streetsafe " << command << ": error: " << e.what() << '\n';
    return 1;
  }
}
