// specialism: batch pipeline over publication corpora.
//
//   specialism synth --preset rural --seed 7 --out runs/rural
//   specialism link --out runs/rural
//   specialism net --kind ref --out runs/rural
//   specialism curve --kind ref --out runs/rural
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specialism/pipeline.hpp"

namespace sp = specialism;
namespace pl = specialism::pipeline;

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> corpus;
  std::string format;
  std::string out;
  std::string venue;
  std::string years;
  std::string kind;
  std::string thresholds;
  std::string topic_thresholds;
  double rest_threshold = 0.0;
  std::string labels;
  std::string strategy;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string fractions;
  std::string preset;
  unsigned jobs = 0;
  bool no_cache = false;
};

pl::PipelineConfig build_config(CLI::App& app, const Flags& f) {
  pl::PipelineConfig cfg;
  cfg.out_dir = pl::default_out_dir();
  if (!f.config.empty()) cfg = pl::load_config_file(f.config, cfg);
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--corpus")) cfg.corpus_paths = f.corpus;
  if (given("--format")) cfg.format = sp::parse_corpus_format(f.format);
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--venue")) cfg.venue = f.venue;
  if (given("--years")) cfg.years = sp::parse_year_window(f.years);
  if (given("--kind")) {
    cfg.kinds.clear();
    if (f.kind == "both") cfg.kinds = {sp::NetworkKind::reference, sp::NetworkKind::text};
    else cfg.kinds.push_back(sp::parse_network_kind(f.kind));
  }
  if (given("--thresholds")) {
    sp::parse_thresholds(f.thresholds);  // validate early
    cfg.thresholds = f.thresholds;
  }
  if (given("--topic-thresholds")) cfg.topic_thresholds = pl::detail::parse_number_list(f.topic_thresholds);
  if (given("--rest-threshold")) cfg.rest_threshold = f.rest_threshold;
  if (given("--labels")) cfg.labels_path = f.labels;
  if (given("--strategy")) cfg.strategies = {sp::parse_removal_strategy(f.strategy)};
  if (given("--trials")) cfg.trials = f.trials;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--fractions")) {
    sp::parse_range(f.fractions);
    cfg.fractions = f.fractions;
  }
  if (given("--preset")) cfg.preset = f.preset;
  if (given("--jobs")) cfg.jobs = f.jobs;
  if (f.no_cache) cfg.cache = false;
  if (cfg.rest_threshold && !(*cfg.rest_threshold > 0.0 && *cfg.rest_threshold < 1.0)) {
    throw sp::UsageError("--rest-threshold must lie in (0, 1)");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupling-network analysis of publication corpora"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON config file; flags override its fields");
  app.add_option("--corpus", f.corpus, "input corpus file(s), JSONL or CSV");
  app.add_option("--format", f.format, "jsonl|csv (default: by extension)");
  app.add_option("--out", f.out, "output directory (default: $SPECIALISM_OUT or ./out)");
  app.add_option("--venue", f.venue, "restrict the analysis to one venue");
  app.add_option("--years", f.years, "year window start:end");
  app.add_option("--kind", f.kind, "network kind: ref|text|both");
  app.add_option("--thresholds", f.thresholds, "curve grid: list, start:stop:step or auto-quantile:K");
  app.add_option("--topic-thresholds", f.topic_thresholds, "topic report thresholds (default 0.1,0.2,0.3)");
  app.add_option("--rest-threshold", f.rest_threshold, "Jaro-Winkler cut for reference text, overrides calibration");
  app.add_option("--labels", f.labels, "labelled reference pairs CSV (ref_id_a,ref_id_b,is_match)");
  app.add_option("--strategy", f.strategy, "removal strategy: targeted|random (default both)");
  app.add_option("--trials", f.trials, "random removal trials (default 50)");
  app.add_option("--seed", f.seed, "seed for all randomness (default 0)");
  app.add_option("--fractions", f.fractions, "removal fractions start:stop:step (default 0:0.95:0.05)");
  app.add_option("--preset", f.preset, "synthetic preset: rural|urban");
  app.add_option("--jobs", f.jobs, "worker threads (default: hardware concurrency)");
  app.add_flag("--no-cache", f.no_cache, "do not reuse cached link/net artifacts");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"ingest", "parse corpus files into corpus.jsonl"},
      {"summarize", "corpus summary statistics"},
      {"link", "merge raw references into cited-source clusters"},
      {"calibrate", "choose the reference-text threshold from labelled pairs"},
      {"net", "build coupling networks"},
      {"curve", "connectivity curves c(t), g(t)"},
      {"topics", "topic sizes and authors per topic"},
      {"stats", "density, diameter, clustering, modularity"},
      {"removal", "connectivity under removal of cited sources"},
      {"synth", "generate a synthetic corpus"},
      {"all", "run every stage in order"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = build_config(app, f);
    pl::Runner runner(cfg);
    const std::string command = app.get_subcommands().front()->get_name();
    runner.run(command);
  } catch (const sp::UsageError& e) {
    std::cerr << "specialism: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "specialism: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
