#pragma once

// Stage orchestration behind the command-line tool. Every stage reads its
// inputs from the output directory, computes its artifacts in memory and
// commits them with temp-then-rename; a failing stage leaves no partial
// outputs. This header needs OpenSSL's libcrypto (SHA-256).

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "specialism/common.hpp"
#include "specialism/connectivity_analysis.hpp"
#include "specialism/core_removal.hpp"
#include "specialism/coupling_networks.hpp"
#include "specialism/network_stats.hpp"
#include "specialism/record_model.hpp"
#include "specialism/reference_linkage.hpp"
#include "specialism/synthetic_corpus.hpp"

namespace specialism::pipeline {

namespace fs = std::filesystem;

inline constexpr std::string_view kToolName = "specialism";
inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kOutEnvVar = "SPECIALISM_OUT";
inline constexpr double kDefaultRestThreshold = 0.85;

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file_atomic(const fs::path& p, std::string_view content) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
  std::vector<std::string> corpus_paths;
  std::optional<CorpusFormat> format;  // by file extension when absent
  std::optional<std::string> venue;
  std::optional<YearWindow> years;
  std::optional<double> rest_threshold;
  std::optional<std::string> labels_path;
  std::vector<NetworkKind> kinds{NetworkKind::reference};
  std::optional<std::string> thresholds;  // grid spec; per-kind default when absent
  std::vector<double> topic_thresholds = default_topic_thresholds();
  std::vector<RemovalStrategy> strategies{RemovalStrategy::targeted, RemovalStrategy::random};
  std::size_t trials = 50;
  std::string fractions = "0:0.95:0.05";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0: all hardware threads
  std::optional<std::string> preset;
  nlohmann::json synth = nlohmann::json::object();  // generator overrides
  bool cache = true;
};

inline std::string default_out_dir() {
  if (const char* env = std::getenv(kOutEnvVar.data()); env && *env) return env;
  return "out";
}

namespace detail {

inline std::vector<std::string> string_or_list(const nlohmann::json& v, const char* key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& x : v) out.push_back(x.get<std::string>());
    return out;
  }
  throw UsageError(std::string("config field '") + key + "' must be a string or a list of strings");
}

inline std::vector<double> parse_number_list(std::string_view s) {
  auto spec = parse_thresholds(s);
  if (spec.quantiles) throw UsageError("topic thresholds must be explicit values");
  return spec.explicit_values;
}

}  // namespace detail

inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "corpus") cfg.corpus_paths = detail::string_or_list(v, "corpus");
      else if (key == "format") cfg.format = parse_corpus_format(v.get<std::string>());
      else if (key == "venue") cfg.venue = v.get<std::string>();
      else if (key == "years") cfg.years = parse_year_window(v.get<std::string>());
      else if (key == "rest_threshold") cfg.rest_threshold = v.get<double>();
      else if (key == "labels") cfg.labels_path = v.get<std::string>();
      else if (key == "kinds") {
        cfg.kinds.clear();
        for (const auto& k : detail::string_or_list(v, "kinds")) cfg.kinds.push_back(parse_network_kind(k));
      } else if (key == "thresholds") cfg.thresholds = v.get<std::string>();
      else if (key == "topic_thresholds") {
        cfg.topic_thresholds = v.is_string() ? detail::parse_number_list(v.get<std::string>())
                                             : v.get<std::vector<double>>();
      } else if (key == "strategy") {
        cfg.strategies.clear();
        for (const auto& s : detail::string_or_list(v, "strategy")) cfg.strategies.push_back(parse_removal_strategy(s));
      } else if (key == "trials") cfg.trials = v.get<std::size_t>();
      else if (key == "fractions") cfg.fractions = v.get<std::string>();
      else if (key == "out") cfg.out_dir = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "jobs") cfg.jobs = v.get<unsigned>();
      else if (key == "preset") cfg.preset = v.get<std::string>();
      else if (key == "synth") {
        if (!v.is_object()) throw UsageError("config field 'synth' must be an object");
        cfg.synth = v;
      } else if (key == "cache") cfg.cache = v.get<bool>();
      else throw UsageError("unknown config field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

inline PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {}) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

/// Snapshot of every field, used in the manifest and in cache keys.
inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["corpus"] = c.corpus_paths;
  j["format"] = c.format ? nlohmann::ordered_json(*c.format == CorpusFormat::jsonl ? "jsonl" : "csv") : nullptr;
  j["venue"] = c.venue ? nlohmann::ordered_json(*c.venue) : nullptr;
  j["years"] = c.years ? nlohmann::ordered_json(std::to_string(c.years->start) + ":" + std::to_string(c.years->end))
                       : nullptr;
  j["rest_threshold"] = c.rest_threshold ? nlohmann::ordered_json(*c.rest_threshold) : nullptr;
  j["labels"] = c.labels_path ? nlohmann::ordered_json(*c.labels_path) : nullptr;
  j["kinds"] = nlohmann::ordered_json::array();
  for (auto k : c.kinds) j["kinds"].push_back(to_string(k));
  j["thresholds"] = c.thresholds ? nlohmann::ordered_json(*c.thresholds) : nullptr;
  j["topic_thresholds"] = c.topic_thresholds;
  j["strategy"] = nlohmann::ordered_json::array();
  for (auto s : c.strategies) j["strategy"].push_back(to_string(s));
  j["trials"] = c.trials;
  j["fractions"] = c.fractions;
  j["out"] = c.out_dir;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["preset"] = c.preset ? nlohmann::ordered_json(*c.preset) : nullptr;
  j["synth"] = c.synth;
  j["cache"] = c.cache;
  return j;
}

// ---------------------------------------------------------------------------
// Artifact names

inline constexpr std::string_view kCorpusFile = "corpus.jsonl";
inline constexpr std::string_view kClustersFile = "clusters.jsonl";
inline constexpr std::string_view kCalibrationFile = "calibration.json";
inline constexpr std::string_view kManifestFile = "manifest.json";

inline std::string network_edges_file(NetworkKind k) { return "network_" + std::string(to_string(k)) + ".csv"; }
inline std::string network_sidecar_file(NetworkKind k) { return "network_" + std::string(to_string(k)) + ".json"; }
inline std::string curve_file(NetworkKind k) { return "curve_" + std::string(to_string(k)) + ".csv"; }
inline std::string topics_file(NetworkKind k) { return "topics_" + std::string(to_string(k)) + ".csv"; }
inline std::string stats_file(NetworkKind k) { return "stats_" + std::string(to_string(k)) + ".json"; }
inline std::string removal_file(RemovalStrategy s) { return "removal_" + std::string(to_string(s)) + ".csv"; }

// ---------------------------------------------------------------------------
// Stage execution

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Outputs of one stage, committed together.
struct StageOutputs {
  std::map<std::string, std::string> files;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  bool cached = false;
};

class Runner {
 public:
  explicit Runner(PipelineConfig cfg) : cfg_(std::move(cfg)), out_(cfg_.out_dir) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec || !fs::is_directory(out_)) throw UsageError("output directory not writable: " + out_.string());
    for (const auto& p : cfg_.corpus_paths) {
      if (!fs::exists(p)) throw UsageError("corpus file not found: " + p);
    }
    if (cfg_.labels_path && !fs::exists(*cfg_.labels_path)) {
      throw UsageError("labels file not found: " + *cfg_.labels_path);
    }
  }

  const PipelineConfig& config() const { return cfg_; }
  const fs::path& out_dir() const { return out_; }

  void run(std::string_view command) {
    if (command == "ingest") ingest();
    else if (command == "summarize") summarize();
    else if (command == "link") link();
    else if (command == "calibrate") calibrate();
    else if (command == "net") for_kinds([&](NetworkKind k) { net(k); });
    else if (command == "curve") for_kinds([&](NetworkKind k) { curve(k); });
    else if (command == "topics") for_kinds([&](NetworkKind k) { topics(k); });
    else if (command == "stats") for_kinds([&](NetworkKind k) { stats(k); });
    else if (command == "removal") for (auto s : cfg_.strategies) removal(s);
    else if (command == "synth") synth();
    else if (command == "all") all();
    else throw UsageError("unknown subcommand '" + std::string(command) + "'");
  }

  void all() {
    if (!cfg_.corpus_paths.empty()) ingest();
    else require(kCorpusFile, "corpus");
    summarize();
    if (cfg_.labels_path) calibrate();
    link();
    for_kinds([&](NetworkKind k) {
      net(k);
      curve(k);
      topics(k);
      stats(k);
    });
    for (auto s : cfg_.strategies) removal(s);
  }

  // --- stages -------------------------------------------------------------

  void ingest() {
    if (cfg_.corpus_paths.empty()) throw UsageError("ingest needs at least one --corpus path");
    stage("ingest", [&](StageInputs& in) {
      Corpus all;
      std::set<std::string> ids;
      nlohmann::ordered_json diagnostics = nlohmann::ordered_json::array();
      for (const auto& path : cfg_.corpus_paths) {
        in.add_file(path);
        const auto format = cfg_.format ? *cfg_.format : format_from_extension(path);
        auto result = ingest_corpus(path, format);
        for (const auto& d : result.diagnostics) {
          diagnostics.push_back({{"file", path}, {"line", d.line}, {"message", d.message}});
        }
        for (auto& rec : result.records) {
          if (!ids.insert(rec.pub_id).second) throw DataError("duplicate pub_id '" + rec.pub_id + "' across inputs");
          all.push_back(std::move(rec));
        }
      }
      if (cfg_.venue) all = filter_venue(all, *cfg_.venue);
      StageOutputs out;
      out.params["venue"] = cfg_.venue ? nlohmann::ordered_json(*cfg_.venue) : nullptr;
      std::ostringstream corpus;
      export_jsonl(all, corpus);
      out.files[std::string(kCorpusFile)] = corpus.str();
      nlohmann::ordered_json report;
      report["n_records"] = all.size();
      report["n_diagnostics"] = diagnostics.size();
      report["diagnostics"] = diagnostics;
      out.files["ingest_report.json"] = report.dump(2) + "\n";
      return out;
    });
  }

  void summarize() {
    stage("summarize", [&](StageInputs& in) {
      const auto corpus = load_corpus(in);
      const auto summary = specialism::summarize(corpus);
      StageOutputs out;
      out.params["venue"] = venue_json();
      out.files["summary.json"] = to_json(summary).dump(2) + "\n";
      std::ostringstream csv;
      write_summary_csv(summary, csv);
      out.files["summary.csv"] = csv.str();
      return out;
    });
  }

  void calibrate() {
    if (!cfg_.labels_path) throw UsageError("calibrate needs --labels");
    stage("calibrate", [&](StageInputs& in) {
      const auto corpus = load_corpus(in);
      in.add_file(*cfg_.labels_path);
      std::ifstream labels_in(*cfg_.labels_path);
      const auto labels = read_labels_csv(labels_in);
      const auto parsed = parse_corpus_references(corpus);
      const auto scored = score_labelled_pairs(parsed.references, labels);
      const auto report = calibrate_threshold(scored, labels);
      StageOutputs out;
      out.params["venue"] = venue_json();
      auto j = to_json(report);
      j["n_labelled_pairs"] = scored.size();
      out.files[std::string(kCalibrationFile)] = j.dump(2) + "\n";
      return out;
    });
  }

  void link() {
    stage("link", [&](StageInputs& in) {
      const auto corpus = load_corpus(in);
      std::string source = "default";
      double threshold = kDefaultRestThreshold;
      if (cfg_.rest_threshold) {
        threshold = *cfg_.rest_threshold;
        source = "config";
      } else if (fs::exists(out_ / kCalibrationFile)) {
        const auto text = in.add_artifact(kCalibrationFile);
        threshold = nlohmann::json::parse(text).at("threshold").get<double>();
        source = "calibration";
      }
      StageOutputs out;
      out.params["venue"] = venue_json();
      out.params["rest_threshold"] = threshold;
      return cached("link", in, out, [&] {
        const auto parsed = parse_corpus_references(corpus);
        const auto clusters = merge_references(parsed.references, threshold, {resolve_jobs(cfg_.jobs)});
        std::ostringstream jl;
        write_clusters_jsonl(clusters, jl);
        out.files[std::string(kClustersFile)] = jl.str();
        nlohmann::ordered_json report;
        report["rest_threshold"] = threshold;
        report["threshold_source"] = source;
        report["author_block_threshold"] = kAuthorBlockThreshold;
        report["n_raw_references"] = parsed.n_raw;
        report["n_discarded_references"] = parsed.n_discarded;
        report["n_parsed_references"] = parsed.references.size();
        report["n_clusters"] = clusters.size();
        out.files["link_report.json"] = report.dump(2) + "\n";
      });
    });
  }

  void net(NetworkKind kind) {
    stage("net_" + std::string(to_string(kind)), [&](StageInputs& in) {
      const auto corpus = load_corpus(in);
      std::vector<SourceCluster> clusters;
      if (kind == NetworkKind::reference) clusters = load_clusters(in);
      StageOutputs out;
      out.params["kind"] = to_string(kind);
      out.params["venue"] = venue_json();
      out.params["years"] = years_json();
      return cached("net", in, out, [&] {
        const auto network = build_network(corpus, kind, cfg_.years, &clusters, {resolve_jobs(cfg_.jobs)});
        std::ostringstream csv;
        write_edges_csv(network, csv);
        out.files[network_edges_file(kind)] = csv.str();
        out.files[network_sidecar_file(kind)] = sidecar_json(network).dump(2) + "\n";
      });
    });
  }

  void curve(NetworkKind kind) {
    stage("curve_" + std::string(to_string(kind)), [&](StageInputs& in) {
      const auto network = load_network(in, kind);
      const auto grid = threshold_grid(kind).resolve(network);
      StageOutputs out;
      out.params["thresholds"] = cfg_.thresholds ? *cfg_.thresholds : default_grid_name(kind);
      std::ostringstream csv;
      write_curve_csv(connectivity_curve(network, grid), csv);
      out.files[curve_file(kind)] = csv.str();
      return out;
    });
  }

  void topics(NetworkKind kind) {
    stage("topics_" + std::string(to_string(kind)), [&](StageInputs& in) {
      const auto network = load_network(in, kind);
      const auto authorship = authorship_of(load_corpus(in));
      std::map<double, std::vector<Topic>> by_t;
      for (double t : cfg_.topic_thresholds) by_t[t] = extract_topics(network, t, authorship);
      StageOutputs out;
      out.params["topic_thresholds"] = cfg_.topic_thresholds;
      std::ostringstream csv;
      write_topic_report_csv(topic_report(by_t), csv);
      out.files[topics_file(kind)] = csv.str();
      return out;
    });
  }

  void stats(NetworkKind kind) {
    stage("stats_" + std::string(to_string(kind)), [&](StageInputs& in) {
      const auto network = load_network(in, kind);
      StageOutputs out;
      auto j = to_json(network_stats(network, resolve_jobs(cfg_.jobs)));
      out.files[stats_file(kind)] = j.dump(2) + "\n";
      return out;
    });
  }

  void removal(RemovalStrategy strategy) {
    stage("removal_" + std::string(to_string(strategy)), [&](StageInputs& in) {
      const auto corpus = load_corpus(in);
      const auto clusters = load_clusters(in);
      std::vector<std::string> ids;
      const auto window = cfg_.years ? *cfg_.years : specialism::detail::corpus_year_span(corpus);
      for (auto i : specialism::detail::window_members(corpus, window)) ids.push_back(corpus[i].pub_id);
      const auto cn = build_citation_network(ids, clusters);
      const auto fractions = parse_range(cfg_.fractions);
      StageOutputs out;
      out.params["venue"] = venue_json();
      out.params["years"] = years_json();
      out.params["strategy"] = to_string(strategy);
      out.params["fractions"] = cfg_.fractions;
      if (strategy == RemovalStrategy::random) {
        out.params["trials"] = cfg_.trials;
        out.params["seed"] = cfg_.seed;
      }
      const auto curve = removal_experiment(cn, strategy, fractions, {cfg_.trials, cfg_.seed, resolve_jobs(cfg_.jobs)});
      std::ostringstream csv;
      write_removal_csv(curve, csv);
      out.files[removal_file(strategy)] = csv.str();
      return out;
    });
  }

  void synth() {
    stage("synth", [&](StageInputs&) {
      GeneratorSpec spec;
      std::optional<std::string> preset_name = cfg_.preset;
      if (!preset_name && cfg_.synth.contains("preset")) preset_name = cfg_.synth.at("preset").get<std::string>();
      if (preset_name) spec = preset(*preset_name);
      spec.seed = cfg_.seed;
      spec = generator_spec_from_json(cfg_.synth, spec);
      const auto corpus = generate(spec);
      StageOutputs out;
      out.params["preset"] = preset_name ? nlohmann::ordered_json(*preset_name) : nullptr;
      out.params["spec"] = to_json(spec);
      std::ostringstream jl, labels;
      export_jsonl(corpus.records, jl);
      write_labels_csv(corpus, labels);
      out.files[std::string(kCorpusFile)] = jl.str();
      out.files["labels.csv"] = labels.str();
      out.files["synth_spec.json"] = to_json(spec).dump(2) + "\n";
      return out;
    });
  }

 private:
  // Inputs read by a stage, recorded with content hashes.
  class StageInputs {
   public:
    explicit StageInputs(const fs::path& out) : out_(out) {}

    std::string add_file(const std::string& path) {
      auto text = read_file(path);
      hashes_[path] = sha256_hex(text);
      return text;
    }
    std::string add_artifact(std::string_view name) {
      auto text = read_file(out_ / name);
      hashes_[std::string(name)] = sha256_hex(text);
      return text;
    }
    const std::map<std::string, std::string>& hashes() const { return hashes_; }

   private:
    fs::path out_;
    std::map<std::string, std::string> hashes_;
  };

  template <typename Fn>
  void for_kinds(Fn fn) {
    for (auto k : cfg_.kinds) fn(k);
  }

  static CorpusFormat format_from_extension(const std::string& path) {
    const auto ext = fs::path(path).extension().string();
    if (ext == ".csv") return CorpusFormat::csv;
    return CorpusFormat::jsonl;
  }

  nlohmann::ordered_json venue_json() const {
    return cfg_.venue ? nlohmann::ordered_json(*cfg_.venue) : nlohmann::ordered_json(nullptr);
  }
  nlohmann::ordered_json years_json() const {
    return cfg_.years ? nlohmann::ordered_json(std::to_string(cfg_.years->start) + ":" + std::to_string(cfg_.years->end))
                      : nlohmann::ordered_json(nullptr);
  }

  static std::string default_grid_name(NetworkKind k) {
    return k == NetworkKind::reference ? "0:0.5:0.01" : "auto-quantile:51";
  }

  ThresholdSpec threshold_grid(NetworkKind k) const {
    return parse_thresholds(cfg_.thresholds ? *cfg_.thresholds : default_grid_name(k));
  }

  void require(std::string_view name, std::string_view what) const {
    if (!fs::exists(out_ / name)) {
      throw UsageError("missing " + std::string(what) + " artifact " + std::string(name) + " in " + out_.string());
    }
  }

  Corpus load_corpus(StageInputs& in) const {
    require(kCorpusFile, "corpus");
    std::istringstream text(in.add_artifact(kCorpusFile));
    auto result = ingest_jsonl(text);
    if (!result.diagnostics.empty()) {
      throw DataError("corpus artifact is malformed at line " + std::to_string(result.diagnostics.front().line) +
                      ": " + result.diagnostics.front().message);
    }
    return cfg_.venue ? filter_venue(result.records, *cfg_.venue) : std::move(result.records);
  }

  std::vector<SourceCluster> load_clusters(StageInputs& in) const {
    require(kClustersFile, "cluster");
    std::istringstream text(in.add_artifact(kClustersFile));
    return read_clusters_jsonl(text);
  }

  CouplingNetwork load_network(StageInputs& in, NetworkKind kind) const {
    if (!fs::exists(out_ / network_edges_file(kind)) || !fs::exists(out_ / network_sidecar_file(kind))) {
      throw UsageError("missing network artifact " + network_edges_file(kind) + " in " + out_.string() +
                       " (run net --kind " + std::string(to_string(kind)) + " first)");
    }
    std::istringstream edges(in.add_artifact(network_edges_file(kind)));
    std::istringstream sidecar(in.add_artifact(network_sidecar_file(kind)));
    return read_network(edges, sidecar);
  }

  // Content-addressed cache under <out>/.cache/<key>/ for expensive stages.
  template <typename Compute>
  StageOutputs cached(std::string_view name, const StageInputs& in, StageOutputs& out, Compute compute) {
    nlohmann::ordered_json key;
    key["stage"] = name;
    key["version"] = kToolVersion;
    key["params"] = out.params;
    key["inputs"] = in.hashes();
    const auto dir = out_ / ".cache" / sha256_hex(key.dump());
    const auto index = dir / "files.json";
    if (cfg_.cache && fs::exists(index)) {
      try {
        const auto names = nlohmann::json::parse(read_file(index)).get<std::vector<std::string>>();
        StageOutputs hit = out;
        for (const auto& n : names) hit.files[n] = read_file(dir / n);
        hit.cached = true;
        return hit;
      } catch (const std::exception&) {
        // unreadable cache entry: recompute
      }
    }
    compute();
    if (cfg_.cache) {
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (!ec) {
        nlohmann::json names = nlohmann::json::array();
        for (const auto& [n, content] : out.files) {
          write_file_atomic(dir / n, content);
          names.push_back(n);
        }
        write_file_atomic(index, names.dump());
      }
    }
    return out;
  }

  template <typename Fn>
  void stage(const std::string& name, Fn fn) {
    const auto started = utc_timestamp();
    StageInputs inputs(out_);
    StageOutputs outputs = fn(inputs);
    commit(outputs);
    record(name, inputs, outputs, started);
  }

  void commit(const StageOutputs& outputs) {
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : outputs.files) {
        write_file_atomic(out_ / name, content);
        written.push_back(out_ / name);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

  void record(const std::string& name, const StageInputs& inputs, const StageOutputs& outputs,
              const std::string& started) {
    nlohmann::ordered_json manifest;
    const auto path = out_ / kManifestFile;
    if (fs::exists(path)) {
      try {
        manifest = nlohmann::ordered_json::parse(read_file(path));
      } catch (const std::exception&) {
        manifest = nlohmann::ordered_json();
      }
    }
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["config"] = to_json(cfg_);
    nlohmann::ordered_json entry;
    entry["params"] = outputs.params;
    entry["config_hash"] = sha256_hex(outputs.params.dump());
    entry["inputs"] = inputs.hashes();
    nlohmann::ordered_json out_hashes = nlohmann::ordered_json::object();
    for (const auto& [file, content] : outputs.files) out_hashes[file] = sha256_hex(content);
    entry["outputs"] = out_hashes;
    entry["cached"] = outputs.cached;
    entry["started_at"] = started;
    entry["finished_at"] = utc_timestamp();
    manifest["stages"][name] = entry;
    write_file_atomic(path, manifest.dump(2) + "\n");
  }

  PipelineConfig cfg_;
  fs::path out_;
};

}  // namespace specialism::pipeline
