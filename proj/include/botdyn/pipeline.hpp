// End-to-end orchestration: corpus -> sequences -> machines -> measures,
// features -> regression, written as a reproducible file bundle.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "botdyn/common.hpp"
#include "botdyn/cssr.hpp"
#include "botdyn/features.hpp"
#include "botdyn/ingest.hpp"
#include "botdyn/io.hpp"
#include "botdyn/measures.hpp"
#include "botdyn/regression.hpp"
#include "botdyn/report.hpp"
#include "botdyn/sequencing.hpp"
#include "botdyn/simulate.hpp"

namespace botdyn {

struct PipelineConfig {
  std::string input;                      // corpus file; empty when simulating
  std::optional<nlohmann::json> simulate;  // corpus spec used when input is empty
  std::size_t window_len = 3000;
  BinningStrategy strategy;
  std::size_t L = 3;
  double alpha = 0.001;
  std::uint64_t min_count = 5;
  std::vector<Emotion> emotions{kEmotions.begin(), kEmotions.end()};
  std::string out_dir = "bundle";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  TimeSpread time_spread = TimeSpread::gap_variance;
  ModelOptions models;

  void validate() const {
    if (input.empty() && !simulate) throw ValidationError("config: no input corpus and no simulate spec");
    if (L < 1) throw ValidationError("config: L must be >= 1");
    if (window_len < 2 * L)
      throw ValidationError("config: window_len (" + std::to_string(window_len) + ") must be >= 2*L (" +
                            std::to_string(2 * L) + ")");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("config: alpha must lie in (0,1)");
    if (emotions.empty()) throw ValidationError("config: emotion subset is empty");
    if (jobs < 1) throw ValidationError("config: jobs must be >= 1");
    strategy.validate();
  }

  MeasureParams measure_params() const { return {L, {alpha, min_count}}; }
};

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["input"] = c.input;
  if (c.simulate) j["simulate"] = *c.simulate;
  j["window_len"] = c.window_len;
  j["strategy"] = to_string(c.strategy.kind);
  j["exp_base"] = c.strategy.exp_base;
  j["L"] = c.L;
  j["alpha"] = c.alpha;
  j["min_count"] = c.min_count;
  auto em = nlohmann::json::array();
  for (Emotion e : c.emotions) em.push_back(to_string(e));
  j["emotions"] = em;
  j["seed"] = c.seed;
  j["time_spread"] = c.time_spread == TimeSpread::gap_variance ? "gap_variance" : "elapsed_span";
  j["emotion_effects"] = c.models.emotion_effects;
  j["robust"] = c.models.robust;
  return j;
}

/// Applies the keys present in `j` on top of `c`.
inline void apply_config_json(PipelineConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("simulate")) c.simulate = j["simulate"];
    if (j.contains("window_len")) c.window_len = j["window_len"].get<std::size_t>();
    if (j.contains("strategy")) c.strategy.kind = parse_binning_kind(j["strategy"].get<std::string>());
    if (j.contains("exp_base")) c.strategy.exp_base = j["exp_base"].get<double>();
    if (j.contains("L")) c.L = j["L"].get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("min_count")) c.min_count = j["min_count"].get<std::uint64_t>();
    if (j.contains("emotions")) {
      c.emotions.clear();
      for (const auto& e : j["emotions"]) {
        auto parsed = parse_emotion(e.get<std::string>());
        if (!parsed) throw ValidationError("config: unknown emotion '" + e.get<std::string>() + "'");
        c.emotions.push_back(*parsed);
      }
    }
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<std::size_t>();
    if (j.contains("time_spread")) {
      const auto ts = j["time_spread"].get<std::string>();
      if (ts == "gap_variance") c.time_spread = TimeSpread::gap_variance;
      else if (ts == "elapsed_span") c.time_spread = TimeSpread::elapsed_span;
      else throw ValidationError("config: unknown time_spread '" + ts + "'");
    }
    if (j.contains("emotion_effects")) c.models.emotion_effects = j["emotion_effects"].get<bool>();
    if (j.contains("robust")) c.models.robust = j["robust"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

/// Runs fn(i) for i in [0, n) on `jobs` worker threads. Callers write
/// results into slot i, so output order never depends on scheduling.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

inline Corpus load_corpus(const PipelineConfig& c) {
  if (!c.input.empty()) return read_records(c.input);
  auto spec = corpus_spec_from_json(*c.simulate);
  if (!c.simulate->contains("seed")) spec.seed = c.seed;
  return generate_corpus(spec);
}

/// Discretizes every window of the selected emotions, ordered by emotion
/// then window index.
inline std::vector<SymbolSequence> build_sequences(const Corpus& corpus, const PipelineConfig& c) {
  auto windows = segment(corpus, c.window_len);
  std::erase_if(windows, [&](const ScoreWindow& w) {
    return std::find(c.emotions.begin(), c.emotions.end(), w.emotion) == c.emotions.end();
  });
  std::vector<SymbolSequence> out(windows.size());
  parallel_for(windows.size(), c.jobs, [&](std::size_t i) { out[i] = discretize(windows[i], c.strategy); });
  return out;
}

inline std::vector<MeasuredSequence> measure_all(const std::vector<SymbolSequence>& seqs,
                                                 const MeasureParams& params, std::size_t jobs) {
  std::vector<MeasuredSequence> out(seqs.size());
  parallel_for(seqs.size(), jobs, [&](std::size_t i) { out[i] = measure_sequence_with_machine(seqs[i], params); });
  return out;
}

inline std::vector<SequenceFeatures> select_emotions(std::vector<SequenceFeatures> rows,
                                                     const std::vector<Emotion>& emotions) {
  std::erase_if(rows, [&](const SequenceFeatures& f) {
    return std::find(emotions.begin(), emotions.end(), f.emotion) == emotions.end();
  });
  return rows;
}

inline void write_regression_outputs(const fs::path& dir, const ModelRun& run) {
  write_file(dir / "results.json", model_run_to_json(run).dump(2) + "\n");
  write_file(dir / "results.csv", model_run_csv(run));
  write_file(dir / "coefficients.svg", coefficient_plot_svg(run));
  write_file(dir / "summary.txt", format_report(run));
}

struct PipelineSummary {
  std::size_t n_records = 0;
  std::size_t n_sequences = 0;
  std::size_t n_failed = 0;
  bool regression_ok = false;
  std::vector<std::string> errors;
  fs::path out_dir;
};

inline std::string utc_now_iso() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Bundle layout under out_dir:
///   sequences/<key>.txt|.json, machines/<key>.json, measures.csv,
///   features.csv, regression/{results.json,results.csv,coefficients.svg,summary.txt},
///   manifest.json
inline PipelineSummary run_pipeline(const PipelineConfig& c) {
  c.validate();
  const fs::path out = c.out_dir;
  const Corpus corpus = load_corpus(c);

  PipelineSummary summary;
  summary.out_dir = out;
  summary.n_records = corpus.size();
  fs::create_directories(out);
  for (const char* sub : {"sequences", "machines", "regression"}) fs::remove_all(out / sub);

  const auto seqs = build_sequences(corpus, c);
  summary.n_sequences = seqs.size();
  for (const auto& s : seqs) write_sequence(out / "sequences", s);

  const auto measured = measure_all(seqs, c.measure_params(), c.jobs);
  std::vector<MeasureSet> measures;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    measures.push_back(measured[i].measures);
    if (measured[i].machine) {
      write_file(out / "machines" / (sequence_key(seqs[i]) + ".json"),
                 machine_to_json(*measured[i].machine).dump(2) + "\n");
    } else {
      ++summary.n_failed;
      summary.errors.push_back(sequence_key(seqs[i]) + ": " + measured[i].measures.error);
    }
  }
  write_file(out / "measures.csv", measures_csv(measures));

  const auto features = select_emotions(feature_table(corpus, c.window_len, c.time_spread), c.emotions);
  write_file(out / "features.csv", features_csv(features));

  try {
    const auto run = run_models(measures, features, c.models);
    write_regression_outputs(out / "regression", run);
    summary.regression_ok = true;
  } catch (const std::exception& e) {
    summary.errors.push_back(std::string("regression: ") + e.what());
  }

  nlohmann::json manifest;
  manifest["config"] = config_to_json(c);
  manifest["created_at"] = utc_now_iso();
  manifest["n_records"] = summary.n_records;
  manifest["n_sequences"] = summary.n_sequences;
  manifest["n_failed_sequences"] = summary.n_failed;
  manifest["errors"] = summary.errors;
  nlohmann::json files = nlohmann::json::object();
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(out))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) files[fs::relative(p, out).generic_string()] = sha256_hex(read_file(p));
  manifest["files"] = files;
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

/// Text summary of a finished bundle.
inline std::string report_bundle(const fs::path& bundle) {
  std::vector<std::string> missing;
  for (const char* rel : {"manifest.json", "measures.csv", "features.csv", "regression/results.json",
                          "regression/coefficients.svg"})
    if (!fs::exists(bundle / rel)) missing.push_back(rel);
  if (!missing.empty()) {
    std::string msg = "incomplete bundle '" + bundle.string() + "'; missing:";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(bundle / "regression/results.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("results.json: ") + e.what());
  }
  const auto run = model_run_from_json(j);
  return format_report(run);
}

}  // namespace botdyn
