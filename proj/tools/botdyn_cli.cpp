// botdyn: command-line front end. Every pipeline stage is a subcommand that
// reads and writes the same files the full pipeline produces.
//
// Exit codes: 0 success, 1 input/validation error, 2 internal error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "botdyn/botdyn.hpp"

namespace fs = std::filesystem;
using namespace botdyn;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string out;
};

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") std::cout << content;
  else write_file(out, content);
}

std::vector<Emotion> parse_emotions(const std::vector<std::string>& names) {
  std::vector<Emotion> out;
  for (const auto& n : names) {
    auto e = parse_emotion(n);
    if (!e) throw ValidationError("unknown emotion '" + n + "'");
    out.push_back(*e);
  }
  return out;
}

std::unique_ptr<Scorer> make_scorer(const std::string& spec) {
  if (spec == "hash") return std::make_unique<HashScorer>();
  if (spec.starts_with("constant:")) {
    auto v = parse_double(spec.substr(9));
    if (!v) throw ValidationError("bad constant scorer value in '" + spec + "'");
    return std::make_unique<ConstantScorer>(*v);
  }
  if (spec.starts_with("file:")) return std::make_unique<FileScorer>(spec.substr(5));
  throw ValidationError("unknown scorer '" + spec + "' (use hash, constant:<v>, file:<path>)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Computational-mechanics analysis of scored message streams"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--jobs", g.jobs, "Worker threads");
  app.add_option("--out", g.out, "Output file or directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a corpus, or score raw texts");
  std::string ingest_in, ingest_texts, ingest_scorer = "hash", ingest_format;
  ingest->add_option("--in", ingest_in, "Corpus file (CSV or JSONL)");
  ingest->add_option("--texts", ingest_texts, "Raw text file, one message per line");
  ingest->add_option("--scorer", ingest_scorer, "hash | constant:<v> | file:<scores.jsonl>");
  ingest->add_option("--format", ingest_format, "Input format (csv|jsonl); default from extension");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus or symbol stream");
  std::string sim_spec;
  std::size_t sim_n = 100000;
  simulate->add_option("--spec", sim_spec, "Corpus or process spec (JSON)")->required();
  simulate->add_option("--n", sim_n, "Symbols to generate for a process spec");

  // bin
  auto* bin_cmd = app.add_subcommand("bin", "Segment a corpus and discretize each window");
  std::string bin_in, bin_strategy = "quartile";
  double bin_base = 2.0;
  std::size_t bin_window = 3000;
  std::vector<std::string> bin_emotions;
  bin_cmd->add_option("--in", bin_in, "Corpus file")->required();
  bin_cmd->add_option("--strategy", bin_strategy, "quartile | rank_uniform | exponential");
  bin_cmd->add_option("--exp-base", bin_base, "Width ratio for exponential bins");
  bin_cmd->add_option("--window-len", bin_window, "Records per window");
  bin_cmd->add_option("--emotions", bin_emotions, "Emotion subset");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct the causal-state machine of one sequence");
  std::string recon_in;
  std::size_t recon_L = 3;
  double recon_alpha = 0.001;
  std::uint64_t recon_min = 5;
  recon->add_option("--in", recon_in, "Sequence .txt file")->required();
  recon->add_option("--L", recon_L, "Window length (histories up to L-1)");
  recon->add_option("--alpha", recon_alpha, "Significance level of the split test");
  recon->add_option("--min-count", recon_min, "Minimum history count before a split");

  // measures
  auto* meas = app.add_subcommand("measures", "Compute C, h, E for every sequence in a directory");
  std::string meas_dir, meas_machines;
  std::size_t meas_L = 3;
  double meas_alpha = 0.001;
  std::uint64_t meas_min = 5;
  meas->add_option("--sequences", meas_dir, "Directory written by 'bin'")->required();
  meas->add_option("--machines", meas_machines, "Also write machine JSON files here");
  meas->add_option("--L", meas_L, "Window length");
  meas->add_option("--alpha", meas_alpha, "Significance level");
  meas->add_option("--min-count", meas_min, "Minimum history count");

  // features
  auto* feat = app.add_subcommand("features", "Per-window bot level and controls");
  std::string feat_in, feat_spread = "gap_variance";
  std::size_t feat_window = 3000;
  std::vector<std::string> feat_emotions;
  feat->add_option("--in", feat_in, "Corpus file")->required();
  feat->add_option("--window-len", feat_window, "Records per window");
  feat->add_option("--time-spread", feat_spread, "gap_variance | elapsed_span");
  feat->add_option("--emotions", feat_emotions, "Emotion subset");

  // regress
  auto* reg = app.add_subcommand("regress", "Fit the complexity and uncertainty models");
  std::string reg_measures, reg_features;
  bool reg_effects = false, reg_robust = false;
  reg->add_option("--measures", reg_measures, "measures.csv")->required();
  reg->add_option("--features", reg_features, "features.csv")->required();
  reg->add_flag("--emotion-effects", reg_effects, "Add emotion indicator terms");
  reg->add_flag("--robust", reg_robust, "HC1 robust standard errors");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage and write a bundle");
  std::string pipe_in, pipe_strategy;
  std::optional<std::size_t> pipe_window, pipe_L;
  std::optional<double> pipe_alpha;
  pipe->add_option("--in", pipe_in, "Corpus file (overrides config)");
  pipe->add_option("--strategy", pipe_strategy, "Binning strategy (overrides config)");
  pipe->add_option("--window-len", pipe_window, "Records per window (overrides config)");
  pipe->add_option("--L", pipe_L, "Window length (overrides config)");
  pipe->add_option("--alpha", pipe_alpha, "Significance level (overrides config)");

  // report
  auto* rep = app.add_subcommand("report", "Summarize a finished bundle");
  std::string rep_bundle;
  rep->add_option("--bundle", rep_bundle, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const nlohmann::json config = g.config.empty() ? nlohmann::json::object() : load_json(g.config);

    if (*ingest) {
      Corpus corpus;
      if (!ingest_texts.empty()) {
        std::ifstream in(ingest_texts);
        if (!in) throw ValidationError("cannot open '" + ingest_texts + "'");
        std::vector<std::string> texts;
        for (std::string line; std::getline(in, line);) texts.push_back(line);
        corpus = score_with(texts, *make_scorer(ingest_scorer));
      } else if (!ingest_in.empty()) {
        const auto fmt = ingest_format.empty() ? format_from_path(ingest_in)
                         : ingest_format == "jsonl" ? RecordFormat::jsonl
                         : ingest_format == "csv"   ? RecordFormat::csv
                                                    : throw ValidationError("unknown format '" + ingest_format + "'");
        corpus = read_records(ingest_in, fmt);
      } else {
        throw ValidationError("ingest needs --in or --texts");
      }
      std::ostringstream ss;
      write_records(ss, corpus, g.out.empty() ? RecordFormat::csv : format_from_path(g.out));
      emit(g.out, ss.str());
      std::cerr << "ingested " << corpus.size() << " records\n";
    } else if (*simulate) {
      auto spec = load_json(sim_spec);
      if (spec.contains("name")) {
        auto ps = process_spec_from_json(spec);
        if (g.seed) ps.seed = *g.seed;
        emit(g.out, symbols_to_text(generate_symbols(ps, sim_n)));
      } else {
        auto cs = corpus_spec_from_json(spec);
        if (g.seed) cs.seed = *g.seed;
        const auto corpus = generate_corpus(cs);
        std::ostringstream ss;
        write_records(ss, corpus, g.out.empty() ? RecordFormat::csv : format_from_path(g.out));
        emit(g.out, ss.str());
      }
    } else if (*bin_cmd) {
      if (g.out.empty()) throw ValidationError("bin needs --out <directory>");
      PipelineConfig c;
      c.input = bin_in;
      c.window_len = bin_window;
      c.strategy = {parse_binning_kind(bin_strategy), bin_base};
      if (!bin_emotions.empty()) c.emotions = parse_emotions(bin_emotions);
      if (g.jobs) c.jobs = *g.jobs;
      c.strategy.validate();
      const auto seqs = build_sequences(read_records(bin_in), c);
      for (const auto& s : seqs) write_sequence(g.out, s);
      std::cerr << "wrote " << seqs.size() << " sequences to " << g.out << "\n";
    } else if (*recon) {
      const auto seq = read_sequence(recon_in);
      const auto m = reconstruct(count_histories(seq.symbols, recon_L, kDefaultAlphabet),
                                 {recon_alpha, recon_min});
      emit(g.out, machine_to_json(m).dump(2) + "\n");
    } else if (*meas) {
      const MeasureParams params{meas_L, {meas_alpha, meas_min}};
      std::vector<SymbolSequence> seqs;
      for (const auto& p : list_sequence_files(meas_dir)) seqs.push_back(read_sequence(p));
      // Same row order as the pipeline: emotion, then window.
      std::stable_sort(seqs.begin(), seqs.end(), [](const SymbolSequence& a, const SymbolSequence& b) {
        return std::tie(a.emotion, a.window_index) < std::tie(b.emotion, b.window_index);
      });
      const auto measured = measure_all(seqs, params, g.jobs.value_or(1));
      std::vector<MeasureSet> rows;
      for (std::size_t i = 0; i < measured.size(); ++i) {
        rows.push_back(measured[i].measures);
        if (!meas_machines.empty() && measured[i].machine)
          write_file(fs::path(meas_machines) / (sequence_key(seqs[i]) + ".json"),
                     machine_to_json(*measured[i].machine).dump(2) + "\n");
      }
      emit(g.out, measures_csv(rows));
    } else if (*feat) {
      TimeSpread mode = TimeSpread::gap_variance;
      if (feat_spread == "elapsed_span") mode = TimeSpread::elapsed_span;
      else if (feat_spread != "gap_variance") throw ValidationError("unknown time spread '" + feat_spread + "'");
      auto rows = feature_table(read_records(feat_in), feat_window, mode);
      if (!feat_emotions.empty()) rows = select_emotions(rows, parse_emotions(feat_emotions));
      emit(g.out, features_csv(rows));
    } else if (*reg) {
      if (g.out.empty()) throw ValidationError("regress needs --out <directory>");
      const auto run = run_models(read_measures_csv(reg_measures), read_features_csv(reg_features),
                                  {reg_effects, reg_robust});
      write_regression_outputs(g.out, run);
      if (run.dropped_error_rows)
        std::cerr << "dropped " << run.dropped_error_rows << " failed sequence rows\n";
      std::cout << format_report(run);
    } else if (*pipe) {
      PipelineConfig c;
      apply_config_json(c, config);
      if (!pipe_in.empty()) c.input = pipe_in;
      if (!pipe_strategy.empty()) c.strategy.kind = parse_binning_kind(pipe_strategy);
      if (pipe_window) c.window_len = *pipe_window;
      if (pipe_L) c.L = *pipe_L;
      if (pipe_alpha) c.alpha = *pipe_alpha;
      if (g.seed) c.seed = *g.seed;
      if (g.jobs) c.jobs = *g.jobs;
      if (!g.out.empty()) c.out_dir = g.out;
      const auto summary = run_pipeline(c);
      std::cerr << "records: " << summary.n_records << ", sequences: " << summary.n_sequences
                << ", failed: " << summary.n_failed << "\n";
      for (const auto& e : summary.errors) std::cerr << "  " << e << "\n";
      if (summary.regression_ok) std::cout << report_bundle(c.out_dir);
    } else if (*rep) {
      std::cout << report_bundle(rep_bundle);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ComputationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
