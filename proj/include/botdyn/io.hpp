// File formats shared by the CLI stages and the pipeline bundle.
#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "botdyn/common.hpp"
#include "botdyn/cssr.hpp"
#include "botdyn/features.hpp"
#include "botdyn/ingest.hpp"
#include "botdyn/measures.hpp"
#include "botdyn/regression.hpp"
#include "botdyn/sequencing.hpp"

namespace botdyn {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  hex.reserve(2 * len);
  static constexpr char digits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(digits[md[i] >> 4]);
    hex.push_back(digits[md[i] & 0xF]);
  }
  return hex;
}

// ---------------------------------------------------------------------------
// Symbol sequences: <key>.txt holds one line of digits, <key>.json the metadata.

inline std::string symbols_to_text(const Symbols& s) {
  std::string out;
  out.reserve(s.size() + 1);
  for (Symbol x : s) out.push_back(static_cast<char>('0' + x));
  out.push_back('\n');
  return out;
}

inline Symbols symbols_from_text(std::string_view text) {
  Symbols out;
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
    if (c < '0' || c > '9') throw ValidationError(std::string("invalid symbol character '") + c + "'");
    out.push_back(static_cast<Symbol>(c - '0'));
  }
  return out;
}

inline nlohmann::json sequence_metadata(const SymbolSequence& s) {
  nlohmann::json j;
  j["emotion"] = to_string(s.emotion);
  j["window_index"] = s.window_index;
  j["strategy"] = to_string(s.strategy.kind);
  j["exp_base"] = s.strategy.exp_base;
  j["length"] = s.symbols.size();
  j["source_record_ids"] = s.source_record_ids;
  return j;
}

inline void write_sequence(const fs::path& dir, const SymbolSequence& s) {
  const auto key = sequence_key(s);
  write_file(dir / (key + ".txt"), symbols_to_text(s.symbols));
  write_file(dir / (key + ".json"), sequence_metadata(s).dump(2) + "\n");
}

/// Reads a sequence from its .txt file; the .json sidecar, when present,
/// supplies metadata, otherwise it is recovered from the file name.
inline SymbolSequence read_sequence(const fs::path& txt) {
  SymbolSequence s;
  s.symbols = symbols_from_text(read_file(txt));
  auto sidecar = txt;
  sidecar.replace_extension(".json");
  if (fs::exists(sidecar)) {
    try {
      const auto j = nlohmann::json::parse(read_file(sidecar));
      auto e = parse_emotion(j.at("emotion").get<std::string>());
      if (!e) throw ValidationError("unknown emotion in " + sidecar.string());
      s.emotion = *e;
      s.window_index = j.at("window_index").get<std::size_t>();
      s.strategy.kind = parse_binning_kind(j.at("strategy").get<std::string>());
      s.strategy.exp_base = j.value("exp_base", 2.0);
      s.source_record_ids = j.value("source_record_ids", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError("sequence sidecar " + sidecar.string() + ": " + ex.what());
    }
  }
  return s;
}

/// All <key>.txt sequence files in a directory, sorted by file name.
inline std::vector<fs::path> list_sequence_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Measures and features tables

inline std::string measures_csv(const std::vector<MeasureSet>& rows) {
  std::ostringstream out;
  out << "emotion,window_index,strategy,C,h,E,n_states,error\n";
  for (const auto& m : rows) {
    out << to_string(m.emotion) << ',' << m.window_index << ',' << to_string(m.strategy.kind) << ',';
    if (m.ok()) {
      out << format_double(m.complexity_C) << ',' << format_double(m.entropy_rate_h) << ','
          << format_double(m.predictable_E) << ',' << m.n_states << ",\n";
    } else {
      out << ",,,0," << detail::csv_escape(m.error) << '\n';
    }
  }
  return out.str();
}

namespace detail {

struct CsvTable {
  std::map<std::string, std::size_t> col;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  const std::string& get(std::size_t r, const std::string& name) const {
    return rows[r][col.at(name)];
  }
};

inline CsvTable read_csv_table(const fs::path& path, const std::vector<std::string>& required) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  auto header = split_csv_line(line, row);
  for (std::size_t i = 0; i < header.size(); ++i) t.col[header[i]] = i;
  for (const auto& r : required)
    if (!t.col.contains(r)) throw ValidationError(path.string() + ": missing column '" + r + "'");
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto f = split_csv_line(line, row);
    if (f.size() != header.size())
      throw ValidationError(path.string() + ": row " + std::to_string(row) + ": wrong field count");
    t.rows.push_back(std::move(f));
    t.line_numbers.push_back(row);
  }
  return t;
}

inline double table_number(const CsvTable& t, std::size_t r, const std::string& name,
                           const fs::path& path) {
  auto v = parse_double(t.get(r, name));
  if (!v)
    throw ValidationError(path.string() + ": row " + std::to_string(t.line_numbers[r]) +
                          ": field '" + name + "' is not a number");
  return *v;
}

inline Emotion table_emotion(const CsvTable& t, std::size_t r, const fs::path& path) {
  auto e = parse_emotion(t.get(r, "emotion"));
  if (!e)
    throw ValidationError(path.string() + ": row " + std::to_string(t.line_numbers[r]) +
                          ": unknown emotion '" + t.get(r, "emotion") + "'");
  return *e;
}

}  // namespace detail

inline std::vector<MeasureSet> read_measures_csv(const fs::path& path) {
  const auto t = detail::read_csv_table(
      path, {"emotion", "window_index", "strategy", "C", "h", "E", "n_states", "error"});
  std::vector<MeasureSet> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    MeasureSet m;
    m.emotion = detail::table_emotion(t, r, path);
    m.window_index = static_cast<std::size_t>(detail::table_number(t, r, "window_index", path));
    m.strategy.kind = parse_binning_kind(t.get(r, "strategy"));
    m.error = t.get(r, "error");
    if (m.ok()) {
      m.complexity_C = detail::table_number(t, r, "C", path);
      m.entropy_rate_h = detail::table_number(t, r, "h", path);
      m.predictable_E = detail::table_number(t, r, "E", path);
      m.n_states = static_cast<std::size_t>(detail::table_number(t, r, "n_states", path));
    }
    out.push_back(m);
  }
  return out;
}

inline std::string features_csv(const std::vector<SequenceFeatures>& rows) {
  std::ostringstream out;
  out << "emotion,window_index,bot_level,word_count,word_complexity,time_variance\n";
  for (const auto& f : rows)
    out << to_string(f.emotion) << ',' << f.window_index << ',' << format_double(f.bot_level)
        << ',' << format_double(f.word_count_mean) << ',' << format_double(f.word_complexity)
        << ',' << format_double(f.time_variance) << '\n';
  return out.str();
}

inline std::vector<SequenceFeatures> read_features_csv(const fs::path& path) {
  const auto t = detail::read_csv_table(
      path, {"emotion", "window_index", "bot_level", "word_count", "word_complexity", "time_variance"});
  std::vector<SequenceFeatures> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    SequenceFeatures f;
    f.emotion = detail::table_emotion(t, r, path);
    f.window_index = static_cast<std::size_t>(detail::table_number(t, r, "window_index", path));
    f.bot_level = detail::table_number(t, r, "bot_level", path);
    f.word_count_mean = detail::table_number(t, r, "word_count", path);
    f.word_complexity = detail::table_number(t, r, "word_complexity", path);
    f.time_variance = detail::table_number(t, r, "time_variance", path);
    out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regression results

inline nlohmann::json regression_to_json(const RegressionResult& r, double level = 0.95) {
  nlohmann::json j;
  j["response"] = r.response;
  j["n"] = r.n;
  j["df1"] = r.df1;
  j["df2"] = r.df2;
  j["F"] = r.f_statistic;
  j["F_p_value"] = r.f_p_value;
  j["r_squared"] = r.r_squared;
  j["adj_r_squared"] = r.adj_r_squared;
  j["robust"] = r.robust;
  const auto ci = confidence_intervals(r, level);
  auto terms = nlohmann::json::array();
  for (std::size_t i = 0; i < r.terms.size(); ++i) {
    const auto& t = r.terms[i];
    terms.push_back({{"name", t.name},
                     {"coefficient", t.coefficient},
                     {"std_coefficient", t.std_coefficient},
                     {"std_error", t.std_error},
                     {"t", t.t_value},
                     {"p", t.p_value},
                     {"ci_lo", ci[i].lo},
                     {"ci_hi", ci[i].hi}});
  }
  j["terms"] = terms;
  return j;
}

inline RegressionResult regression_from_json(const nlohmann::json& j) {
  RegressionResult r;
  try {
    r.response = j.at("response").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.df1 = j.at("df1").get<std::size_t>();
    r.df2 = j.at("df2").get<std::size_t>();
    // Infinite statistics serialize as null.
    r.f_statistic = j.at("F").is_null() ? std::numeric_limits<double>::infinity() : j["F"].get<double>();
    r.f_p_value = j.at("F_p_value").get<double>();
    r.r_squared = j.at("r_squared").get<double>();
    r.adj_r_squared = j.at("adj_r_squared").get<double>();
    r.robust = j.value("robust", false);
    for (const auto& jt : j.at("terms")) {
      Term t;
      t.name = jt.at("name").get<std::string>();
      t.coefficient = jt.at("coefficient").get<double>();
      t.std_coefficient = jt.at("std_coefficient").get<double>();
      t.std_error = jt.at("std_error").get<double>();
      t.t_value = jt.at("t").is_null() ? std::numeric_limits<double>::infinity() : jt["t"].get<double>();
      t.p_value = jt.at("p").get<double>();
      r.terms.push_back(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("regression JSON: ") + e.what());
  }
  return r;
}

inline nlohmann::json model_run_to_json(const ModelRun& run) {
  nlohmann::json j;
  j["dropped_error_rows"] = run.dropped_error_rows;
  auto models = nlohmann::json::array();
  for (const auto& m : run.models)
    models.push_back({{"name", m.name}, {"raw", regression_to_json(m.raw)},
                      {"standardized", regression_to_json(m.standardized)}});
  j["models"] = models;
  return j;
}

inline ModelRun model_run_from_json(const nlohmann::json& j) {
  ModelRun run;
  try {
    run.dropped_error_rows = j.value("dropped_error_rows", std::size_t{0});
    for (const auto& jm : j.at("models")) {
      ModelFit f;
      f.name = jm.at("name").get<std::string>();
      f.raw = regression_from_json(jm.at("raw"));
      f.standardized = regression_from_json(jm.at("standardized"));
      run.models.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("regression JSON: ") + e.what());
  }
  return run;
}

inline std::string model_run_csv(const ModelRun& run) {
  std::ostringstream out;
  out << "model,scale,term,coefficient,std_coefficient,std_error,t,p,ci_lo,ci_hi\n";
  for (const auto& m : run.models) {
    for (const auto* fit : {&m.raw, &m.standardized}) {
      const auto ci = confidence_intervals(*fit);
      for (std::size_t i = 0; i < fit->terms.size(); ++i) {
        const auto& t = fit->terms[i];
        out << m.name << ',' << (fit == &m.raw ? "raw" : "standardized") << ','
            << detail::csv_escape(t.name) << ',' << format_double(t.coefficient) << ','
            << format_double(t.std_coefficient) << ',' << format_double(t.std_error) << ','
            << format_double(t.t_value) << ',' << format_double(t.p_value) << ','
            << format_double(ci[i].lo) << ',' << format_double(ci[i].hi) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace botdyn
