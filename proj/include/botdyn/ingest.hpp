// Scored message records: parsing, validation, serialization, and the
// pluggable scorer contract used to produce them from raw text.
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "botdyn/common.hpp"

namespace botdyn {

struct MessageRecord {
  std::string id;
  double timestamp = 0.0;  // seconds since epoch
  std::array<double, 5> emotions{};  // indexed by Emotion
  double bot_score = 0.0;
  std::int64_t word_count = 0;
  std::int64_t char_count = 0;  // non-whitespace characters

  double emotion(Emotion e) const { return emotions[static_cast<std::size_t>(e)]; }
  bool operator==(const MessageRecord&) const = default;
};

struct Corpus {
  std::vector<MessageRecord> records;

  std::size_t size() const { return records.size(); }
  bool operator==(const Corpus&) const = default;
};

enum class RecordFormat { csv, jsonl };

inline RecordFormat format_from_path(std::string_view path) {
  if (path.ends_with(".jsonl") || path.ends_with(".json")) return RecordFormat::jsonl;
  return RecordFormat::csv;
}

namespace detail {

inline std::string where(std::string_view unit, std::size_t row) {
  return std::string(unit) + " " + std::to_string(row);
}

inline void check_unit_interval(double v, std::string_view field, const std::string& loc) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw ValidationError(loc + ": field '" + std::string(field) + "' = " +
                          format_double(v) + " out of range [0,1]");
  }
}

inline bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace detail

/// Enforces the MessageRecord invariants; `loc` prefixes error messages
/// (for example "row 4").
inline void validate_record(const MessageRecord& r, const std::string& loc = "record") {
  for (Emotion e : kEmotions) detail::check_unit_interval(r.emotion(e), to_string(e), loc);
  detail::check_unit_interval(r.bot_score, "bot_score", loc);
  if (!std::isfinite(r.timestamp))
    throw ValidationError(loc + ": field 'timestamp' is not finite");
  if (r.word_count < 0)
    throw ValidationError(loc + ": field 'word_count' is negative");
  if (r.char_count < 0)
    throw ValidationError(loc + ": field 'char_count' is negative");
  if (r.word_count >= 1 && r.char_count < r.word_count)
    throw ValidationError(loc + ": field 'char_count' (" + std::to_string(r.char_count) +
                          ") is smaller than word_count (" + std::to_string(r.word_count) + ")");
}

/// Parses numeric epoch seconds or an ISO-8601 date/time such as
/// "2020-10-01T12:30:05.25Z" or "2020-10-01 12:30:05+02:00".
inline std::optional<double> parse_timestamp(std::string_view s) {
  if (auto v = parse_double(s)) return v;
  while (!s.empty() && detail::is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && detail::is_space(s.back())) s.remove_suffix(1);

  std::size_t pos = 0;
  auto read_digits = [&](std::size_t n) -> std::optional<int> {
    if (pos + n > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      char c = s[pos + i];
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    pos += n;
    return v;
  };
  auto expect = [&](char c) {
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  };

  auto y = read_digits(4);
  if (!y || !expect('-')) return std::nullopt;
  auto mo = read_digits(2);
  if (!mo || !expect('-')) return std::nullopt;
  auto d = read_digits(2);
  if (!d) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  double secs = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0;
  if (pos == s.size()) return secs;

  if (!expect('T') && !expect(' ')) return std::nullopt;
  auto hh = read_digits(2);
  if (!hh || !expect(':')) return std::nullopt;
  auto mm = read_digits(2);
  if (!mm) return std::nullopt;
  int ss = 0;
  if (expect(':')) {
    auto v = read_digits(2);
    if (!v) return std::nullopt;
    ss = *v;
  }
  if (*hh > 23 || *mm > 59 || ss > 60) return std::nullopt;
  double frac = 0.0;
  if (expect('.') || expect(',')) {
    double scale = 0.1;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      frac += (s[pos] - '0') * scale;
      scale /= 10.0;
      ++pos;
    }
    if (pos == start) return std::nullopt;
  }
  secs += *hh * 3600.0 + *mm * 60.0 + ss + frac;
  if (pos == s.size() || expect('Z') || expect('z')) return pos == s.size() ? std::optional(secs) : std::nullopt;
  int sign = 0;
  if (expect('+')) sign = 1;
  else if (expect('-')) sign = -1;
  else return std::nullopt;
  auto oh = read_digits(2);
  if (!oh) return std::nullopt;
  expect(':');
  auto om = read_digits(2);
  if (!om) return std::nullopt;
  if (pos != s.size()) return std::nullopt;
  return secs - sign * (*oh * 3600.0 + *om * 60.0);
}

inline std::int64_t count_words(std::string_view text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (detail::is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

/// Counts bytes that are not whitespace. Multi-byte UTF-8 sequences count
/// once per code point.
inline std::int64_t count_nonspace_chars(std::string_view text) {
  std::int64_t n = 0;
  for (unsigned char c : text) {
    if (detail::is_space(c)) continue;
    if ((c & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
    ++n;
  }
  return n;
}

/// Stable sort by timestamp; equal timestamps keep input order.
inline void sort_by_time(Corpus& corpus) {
  std::stable_sort(corpus.records.begin(), corpus.records.end(),
                   [](const MessageRecord& a, const MessageRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

// Splits one CSV line honoring double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t row) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) throw ValidationError(where("row", row) + ": unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline constexpr std::array<std::string_view, 10> kCsvColumns = {
    "id", "timestamp", "anger", "fear", "sadness", "joy", "disgust",
    "bot_score", "word_count", "char_count"};

}  // namespace detail

inline Corpus read_csv(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw ValidationError("row 1: missing CSV header");
  auto header = detail::split_csv_line(line, row);
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = header[i];
    while (!name.empty() && detail::is_space(static_cast<unsigned char>(name.back()))) name.pop_back();
    while (!name.empty() && detail::is_space(static_cast<unsigned char>(name.front()))) name.erase(0, 1);
    if (!col.emplace(name, i).second)
      throw ValidationError("row 1: duplicate column '" + name + "'");
  }
  for (auto name : detail::kCsvColumns) {
    if (!col.contains(name)) {
      if (parse_emotion(name))
        throw ValidationError("row 1: missing emotion label '" + std::string(name) + "'");
      throw ValidationError("row 1: missing column '" + std::string(name) + "'");
    }
  }

  Corpus corpus;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line, row);
    const std::string loc = detail::where("row", row);
    if (fields.size() != header.size())
      throw ValidationError(loc + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
    auto field = [&](std::string_view name) -> const std::string& {
      return fields[col.find(name)->second];
    };
    auto number = [&](std::string_view name) {
      auto v = parse_double(field(name));
      if (!v)
        throw ValidationError(loc + ": field '" + std::string(name) + "' is not a number ('" +
                              field(name) + "')");
      return *v;
    };
    auto integer = [&](std::string_view name) {
      auto v = parse_int(field(name));
      if (!v)
        throw ValidationError(loc + ": field '" + std::string(name) + "' is not an integer ('" +
                              field(name) + "')");
      return *v;
    };

    MessageRecord r;
    r.id = field("id");
    auto ts = parse_timestamp(field("timestamp"));
    if (!ts)
      throw ValidationError(loc + ": field 'timestamp' is not a valid timestamp ('" +
                            field("timestamp") + "')");
    r.timestamp = *ts;
    for (Emotion e : kEmotions)
      r.emotions[static_cast<std::size_t>(e)] = number(to_string(e));
    r.bot_score = number("bot_score");
    r.word_count = integer("word_count");
    r.char_count = integer("char_count");
    validate_record(r, loc);
    corpus.records.push_back(std::move(r));
  }
  sort_by_time(corpus);
  return corpus;
}

inline void write_csv(std::ostream& out, const Corpus& corpus) {
  for (std::size_t i = 0; i < detail::kCsvColumns.size(); ++i)
    out << (i ? "," : "") << detail::kCsvColumns[i];
  out << '\n';
  for (const auto& r : corpus.records) {
    out << detail::csv_escape(r.id) << ',' << format_double(r.timestamp);
    for (double v : r.emotions) out << ',' << format_double(v);
    out << ',' << format_double(r.bot_score) << ',' << r.word_count << ',' << r.char_count
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSONL

inline MessageRecord record_from_json(const nlohmann::json& j, const std::string& loc) {
  if (!j.is_object()) throw ValidationError(loc + ": expected a JSON object");
  auto require = [&](std::string_view key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end())
      throw ValidationError(loc + ": missing field '" + std::string(key) + "'");
    return *it;
  };
  auto number = [&](const nlohmann::json& v, std::string_view name) {
    if (!v.is_number())
      throw ValidationError(loc + ": field '" + std::string(name) + "' is not a number");
    return v.get<double>();
  };
  auto integer = [&](std::string_view name) {
    const auto& v = require(name);
    if (!v.is_number_integer())
      throw ValidationError(loc + ": field '" + std::string(name) + "' is not an integer");
    return v.get<std::int64_t>();
  };

  MessageRecord r;
  const auto& id = require("id");
  r.id = id.is_string() ? id.get<std::string>() : id.dump();
  const auto& ts = require("timestamp");
  if (ts.is_number()) {
    r.timestamp = ts.get<double>();
  } else if (ts.is_string()) {
    auto v = parse_timestamp(ts.get<std::string>());
    if (!v) throw ValidationError(loc + ": field 'timestamp' is not a valid timestamp");
    r.timestamp = *v;
  } else {
    throw ValidationError(loc + ": field 'timestamp' is not a valid timestamp");
  }

  const nlohmann::json* emo = &j;
  if (auto it = j.find("emotions"); it != j.end()) {
    if (!it->is_object()) throw ValidationError(loc + ": field 'emotions' is not an object");
    emo = &*it;
  }
  for (Emotion e : kEmotions) {
    auto it = emo->find(to_string(e));
    if (it == emo->end())
      throw ValidationError(loc + ": missing emotion label '" + std::string(to_string(e)) + "'");
    r.emotions[static_cast<std::size_t>(e)] = number(*it, to_string(e));
  }
  r.bot_score = number(require("bot_score"), "bot_score");
  r.word_count = integer("word_count");
  r.char_count = integer("char_count");
  validate_record(r, loc);
  return r;
}

inline nlohmann::json record_to_json(const MessageRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["timestamp"] = r.timestamp;
  for (Emotion e : kEmotions) j[std::string(to_string(e))] = r.emotion(e);
  j["bot_score"] = r.bot_score;
  j["word_count"] = r.word_count;
  j["char_count"] = r.char_count;
  return j;
}

inline Corpus read_jsonl(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return detail::is_space(c); }))
      continue;
    const std::string loc = detail::where("line", row);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(loc + ": malformed JSON (" + e.what() + ")");
    }
    corpus.records.push_back(record_from_json(j, loc));
  }
  sort_by_time(corpus);
  return corpus;
}

inline void write_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.records) out << record_to_json(r).dump() << '\n';
}

inline Corpus read_records(std::istream& in, RecordFormat format) {
  return format == RecordFormat::csv ? read_csv(in) : read_jsonl(in);
}

inline Corpus read_records(const std::string& path, RecordFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  return read_records(in, format);
}

inline Corpus read_records(const std::string& path) {
  return read_records(path, format_from_path(path));
}

inline void write_records(std::ostream& out, const Corpus& corpus, RecordFormat format) {
  if (format == RecordFormat::csv) write_csv(out, corpus);
  else write_jsonl(out, corpus);
}

inline void write_records(const std::string& path, const Corpus& corpus, RecordFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  write_records(out, corpus, format);
}

// ---------------------------------------------------------------------------
// Scoring

struct Scores {
  std::array<double, 5> emotions{};
  double bot_score = 0.0;
};

/// Maps raw message text to five emotion scores and a bot probability.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Scores score(std::string_view text) const = 0;
};

class ConstantScorer final : public Scorer {
 public:
  explicit ConstantScorer(double value) : value_(value) {}
  Scores score(std::string_view) const override {
    Scores s;
    s.emotions.fill(value_);
    s.bot_score = value_;
    return s;
  }

 private:
  double value_;
};

/// Deterministic mock: scores derived from an FNV-1a hash of the text.
class HashScorer final : public Scorer {
 public:
  Scores score(std::string_view text) const override {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    Scores s;
    for (auto& v : s.emotions) {
      h ^= h >> 29;
      h *= 0xbf58476d1ce4e5b9ULL;
      v = static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
    }
    h ^= h >> 31;
    s.bot_score = static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
    return s;
  }
};

/// Offline scorer backed by a JSONL file of pre-computed scores, one object
/// per line: {"text": ..., "anger": ..., ..., "bot_score": ...}.
class FileScorer final : public Scorer {
 public:
  explicit FileScorer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open score file '" + path + "'");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      const std::string loc = detail::where("line", row);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(loc + ": malformed JSON (" + e.what() + ")");
      }
      if (!j.contains("text") || !j["text"].is_string())
        throw ValidationError(loc + ": missing field 'text'");
      Scores s;
      const nlohmann::json& emo = j.contains("emotions") ? j["emotions"] : j;
      for (Emotion e : kEmotions) {
        auto key = std::string(to_string(e));
        if (!emo.contains(key) || !emo[key].is_number())
          throw ValidationError(loc + ": missing emotion label '" + key + "'");
        s.emotions[static_cast<std::size_t>(e)] = emo[key].get<double>();
        detail::check_unit_interval(s.emotions[static_cast<std::size_t>(e)], key, loc);
      }
      if (!j.contains("bot_score") || !j["bot_score"].is_number())
        throw ValidationError(loc + ": missing field 'bot_score'");
      s.bot_score = j["bot_score"].get<double>();
      detail::check_unit_interval(s.bot_score, "bot_score", loc);
      table_[j["text"].get<std::string>()] = s;
    }
  }

  Scores score(std::string_view text) const override {
    auto it = table_.find(std::string(text));
    if (it == table_.end()) throw std::runtime_error("no scores recorded for text");
    return it->second;
  }

 private:
  std::unordered_map<std::string, Scores> table_;
};

/// Scores each text into a MessageRecord. Records get ids "msg-<index>" and
/// timestamps equal to their index in seconds.
inline Corpus score_with(const std::vector<std::string>& texts, const Scorer& scorer) {
  Corpus corpus;
  corpus.records.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Scores s;
    try {
      s = scorer.score(texts[i]);
    } catch (const std::exception& e) {
      throw ValidationError("scorer failed on item " + std::to_string(i) + ": " + e.what());
    }
    MessageRecord r;
    r.id = "msg-" + std::to_string(i);
    r.timestamp = static_cast<double>(i);
    r.emotions = s.emotions;
    r.bot_score = s.bot_score;
    r.word_count = count_words(texts[i]);
    r.char_count = count_nonspace_chars(texts[i]);
    validate_record(r, "item " + std::to_string(i));
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace botdyn
