// Temporal segmentation of a corpus and discretization of emotion scores
// into four-symbol sequences.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "botdyn/common.hpp"
#include "botdyn/ingest.hpp"

namespace botdyn {

enum class BinningKind { quartile, rank_uniform, exponential };

struct BinningStrategy {
  BinningKind kind = BinningKind::quartile;
  double exp_base = 2.0;  // exponential only

  void validate() const {
    if (!(exp_base > 1.0) || !std::isfinite(exp_base))
      throw ValidationError("exp_base must be > 1, got " + format_double(exp_base));
  }
  bool operator==(const BinningStrategy&) const = default;
};

inline std::string_view to_string(BinningKind k) {
  switch (k) {
    case BinningKind::quartile: return "quartile";
    case BinningKind::rank_uniform: return "rank_uniform";
    case BinningKind::exponential: return "exponential";
  }
  return "unknown";
}

inline BinningKind parse_binning_kind(std::string_view s) {
  if (s == "quartile") return BinningKind::quartile;
  if (s == "rank_uniform" || s == "rank") return BinningKind::rank_uniform;
  if (s == "exponential" || s == "exp") return BinningKind::exponential;
  throw ValidationError("unknown binning strategy '" + std::string(s) + "'");
}

/// Raw scores of one emotion over one window of consecutive records.
struct ScoreWindow {
  Emotion emotion = Emotion::anger;
  std::size_t window_index = 0;
  std::vector<double> raw;
  std::vector<std::string> record_ids;
};

struct SymbolSequence {
  Emotion emotion = Emotion::anger;
  std::size_t window_index = 0;
  BinningStrategy strategy;
  Symbols symbols;
  std::vector<std::string> source_record_ids;

  std::size_t size() const { return symbols.size(); }
};

inline std::size_t window_count(std::size_t n_records, std::size_t window_len) {
  return window_len == 0 ? 0 : n_records / window_len;
}

/// Non-overlapping windows of exactly `window_len` records; the trailing
/// partial window is dropped. Ordered by emotion, then window index.
inline std::vector<ScoreWindow> segment(const Corpus& corpus, std::size_t window_len = 3000) {
  if (window_len < 2) throw ValidationError("window_len must be >= 2");
  const std::size_t n_windows = window_count(corpus.size(), window_len);
  std::vector<ScoreWindow> out;
  out.reserve(n_windows * kEmotions.size());
  for (Emotion e : kEmotions) {
    for (std::size_t w = 0; w < n_windows; ++w) {
      ScoreWindow win;
      win.emotion = e;
      win.window_index = w;
      win.raw.reserve(window_len);
      win.record_ids.reserve(window_len);
      for (std::size_t i = w * window_len; i < (w + 1) * window_len; ++i) {
        win.raw.push_back(corpus.records[i].emotion(e));
        win.record_ids.push_back(corpus.records[i].id);
      }
      out.push_back(std::move(win));
    }
  }
  return out;
}

/// Record slices shared by all emotions of a window.
inline std::vector<std::span<const MessageRecord>> record_windows(const Corpus& corpus,
                                                                  std::size_t window_len) {
  if (window_len < 2) throw ValidationError("window_len must be >= 2");
  std::vector<std::span<const MessageRecord>> out;
  const std::size_t n_windows = window_count(corpus.size(), window_len);
  for (std::size_t w = 0; w < n_windows; ++w)
    out.emplace_back(corpus.records.data() + w * window_len, window_len);
  return out;
}

/// Linear-interpolation quantile (type 7) of already sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline std::array<double, 3> quartile_boundaries(std::span<const double> raw) {
  std::vector<double> sorted(raw.begin(), raw.end());
  std::sort(sorted.begin(), sorted.end());
  return {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
          quantile_sorted(sorted, 0.75)};
}

// Half-open intervals: v < b[0] -> 0, b[k-1] <= v < b[k] -> k, v >= b.back() -> last.
inline Symbol bin_by_boundaries(double v, std::span<const double> boundaries) {
  Symbol s = 0;
  for (double b : boundaries) {
    if (v < b) break;
    ++s;
  }
  return s;
}

inline Symbols bin_quartile(std::span<const double> raw) {
  if (raw.empty()) throw ValidationError("bin_quartile: empty input");
  const auto q = quartile_boundaries(raw);
  Symbols out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(),
                 [&](double v) { return bin_by_boundaries(v, q); });
  return out;
}

/// Rank r (0-based, ties by position) of n maps to floor(4 r / n).
inline Symbols bin_rank_uniform(std::span<const double> raw) {
  if (raw.empty()) throw ValidationError("bin_rank_uniform: empty input");
  const std::size_t n = raw.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  Symbols out(n);
  for (std::size_t r = 0; r < n; ++r)
    out[order[r]] = static_cast<Symbol>((kDefaultAlphabet * r) / n);
  return out;
}

/// Boundaries on [0,1] for four bins whose widths grow as base^k.
inline std::array<double, 3> exponential_boundaries(double base) {
  BinningStrategy{BinningKind::exponential, base}.validate();
  std::array<double, 4> widths{};
  double w = 1.0;
  for (auto& x : widths) {
    x = w;
    w *= base;
  }
  const double total = widths[0] + widths[1] + widths[2] + widths[3];
  return {widths[0] / total, (widths[0] + widths[1]) / total,
          (widths[0] + widths[1] + widths[2]) / total};
}

inline Symbols bin_exponential(std::span<const double> raw, double base = 2.0) {
  if (raw.empty()) throw ValidationError("bin_exponential: empty input");
  const auto b = exponential_boundaries(base);
  Symbols out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("bin_exponential: value " + format_double(v) + " at position " +
                            std::to_string(i) + " outside [0,1]");
    out[i] = bin_by_boundaries(v, b);
  }
  return out;
}

inline Symbols bin(std::span<const double> raw, const BinningStrategy& strategy) {
  switch (strategy.kind) {
    case BinningKind::quartile: return bin_quartile(raw);
    case BinningKind::rank_uniform: return bin_rank_uniform(raw);
    case BinningKind::exponential: return bin_exponential(raw, strategy.exp_base);
  }
  throw ValidationError("unknown binning strategy");
}

inline SymbolSequence discretize(const ScoreWindow& window, const BinningStrategy& strategy) {
  strategy.validate();
  SymbolSequence seq;
  seq.emotion = window.emotion;
  seq.window_index = window.window_index;
  seq.strategy = strategy;
  seq.symbols = bin(window.raw, strategy);
  seq.source_record_ids = window.record_ids;
  return seq;
}

/// Canonical file stem for a sequence, e.g. "anger_w0003_quartile".
inline std::string sequence_key(Emotion e, std::size_t window_index, BinningKind kind) {
  std::string idx = std::to_string(window_index);
  if (idx.size() < 4) idx.insert(0, 4 - idx.size(), '0');
  return std::string(to_string(e)) + "_w" + idx + "_" + std::string(to_string(kind));
}

inline std::string sequence_key(const SymbolSequence& s) {
  return sequence_key(s.emotion, s.window_index, s.strategy.kind);
}

}  // namespace botdyn
