// Per-window covariates: bot level and the message-shape controls.
#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "botdyn/common.hpp"
#include "botdyn/ingest.hpp"
#include "botdyn/sequencing.hpp"

namespace botdyn {

enum class TimeSpread {
  gap_variance,  // population variance of consecutive inter-arrival gaps
  elapsed_span,  // last timestamp minus first
};

struct SequenceFeatures {
  Emotion emotion = Emotion::anger;
  std::size_t window_index = 0;
  double bot_level = 0.0;
  double word_count_mean = 0.0;
  double word_complexity = 0.0;
  double time_variance = 0.0;
  std::size_t zero_word_records = 0;  // excluded from word_complexity
};

inline double bot_level(std::span<const MessageRecord> window) {
  if (window.empty()) throw ValidationError("bot_level: empty window");
  double sum = 0.0;
  for (const auto& r : window) sum += r.bot_score;
  return sum / static_cast<double>(window.size());
}

struct WordStats {
  double word_count_mean = 0.0;
  double word_complexity = 0.0;  // mean of per-record chars/words
  std::size_t zero_word_records = 0;
};

inline WordStats word_stats(std::span<const MessageRecord> window) {
  if (window.empty()) throw ValidationError("word_stats: empty window");
  WordStats ws;
  double words = 0.0, ratio_sum = 0.0;
  std::size_t ratio_n = 0;
  for (const auto& r : window) {
    words += static_cast<double>(r.word_count);
    if (r.word_count == 0) {
      ++ws.zero_word_records;
      continue;
    }
    ratio_sum += static_cast<double>(r.char_count) / static_cast<double>(r.word_count);
    ++ratio_n;
  }
  ws.word_count_mean = words / static_cast<double>(window.size());
  ws.word_complexity = ratio_n ? ratio_sum / static_cast<double>(ratio_n) : 0.0;
  return ws;
}

inline double time_variance(std::span<const MessageRecord> window,
                            TimeSpread mode = TimeSpread::gap_variance) {
  if (window.size() < 3)
    throw ValidationError("time_variance: need at least 3 records, got " +
                          std::to_string(window.size()));
  if (mode == TimeSpread::elapsed_span) return window.back().timestamp - window.front().timestamp;
  const std::size_t n = window.size() - 1;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += window[i + 1].timestamp - window[i].timestamp;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (window[i + 1].timestamp - window[i].timestamp) - mean;
    var += d * d;
  }
  return var / static_cast<double>(n);
}

/// One row per (emotion, window_index); the five emotions of a window share
/// the same feature values since they derive from the same records.
inline std::vector<SequenceFeatures> feature_table(const Corpus& corpus, std::size_t window_len,
                                                   TimeSpread mode = TimeSpread::gap_variance) {
  const auto windows = record_windows(corpus, window_len);
  std::vector<SequenceFeatures> per_window;
  per_window.reserve(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    SequenceFeatures f;
    f.window_index = w;
    f.bot_level = bot_level(windows[w]);
    const auto ws = word_stats(windows[w]);
    f.word_count_mean = ws.word_count_mean;
    f.word_complexity = ws.word_complexity;
    f.zero_word_records = ws.zero_word_records;
    f.time_variance = time_variance(windows[w], mode);
    per_window.push_back(f);
  }
  std::vector<SequenceFeatures> out;
  out.reserve(per_window.size() * kEmotions.size());
  for (Emotion e : kEmotions)
    for (auto f : per_window) {
      f.emotion = e;
      out.push_back(f);
    }
  return out;
}

}  // namespace botdyn
