// Shared vocabulary types and error classes for the botdyn library.
#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace botdyn {

/// Raised when user-supplied data or configuration violates a contract.
/// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for numerical failures inside an otherwise valid computation
/// (non-convergence, empty recurrent component, rank deficiency).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Symbol = std::uint8_t;
using Symbols = std::vector<Symbol>;

inline constexpr std::size_t kDefaultAlphabet = 4;

enum class Emotion : std::uint8_t { anger, fear, sadness, joy, disgust };

inline constexpr std::array<Emotion, 5> kEmotions = {
    Emotion::anger, Emotion::fear, Emotion::sadness, Emotion::joy,
    Emotion::disgust};

inline constexpr std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::anger: return "anger";
    case Emotion::fear: return "fear";
    case Emotion::sadness: return "sadness";
    case Emotion::joy: return "joy";
    case Emotion::disgust: return "disgust";
  }
  return "unknown";
}

inline std::optional<Emotion> parse_emotion(std::string_view s) {
  for (Emotion e : kEmotions)
    if (to_string(e) == s) return e;
  return std::nullopt;
}

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

/// Strict full-string parse; returns nullopt on trailing garbage.
inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace botdyn
