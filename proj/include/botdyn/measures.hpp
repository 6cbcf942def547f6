// Information measures of a reconstructed machine and its source sequence,
// all in bits.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botdyn/common.hpp"
#include "botdyn/cssr.hpp"
#include "botdyn/sequencing.hpp"

namespace botdyn {

inline constexpr double kProbabilityTolerance = 1e-9;

inline double shannon_entropy(std::span<const double> dist) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0)) throw ValidationError("shannon_entropy: negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance)
    throw ValidationError("shannon_entropy: probabilities sum to " + format_double(sum));
  double h = 0.0;
  for (double p : dist)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

/// C: entropy of the stationary distribution over causal states.
inline double statistical_complexity(const EpsilonMachine& m) {
  return shannon_entropy(m.stationary);
}

/// h: stationary-weighted entropy of the per-state next-symbol laws.
inline double entropy_rate(const EpsilonMachine& m) {
  if (m.stationary.size() != m.states.size())
    throw ValidationError("entropy_rate: machine has no stationary distribution");
  double h = 0.0;
  for (std::size_t s = 0; s < m.states.size(); ++s)
    h += m.stationary[s] * shannon_entropy(m.states[s].next_dist);
  return h;
}

/// H(l): entropy of the empirical distribution of length-l windows.
inline double block_entropy(std::span<const Symbol> seq, std::size_t l) {
  if (l == 0) return 0.0;
  if (l > seq.size())
    throw ValidationError("block_entropy: block length " + std::to_string(l) +
                          " exceeds sequence length " + std::to_string(seq.size()));
  std::map<Symbols, std::uint64_t> freq;
  for (std::size_t i = 0; i + l <= seq.size(); ++i)
    ++freq[Symbols(seq.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.begin() + static_cast<std::ptrdiff_t>(i + l))];
  const double n = static_cast<double>(seq.size() - l + 1);
  double h = 0.0;
  for (const auto& [word, c] : freq) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

/// Finite-L estimate of the excess entropy, E = H(L) - L h, floored at 0.
/// On short near-random windows the plug-in H(L) underestimates and the raw
/// difference dips below zero, which excess entropy cannot.
inline double predictable_information(std::span<const Symbol> seq, const EpsilonMachine& m,
                                      std::size_t L) {
  if (L < 1) throw ValidationError("predictable_information: L must be >= 1");
  return std::max(0.0, block_entropy(seq, L) - static_cast<double>(L) * entropy_rate(m));
}

struct MeasureSet {
  Emotion emotion = Emotion::anger;
  std::size_t window_index = 0;
  BinningStrategy strategy;
  std::size_t L_used = 3;
  double complexity_C = 0.0;
  double entropy_rate_h = 0.0;
  double predictable_E = 0.0;
  std::size_t n_states = 0;
  std::string error;  // non-empty when reconstruction failed

  bool ok() const { return error.empty(); }
};

struct MeasureParams {
  std::size_t L = 3;
  ReconstructParams reconstruct;
};

struct MeasuredSequence {
  MeasureSet measures;
  std::optional<EpsilonMachine> machine;
};

/// Full per-sequence computation. Failures are recorded on the result
/// rather than thrown so that a batch keeps going.
inline MeasuredSequence measure_sequence_with_machine(const SymbolSequence& seq,
                                                      const MeasureParams& params = {}) {
  MeasuredSequence out;
  auto& ms = out.measures;
  ms.emotion = seq.emotion;
  ms.window_index = seq.window_index;
  ms.strategy = seq.strategy;
  ms.L_used = params.L;
  try {
    auto machine = reconstruct(count_histories(seq.symbols, params.L, kDefaultAlphabet),
                               params.reconstruct);
    ms.complexity_C = statistical_complexity(machine);
    ms.entropy_rate_h = entropy_rate(machine);
    ms.predictable_E = predictable_information(seq.symbols, machine, params.L);
    ms.n_states = machine.num_states();
    out.machine = std::move(machine);
  } catch (const std::exception& e) {
    ms.error = e.what();
    ms.complexity_C = ms.entropy_rate_h = ms.predictable_E = 0.0;
    ms.n_states = 0;
  }
  return out;
}

inline MeasureSet measure_sequence(const SymbolSequence& seq, const MeasureParams& params = {}) {
  return measure_sequence_with_machine(seq, params).measures;
}

}  // namespace botdyn
