// Seeded generators: symbol streams from known unifilar machines, and
// synthetic scored corpora that mix a "human" and a "bot" mechanism.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "botdyn/common.hpp"
#include "botdyn/cssr.hpp"
#include "botdyn/ingest.hpp"

namespace botdyn {

enum class ProcessKind { iid_uniform, biased_coin, period_k, golden_mean, even_process, custom };

struct ProcessSpec {
  ProcessKind kind = ProcessKind::iid_uniform;
  std::size_t alphabet_size = kDefaultAlphabet;  // iid_uniform only
  double p = 0.5;                                // biased_coin, golden_mean, even_process
  std::size_t period = 2;                        // period_k
  EpsilonMachine machine;                        // custom
  std::uint64_t seed = 0;
};

inline ProcessSpec iid_uniform(std::size_t k = kDefaultAlphabet, std::uint64_t seed = 0) {
  return {ProcessKind::iid_uniform, k, 0.5, 2, {}, seed};
}
inline ProcessSpec biased_coin(double p, std::uint64_t seed = 0) {
  return {ProcessKind::biased_coin, 2, p, 2, {}, seed};
}
inline ProcessSpec period_k(std::size_t k, std::uint64_t seed = 0) {
  return {ProcessKind::period_k, 2, 0.5, k, {}, seed};
}
inline ProcessSpec golden_mean(double p = 0.5, std::uint64_t seed = 0) {
  return {ProcessKind::golden_mean, 2, p, 2, {}, seed};
}
inline ProcessSpec even_process(double p = 0.5, std::uint64_t seed = 0) {
  return {ProcessKind::even_process, 2, p, 2, {}, seed};
}

namespace detail {

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0,1]");
}

inline CausalState gen_state(int id, std::vector<double> dist) {
  CausalState s;
  s.id = id;
  s.next_dist = std::move(dist);
  return s;
}

}  // namespace detail

/// The generating machine of a spec, with stationary distribution filled in.
inline EpsilonMachine process_machine(const ProcessSpec& spec) {
  EpsilonMachine m;
  switch (spec.kind) {
    case ProcessKind::iid_uniform: {
      if (spec.alphabet_size < 1 || spec.alphabet_size > 10)
        throw ValidationError("iid_uniform: alphabet size must be in 1..10");
      m.alphabet_size = spec.alphabet_size;
      m.states.push_back(detail::gen_state(0, std::vector<double>(spec.alphabet_size, 1.0 / static_cast<double>(spec.alphabet_size))));
      m.transitions.push_back(std::vector<int>(spec.alphabet_size, 0));
      break;
    }
    case ProcessKind::biased_coin:
      detail::check_probability(spec.p, "biased_coin p");
      m.alphabet_size = 2;
      m.states.push_back(detail::gen_state(0, {1.0 - spec.p, spec.p}));
      m.transitions.push_back({spec.p < 1.0 ? 0 : -1, spec.p > 0.0 ? 0 : -1});
      break;
    case ProcessKind::period_k: {
      if (spec.period < 1) throw ValidationError("period_k: period must be >= 1");
      m.alphabet_size = 2;
      const auto k = static_cast<int>(spec.period);
      for (int i = 0; i < k; ++i) {
        const bool one = i == k - 1;
        m.states.push_back(detail::gen_state(i, {one ? 0.0 : 1.0, one ? 1.0 : 0.0}));
        const int next = (i + 1) % k;
        m.transitions.push_back({one ? -1 : next, one ? next : -1});
      }
      break;
    }
    case ProcessKind::golden_mean:
    case ProcessKind::even_process: {
      detail::check_probability(spec.p, "branch probability p");
      if (spec.p <= 0.0 || spec.p >= 1.0)
        throw ValidationError("branch probability p must lie strictly inside (0,1)");
      m.alphabet_size = 2;
      // State 0 branches; state 1 is forced (emits 0 for golden mean, 1 for even).
      m.states.push_back(detail::gen_state(0, {1.0 - spec.p, spec.p}));
      m.transitions.push_back({0, 1});
      if (spec.kind == ProcessKind::golden_mean) {
        m.states.push_back(detail::gen_state(1, {1.0, 0.0}));
        m.transitions.push_back({0, -1});
      } else {
        m.states.push_back(detail::gen_state(1, {0.0, 1.0}));
        m.transitions.push_back({-1, 0});
      }
      break;
    }
    case ProcessKind::custom:
      m = spec.machine;
      m.stationary.clear();
      break;
  }
  for (auto& s : m.states) {
    for (double p : s.next_dist) detail::check_probability(p, "emission probability");
    if (s.histories.empty()) s.histories.push_back({});
  }
  m.stationary = stationary_distribution(m);
  if (auto bad = machine_violations(m); !bad.empty())
    throw ValidationError("invalid process machine: " + bad.front());
  return m;
}

/// Walks a machine one symbol at a time.
class MachineWalker {
 public:
  MachineWalker(const EpsilonMachine& m, std::mt19937_64& rng) : m_(&m) {
    std::discrete_distribution<int> start(m.stationary.begin(), m.stationary.end());
    state_ = start(rng);
    for (const auto& s : m.states) emit_.emplace_back(s.next_dist.begin(), s.next_dist.end());
  }

  Symbol step(std::mt19937_64& rng) {
    const int x = emit_[static_cast<std::size_t>(state_)](rng);
    state_ = m_->transitions[static_cast<std::size_t>(state_)][static_cast<std::size_t>(x)];
    return static_cast<Symbol>(x);
  }

 private:
  const EpsilonMachine* m_;
  int state_ = 0;
  std::vector<std::discrete_distribution<int>> emit_;
};

inline Symbols generate_symbols(const ProcessSpec& spec, std::size_t n) {
  if (n < 1) throw ValidationError("generate_symbols: n must be >= 1");
  const auto m = process_machine(spec);
  std::mt19937_64 rng(spec.seed);
  MachineWalker walker(m, rng);
  Symbols out(n);
  for (auto& x : out) x = walker.step(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Corpora

struct ScoreDistribution {
  enum class Kind { beta, uniform, constant } kind = Kind::beta;
  double a = 2.0;  // beta alpha, uniform lo, constant value
  double b = 2.0;  // beta beta, uniform hi

  void validate() const {
    switch (kind) {
      case Kind::beta:
        if (!(a > 0.0 && b > 0.0)) throw ValidationError("beta distribution needs a, b > 0");
        break;
      case Kind::uniform:
        if (!(a >= 0.0 && b <= 1.0 && a <= b)) throw ValidationError("uniform distribution needs 0 <= lo <= hi <= 1");
        break;
      case Kind::constant:
        detail::check_probability(a, "constant score");
        break;
    }
  }

  double mean() const {
    switch (kind) {
      case Kind::beta: return a / (a + b);
      case Kind::uniform: return 0.5 * (a + b);
      case Kind::constant: return a;
    }
    return 0.0;
  }

  double variance() const {
    switch (kind) {
      case Kind::beta: return a * b / ((a + b) * (a + b) * (a + b + 1.0));
      case Kind::uniform: return (b - a) * (b - a) / 12.0;
      case Kind::constant: return 0.0;
    }
    return 0.0;
  }

  double sample(std::mt19937_64& rng) const {
    switch (kind) {
      case Kind::beta: {
        std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
        const double x = ga(rng);
        const double y = gb(rng);
        return x + y > 0.0 ? x / (x + y) : 0.5;
      }
      case Kind::uniform: return std::uniform_real_distribution<double>(a, b)(rng);
      case Kind::constant: return a;
    }
    return 0.0;
  }
};

struct CorpusSpec {
  std::size_t n_records = 30000;
  double bot_fraction = 0.0;
  ProcessSpec human_process = golden_mean(0.5);
  ProcessSpec bot_process = iid_uniform(4);
  ScoreDistribution human_bot_score{ScoreDistribution::Kind::beta, 2.0, 30.0};
  ScoreDistribution bot_bot_score{ScoreDistribution::Kind::beta, 12.0, 4.0};
  double rate = 1.0;  // exponential inter-arrival rate (records per second)
  double mean_words = 21.0;
  double start_time = 1.6e9;
  std::uint64_t seed = 1;

  void validate() const {
    detail::check_probability(bot_fraction, "bot_fraction");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("rate must be > 0");
    if (!(mean_words >= 1.0)) throw ValidationError("mean_words must be >= 1");
    human_bot_score.validate();
    bot_bot_score.validate();
  }
};

/// Each record comes from the bot mechanism with probability bot_fraction.
/// Every mechanism keeps one walker per emotion; a record's symbol k for an
/// emotion becomes a uniform score on [k/4, (k+1)/4).
inline Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  const auto human = process_machine(spec.human_process);
  const auto bot = process_machine(spec.bot_process);
  if (human.alphabet_size > 4 || bot.alphabet_size > 4)
    throw ValidationError("corpus processes must use at most 4 symbols");

  std::mt19937_64 rng(spec.seed);
  std::vector<MachineWalker> human_walkers, bot_walkers;
  for (std::size_t e = 0; e < kEmotions.size(); ++e) {
    human_walkers.emplace_back(human, rng);
    bot_walkers.emplace_back(bot, rng);
  }
  std::bernoulli_distribution is_bot(spec.bot_fraction);
  std::exponential_distribution<double> gap(spec.rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::poisson_distribution<std::int64_t> extra_words(spec.mean_words - 1.0);
  std::uniform_real_distribution<double> chars_per_word(4.0, 9.0);

  Corpus corpus;
  corpus.records.reserve(spec.n_records);
  double t = spec.start_time;
  for (std::size_t i = 0; i < spec.n_records; ++i) {
    const bool b = is_bot(rng);
    auto& walkers = b ? bot_walkers : human_walkers;
    MessageRecord r;
    r.id = "sim-" + std::to_string(i);
    t += gap(rng);
    r.timestamp = t;
    for (std::size_t e = 0; e < kEmotions.size(); ++e) {
      const Symbol x = walkers[e].step(rng);
      r.emotions[e] = std::min(1.0, (static_cast<double>(x) + unit(rng)) / 4.0);
    }
    r.bot_score = (b ? spec.bot_bot_score : spec.human_bot_score).sample(rng);
    r.word_count = 1 + extra_words(rng);
    r.char_count = std::max<std::int64_t>(
        r.word_count, std::llround(static_cast<double>(r.word_count) * chars_per_word(rng)));
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// JSON specs

inline ProcessSpec process_spec_from_json(const nlohmann::json& j) {
  try {
    ProcessSpec s;
    const auto name = j.at("name").get<std::string>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.p = j.value("p", 0.5);
    if (name == "iid_uniform") {
      s.kind = ProcessKind::iid_uniform;
      s.alphabet_size = j.value("alphabet_size", kDefaultAlphabet);
    } else if (name == "biased_coin") {
      s.kind = ProcessKind::biased_coin;
    } else if (name == "period_k") {
      s.kind = ProcessKind::period_k;
      s.period = j.value("k", std::size_t{2});
    } else if (name == "golden_mean") {
      s.kind = ProcessKind::golden_mean;
    } else if (name == "even_process") {
      s.kind = ProcessKind::even_process;
    } else if (name == "custom") {
      s.kind = ProcessKind::custom;
      s.machine = machine_from_json(j.at("machine"));
    } else {
      throw ValidationError("unknown process '" + name + "'");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("process spec: ") + e.what());
  }
}

inline ScoreDistribution score_distribution_from_json(const nlohmann::json& j) {
  ScoreDistribution d;
  const auto kind = j.value("dist", std::string("beta"));
  if (kind == "beta") {
    d.kind = ScoreDistribution::Kind::beta;
    d.a = j.value("a", 2.0);
    d.b = j.value("b", 2.0);
  } else if (kind == "uniform") {
    d.kind = ScoreDistribution::Kind::uniform;
    d.a = j.value("lo", 0.0);
    d.b = j.value("hi", 1.0);
  } else if (kind == "constant") {
    d.kind = ScoreDistribution::Kind::constant;
    d.a = j.value("value", 0.0);
  } else {
    throw ValidationError("unknown score distribution '" + kind + "'");
  }
  d.validate();
  return d;
}

inline CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  CorpusSpec s;
  try {
    s.n_records = j.value("n_records", s.n_records);
    s.bot_fraction = j.value("bot_fraction", s.bot_fraction);
    if (j.contains("human_process")) s.human_process = process_spec_from_json(j["human_process"]);
    if (j.contains("bot_process")) s.bot_process = process_spec_from_json(j["bot_process"]);
    if (j.contains("human_bot_score")) s.human_bot_score = score_distribution_from_json(j["human_bot_score"]);
    if (j.contains("bot_bot_score")) s.bot_bot_score = score_distribution_from_json(j["bot_bot_score"]);
    s.rate = j.value("rate", s.rate);
    s.mean_words = j.value("mean_words", s.mean_words);
    s.start_time = j.value("start_time", s.start_time);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corpus spec: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace botdyn
