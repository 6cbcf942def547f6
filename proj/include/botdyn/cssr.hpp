// Causal State Splitting Reconstruction.
//
// Builds the minimal unifilar causal-state model of a symbol sequence from
// next-symbol statistics of bounded-length histories:
//
//   1. count_histories() tallies, for every history w with |w| <= L-1, how
//      often each symbol follows w.
//   2. reconstruct() starts from one state holding the empty history and
//      grows histories one symbol further into the past. A child history
//      stays with its parent's state unless a chi-squared test rejects
//      equality of their next-symbol distributions; rejected children join
//      the first existing state they match, or found a new one.
//   3. States are then split until unifilar (the successor of every member
//      history on a given symbol lands in one state), transient states are
//      discarded, and the stationary distribution is solved.
//
// Histories are stored oldest symbol first, so the most recent symbol is
// back() and extending into the past means prepending.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "botdyn/common.hpp"

namespace botdyn {

using History = Symbols;
using CountVector = std::vector<std::uint64_t>;

inline std::string history_string(const History& h) {
  std::string s;
  s.reserve(h.size());
  for (Symbol x : h) s.push_back(static_cast<char>('0' + x));
  return s;
}

inline History parse_history(std::string_view s) {
  History h;
  h.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9') throw ValidationError("invalid history symbol '" + std::string(1, c) + "'");
    h.push_back(static_cast<Symbol>(c - '0'));
  }
  return h;
}

inline std::uint64_t total(const CountVector& v) {
  return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

struct HistoryCounts {
  std::size_t alphabet_size = kDefaultAlphabet;
  std::size_t max_len = 3;  // L: window length, histories have length <= L-1
  std::map<History, CountVector> counts;

  const CountVector* find(const History& h) const {
    auto it = counts.find(h);
    return it == counts.end() ? nullptr : &it->second;
  }
};

/// Tallies every window of length l+1 (l = 0..L-1): the first l symbols are
/// the history, the last one is the observed next symbol. Pass
/// alphabet_size = 0 to infer it as max(symbol)+1.
inline HistoryCounts count_histories(std::span<const Symbol> seq, std::size_t L = 3,
                                     std::size_t alphabet_size = 0) {
  if (L == 0) throw ValidationError("history length L must be positive");
  if (seq.size() < L)
    throw ValidationError("sequence of length " + std::to_string(seq.size()) +
                          " is shorter than L = " + std::to_string(L));
  HistoryCounts hc;
  hc.max_len = L;
  const Symbol max_sym = *std::max_element(seq.begin(), seq.end());
  hc.alphabet_size = alphabet_size == 0 ? std::size_t{max_sym} + 1 : alphabet_size;
  if (max_sym >= hc.alphabet_size)
    throw ValidationError("symbol " + std::to_string(max_sym) + " outside alphabet of size " +
                          std::to_string(hc.alphabet_size));
  for (std::size_t len = 0; len < L; ++len) {
    for (std::size_t i = 0; i + len < seq.size(); ++i) {
      History h(seq.begin() + static_cast<std::ptrdiff_t>(i),
                seq.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto [it, inserted] = hc.counts.try_emplace(std::move(h));
      if (inserted) it->second.assign(hc.alphabet_size, 0);
      ++it->second[seq[i + len]];
    }
  }
  return hc;
}

// ---------------------------------------------------------------------------
// Hypothesis test

enum class SplitDecision { same, different };

struct ChiSquaredResult {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

/// Pearson chi-squared test of homogeneity on the 2 x k table formed by two
/// count vectors. Columns empty in both rows are dropped.
inline ChiSquaredResult chi_squared_homogeneity(std::span<const std::uint64_t> d1,
                                                std::span<const std::uint64_t> d2) {
  if (d1.size() != d2.size()) throw ValidationError("count vectors differ in alphabet size");
  const double n1 = static_cast<double>(std::accumulate(d1.begin(), d1.end(), std::uint64_t{0}));
  const double n2 = static_cast<double>(std::accumulate(d2.begin(), d2.end(), std::uint64_t{0}));
  if (n1 == 0.0 && n2 == 0.0) throw ValidationError("split_test: both count vectors are empty");
  ChiSquaredResult r;
  if (n1 == 0.0 || n2 == 0.0) return r;  // nothing to compare against
  const double n = n1 + n2;
  std::size_t cols = 0;
  for (std::size_t j = 0; j < d1.size(); ++j) {
    const double col = static_cast<double>(d1[j] + d2[j]);
    if (col == 0.0) continue;
    ++cols;
    const double e1 = n1 * col / n;
    const double e2 = n2 * col / n;
    const double o1 = static_cast<double>(d1[j]);
    const double o2 = static_cast<double>(d2[j]);
    r.statistic += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
  }
  if (cols < 2) return r;
  r.df = cols - 1;
  boost::math::chi_squared dist(static_cast<double>(r.df));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

inline SplitDecision split_test(std::span<const std::uint64_t> d1,
                                std::span<const std::uint64_t> d2, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  return chi_squared_homogeneity(d1, d2).p_value < alpha ? SplitDecision::different
                                                         : SplitDecision::same;
}

// ---------------------------------------------------------------------------
// Machine

struct CausalState {
  int id = 0;
  std::vector<History> histories;  // sorted lexicographically
  CountVector counts;              // pooled next-symbol counts of the members
  std::vector<double> next_dist;
};

struct EpsilonMachine {
  std::size_t alphabet_size = kDefaultAlphabet;
  std::vector<CausalState> states;
  // transitions[s][x] is the successor of state s on symbol x, or -1 where
  // next_dist[s][x] == 0.
  std::vector<std::vector<int>> transitions;
  std::vector<double> stationary;
  std::vector<std::string> warnings;

  std::size_t num_states() const { return states.size(); }

  /// State-to-state matrix marginalized over symbols.
  std::vector<std::vector<double>> transition_matrix() const {
    const std::size_t n = states.size();
    std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t x = 0; x < alphabet_size; ++x)
        if (transitions[s][x] >= 0) T[s][static_cast<std::size_t>(transitions[s][x])] += states[s].next_dist[x];
    return T;
  }
};

struct ReconstructParams {
  double alpha = 0.001;
  std::uint64_t min_count = 5;
};

inline constexpr double kStationaryTolerance = 1e-10;
inline constexpr std::size_t kStationaryMaxIter = 1'000'000;

/// Solves pi T = pi by power iteration on the lazy chain (I + T) / 2, which
/// shares T's fixed point and converges for periodic machines too.
inline std::vector<double> stationary_distribution(const EpsilonMachine& m) {
  const std::size_t n = m.states.size();
  if (n == 0) throw ComputationError("stationary_distribution: machine has no states");
  if (n == 1) return {1.0};
  const auto T = m.transition_matrix();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[j] += v[i] * T[i][j];
  };
  for (std::size_t iter = 0; iter < kStationaryMaxIter; ++iter) {
    apply(pi, next);
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) residual = std::max(residual, std::abs(next[j] - pi[j]));
    if (residual < kStationaryTolerance) {
      const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
      for (double& p : pi) p /= sum;
      return pi;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      pi[j] = 0.5 * (pi[j] + next[j]);
      sum += pi[j];
    }
    for (double& p : pi) p /= sum;
  }
  throw ComputationError("stationary_distribution: no convergence after " +
                         std::to_string(kStationaryMaxIter) + " iterations");
}

namespace detail {

struct WorkState {
  std::set<History> members;
  CountVector pooled;
};

inline void add_counts(CountVector& into, const CountVector& c) {
  for (std::size_t i = 0; i < c.size(); ++i) into[i] += c[i];
}

// Tarjan's strongly connected components; returns component index per node.
inline std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj, int& n_comp) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0;
  n_comp = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = n_comp;
      } while (w != v);
      ++n_comp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return comp;
}

}  // namespace detail

inline EpsilonMachine reconstruct(const HistoryCounts& hc, const ReconstructParams& params = {}) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  const std::size_t k = hc.alphabet_size;
  const std::size_t L = hc.max_len;
  const CountVector* root = hc.find(History{});
  if (root == nullptr || total(*root) == 0)
    throw ComputationError("no recurrent states (sequence too short or L too large)");

  std::vector<detail::WorkState> states;
  states.push_back({{History{}}, *root});

  // Grow histories into the past, splitting states on rejected tests.
  for (std::size_t len = 0; len + 1 < L; ++len) {
    std::vector<std::pair<std::size_t, History>> parents;
    for (std::size_t s = 0; s < states.size(); ++s)
      for (const auto& h : states[s].members)
        if (h.size() == len) parents.emplace_back(s, h);

    for (const auto& [parent_state, parent] : parents) {
      for (std::size_t a = 0; a < k; ++a) {
        History child;
        child.reserve(len + 1);
        child.push_back(static_cast<Symbol>(a));
        child.insert(child.end(), parent.begin(), parent.end());
        const CountVector* c = hc.find(child);
        if (c == nullptr || total(*c) < params.min_count) continue;

        std::optional<std::size_t> target;
        if (split_test(*c, states[parent_state].pooled, params.alpha) == SplitDecision::same) {
          target = parent_state;
        } else {
          for (std::size_t t = 0; t < states.size(); ++t) {
            if (t == parent_state) continue;
            if (split_test(*c, states[t].pooled, params.alpha) == SplitDecision::same) {
              target = t;
              break;
            }
          }
        }
        if (!target) {
          states.push_back({{}, CountVector(k, 0)});
          target = states.size() - 1;
        }
        states[*target].members.insert(child);
        detail::add_counts(states[*target].pooled, *c);
      }
    }
  }

  // Make the model unifilar.
  std::map<History, std::size_t> owner;
  auto rebuild_owner = [&] {
    owner.clear();
    for (std::size_t s = 0; s < states.size(); ++s)
      for (const auto& h : states[s].members) owner[h] = s;
  };
  // State reached from history w after emitting x: the longest suffix of wx
  // (at most L-1 symbols) that belongs to some state.
  auto successor = [&](const History& w, std::size_t x) -> int {
    History h = w;
    h.push_back(static_cast<Symbol>(x));
    if (h.size() > L - 1) h.erase(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(h.size() - (L - 1)));
    while (true) {
      if (auto it = owner.find(h); it != owner.end()) return static_cast<int>(it->second);
      if (h.empty()) return -1;
      h.erase(h.begin());
    }
  };
  auto signature = [&](const History& w) {
    std::vector<int> sig(k, -1);
    const CountVector& c = *hc.find(w);
    for (std::size_t x = 0; x < k; ++x)
      if (c[x] > 0) sig[x] = successor(w, x);
    return sig;
  };
  auto compatible = [](const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t x = 0; x < a.size(); ++x)
      if (a[x] >= 0 && b[x] >= 0 && a[x] != b[x]) return false;
    return true;
  };

  rebuild_owner();
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < states.size() && !changed; ++s) {
      // Longest histories first: they carry the most context.
      std::vector<History> ordered(states[s].members.begin(), states[s].members.end());
      std::stable_sort(ordered.begin(), ordered.end(),
                       [](const History& a, const History& b) { return a.size() > b.size(); });
      struct Group {
        std::vector<int> sig;
        std::vector<History> members;
      };
      std::vector<Group> groups;
      for (const auto& w : ordered) {
        auto sig = signature(w);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return compatible(g.sig, sig); });
        if (it == groups.end()) {
          groups.push_back({sig, {w}});
        } else {
          for (std::size_t x = 0; x < k; ++x)
            if (it->sig[x] < 0) it->sig[x] = sig[x];
          it->members.push_back(w);
        }
      }
      if (groups.size() < 2) continue;
      changed = true;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        detail::WorkState ws{{}, CountVector(k, 0)};
        for (const auto& h : groups[g].members) {
          ws.members.insert(h);
          detail::add_counts(ws.pooled, *hc.find(h));
        }
        if (g == 0) states[s] = std::move(ws);
        else states.push_back(std::move(ws));
      }
      rebuild_owner();
    }
  }

  const std::size_t n = states.size();
  std::vector<std::vector<int>> trans(n, std::vector<int>(k, -1));
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& w : states[s].members) {
      auto sig = signature(w);
      for (std::size_t x = 0; x < k; ++x)
        if (trans[s][x] < 0) trans[s][x] = sig[x];
    }
  }

  // Keep one closed (recurrent) strongly connected component.
  std::vector<std::vector<int>> adj(n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t x = 0; x < k; ++x)
      if (states[s].pooled[x] > 0 && trans[s][x] >= 0) adj[s].push_back(trans[s][x]);
  int n_comp = 0;
  const auto comp = detail::strongly_connected(adj, n_comp);
  std::vector<bool> closed(static_cast<std::size_t>(n_comp), true);
  std::vector<std::uint64_t> weight(static_cast<std::size_t>(n_comp), 0);
  std::vector<History> smallest(static_cast<std::size_t>(n_comp));
  std::vector<bool> seen(static_cast<std::size_t>(n_comp), false);
  for (std::size_t s = 0; s < n; ++s) {
    const auto c = static_cast<std::size_t>(comp[s]);
    weight[c] += total(states[s].pooled);
    if (!seen[c] || *states[s].members.begin() < smallest[c]) smallest[c] = *states[s].members.begin();
    seen[c] = true;
    for (std::size_t x = 0; x < k; ++x)
      if (states[s].pooled[x] > 0 && (trans[s][x] < 0 || comp[static_cast<std::size_t>(trans[s][x])] != comp[s]))
        closed[c] = false;
  }
  std::optional<std::size_t> keep;
  std::size_t n_closed = 0;
  for (std::size_t c = 0; c < static_cast<std::size_t>(n_comp); ++c) {
    if (!closed[c]) continue;
    ++n_closed;
    if (!keep || weight[c] > weight[*keep] ||
        (weight[c] == weight[*keep] && smallest[c] < smallest[*keep]))
      keep = c;
  }
  if (!keep) throw ComputationError("no recurrent states (sequence too short or L too large)");

  EpsilonMachine m;
  m.alphabet_size = k;
  if (n_closed > 1)
    m.warnings.push_back(std::to_string(n_closed) +
                         " disjoint recurrent components; kept the one with the largest history count");

  // Canonical ids: order surviving states by their smallest member history.
  std::vector<std::size_t> kept;
  for (std::size_t s = 0; s < n; ++s)
    if (static_cast<std::size_t>(comp[s]) == *keep) kept.push_back(s);
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return *states[a].members.begin() < *states[b].members.begin();
  });
  std::vector<int> new_id(n, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) new_id[kept[i]] = static_cast<int>(i);

  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& ws = states[kept[i]];
    CausalState cs;
    cs.id = static_cast<int>(i);
    cs.histories.assign(ws.members.begin(), ws.members.end());
    cs.counts = ws.pooled;
    const double t = static_cast<double>(total(ws.pooled));
    if (t == 0.0) throw ComputationError("no recurrent states (sequence too short or L too large)");
    cs.next_dist.resize(k);
    for (std::size_t x = 0; x < k; ++x) cs.next_dist[x] = static_cast<double>(ws.pooled[x]) / t;
    std::vector<int> row(k, -1);
    for (std::size_t x = 0; x < k; ++x)
      if (ws.pooled[x] > 0) row[x] = new_id[static_cast<std::size_t>(trans[kept[i]][x])];
    m.states.push_back(std::move(cs));
    m.transitions.push_back(std::move(row));
  }
  m.stationary = stationary_distribution(m);
  return m;
}

inline EpsilonMachine reconstruct(std::span<const Symbol> seq, std::size_t L = 3,
                                  const ReconstructParams& params = {},
                                  std::size_t alphabet_size = 0) {
  return reconstruct(count_histories(seq, L, alphabet_size), params);
}

/// Structural checks on a finished machine; returns human-readable
/// violations, empty when the machine is well formed.
inline std::vector<std::string> machine_violations(const EpsilonMachine& m, double tol = 1e-9) {
  std::vector<std::string> out;
  const std::size_t n = m.states.size();
  const std::size_t k = m.alphabet_size;
  if (n == 0) {
    out.emplace_back("no states");
    return out;
  }
  if (m.transitions.size() != n || m.stationary.size() != n) out.emplace_back("size mismatch");
  for (std::size_t s = 0; s < n; ++s) {
    const auto& st = m.states[s];
    if (st.histories.empty()) out.push_back("state " + std::to_string(s) + " has no histories");
    if (st.next_dist.size() != k || m.transitions[s].size() != k) {
      out.push_back("state " + std::to_string(s) + " alphabet mismatch");
      continue;
    }
    double sum = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      sum += st.next_dist[x];
      const int t = m.transitions[s][x];
      if (st.next_dist[x] > 0.0 && (t < 0 || t >= static_cast<int>(n)))
        out.push_back("state " + std::to_string(s) + " symbol " + std::to_string(x) +
                      " has no unique successor");
    }
    if (std::abs(sum - 1.0) > tol) out.push_back("state " + std::to_string(s) + " next_dist sums to " + format_double(sum));
  }
  if (!out.empty()) return out;

  double pi_sum = std::accumulate(m.stationary.begin(), m.stationary.end(), 0.0);
  if (std::abs(pi_sum - 1.0) > tol) out.push_back("stationary sums to " + format_double(pi_sum));
  const auto T = m.transition_matrix();
  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += m.stationary[i] * T[i][j];
    residual = std::max(residual, std::abs(v - m.stationary[j]));
  }
  if (residual >= tol) out.push_back("stationary residual " + format_double(residual));

  // Every state reaches every other state.
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<bool> reached(n, false);
    std::vector<std::size_t> frontier{s};
    reached[s] = true;
    while (!frontier.empty()) {
      auto u = frontier.back();
      frontier.pop_back();
      for (std::size_t x = 0; x < k; ++x) {
        const int t = m.transitions[u][x];
        if (m.states[u].next_dist[x] > 0.0 && t >= 0 && !reached[static_cast<std::size_t>(t)]) {
          reached[static_cast<std::size_t>(t)] = true;
          frontier.push_back(static_cast<std::size_t>(t));
        }
      }
    }
    if (std::find(reached.begin(), reached.end(), false) != reached.end()) {
      out.push_back("state " + std::to_string(s) + " does not reach every state");
      break;
    }
  }
  return out;
}

inline nlohmann::json machine_to_json(const EpsilonMachine& m) {
  nlohmann::json j;
  j["alphabet_size"] = m.alphabet_size;
  j["num_states"] = m.states.size();
  auto states = nlohmann::json::array();
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    const auto& st = m.states[s];
    nlohmann::json js;
    js["id"] = st.id;
    auto hist = nlohmann::json::array();
    for (const auto& h : st.histories) hist.push_back(history_string(h));
    js["histories"] = hist;
    js["counts"] = st.counts;
    js["next_dist"] = st.next_dist;
    nlohmann::json tr = nlohmann::json::object();
    for (std::size_t x = 0; x < m.alphabet_size; ++x)
      if (m.transitions[s][x] >= 0) tr[std::to_string(x)] = m.transitions[s][x];
    js["transitions"] = tr;
    states.push_back(js);
  }
  j["states"] = states;
  j["stationary"] = m.stationary;
  j["warnings"] = m.warnings;
  return j;
}

inline EpsilonMachine machine_from_json(const nlohmann::json& j) {
  EpsilonMachine m;
  try {
    m.alphabet_size = j.at("alphabet_size").get<std::size_t>();
    for (const auto& js : j.at("states")) {
      CausalState st;
      st.id = js.at("id").get<int>();
      for (const auto& h : js.at("histories")) st.histories.push_back(parse_history(h.get<std::string>()));
      if (js.contains("counts")) st.counts = js["counts"].get<CountVector>();
      st.next_dist = js.at("next_dist").get<std::vector<double>>();
      std::vector<int> row(m.alphabet_size, -1);
      for (auto& [sym, target] : js.at("transitions").items()) {
        auto x = parse_int(sym);
        if (!x || *x < 0 || static_cast<std::size_t>(*x) >= m.alphabet_size)
          throw ValidationError("machine JSON: bad transition symbol '" + sym + "'");
        row[static_cast<std::size_t>(*x)] = target.get<int>();
      }
      m.states.push_back(std::move(st));
      m.transitions.push_back(std::move(row));
    }
    if (j.contains("stationary")) m.stationary = j["stationary"].get<std::vector<double>>();
    if (j.contains("warnings")) m.warnings = j["warnings"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("machine JSON: ") + e.what());
  }
  if (m.stationary.empty() && !m.states.empty()) m.stationary = stationary_distribution(m);
  return m;
}

}  // namespace botdyn
