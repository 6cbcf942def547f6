// Test-only reference computations. Each one takes a deliberately different
// route from the library code it checks (enumeration, Gaussian elimination,
// closed forms), and none of them includes library internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

/// A generating machine given as plain arrays: emit[s][x] probability and
/// next[s][x] successor (-1 where emit is 0).
struct Machine {
  std::vector<std::vector<double>> emit;
  std::vector<std::vector<int>> next;
};

inline Machine golden_mean(double p = 0.5) { return {{{1 - p, p}, {1, 0}}, {{0, 1}, {0, -1}}}; }
inline Machine even_process(double p = 0.5) { return {{{1 - p, p}, {0, 1}}, {{0, 1}, {-1, 0}}}; }
inline Machine period_k(int k) {
  Machine m;
  for (int i = 0; i < k; ++i) {
    const bool one = i == k - 1;
    m.emit.push_back({one ? 0.0 : 1.0, one ? 1.0 : 0.0});
    m.next.push_back({one ? -1 : (i + 1) % k, one ? (i + 1) % k : -1});
  }
  return m;
}
inline Machine iid(std::vector<double> p) {
  return {{p}, {std::vector<int>(p.size(), 0)}};
}

/// Solves (T^T - I) pi = 0 with sum(pi) = 1 by Gaussian elimination with
/// partial pivoting, replacing the last equation by the normalization.
inline std::vector<double> stationary_by_elimination(const std::vector<std::vector<double>>& T) {
  const std::size_t n = T.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[i][j] = T[j][i] - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  A[n - 1][n] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = A[i][n] / A[i][i];
  return pi;
}

inline std::vector<std::vector<double>> state_matrix(const Machine& m) {
  const std::size_t n = m.emit.size();
  std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t x = 0; x < m.emit[s].size(); ++x)
      if (m.emit[s][x] > 0) T[s][static_cast<std::size_t>(m.next[s][x])] += m.emit[s][x];
  return T;
}

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log2(v);
  return h;
}

/// Exact probabilities of every length-l word, by enumerating all paths
/// from the stationary distribution.
inline std::map<std::vector<int>, double> word_probabilities(const Machine& m, int l) {
  const auto pi = stationary_by_elimination(state_matrix(m));
  std::map<std::vector<int>, double> out;
  struct Path { int state; double prob; std::vector<int> word; };
  std::vector<Path> frontier;
  for (std::size_t s = 0; s < pi.size(); ++s) frontier.push_back({static_cast<int>(s), pi[s], {}});
  for (int step = 0; step < l; ++step) {
    std::vector<Path> next;
    for (const auto& p : frontier)
      for (std::size_t x = 0; x < m.emit[static_cast<std::size_t>(p.state)].size(); ++x) {
        const double e = m.emit[static_cast<std::size_t>(p.state)][x];
        if (e <= 0) continue;
        auto w = p.word;
        w.push_back(static_cast<int>(x));
        next.push_back({m.next[static_cast<std::size_t>(p.state)][x], p.prob * e, w});
      }
    frontier = std::move(next);
  }
  for (const auto& p : frontier) out[p.word] += p.prob;
  return out;
}

inline double analytic_block_entropy(const Machine& m, int l) {
  std::vector<double> p;
  for (const auto& [w, v] : word_probabilities(m, l)) p.push_back(v);
  return entropy_bits(p);
}

inline double analytic_entropy_rate(const Machine& m) {
  const auto pi = stationary_by_elimination(state_matrix(m));
  double h = 0;
  for (std::size_t s = 0; s < pi.size(); ++s) h += pi[s] * entropy_bits(m.emit[s]);
  return h;
}

/// Type-7 quantile computed straight from its definition on sorted data.
inline double quantile_type7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(h);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// OLS through the explicit normal equations (X'X) b = X'y, with X including
/// a leading column of ones, solved by Gauss-Jordan elimination.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& X,
                                            const std::vector<double>& y) {
  const std::size_t n = X.size();
  const std::size_t p = X[0].size() + 1;
  std::vector<std::vector<double>> A(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row{1.0};
    row.insert(row.end(), X[r].begin(), X[r].end());
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) A[i][j] += row[i] * row[j];
      A[i][p] += row[i] * y[r];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= p; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> b(p);
  for (std::size_t i = 0; i < p; ++i) b[i] = A[i][p] / A[i][i];
  return b;
}

/// Closed-form simple regression: slope = Sxy / Sxx.
inline std::pair<double, double> simple_regression(const std::vector<double>& x,
                                                   const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace oracle
