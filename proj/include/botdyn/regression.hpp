// Ordinary least squares with classical inference, standardized
// coefficients, and the two measure-on-covariate models.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "botdyn/common.hpp"
#include "botdyn/features.hpp"
#include "botdyn/measures.hpp"

namespace botdyn {

inline constexpr const char* kInterceptName = "(Intercept)";

/// Predictor columns exclude the intercept, which fit_ols adds itself.
struct DesignMatrix {
  std::vector<std::string> predictor_names;
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd y;  // n
  std::string response_name = "y";

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  void validate() const {
    if (X.rows() != y.size()) throw ValidationError("design: X and y row counts differ");
    if (static_cast<std::size_t>(X.cols()) != predictor_names.size())
      throw ValidationError("design: predictor name count does not match columns");
    std::set<std::string> names(predictor_names.begin(), predictor_names.end());
    if (names.size() != predictor_names.size() || names.contains(kInterceptName))
      throw ValidationError("design: column names must be unique");
    if (X.rows() <= X.cols() + 1)
      throw ValidationError("design: need more observations (" + std::to_string(X.rows()) +
                            ") than coefficients (" + std::to_string(X.cols() + 1) + ")");
    if (!X.allFinite() || !y.allFinite()) throw ValidationError("design: missing or non-finite values");
  }
};

struct Term {
  std::string name;
  double coefficient = 0.0;
  double std_coefficient = 0.0;  // coefficient * sd_x / sd_y; 0 for the intercept
  double std_error = 0.0;
  double t_value = 0.0;
  double p_value = 1.0;
};

struct RegressionResult {
  std::string response;
  std::vector<Term> terms;  // intercept first
  double f_statistic = 0.0;
  std::size_t df1 = 0;
  std::size_t df2 = 0;
  double f_p_value = 1.0;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  std::size_t n = 0;
  bool robust = false;
  Eigen::VectorXd fitted;

  const Term& term(std::string_view name) const {
    for (const auto& t : terms)
      if (t.name == name) return t;
    throw ValidationError("no term named '" + std::string(name) + "'");
  }
};

struct OlsOptions {
  bool robust = false;  // HC1 heteroskedasticity-consistent standard errors
};

namespace detail {

inline double sample_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

inline double two_sided_t_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace detail

/// Coefficients come from a column-pivoted Householder QR of [1 X]; the
/// covariance is assembled from R^-1 so X'X is never formed.
inline RegressionResult fit_ols(const DesignMatrix& d, const OlsOptions& opts = {}) {
  d.validate();
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p() + 1;
  Eigen::MatrixXd A(n, p);
  A.col(0).setOnes();
  A.rightCols(d.p()) = d.X;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(n, p);
  qr.setThreshold(1e-10);
  qr.compute(A);
  if (qr.rank() < p) {
    // Each column past the rank is a combination of the leading pivoted
    // columns; R11 z = R12 gives the combination, so the nonzero entries of z
    // name the columns involved.
    const Eigen::Index k = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::MatrixXd Rfull = qr.matrixR().topRows(std::min(n, p));
    const Eigen::MatrixXd z = Rfull.topLeftCorner(k, k).template triangularView<Eigen::Upper>().solve(
        Rfull.block(0, k, k, p - k));
    auto col_name = [&](Eigen::Index c) {
      return c == 0 ? std::string(kInterceptName) : d.predictor_names[static_cast<std::size_t>(c - 1)];
    };
    std::set<std::string> involved;
    for (Eigen::Index i = k; i < p; ++i) {
      involved.insert(col_name(perm[i]));
      for (Eigen::Index j = 0; j < k; ++j)
        if (std::abs(z(j, i - k)) > 1e-8) involved.insert(col_name(perm[j]));
    }
    std::string names;
    for (const auto& s : involved) names += (names.empty() ? "" : ", ") + s;
    throw ComputationError("rank-deficient design: collinear column(s) " + names);
  }
  const Eigen::VectorXd beta = qr.solve(d.y);
  const Eigen::VectorXd fitted = A * beta;
  const Eigen::VectorXd resid = d.y - fitted;

  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const auto P = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = P * (Rinv * Rinv.transpose()) * P.transpose();

  const double sse = resid.squaredNorm();
  const double y_mean = d.y.mean();
  const double sst = (d.y.array() - y_mean).square().sum();
  const auto df2 = static_cast<std::size_t>(n - p);
  const auto df1 = static_cast<std::size_t>(p - 1);
  const double sigma2 = sse / static_cast<double>(df2);

  Eigen::MatrixXd cov;
  if (opts.robust) {
    Eigen::MatrixXd meat = A.transpose() * resid.array().square().matrix().asDiagonal() * A;
    cov = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / static_cast<double>(df2));
  } else {
    cov = sigma2 * xtx_inv;
  }

  RegressionResult r;
  r.response = d.response_name;
  r.n = static_cast<std::size_t>(n);
  r.df1 = df1;
  r.df2 = df2;
  r.robust = opts.robust;
  r.fitted = fitted;
  r.r_squared = sst > 0.0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 0.0;
  r.adj_r_squared = 1.0 - (1.0 - r.r_squared) * static_cast<double>(n - 1) / static_cast<double>(df2);

  const double sd_y = detail::sample_sd(d.y);
  for (Eigen::Index j = 0; j < p; ++j) {
    Term t;
    t.name = j == 0 ? kInterceptName : d.predictor_names[static_cast<std::size_t>(j - 1)];
    t.coefficient = beta[j];
    t.std_error = std::sqrt(std::max(cov(j, j), 0.0));
    if (j > 0 && sd_y > 0.0) t.std_coefficient = beta[j] * detail::sample_sd(d.X.col(j - 1)) / sd_y;
    t.t_value = t.std_error > 0.0 ? beta[j] / t.std_error
                                  : (beta[j] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), beta[j]));
    t.p_value = t.std_error > 0.0 || beta[j] != 0.0 ? detail::two_sided_t_p(t.t_value, static_cast<double>(df2)) : 1.0;
    r.terms.push_back(t);
  }

  if (df1 == 0) {
    r.f_statistic = 0.0;
    r.f_p_value = 1.0;
  } else if (sse <= 0.0 || sse <= 1e-28 * std::max(sst, 1.0)) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.f_p_value = 0.0;
  } else {
    r.f_statistic = ((sst - sse) / static_cast<double>(df1)) / sigma2;
    boost::math::fisher_f dist(static_cast<double>(df1), static_cast<double>(df2));
    r.f_p_value = boost::math::cdf(boost::math::complement(dist, std::max(r.f_statistic, 0.0)));
  }
  return r;
}

/// Centers and scales the response and every predictor to mean 0 and
/// sample standard deviation 1.
inline DesignMatrix standardize(const DesignMatrix& d) {
  if (d.n() < 2) throw ValidationError("standardize: need at least 2 rows");
  DesignMatrix out = d;
  auto scale = [](Eigen::Ref<Eigen::VectorXd> v, const std::string& name) {
    const double sd = detail::sample_sd(v);
    if (!(sd > 0.0)) throw ValidationError("standardize: column '" + name + "' has zero variance");
    const double mean = v.mean();
    v = (v.array() - mean) / sd;
  };
  for (Eigen::Index j = 0; j < d.p(); ++j)
    scale(out.X.col(j), d.predictor_names[static_cast<std::size_t>(j)]);
  scale(out.y, d.response_name);
  return out;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline double t_critical(double df, double level) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, 1.0 - (1.0 - level) / 2.0);
}

/// coefficient +/- t_crit(df2, level) * SE, one interval per term.
inline std::vector<Interval> confidence_intervals(const RegressionResult& r, double level = 0.95) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0,1)");
  const double tc = t_critical(static_cast<double>(r.df2), level);
  std::vector<Interval> out;
  for (const auto& t : r.terms) out.push_back({t.coefficient - tc * t.std_error, t.coefficient + tc * t.std_error});
  return out;
}

inline std::string format_p(double p) {
  if (p < 0.001) return "p < 0.001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "p = %.3f", p);
  return buf;
}

/// e.g. "F(5, 641) = 38.73, p < 0.001, R² = 0.232"
inline std::string format_model_header(const RegressionResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "F(%zu, %zu) = %.2f, %s, R² = %.3f", r.df1, r.df2,
                r.f_statistic, format_p(r.f_p_value).c_str(), r.r_squared);
  return buf;
}

// ---------------------------------------------------------------------------
// Models of measures on covariates

inline const std::vector<std::string>& base_predictors() {
  static const std::vector<std::string> names = {"bot_level", "word_count", "word_complexity",
                                                 "time_variance"};
  return names;
}

struct ModelOptions {
  bool emotion_effects = false;  // add fear/sadness/joy/disgust indicators (anger baseline)
  bool robust = false;
};

struct ModelFit {
  std::string name;  // "complexity" or "uncertainty"
  RegressionResult raw;
  RegressionResult standardized;
};

struct ModelRun {
  std::vector<ModelFit> models;
  std::size_t dropped_error_rows = 0;
};

struct JoinedRow {
  Emotion emotion;
  std::size_t window_index;
  const MeasureSet* m;
  const SequenceFeatures* f;
};

/// Inner join on (emotion, window_index). Measures that failed
/// reconstruction are dropped and counted; any other key mismatch is an error.
inline std::vector<JoinedRow> join_tables(const std::vector<MeasureSet>& measures,
                                          const std::vector<SequenceFeatures>& features,
                                          std::size_t& dropped) {
  using Key = std::pair<int, std::size_t>;
  std::map<Key, const SequenceFeatures*> fmap;
  for (const auto& f : features) {
    Key k{static_cast<int>(f.emotion), f.window_index};
    if (!fmap.emplace(k, &f).second)
      throw ValidationError("features: duplicate key (" + std::string(to_string(f.emotion)) + ", " +
                            std::to_string(f.window_index) + ")");
  }
  std::map<Key, const MeasureSet*> mmap;
  for (const auto& m : measures) {
    Key k{static_cast<int>(m.emotion), m.window_index};
    if (!mmap.emplace(k, &m).second)
      throw ValidationError("measures: duplicate key (" + std::string(to_string(m.emotion)) + ", " +
                            std::to_string(m.window_index) + "); fit one binning strategy at a time");
  }
  std::vector<std::string> unmatched;
  auto key_name = [](const Key& k) {
    return "(" + std::string(to_string(static_cast<Emotion>(k.first))) + ", " + std::to_string(k.second) + ")";
  };
  for (const auto& [k, m] : mmap)
    if (!fmap.contains(k)) unmatched.push_back("measures " + key_name(k));
  for (const auto& [k, f] : fmap)
    if (!mmap.contains(k)) unmatched.push_back("features " + key_name(k));
  if (!unmatched.empty()) {
    std::string msg = "join mismatch; unmatched keys:";
    for (const auto& u : unmatched) msg += " " + u;
    throw ValidationError(msg);
  }
  dropped = 0;
  std::vector<JoinedRow> rows;
  for (const auto& [k, m] : mmap) {
    if (!m->ok()) {
      ++dropped;
      continue;
    }
    rows.push_back({static_cast<Emotion>(k.first), k.second, m, fmap.at(k)});
  }
  return rows;
}

inline DesignMatrix build_design(const std::vector<JoinedRow>& rows, bool complexity,
                                 const ModelOptions& opts) {
  DesignMatrix d;
  d.predictor_names = base_predictors();
  if (opts.emotion_effects)
    for (std::size_t e = 1; e < kEmotions.size(); ++e)
      d.predictor_names.push_back("emotion_" + std::string(to_string(kEmotions[e])));
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.X.resize(n, static_cast<Eigen::Index>(d.predictor_names.size()));
  d.y.resize(n);
  d.response_name = complexity ? "C" : "h";
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d.y[i] = complexity ? r.m->complexity_C : r.m->entropy_rate_h;
    d.X(i, 0) = r.f->bot_level;
    d.X(i, 1) = r.f->word_count_mean;
    d.X(i, 2) = r.f->word_complexity;
    d.X(i, 3) = r.f->time_variance;
    if (opts.emotion_effects)
      for (std::size_t e = 1; e < kEmotions.size(); ++e)
        d.X(i, static_cast<Eigen::Index>(3 + e)) = r.emotion == kEmotions[e] ? 1.0 : 0.0;
  }
  return d;
}

/// Model 1 regresses C and model 2 regresses h on bot level plus controls.
inline ModelRun run_models(const std::vector<MeasureSet>& measures,
                           const std::vector<SequenceFeatures>& features,
                           const ModelOptions& opts = {}) {
  ModelRun run;
  const auto rows = join_tables(measures, features, run.dropped_error_rows);
  for (bool complexity : {true, false}) {
    auto d = build_design(rows, complexity, opts);
    ModelFit fit;
    fit.name = complexity ? "complexity" : "uncertainty";
    fit.raw = fit_ols(d, {opts.robust});
    fit.standardized = fit_ols(standardize(d), {opts.robust});
    run.models.push_back(std::move(fit));
  }
  return run;
}

}  // namespace botdyn
