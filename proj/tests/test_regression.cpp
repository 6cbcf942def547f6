#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "botdyn/regression.hpp"
#include "oracles.hpp"

using namespace botdyn;

namespace {

DesignMatrix simple(std::vector<double> x, std::vector<double> y) {
  DesignMatrix d;
  d.predictor_names = {"x"};
  d.X = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  d.y = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return d;
}

DesignMatrix random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
  std::normal_distribution<double> z(0.0, 1.0);
  DesignMatrix d;
  for (Eigen::Index j = 0; j < p; ++j) d.predictor_names.push_back("x" + std::to_string(j));
  d.X.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double yi = 0.3;
    for (Eigen::Index j = 0; j < p; ++j) {
      d.X(i, j) = z(rng) * static_cast<double>(j + 1) + static_cast<double>(j);
      yi += 0.5 * static_cast<double>(j % 3 - 1) * d.X(i, j);
    }
    d.y[i] = yi + z(rng);
  }
  return d;
}

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& X) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(X(i, j));
  return out;
}

double sd(const Eigen::VectorXd& v) {
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

struct Tables {
  std::vector<MeasureSet> measures;
  std::vector<SequenceFeatures> features;
};

// Feature rows with independent random covariates; the response is filled in
// by the caller.
Tables random_tables(std::mt19937_64& rng, std::size_t windows) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tables t;
  for (Emotion e : kEmotions)
    for (std::size_t w = 0; w < windows; ++w) {
      SequenceFeatures f;
      f.emotion = e;
      f.window_index = w;
      f.bot_level = u(rng);
      f.word_count_mean = 15 + 10 * u(rng);
      f.word_complexity = 5 + u(rng);
      f.time_variance = 2 * u(rng);
      t.features.push_back(f);
      MeasureSet m;
      m.emotion = e;
      m.window_index = w;
      t.measures.push_back(m);
    }
  return t;
}

}  // namespace

TEST(Ols, PerfectFit) {
  const auto r = fit_ols(simple({1, 2, 3}, {1, 2, 3}));
  EXPECT_NEAR(r.term("x").coefficient, 1.0, 1e-12);
  EXPECT_NEAR(r.term(kInterceptName).coefficient, 0.0, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);
  EXPECT_EQ(r.df1, 1u);
  EXPECT_EQ(r.df2, 1u);
}

TEST(Ols, ClosedFormSimpleRegression) {
  const std::vector<double> x = {1, 2, 3, 4}, y = {1, 2, 2, 3};
  const auto [b0, b1] = oracle::simple_regression(x, y);
  EXPECT_NEAR(b1, 0.6, 1e-15);
  const auto r = fit_ols(simple(x, y));
  EXPECT_NEAR(r.term("x").coefficient, b1, 1e-12);
  EXPECT_NEAR(r.term(kInterceptName).coefficient, b0, 1e-12);
  EXPECT_NEAR(r.term(kInterceptName).coefficient, 0.5, 1e-12);
  EXPECT_EQ(r.df2, 2u);
}

TEST(Ols, MatchesNormalEquationsOnRandomDesigns) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_design(rng, 20 + static_cast<Eigen::Index>(rng() % 200), 1 + static_cast<Eigen::Index>(rng() % 6));
    const auto r = fit_ols(d);
    const auto b = oracle::normal_equations(rows_of(d.X), std::vector<double>(d.y.data(), d.y.data() + d.y.size()));
    ASSERT_EQ(r.terms.size(), b.size());
    for (std::size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(r.terms[j].coefficient, b[j], 1e-8);
    EXPECT_GE(r.r_squared, 0.0);
    EXPECT_LE(r.r_squared, 1.0);
    EXPECT_EQ(r.df2, r.n - r.df1 - 1);
  }
}

TEST(Ols, RankDeficiencyNamesColumns) {
  DesignMatrix d;
  d.predictor_names = {"a", "b", "a_twice"};
  d.X.resize(10, 3);
  d.y.resize(10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    d.X(i, 0) = static_cast<double>(i);
    d.X(i, 1) = static_cast<double>((i * 7) % 5);
    d.X(i, 2) = 2.0 * static_cast<double>(i);
    d.y[i] = static_cast<double>(i % 3);
  }
  try {
    fit_ols(d);
    FAIL() << "expected rank deficiency";
  } catch (const ComputationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("column(s) a, a_twice"), std::string::npos) << msg;
    EXPECT_EQ(msg.find(" b"), std::string::npos) << msg;
  }
}

TEST(Ols, DesignValidation) {
  auto d = simple({1, 2}, {1, 2});
  EXPECT_THROW(fit_ols(d), ValidationError);  // n must exceed the coefficient count
  d = simple({1, 2, 3, 4}, {1, 2, 3, 4});
  d.predictor_names = {kInterceptName};
  EXPECT_THROW(fit_ols(d), ValidationError);
}

TEST(Ols, HeaderRendering) {
  RegressionResult r;
  r.df1 = 5;
  r.df2 = 641;
  r.f_statistic = 38.73;
  r.f_p_value = 1e-30;
  r.r_squared = 0.232;
  EXPECT_EQ(format_model_header(r), "F(5, 641) = 38.73, p < 0.001, R² = 0.232");
  r.f_p_value = 0.0421;
  EXPECT_EQ(format_p(r.f_p_value), "p = 0.042");
}

TEST(Standardize, Examples) {
  const auto d = standardize(simple({1, 2, 3}, {2, 4, 9}));
  EXPECT_NEAR(d.X(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(d.X(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(d.X(2, 0), 1.0, 1e-15);
  const auto again = standardize(d);
  EXPECT_LT((again.X - d.X).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((again.y - d.y).cwiseAbs().maxCoeff(), 1e-12);
  try {
    standardize(simple({4, 4, 4}, {1, 2, 3}));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
}

TEST(ConfidenceIntervals, Examples) {
  const auto perfect = fit_ols(simple({1, 2, 3, 4}, {3, 5, 7, 9}));
  for (const auto& ci : confidence_intervals(perfect)) EXPECT_NEAR(ci.hi - ci.lo, 0.0, 1e-9);

  RegressionResult r;
  r.df2 = 1000000;
  r.terms = {{"x", 0.6, 0.0, 0.1, 6.0, 0.0}};
  const auto ci = confidence_intervals(r);
  EXPECT_NEAR(ci[0].lo, 0.404, 5e-4);
  EXPECT_NEAR(ci[0].hi, 0.796, 5e-4);

  std::mt19937_64 rng(4);
  const auto fit = fit_ols(random_design(rng, 50, 3));
  const auto cis = confidence_intervals(fit, 0.9);
  for (std::size_t j = 0; j < cis.size(); ++j) {
    EXPECT_LE(cis[j].lo, fit.terms[j].coefficient);
    EXPECT_GE(cis[j].hi, fit.terms[j].coefficient);
  }
}

TEST(OlsProperties, StandardizedCoefficientIdentity) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_design(rng, 80, 4);
    const auto r = fit_ols(d);
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      const auto& t = r.terms[static_cast<std::size_t>(j + 1)];
      EXPECT_NEAR(t.std_coefficient, t.coefficient * sd(d.X.col(j)) / sd(d.y), 1e-10);
    }
    // And the fit on standardized data agrees with the identity.
    const auto rs = fit_ols(standardize(d));
    for (std::size_t j = 1; j < r.terms.size(); ++j)
      EXPECT_NEAR(rs.terms[j].coefficient, r.terms[j].std_coefficient, 1e-10);
  }
}

TEST(OlsProperties, ShiftAndScaleInvariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = random_design(rng, 60, 3);
    const auto r = fit_ols(d);
    auto shifted = d;
    shifted.X.col(0).array() += 17.5;
    const auto rs = fit_ols(shifted);
    for (std::size_t j = 1; j < r.terms.size(); ++j)
      EXPECT_NEAR(rs.terms[j].coefficient, r.terms[j].coefficient, 1e-10);
    EXPECT_GT(std::abs(rs.terms[0].coefficient - r.terms[0].coefficient), 1e-6);

    auto scaled = d;
    scaled.X.col(2) *= 3.0;
    const auto rc = fit_ols(scaled);
    EXPECT_NEAR(rc.terms[3].coefficient, r.terms[3].coefficient / 3.0, 1e-10);
    EXPECT_NEAR(rc.terms[3].std_coefficient, r.terms[3].std_coefficient, 1e-10);
    EXPECT_NEAR(rc.terms[3].t_value, r.terms[3].t_value, 1e-8);
    EXPECT_NEAR(rc.terms[3].p_value, r.terms[3].p_value, 1e-10);
  }
}

TEST(OlsProperties, RSquaredIsSquaredCorrelation) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = random_design(rng, 70, 3);
    const auto r = fit_ols(d);
    const Eigen::VectorXd a = d.y.array() - d.y.mean();
    const Eigen::VectorXd b = r.fitted.array() - r.fitted.mean();
    const double corr = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    EXPECT_NEAR(r.r_squared, corr * corr, 1e-10);
  }
}

TEST(OlsProperties, RobustErrorsKeepCoefficients) {
  std::mt19937_64 rng(10);
  const auto d = random_design(rng, 120, 3);
  const auto a = fit_ols(d);
  const auto b = fit_ols(d, {true});
  EXPECT_TRUE(b.robust);
  for (std::size_t j = 0; j < a.terms.size(); ++j) {
    EXPECT_DOUBLE_EQ(a.terms[j].coefficient, b.terms[j].coefficient);
    EXPECT_GT(b.terms[j].std_error, 0.0);
  }
}

TEST(RunModels, PlantedIdentity) {
  std::mt19937_64 rng(1);
  auto t = random_tables(rng, 20);
  for (std::size_t i = 0; i < t.measures.size(); ++i) {
    t.measures[i].complexity_C = t.features[i].bot_level;
    t.measures[i].entropy_rate_h = 1.0 + t.features[i].time_variance;
  }
  const auto run = run_models(t.measures, t.features);
  ASSERT_EQ(run.models.size(), 2u);
  EXPECT_EQ(run.models[0].name, "complexity");
  EXPECT_EQ(run.models[0].raw.response, "C");
  EXPECT_NEAR(run.models[0].raw.term("bot_level").coefficient, 1.0, 1e-9);
  EXPECT_NEAR(run.models[0].raw.r_squared, 1.0, 1e-12);
  EXPECT_EQ(run.models[1].raw.response, "h");
  EXPECT_NEAR(run.models[1].raw.term("time_variance").coefficient, 1.0, 1e-9);
  EXPECT_EQ(run.models[0].raw.df1, 4u);
  EXPECT_EQ(run.models[0].raw.df2, 100u - 5u);
}

TEST(RunModels, PlantedBotEffectRecovered) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.2);
  auto t = random_tables(rng, 30);
  for (std::size_t i = 0; i < t.measures.size(); ++i) {
    t.measures[i].complexity_C = 1.0 + 0.5 * t.features[i].bot_level + noise(rng);
    t.measures[i].entropy_rate_h = 1.5 + noise(rng);
  }
  const auto run = run_models(t.measures, t.features);
  const auto& bot = run.models[0].raw.term("bot_level");
  EXPECT_GT(bot.coefficient, 0.0);
  EXPECT_LT(bot.p_value, 0.05);
}

TEST(RunModels, ShuffledResponseIsNull) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.2);
  auto t = random_tables(rng, 30);
  for (std::size_t i = 0; i < t.measures.size(); ++i)
    t.measures[i].complexity_C = 1.0 + 2.0 * t.features[i].bot_level + noise(rng);
  std::vector<double> c;
  for (const auto& m : t.measures) c.push_back(m.complexity_C);
  int non_significant = 0;
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 shuffle_rng(1000 + static_cast<std::uint64_t>(s));
    std::shuffle(c.begin(), c.end(), shuffle_rng);
    for (std::size_t i = 0; i < c.size(); ++i) {
      t.measures[i].complexity_C = c[i];
      t.measures[i].entropy_rate_h = c[(i + 1) % c.size()];
    }
    if (run_models(t.measures, t.features).models[0].raw.f_p_value >= 0.01) ++non_significant;
  }
  EXPECT_GE(non_significant, 95);
}

TEST(RunModels, JoinMismatchListsKeys) {
  std::mt19937_64 rng(4);
  auto t = random_tables(rng, 10);
  t.features.pop_back();  // disgust window 9
  try {
    run_models(t.measures, t.features);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(disgust, 9)"), std::string::npos) << e.what();
  }
}

TEST(RunModels, FailedSequencesDroppedAndCounted) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto t = random_tables(rng, 10);
  for (auto& m : t.measures) {
    m.complexity_C = u(rng);
    m.entropy_rate_h = u(rng);
  }
  t.measures[3].error = "too short";
  const auto run = run_models(t.measures, t.features);
  EXPECT_EQ(run.dropped_error_rows, 1u);
  EXPECT_EQ(run.models[0].raw.n, 49u);
}

TEST(RunModels, EmotionEffectsAddIndicators) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto t = random_tables(rng, 12);
  for (auto& m : t.measures) {
    m.complexity_C = u(rng) + (m.emotion == Emotion::joy ? 1.0 : 0.0);
    m.entropy_rate_h = u(rng);
  }
  const auto run = run_models(t.measures, t.features, {true, false});
  EXPECT_EQ(run.models[0].raw.df1, 8u);
  EXPECT_GT(run.models[0].raw.term("emotion_joy").coefficient, 0.5);
}
