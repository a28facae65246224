#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "beyond/surrogate.hpp"
#include "support.hpp"

using namespace beyond;
using beyond::test::content;

namespace {

Dataset oracle_data(std::size_t n, std::uint64_t seed) {
  const auto& c = content();
  return sample_dataset(n, seed, c.climate, c.room, c.ranges);
}

Dataset relabel(Dataset d, double (*heat)(const SimulationParams&), double (*cool)(const SimulationParams&)) {
  for (auto& s : d) {
    s.params.cooling_enabled = true;
    s.result.heating = heat(s.params);
    s.result.cooling = cool(s.params);
    s.result.total = s.result.heating + s.result.cooling;
    s.result.rating = energy_rating(s.result.total);
  }
  return d;
}

double quad_heat(const SimulationParams& p) {
  return 40 + 12 * p.wall_u - 3 * p.shgc * p.window_u + 0.5 * p.setpoint_heating * p.wall_u +
         0.2 * p.setpoint_heating * p.setpoint_heating + (p.shades_on ? 4 : 0) +
         (p.location == "Athens" ? -6 : 0) + (p.orientation == Orientation::N ? 2.5 : 0);
}

double quad_cool(const SimulationParams& p) {
  return 20 + 30 * p.shgc - p.setpoint_cooling * 0.4 + 2 * p.shgc * p.shgc + (p.shades_on ? -3 : 0);
}

double constant(const SimulationParams&) { return 42.5; }

}  // namespace

TEST(Features, WidthCountsMonomials) {
  const FeatureSpec spec = feature_spec_for(oracle_data(60, 1), 2, false);
  // 5 continuous inputs: 5 linear + 15 quadratic; dummies enter linearly.
  std::size_t dummies = 0;
  for (const auto& e : spec.enums) dummies += e.levels.size() - 1;
  EXPECT_EQ(spec.continuous.size(), 5u);
  EXPECT_EQ(spec.width(), static_cast<Eigen::Index>(5 + 15 + dummies));
}

TEST(Features, UnknownLevelIsIncompatible) {
  const FeatureSpec spec = feature_spec_for(oracle_data(60, 1));
  SimulationParams p;
  p.location = "Atlantis";
  EXPECT_THROW(encode(spec, p), Error);
}

TEST(Features, OutOfRangeIsClampedAndFlagged) {
  const Dataset d = oracle_data(200, 1);
  const FeatureSpec spec = feature_spec_for(d);
  SimulationParams p = d.front().params;
  EXPECT_FALSE(encode(spec, p).clamped);
  p.wall_u = 9.0;
  EXPECT_TRUE(encode(spec, p).clamped);
}

TEST(Ridge, RecoversExactQuadratic) {
  const Dataset d = relabel(oracle_data(600, 3), quad_heat, quad_cool);
  const SurrogateModel m = fit(d, 1e-10, 1, 2, true);
  for (const auto& s : d) {
    const Prediction p = predict(m, s.params);
    EXPECT_NEAR(p.energy.heating, s.result.heating, 1e-6 * s.result.heating);
    EXPECT_NEAR(p.energy.cooling, s.result.cooling, 1e-6 * s.result.cooling);
  }
}

TEST(Ridge, ConstantTargetGivesBiasOnly) {
  const Dataset d = relabel(oracle_data(300, 4), constant, constant);
  const SurrogateModel m = fit(d, 0.5, 1, 2, true);
  EXPECT_NEAR(m.weights(0, 0), 42.5, 1e-8);
  EXPECT_NEAR(m.weights(0, 1), 42.5, 1e-8);
  EXPECT_LT(m.weights.bottomRows(m.weights.rows() - 1).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ridge, NormalEquationResidual) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(400, 30), y(400, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  x.col(0).setOnes();
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = g(rng);
  for (double lambda : {0.0, 1e-6, 1e-3, 10.0}) {
    const Eigen::MatrixXd w = solve_ridge(x, y, lambda);
    const Eigen::MatrixXd rhs = x.transpose() * y;
    const Eigen::MatrixXd lhs = x.transpose() * x * w + penalty_diagonal(x.cols(), lambda).asDiagonal() * w;
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * rhs.norm()) << lambda;
  }
}

TEST(Ridge, TooFewRows) { EXPECT_THROW(fit(oracle_data(49, 1), 1e-3, 1), Error); }

TEST(Split, SeededEightyTwenty) {
  const auto a = split_indices(1000, 9);
  EXPECT_EQ(a, split_indices(1000, 9));
  EXPECT_NE(a, split_indices(1000, 10));
  EXPECT_EQ(train_count(1000), 800u);
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

class OracleFit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(oracle_data(3000, 21));
    model_ = new SurrogateModel(fit(*data_, 1e-3, 21));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete data_;
  }
  static Dataset* data_;
  static SurrogateModel* model_;
};

Dataset* OracleFit::data_ = nullptr;
SurrogateModel* OracleFit::model_ = nullptr;

TEST_F(OracleFit, HoldoutWithinTenPercentOfSpread) {
  EXPECT_LE(model_->holdout.heating.rmse, 0.1 * model_->holdout.heating.target_std);
  EXPECT_LE(model_->holdout.cooling.rmse, 0.1 * model_->holdout.cooling.target_std);
  EXPECT_EQ(model_->holdout.n, 600u);
}

TEST_F(OracleFit, TrainingRowsNearTheirLabels) {
  const auto idx = split_indices(data_->size(), 21);
  const double bound = 3 * model_->holdout.heating.rmse;
  std::size_t inside = 0, n = train_count(data_->size());
  for (std::size_t k = 0; k < n; ++k) {
    const Sample& s = (*data_)[idx[k]];
    inside += std::abs(predict(*model_, s.params).energy.heating - s.result.heating) <= bound;
  }
  EXPECT_GE(static_cast<double>(inside) / n, 0.95);
  const Metrics train = evaluate(*model_, select_rows(*data_, idx, 0, n));
  EXPECT_LE(train.heating.rmse, bound);
}

TEST_F(OracleFit, CoolingGatedByFlag) {
  SimulationParams p;
  p.cooling_enabled = false;
  EXPECT_EQ(predict(*model_, p).energy.cooling, 0.0);
}

TEST_F(OracleFit, SaveLoadIsBitExact) {
  const auto path = std::filesystem::temp_directory_path() / "beyond_model_roundtrip.json";
  save_model(*model_, path);
  const SurrogateModel back = load_model(path);
  EXPECT_TRUE(back.spec == model_->spec);
  EXPECT_EQ(back.weights, model_->weights);
  for (const auto& s : oracle_data(100, 99)) {
    const EnergyResult a = predict(*model_, s.params).energy;
    const EnergyResult b = predict(back, s.params).energy;
    EXPECT_EQ(a.heating, b.heating);
    EXPECT_EQ(a.cooling, b.cooling);
  }
  std::filesystem::remove(path);
}

TEST_F(OracleFit, PerfectModelScoresPerfectly) {
  Dataset d = oracle_data(200, 77);
  for (auto& s : d) s.result = predict(*model_, s.params).energy;
  const Metrics m = evaluate(*model_, d);
  EXPECT_EQ(m.heating.rmse, 0.0);
  EXPECT_EQ(m.cooling.rmse, 0.0);
  EXPECT_EQ(m.rating_band_agreement, 1.0);
}

TEST_F(OracleFit, EmptyDatasetIsAnError) { EXPECT_THROW(evaluate(*model_, Dataset{}), Error); }

TEST_F(OracleFit, NegativeRawPredictionClampsToZero) {
  SurrogateModel m = *model_;
  m.weights.setZero();
  m.weights(0, 0) = -5;
  m.weights(0, 1) = -5;
  const EnergyResult r = predict(m, SimulationParams{}).energy;
  EXPECT_EQ(r.heating, 0.0);
  EXPECT_EQ(r.cooling, 0.0);
  EXPECT_EQ(r.rating, Rating::APlus);
}

TEST_F(OracleFit, RejectsTamperedFiles) {
  nlohmann::json j = to_json(*model_);
  j["schema"] = "something/else";
  EXPECT_THROW(model_from_json(j), Error);
  j = to_json(*model_);
  j["weights"]["heating"].erase(0);
  EXPECT_THROW(model_from_json(j), Error);
}
