#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "beyond/climate.hpp"

namespace beyond {

struct ContinuousFeature {
  std::string name;
  double min = 0.0;
  double max = 1.0;

  bool operator==(const ContinuousFeature&) const = default;
};

struct EnumFeature {
  std::string name;
  std::vector<std::string> levels;  // first level is the reference (no column)

  bool operator==(const EnumFeature&) const = default;
};

/// Encoding of SimulationParams into a regression row: continuous inputs
/// min-max scaled to [0, 1], enums dummy-coded, then every monomial up to
/// `degree`. Without `full_interactions` only the continuous inputs are
/// expanded and dummies enter linearly.
struct FeatureSpec {
  std::vector<ContinuousFeature> continuous;
  std::vector<EnumFeature> enums;
  int degree = 3;
  bool full_interactions = true;

  /// Number of columns in an encoded row, excluding the bias.
  Eigen::Index width() const;
  bool operator==(const FeatureSpec&) const = default;
};

/// Spec whose ranges and location levels are taken from `data`.
FeatureSpec feature_spec_for(const Dataset& data, int degree = 3, bool full_interactions = true);

struct EncodedRow {
  Eigen::VectorXd x;     // bias first, width() + 1 entries
  bool clamped = false;  // some continuous input was outside its range
};

/// Throws IncompatibleModel when an enum value is not a known level.
EncodedRow encode(const FeatureSpec& spec, const SimulationParams& p);

/// Rows of encode(); bias column first.
Eigen::MatrixXd design_matrix(const FeatureSpec& spec, const Dataset& data);

/// Targets as an n x 2 matrix (heating, cooling).
Eigen::MatrixXd target_matrix(const Dataset& data);

/// Ridge penalty weights: 0 for the bias, lambda elsewhere.
Eigen::VectorXd penalty_diagonal(Eigen::Index cols, double lambda);

/// Seeded permutation of 0..n-1; the first 80 % are the training rows.
std::vector<std::size_t> split_indices(std::size_t n, std::uint64_t seed);
std::size_t train_count(std::size_t n);

Dataset select_rows(const Dataset& data, const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end);

struct HeadMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  double target_std = 0.0;
};

struct Metrics {
  HeadMetrics heating;
  HeadMetrics cooling;
  double rating_band_agreement = 0.0;
  std::size_t n = 0;
};

struct Provenance {
  std::string content_hash;
  std::string dataset_hash;
  std::uint64_t seed = 0;
};

struct SurrogateModel {
  std::string version = "beyond.surrogate/1";
  FeatureSpec spec;
  Eigen::MatrixXd weights;  // (width + 1) x 2, bias row first
  double ridge_lambda = 0.0;
  Metrics holdout;          // on the 20 % split
  std::size_t n_train = 0;
  Provenance provenance;
};

/// Heating head on every row; cooling head on the cooling-enabled rows.
Eigen::MatrixXd fit_heads(const FeatureSpec& spec, const Dataset& train, double ridge_lambda);

/// Closed-form ridge fit on the seeded 80 % split. Requires >= 50 rows.
SurrogateModel fit(const Dataset& data, double ridge_lambda, std::uint64_t seed, int degree = 3,
                   bool full_interactions = true);

/// Solve (X'X + diag(penalty)) W = X'Y and verify the residual.
Eigen::MatrixXd solve_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge_lambda);

struct Prediction {
  EnergyResult energy;
  bool clamped = false;
};

Prediction predict(const SurrogateModel& model, const SimulationParams& p, const PhysicsRules& rules = default_rules());

/// Throws InvalidInput on an empty dataset.
Metrics evaluate(const SurrogateModel& model, const Dataset& data, const PhysicsRules& rules = default_rules());

nlohmann::json to_json(const SurrogateModel& model);
nlohmann::json to_json(const Metrics& m);
SurrogateModel model_from_json(const nlohmann::json& j);
void save_model(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_model(const std::filesystem::path& path);

}  // namespace beyond
