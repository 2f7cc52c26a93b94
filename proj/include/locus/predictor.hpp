#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "locus/loss.hpp"
#include "locus/tabular.hpp"

namespace locus {

enum class PredictorKind { kKnnRegressor, kLinearOls };

/// A frozen deployed predictor. Immutable after fit; predict is deterministic
/// and safe to call concurrently.
struct Predictor {
  PredictorKind kind = PredictorKind::kLinearOls;

  // knn_regressor state
  std::size_t k = 5;
  Matrix train_features;
  std::vector<double> train_target;

  // linear_ols state
  std::vector<double> coefficients;
  double intercept = 0.0;
};

struct PredictorHyperparams {
  std::size_t knn_k = 5;
};

Predictor fit_predictor(const TabularData& train, PredictorKind kind,
                        const PredictorHyperparams& hp = {});

double predict(const Predictor& p, std::span<const double> x);
std::vector<double> predict_all(const Predictor& p, const Matrix& xs);

/// Z_i = L(g(X_i), Y_i), in row order.
std::vector<double> realized_losses(const Predictor& p, LossKind loss,
                                    const TabularData& data);

/// Empirical quantile of losses under the project convention; guarantees the
/// fraction strictly exceeding the result is at most 1 - level.
double tau_from_quantile(std::span<const double> losses, double level);

std::string predictor_name(PredictorKind kind);
PredictorKind parse_predictor(const std::string& name);

}  // namespace locus
