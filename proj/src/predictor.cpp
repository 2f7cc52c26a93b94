#include "locus/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "locus/errors.hpp"
#include "locus/quantiles.hpp"

namespace locus {

double loss_value(LossKind kind, double pred, double y) {
  double d = pred - y;
  return kind == LossKind::kAbsolute ? std::abs(d) : d * d;
}

std::string loss_name(LossKind kind) {
  return kind == LossKind::kAbsolute ? "absolute" : "squared";
}

LossKind parse_loss(const std::string& name) {
  if (name == "absolute") return LossKind::kAbsolute;
  if (name == "squared") return LossKind::kSquared;
  throw ValidationError("unknown loss kind: " + name);
}

std::string predictor_name(PredictorKind kind) {
  return kind == PredictorKind::kKnnRegressor ? "knn_regressor" : "linear_ols";
}

PredictorKind parse_predictor(const std::string& name) {
  if (name == "knn_regressor") return PredictorKind::kKnnRegressor;
  if (name == "linear_ols") return PredictorKind::kLinearOls;
  throw ValidationError("unknown predictor kind: " + name);
}

namespace {

// Solves the normal equations with partial pivoting. Throws on rank
// deficiency, reporting the achieved rank.
std::vector<double> solve_normal_equations(const Matrix& x,
                                           std::span<const double> y) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols + 1;  // intercept column first
  std::vector<double> m(p * p, 0.0);
  std::vector<double> rhs(p, 0.0);
  auto design = [&](std::size_t i, std::size_t j) -> double {
    return j == 0 ? 1.0 : x.at(i, j - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      double da = design(i, a);
      rhs[a] += da * y[i];
      for (std::size_t b = 0; b < p; ++b) m[a * p + b] += da * design(i, b);
    }
  }

  double max_diag = 0.0;
  for (std::size_t a = 0; a < p; ++a) max_diag = std::max(max_diag, std::abs(m[a * p + a]));
  const double tol = std::max(max_diag, 1.0) * 1e-12;

  std::size_t rank = 0;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(m[r * p + col]) > std::abs(m[pivot * p + col])) pivot = r;
    }
    if (std::abs(m[pivot * p + col]) <= tol) {
      throw ValidationError("linear_ols: singular design (rank " +
                            std::to_string(rank) + " of " + std::to_string(p) + ")");
    }
    ++rank;
    if (pivot != col) {
      for (std::size_t c = 0; c < p; ++c) std::swap(m[pivot * p + c], m[col * p + c]);
      std::swap(rhs[pivot], rhs[col]);
    }
    double d = m[col * p + col];
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      double f = m[r * p + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < p; ++c) m[r * p + c] -= f * m[col * p + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t a = 0; a < p; ++a) beta[a] = rhs[a] / m[a * p + a];
  return beta;
}

}  // namespace

Predictor fit_predictor(const TabularData& train, PredictorKind kind,
                        const PredictorHyperparams& hp) {
  if (train.size() == 0) throw ValidationError("fit_predictor: empty training data");
  Predictor p;
  p.kind = kind;
  if (kind == PredictorKind::kKnnRegressor) {
    if (hp.knn_k == 0 || hp.knn_k > train.size()) {
      throw ValidationError("fit_predictor: knn k must be in [1, n_train]");
    }
    p.k = hp.knn_k;
    p.train_features = train.features;
    p.train_target = train.target;
  } else {
    std::vector<double> beta = solve_normal_equations(train.features, train.target);
    p.intercept = beta[0];
    p.coefficients.assign(beta.begin() + 1, beta.end());
  }
  return p;
}

double predict(const Predictor& p, std::span<const double> x) {
  if (p.kind == PredictorKind::kLinearOls) {
    double v = p.intercept;
    for (std::size_t j = 0; j < p.coefficients.size(); ++j) v += p.coefficients[j] * x[j];
    return v;
  }
  const std::size_t n = p.train_features.rows;
  // (distance, row) pairs make the selected neighbor set unique under ties.
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = {euclidean_distance(x, p.train_features.row(i)), i};
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(p.k);
  std::nth_element(d.begin(), mid - 1, d.end());
  double s = 0.0;
  for (std::size_t i = 0; i < p.k; ++i) s += p.train_target[d[i].second];
  return s / static_cast<double>(p.k);
}

std::vector<double> predict_all(const Predictor& p, const Matrix& xs) {
  std::vector<double> out(xs.rows);
  for (std::size_t i = 0; i < xs.rows; ++i) out[i] = predict(p, xs.row(i));
  return out;
}

std::vector<double> realized_losses(const Predictor& p, LossKind loss,
                                    const TabularData& data) {
  std::vector<double> z(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    z[i] = loss_value(loss, predict(p, data.features.row(i)), data.target[i]);
  }
  return z;
}

double tau_from_quantile(std::span<const double> losses, double level) {
  if (losses.empty()) throw ValidationError("tau_from_quantile: empty losses");
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("tau_from_quantile: level must be in (0, 1)");
  }
  return empirical_quantile(losses, level);
}

}  // namespace locus
