#pragma once

#include <memory>
#include <span>
#include <vector>

#include "locus/engine.hpp"
#include "locus/scarcity.hpp"

namespace locus {

/// Selects how the engine's draws collapse into one predictive CDF: their
/// arithmetic mean, or the gamma-quantile envelope with gamma either fixed or
/// resolved per query through a ScarcityIndex.
struct AggregationMode {
  enum class Kind { kMean, kEnvelope };

  Kind kind = Kind::kMean;
  double fixed_gamma = 1.0;
  std::shared_ptr<const ScarcityIndex> scarcity;

  static AggregationMode mean() { return {}; }
  static AggregationMode envelope_fixed(double gamma);
  static AggregationMode envelope_scarcity(std::shared_ptr<const ScarcityIndex> index);

  /// Gamma for this query; 1.0 placeholder in mean mode.
  double gamma_at(std::span<const double> x) const;
};

/// Collapses prepared draws at one z. `gamma` must already be resolved for
/// the query point; `scratch` holds draw_count() doubles.
double aggregate_cdf(const CdfQueryState& query, AggregationMode::Kind kind,
                     double gamma, double z, std::span<double> scratch);

/// W_i = F_tilde(Z_i | X_i) on D2 under the chosen mode.
std::vector<double> pit_values(const LossCdfEngine& engine, const AggregationMode& mode,
                               const Matrix& d2_features, std::span<const double> d2_losses);

/// Split-conformal level: t = W_(k) with k = ceil((1 - alpha) * (n2 + 1)),
/// or 1 when k = n2 + 1.
double calibrate_level(std::span<const double> pit, double alpha);

/// Generalized inverse inf{z : F_tilde(z | x) >= t} by bracket expansion and
/// bisection to 1e-8 absolute in z. Throws ComputationError if the CDF never
/// reaches t within 200 upward doublings.
double invert_cdf(const LossCdfEngine& engine, const AggregationMode& mode,
                  std::span<const double> x, double t);

/// Inversion against an already-prepared query (hot paths).
double invert_prepared(const CdfQueryState& query, AggregationMode::Kind kind,
                       double gamma, double t, double bracket_seed);

/// Frozen scorer: engine + mode + calibrated level. Immutable; score is pure.
class CalibratedBound {
 public:
  CalibratedBound(std::shared_ptr<const LossCdfEngine> engine, AggregationMode mode,
                  std::vector<double> pit, double alpha);

  /// U_alpha(x); gamma resolved per query when the mode carries a scarcity index.
  double score(std::span<const double> x) const;
  std::vector<double> score_all(const Matrix& xs) const;

  double alpha() const { return alpha_; }
  double t() const { return t_; }
  std::size_t n2() const { return sorted_pit_.size(); }
  const std::vector<double>& sorted_pit() const { return sorted_pit_; }
  const AggregationMode& mode() const { return mode_; }
  const std::shared_ptr<const LossCdfEngine>& engine() const { return engine_; }

 private:
  std::shared_ptr<const LossCdfEngine> engine_;
  AggregationMode mode_;
  std::vector<double> sorted_pit_;
  double alpha_;
  double t_;
};

/// Engine + mode + PIT values, shared across calibration levels; the alpha
/// scan of the tuning procedures reuses one PIT vector.
struct CalibrationContext {
  std::shared_ptr<const LossCdfEngine> engine;
  AggregationMode mode;
  std::vector<double> sorted_pit;

  CalibratedBound bound_at(double alpha) const {
    return CalibratedBound(engine, mode, sorted_pit, alpha);
  }
};

}  // namespace locus
