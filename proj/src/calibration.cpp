#include "locus/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "locus/errors.hpp"
#include "locus/quantiles.hpp"

namespace locus {

AggregationMode AggregationMode::envelope_fixed(double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw ValidationError("aggregation: envelope gamma must be in (0, 1]");
  }
  AggregationMode m;
  m.kind = Kind::kEnvelope;
  m.fixed_gamma = gamma;
  return m;
}

AggregationMode AggregationMode::envelope_scarcity(
    std::shared_ptr<const ScarcityIndex> index) {
  if (!index) throw ValidationError("aggregation: null scarcity index");
  AggregationMode m;
  m.kind = Kind::kEnvelope;
  m.scarcity = std::move(index);
  return m;
}

double AggregationMode::gamma_at(std::span<const double> x) const {
  if (kind == Kind::kMean) return 1.0;
  return scarcity ? scarcity->gamma_of(x) : fixed_gamma;
}

double aggregate_cdf(const CdfQueryState& query, AggregationMode::Kind kind,
                     double gamma, double z, std::span<double> scratch) {
  query.draws_at(z, scratch);
  if (kind == AggregationMode::Kind::kMean) return mean_of_draws(scratch);
  return envelope_of_draws(scratch, gamma);
}

std::vector<double> pit_values(const LossCdfEngine& engine, const AggregationMode& mode,
                               const Matrix& d2_features,
                               std::span<const double> d2_losses) {
  if (d2_features.rows != d2_losses.size()) {
    throw ValidationError("pit_values: feature/loss length mismatch");
  }
  if (d2_losses.empty()) throw ValidationError("pit_values: empty D2");
  std::vector<double> w(d2_losses.size());
  std::vector<double> scratch(engine.draw_count());
  for (std::size_t i = 0; i < d2_losses.size(); ++i) {
    auto x = d2_features.row(i);
    auto query = engine.prepare(x);
    w[i] = aggregate_cdf(*query, mode.kind, mode.gamma_at(x), d2_losses[i], scratch);
  }
  return w;
}

double calibrate_level(std::span<const double> pit, double alpha) {
  if (pit.empty()) throw ValidationError("calibrate_level: empty PIT vector");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("calibrate_level: alpha must be in (0, 1)");
  }
  const std::size_t n2 = pit.size();
  double raw = (1.0 - alpha) * static_cast<double>(n2 + 1);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  if (k < 1) k = 1;
  if (k > n2) return 1.0;
  std::vector<double> w(pit.begin(), pit.end());
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k - 1), w.end());
  return w[k - 1];
}

double invert_prepared(const CdfQueryState& query, AggregationMode::Kind kind,
                       double gamma, double t, double bracket_seed) {
  if (!(t > 0.0) || t > 1.0) {
    throw ValidationError("invert_cdf: t must be in (0, 1]");
  }
  std::vector<double> scratch(query.draw_count());
  auto cdf = [&](double z) { return aggregate_cdf(query, kind, gamma, z, scratch); };

  double hi = std::max(bracket_seed, 1e-6);
  int doublings = 0;
  while (cdf(hi) < t) {
    hi *= 2.0;
    if (++doublings > 200) {
      throw ComputationError("invert_cdf: CDF never reaches t after 200 doublings");
    }
  }
  // The usual case has all mass on [0, inf): cdf(lo) < t right away. The
  // downward expansion keeps the generalized inverse correct for test CDFs
  // with support below zero.
  double lo = std::min(0.0, hi);
  double step = 1.0;
  doublings = 0;
  while (cdf(lo) >= t) {
    hi = lo;
    lo -= step;
    step *= 2.0;
    if (++doublings > 200) {
      throw ComputationError("invert_cdf: no lower bracket after 200 doublings");
    }
  }
  while (hi - lo > 1e-8) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= t) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double invert_cdf(const LossCdfEngine& engine, const AggregationMode& mode,
                  std::span<const double> x, double t) {
  auto query = engine.prepare(x);
  return invert_prepared(*query, mode.kind, mode.gamma_at(x), t, engine.bracket_seed());
}

CalibratedBound::CalibratedBound(std::shared_ptr<const LossCdfEngine> engine,
                                 AggregationMode mode, std::vector<double> pit,
                                 double alpha)
    : engine_(std::move(engine)), mode_(std::move(mode)), sorted_pit_(std::move(pit)),
      alpha_(alpha) {
  if (!engine_) throw ValidationError("calibrated bound: null engine");
  std::sort(sorted_pit_.begin(), sorted_pit_.end());
  for (double w : sorted_pit_) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ValidationError("calibrated bound: PIT values must lie in [0, 1]");
    }
  }
  t_ = calibrate_level(sorted_pit_, alpha_);
  if (!(t_ > 0.0)) {
    throw ValidationError("calibrated bound: calibrated level is 0 (degenerate PITs)");
  }
}

double CalibratedBound::score(std::span<const double> x) const {
  return invert_cdf(*engine_, mode_, x, t_);
}

std::vector<double> CalibratedBound::score_all(const Matrix& xs) const {
  std::vector<double> out(xs.rows);
  for (std::size_t i = 0; i < xs.rows; ++i) out[i] = score(xs.row(i));
  return out;
}

}  // namespace locus
