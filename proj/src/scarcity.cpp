#include "locus/scarcity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "locus/errors.hpp"
#include "locus/quantiles.hpp"

namespace locus {

namespace {

void validate(const Matrix& reference, std::size_t k, const GammaMapping& m) {
  if (reference.rows == 0) throw ValidationError("scarcity: empty reference set");
  if (k == 0 || k > reference.rows) {
    throw ValidationError("scarcity: k must be in [1, |I1|]");
  }
  if (!(m.gamma_min < m.gamma_max)) {
    throw ValidationError("scarcity: gamma_min must be < gamma_max");
  }
  if (!(m.gamma_min > 0.0) || m.gamma_max > 1.0) {
    throw ValidationError("scarcity: gamma range must lie in (0, 1]");
  }
}

}  // namespace

ScarcityIndex::ScarcityIndex(Matrix reference, std::size_t k, GammaMapping mapping)
    : reference_(std::move(reference)), k_(k), mapping_(mapping) {
  validate(reference_, k_, mapping_);
  std::vector<double> radii(reference_.rows);
  for (std::size_t i = 0; i < reference_.rows; ++i) {
    radii[i] = radius(reference_.row(i));
  }
  q_lo_ = empirical_quantile(radii, 0.50);
  q_hi_ = empirical_quantile(radii, 0.90);
}

ScarcityIndex::ScarcityIndex(Matrix reference, std::size_t k, GammaMapping mapping,
                             double q_lo, double q_hi)
    : reference_(std::move(reference)), k_(k), mapping_(mapping), q_lo_(q_lo),
      q_hi_(q_hi) {
  validate(reference_, k_, mapping_);
  if (q_lo_ > q_hi_) throw ValidationError("scarcity: q_lo must be <= q_hi");
}

double ScarcityIndex::radius(std::span<const double> x) const {
  std::vector<double> d(reference_.rows);
  for (std::size_t i = 0; i < reference_.rows; ++i) {
    d[i] = euclidean_distance(x, reference_.row(i));
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double ScarcityIndex::scarcity_score(std::span<const double> x) const {
  return (radius(x) - q_lo_) / (q_hi_ - q_lo_ + mapping_.eps);
}

double ScarcityIndex::gamma_from_score(double s) const {
  double u = (s - mapping_.midpoint) / mapping_.slope_scale;
  double logistic = 1.0 / (1.0 + std::exp(-u));
  return mapping_.gamma_max - (mapping_.gamma_max - mapping_.gamma_min) * logistic;
}

double ScarcityIndex::gamma_of(std::span<const double> x) const {
  return gamma_from_score(scarcity_score(x));
}

}  // namespace locus
