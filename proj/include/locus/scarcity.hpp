#pragma once

#include <cstddef>
#include <span>

#include "locus/tabular.hpp"

namespace locus {

/// Constants of the scarcity-to-gamma logistic map.
struct GammaMapping {
  double gamma_min = 0.15;
  double gamma_max = 0.9;
  double midpoint = 0.0;     // m
  double slope_scale = 1.0;  // s_gamma
  double eps = 1e-6;         // denominator guard in the scarcity score
};

/// Brute-force exact kNN index over standardized reference features, with the
/// 0.50/0.90 reference radius quantiles and the gamma map. Immutable after
/// construction; queries are const and concurrency-safe.
class ScarcityIndex {
 public:
  /// Computes reference radii with self-inclusion (a reference point is its
  /// own first neighbor at distance 0) and derives q_lo/q_hi from them.
  ScarcityIndex(Matrix reference, std::size_t k, GammaMapping mapping = {});

  /// Reconstruction with previously computed radius quantiles.
  ScarcityIndex(Matrix reference, std::size_t k, GammaMapping mapping,
                double q_lo, double q_hi);

  /// kNN radius r_k(x): distance to the k-th nearest reference point.
  double radius(std::span<const double> x) const;

  /// s(x) = (r_k(x) - q_lo) / (q_hi - q_lo + eps); may be negative or > 1.
  double scarcity_score(std::span<const double> x) const;

  /// gamma(x) = gamma_max - (gamma_max - gamma_min) * logistic((s - m) / s_gamma).
  double gamma_of(std::span<const double> x) const;

  /// The logistic map alone, for a given scarcity score.
  double gamma_from_score(double s) const;

  std::size_t k() const { return k_; }
  double q_lo() const { return q_lo_; }
  double q_hi() const { return q_hi_; }
  const GammaMapping& mapping() const { return mapping_; }
  const Matrix& reference() const { return reference_; }

 private:
  Matrix reference_;
  std::size_t k_;
  GammaMapping mapping_;
  double q_lo_ = 0.0;
  double q_hi_ = 0.0;
};

}  // namespace locus
