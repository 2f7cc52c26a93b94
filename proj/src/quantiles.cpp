#include "locus/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "locus/errors.hpp"

namespace locus {

std::size_t quantile_rank(std::size_t m, double level) {
  if (m == 0) throw ValidationError("quantile_rank: empty sample");
  if (!(level > 0.0) || level > 1.0) {
    throw ValidationError("quantile_rank: level must be in (0, 1]");
  }
  // The small nudge keeps ranks stable when level * m is an integer up to
  // floating-point rounding (e.g. 0.7 * 10).
  double raw = level * static_cast<double>(m);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  if (k < 1) k = 1;
  if (k > m) k = m;
  return k;
}

double quantile_sorted(std::span<const double> sorted, double level) {
  return sorted[quantile_rank(sorted.size(), level) - 1];
}

double empirical_quantile(std::span<const double> values, double level) {
  std::vector<double> v(values.begin(), values.end());
  std::size_t k = quantile_rank(v.size(), level);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

}  // namespace locus
