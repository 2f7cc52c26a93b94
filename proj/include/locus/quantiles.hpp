#pragma once

#include <cstddef>
#include <span>

namespace locus {

// Project-wide empirical quantile convention: the order statistic at 1-based
// rank ceil(level * m), clamped to [1, m]. The "higher" interpolation choice
// guarantees that at most a (1 - level) fraction of the sample strictly
// exceeds the returned value.

/// Rank for a sample of size m at the given level in (0, 1]. m must be >= 1.
std::size_t quantile_rank(std::size_t m, double level);

/// Quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double level);

/// Quantile of an unsorted sample (copies and sorts).
double empirical_quantile(std::span<const double> values, double level);

}  // namespace locus
