#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locus/loss.hpp"
#include "locus/tabular.hpp"

namespace locus {

// ---------------------------------------------------------------------------
// CSV ingestion (RFC-4180 style, mandatory header, '.' decimal separator)
// ---------------------------------------------------------------------------

TabularData load_csv(const std::string& path, const std::string& target_column);
void write_csv(const std::string& path, const TabularData& data,
               const std::string& target_column);

/// Reads a CSV with no designated target; every column becomes a feature.
std::pair<Matrix, std::vector<std::string>> load_feature_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Standardization (population-sd convention, fitted on the training split)
// ---------------------------------------------------------------------------

struct Standardizer {
  std::vector<double> feature_means;
  std::vector<double> feature_sds;
  double target_mean = 0.0;
  double target_sd = 1.0;
};

/// Fits means and population sds; throws naming any constant column.
Standardizer fit_standardizer(const TabularData& data);

TabularData apply_standardizer(const Standardizer& s, const TabularData& data);
TabularData invert_standardizer(const Standardizer& s, const TabularData& data);
Matrix standardize_features(const Standardizer& s, const Matrix& features);

// ---------------------------------------------------------------------------
// Split protocol
// ---------------------------------------------------------------------------

struct SplitFractions {
  double train = 0.4;
  double calibration = 0.4;
  double validation = 0.1;
  double test = 0.1;
};

struct SplitDataset {
  TabularData train, cal_d1, cal_d2, validation, test;
  std::uint64_t seed = 0;
  SplitFractions fractions;
  double cal_d1_fraction = 0.5;
  // Row indices into the source table, kept for partition checks and hashing.
  std::vector<std::size_t> train_idx, cal_d1_idx, cal_d2_idx, validation_idx, test_idx;
};

/// Shuffles rows with the given seed and allocates floor(n * fraction) rows
/// per part, remainder to train; the calibration block is then split into
/// D1/D2 by cal_d1_fraction. Throws if any of the five parts is empty.
SplitDataset make_splits(const TabularData& data, const SplitFractions& fractions,
                         double cal_d1_fraction, std::uint64_t seed);

/// FNV-1a hash of the five index lists; equal splits hash equal.
std::uint64_t split_hash(const SplitDataset& s);

// ---------------------------------------------------------------------------
// Synthetic data with a closed-form conditional loss law
// ---------------------------------------------------------------------------

enum class NoiseFamily { kGaussian, kStudentT };

/// Y = f(X) + sigma(X) * eps. Mean functions: "linear" (params b, w1..wd),
/// "sine" (a, omega, b_lin: a*sin(omega*x0) + b_lin*x0), "quadratic"
/// (a, b, c on x0). Scale functions: "constant" (c), "linear_abs"
/// (c0 + c1*|x0|), "sine" (c0 + c1*sin(omega*x0)); must stay positive on the
/// design support. Designs: "uniform" (lo, hi per coordinate), "gaussian"
/// (mu, sd per coordinate).
struct SyntheticSpec {
  std::string mean_fn = "sine";
  std::vector<double> mean_params = {1.0, 2.0, 0.5};
  std::string scale_fn = "linear_abs";
  std::vector<double> scale_params = {0.3, 0.1};
  std::string design = "uniform";
  std::vector<double> design_params = {-2.0, 2.0};
  std::size_t dim = 1;
  NoiseFamily noise = NoiseFamily::kGaussian;
  double student_df = 4.0;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
};

/// Closed-form handles for the generating process: f, sigma, the noise law,
/// and the conditional law of Z = L(g(x), Y) for any fixed prediction value.
class SyntheticOracle {
 public:
  explicit SyntheticOracle(SyntheticSpec spec);

  double mean(std::span<const double> x) const;
  double scale(std::span<const double> x) const;

  double noise_cdf(double u) const;
  double noise_quantile(double p) const;

  /// P(Z <= z | X = x) where Z = L(gx, Y). For absolute loss this is the
  /// folded noise law around the misfit gx - f(x); squared loss evaluates the
  /// same law at sqrt(z).
  double loss_cdf(double z, std::span<const double> x, double gx, LossKind loss) const;

  /// Generalized inverse of loss_cdf in z, by bracket expansion + bisection.
  double loss_quantile(double level, std::span<const double> x, double gx,
                       LossKind loss) const;

  double exceed_prob(double tau, std::span<const double> x, double gx,
                     LossKind loss) const;

  const SyntheticSpec& spec() const { return spec_; }

 private:
  SyntheticSpec spec_;
};

/// Deterministic given spec.seed. Throws if sigma(x) <= 0 is encountered.
TabularData generate_synthetic(const SyntheticSpec& spec);

std::string noise_name(NoiseFamily f);
NoiseFamily parse_noise(const std::string& name);

}  // namespace locus
