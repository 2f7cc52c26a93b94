#include "locus/engine.hpp"

#include <algorithm>
#include <cmath>

#include "locus/errors.hpp"
#include "locus/quantiles.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

double max_or_zero(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

void validate_losses(std::span<const double> z) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] >= 0.0) || !std::isfinite(z[i])) {
      throw ValidationError("engine: losses must be finite and nonnegative (index " +
                            std::to_string(i) + ")");
    }
  }
}

class KnnQueryState final : public CdfQueryState {
 public:
  explicit KnnQueryState(std::vector<double> sorted_losses)
      : sorted_(std::move(sorted_losses)) {}

  std::size_t draw_count() const override { return 1; }

  void draws_at(double z, std::span<double> out) const override {
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), z);
    out[0] = static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
};

class EnsembleQueryState final : public CdfQueryState {
 public:
  EnsembleQueryState(std::vector<double> means, std::vector<double> sds)
      : means_(std::move(means)), sds_(std::move(sds)) {}

  std::size_t draw_count() const override { return means_.size(); }

  void draws_at(double z, std::span<double> out) const override {
    for (std::size_t s = 0; s < means_.size(); ++s) {
      if (z < 0.0) {
        out[s] = 0.0;
        continue;
      }
      // Gaussian(m, sd) truncated to [0, inf) and renormalized.
      double m = means_[s], sd = sds_[s];
      double below = normal_cdf(-m / sd);
      out[s] = (normal_cdf((z - m) / sd) - below) / (1.0 - below);
    }
  }

 private:
  std::vector<double> means_;
  std::vector<double> sds_;
};

}  // namespace

// ---------------------------------------------------------------------------
// KnnEmpiricalEngine
// ---------------------------------------------------------------------------

KnnEmpiricalEngine::KnnEmpiricalEngine(Matrix features, std::vector<double> losses,
                                       std::size_t k)
    : features_(std::move(features)), losses_(std::move(losses)), k_(k) {
  if (features_.rows != losses_.size()) {
    throw ValidationError("knn_empirical: feature/loss length mismatch");
  }
  if (features_.rows < 2) throw ValidationError("knn_empirical: need at least 2 points");
  if (k_ == 0 || k_ > features_.rows) {
    throw ValidationError("knn_empirical: k must be in [1, |D1|]");
  }
  validate_losses(losses_);
  bracket_ = std::max(max_or_zero(losses_), 1e-6);
}

std::unique_ptr<CdfQueryState> KnnEmpiricalEngine::prepare(
    std::span<const double> x) const {
  const std::size_t n = features_.rows;
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = {euclidean_distance(x, features_.row(i)), i};
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(k_);
  std::nth_element(d.begin(), mid - 1, d.end());
  std::vector<double> z(k_);
  for (std::size_t i = 0; i < k_; ++i) z[i] = losses_[d[i].second];
  std::sort(z.begin(), z.end());
  return std::make_unique<KnnQueryState>(std::move(z));
}

// ---------------------------------------------------------------------------
// BootstrapEnsembleEngine
// ---------------------------------------------------------------------------

BootstrapEnsembleEngine::BootstrapEnsembleEngine(Matrix features,
                                                 std::vector<double> losses,
                                                 std::size_t ensemble_size,
                                                 std::size_t k_local,
                                                 double scale_floor,
                                                 std::uint64_t seed)
    : features_(std::move(features)), losses_(std::move(losses)),
      k_local_(k_local), scale_floor_(scale_floor) {
  if (ensemble_size == 0) throw ValidationError("ensemble: S must be >= 1");
  const std::size_t n = features_.rows;
  Rng rng(derive_seed(seed, "bootstrap"));
  resamples_.resize(ensemble_size);
  for (auto& r : resamples_) {
    r.resize(n);
    for (auto& v : r) v = static_cast<std::uint32_t>(rng.index(n));
  }
  if (features_.rows != losses_.size()) {
    throw ValidationError("ensemble: feature/loss length mismatch");
  }
  if (n < 2 || k_local_ < 1 || k_local_ > n) {
    throw ValidationError("ensemble: need |D1| >= max(k_local, 2)");
  }
  validate_losses(losses_);
  bracket_ = std::max(max_or_zero(losses_), 1e-6);
}

BootstrapEnsembleEngine::BootstrapEnsembleEngine(
    Matrix features, std::vector<double> losses,
    std::vector<std::vector<std::uint32_t>> resamples, std::size_t k_local,
    double scale_floor)
    : features_(std::move(features)), losses_(std::move(losses)),
      resamples_(std::move(resamples)), k_local_(k_local), scale_floor_(scale_floor) {
  if (resamples_.empty()) throw ValidationError("ensemble: S must be >= 1");
  const std::size_t n = features_.rows;
  if (n != losses_.size()) throw ValidationError("ensemble: feature/loss length mismatch");
  if (n < 2 || k_local_ < 1 || k_local_ > n) {
    throw ValidationError("ensemble: need |D1| >= max(k_local, 2)");
  }
  for (const auto& r : resamples_) {
    for (std::uint32_t v : r) {
      if (v >= n) throw ValidationError("ensemble: resample index out of range");
    }
  }
  validate_losses(losses_);
  bracket_ = std::max(max_or_zero(losses_), 1e-6);
}

std::unique_ptr<CdfQueryState> BootstrapEnsembleEngine::prepare(
    std::span<const double> x) const {
  const std::size_t n = features_.rows;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = euclidean_distance(x, features_.row(i));
  }
  std::vector<double> means(resamples_.size()), sds(resamples_.size());
  std::vector<std::pair<double, std::size_t>> local;
  for (std::size_t s = 0; s < resamples_.size(); ++s) {
    const auto& r = resamples_[s];
    local.resize(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) local[j] = {dist[r[j]], j};
    auto mid = local.begin() + static_cast<std::ptrdiff_t>(k_local_);
    std::nth_element(local.begin(), mid - 1, local.end());
    double m = 0.0;
    for (std::size_t j = 0; j < k_local_; ++j) m += losses_[r[local[j].second]];
    m /= static_cast<double>(k_local_);
    double v = 0.0;
    for (std::size_t j = 0; j < k_local_; ++j) {
      double dz = losses_[r[local[j].second]] - m;
      v += dz * dz;
    }
    means[s] = m;
    sds[s] = std::max(std::sqrt(v / static_cast<double>(k_local_)), scale_floor_);
  }
  return std::make_unique<EnsembleQueryState>(std::move(means), std::move(sds));
}

// ---------------------------------------------------------------------------
// Factory and one-shot helpers
// ---------------------------------------------------------------------------

std::shared_ptr<LossCdfEngine> fit_engine(const Matrix& d1_features,
                                          std::span<const double> d1_losses,
                                          EngineKind kind,
                                          const EngineHyperparams& hp) {
  const std::size_t n = d1_features.rows;
  std::vector<double> z(d1_losses.begin(), d1_losses.end());
  if (kind == EngineKind::kKnnEmpirical) {
    std::size_t k = hp.k_empirical ? hp.k_empirical : std::min<std::size_t>(100, n);
    return std::make_shared<KnnEmpiricalEngine>(d1_features, std::move(z), k);
  }
  std::size_t k_local = hp.k_local
                            ? hp.k_local
                            : std::min<std::size_t>(50, std::max<std::size_t>(2, n / 4));
  return std::make_shared<BootstrapEnsembleEngine>(d1_features, std::move(z),
                                                   hp.ensemble_size, k_local,
                                                   hp.scale_floor, hp.seed);
}

std::vector<double> cdf_draws(const LossCdfEngine& engine, std::span<const double> x,
                              double z) {
  std::vector<double> out(engine.draw_count());
  engine.prepare(x)->draws_at(z, out);
  return out;
}

double mean_cdf(const LossCdfEngine& engine, std::span<const double> x, double z) {
  return mean_of_draws(cdf_draws(engine, x, z));
}

double envelope_cdf(const LossCdfEngine& engine, std::span<const double> x, double z,
                    double gamma) {
  return envelope_of_draws(cdf_draws(engine, x, z), gamma);
}

double mean_of_draws(std::span<const double> draws) {
  double s = 0.0;
  for (double v : draws) s += v;
  return s / static_cast<double>(draws.size());
}

double envelope_of_draws(std::span<const double> draws, double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw ValidationError("envelope: gamma must be in (0, 1]");
  }
  return empirical_quantile(draws, gamma);
}

std::string engine_name(EngineKind kind) {
  return kind == EngineKind::kKnnEmpirical ? "knn_empirical"
                                           : "bootstrap_gaussian_ensemble";
}

EngineKind parse_engine(const std::string& name) {
  if (name == "knn_empirical") return EngineKind::kKnnEmpirical;
  if (name == "bootstrap_gaussian_ensemble") {
    return EngineKind::kBootstrapGaussianEnsemble;
  }
  throw ValidationError("unknown engine kind: " + name);
}

}  // namespace locus
