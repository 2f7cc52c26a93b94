#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "locus/tabular.hpp"

namespace locus {

/// A query location prepared once so the CDF can be evaluated cheaply at many
/// z values (inversion, grid scans). Entries of draws_at are nondecreasing in
/// z, right-continuous, with limits 0 and 1.
class CdfQueryState {
 public:
  virtual ~CdfQueryState() = default;
  virtual std::size_t draw_count() const = 0;
  /// out[s] = member s's CDF at z; out.size() == draw_count().
  virtual void draws_at(double z, std::span<double> out) const = 0;
};

/// Produces per-draw predictive CDFs for the loss given an input. Immutable
/// after fit; prepare and all evaluations are const and concurrency-safe.
class LossCdfEngine {
 public:
  virtual ~LossCdfEngine() = default;
  virtual std::size_t draw_count() const = 0;
  /// Positive loss scale used to seed inversion brackets (max training loss).
  virtual double bracket_seed() const = 0;
  virtual std::unique_ptr<CdfQueryState> prepare(std::span<const double> x) const = 0;
};

enum class EngineKind { kBootstrapGaussianEnsemble, kKnnEmpirical };

struct EngineHyperparams {
  std::size_t ensemble_size = 30;  // S
  std::size_t k_local = 0;         // 0 -> min(50, max(2, n1/4))
  std::size_t k_empirical = 0;     // 0 -> min(100, n1)
  double scale_floor = 1e-6;
  std::uint64_t seed = 0;
};

/// Uniform-weight empirical CDF over the k_e nearest D1 losses; a single
/// draw (S = 1).
class KnnEmpiricalEngine final : public LossCdfEngine {
 public:
  KnnEmpiricalEngine(Matrix features, std::vector<double> losses, std::size_t k);

  std::size_t draw_count() const override { return 1; }
  double bracket_seed() const override { return bracket_; }
  std::unique_ptr<CdfQueryState> prepare(std::span<const double> x) const override;

  std::size_t k() const { return k_; }
  const Matrix& features() const { return features_; }
  const std::vector<double>& losses() const { return losses_; }

 private:
  Matrix features_;
  std::vector<double> losses_;
  std::size_t k_;
  double bracket_;
};

/// S members, each a truncated Gaussian with kNN local moments computed on a
/// bootstrap resample of D1. Members differ only through the resamples.
class BootstrapEnsembleEngine final : public LossCdfEngine {
 public:
  /// Draws the resamples from the seed.
  BootstrapEnsembleEngine(Matrix features, std::vector<double> losses,
                          std::size_t ensemble_size, std::size_t k_local,
                          double scale_floor, std::uint64_t seed);
  /// Reconstruction from stored resample indices.
  BootstrapEnsembleEngine(Matrix features, std::vector<double> losses,
                          std::vector<std::vector<std::uint32_t>> resamples,
                          std::size_t k_local, double scale_floor);

  std::size_t draw_count() const override { return resamples_.size(); }
  double bracket_seed() const override { return bracket_; }
  std::unique_ptr<CdfQueryState> prepare(std::span<const double> x) const override;

  std::size_t k_local() const { return k_local_; }
  double scale_floor() const { return scale_floor_; }
  const Matrix& features() const { return features_; }
  const std::vector<double>& losses() const { return losses_; }
  const std::vector<std::vector<std::uint32_t>>& resamples() const { return resamples_; }

 private:
  Matrix features_;
  std::vector<double> losses_;
  std::vector<std::vector<std::uint32_t>> resamples_;
  std::size_t k_local_;
  double scale_floor_;
  double bracket_;
};

/// Validates inputs, resolves defaulted hyperparameters, and fits.
std::shared_ptr<LossCdfEngine> fit_engine(const Matrix& d1_features,
                                          std::span<const double> d1_losses,
                                          EngineKind kind,
                                          const EngineHyperparams& hp = {});

// One-shot helpers; hot paths should hold a prepared CdfQueryState instead.
std::vector<double> cdf_draws(const LossCdfEngine& engine, std::span<const double> x,
                              double z);
double mean_cdf(const LossCdfEngine& engine, std::span<const double> x, double z);
double envelope_cdf(const LossCdfEngine& engine, std::span<const double> x, double z,
                    double gamma);

double mean_of_draws(std::span<const double> draws);
/// Order statistic at rank ceil(gamma * S); gamma in (0, 1].
double envelope_of_draws(std::span<const double> draws, double gamma);

std::string engine_name(EngineKind kind);
EngineKind parse_engine(const std::string& name);

}  // namespace locus
