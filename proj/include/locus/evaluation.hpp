#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locus/calibration.hpp"
#include "locus/data.hpp"
#include "locus/flagging.hpp"
#include "locus/predictor.hpp"

namespace locus {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct RunMetrics {
  double acceptance_rate = 0.0;                      // P(U <= lambda)
  double marginal_tail_rate = 0.0;                   // P(Z > tau)
  std::optional<double> conditional_tail_rate;       // P(Z > tau | accepted)
  double marginal_coverage = 0.0;                    // P(Z <= U)
};

/// Empirical frequencies over one evaluation sample. An absent lambda is the
/// EMPTY rule; the conditional rate is absent when nothing is accepted.
RunMetrics compute_metrics(std::span<const double> losses,
                           std::span<const double> scores, double tau,
                           std::optional<double> lambda);

// ---------------------------------------------------------------------------
// Baseline scores
// ---------------------------------------------------------------------------

/// Standard isolation forest: random axis-aligned splits on subsamples,
/// anomaly score 2^(-E[path]/c(psi)); higher = more anomalous.
class IsolationForest {
 public:
  IsolationForest(const Matrix& train, std::size_t n_trees, std::size_t subsample,
                  std::uint64_t seed);

  double score(std::span<const double> x) const;
  std::vector<double> score_all(const Matrix& xs) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t size = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  double path_length(const Tree& tree, std::span<const double> x) const;

  std::vector<Tree> trees_;
  double c_psi_ = 1.0;
};

/// Local-moment estimate of V(Y | X = x): kNN means of Y and Y^2, floored at 0.
class LabelVarianceScore {
 public:
  LabelVarianceScore(Matrix features, std::vector<double> target, std::size_t k_local);

  double score(std::span<const double> x) const;
  std::vector<double> score_all(const Matrix& xs) const;

  std::size_t k_local() const { return k_; }

 private:
  Matrix features_;
  std::vector<double> target_;
  std::size_t k_;
};

/// Threshold achieving roughly the target acceptance rate on validation
/// scores (project quantile convention). target_rate must be in (0, 1).
double matched_acceptance_threshold(std::span<const double> scores, double target_rate);

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

struct BenchmarkEngineSpec {
  EngineKind kind = EngineKind::kKnnEmpirical;
  EngineHyperparams hp;
  std::string mode = "mean";  // mean | envelope | envelope_scarcity
  double fixed_gamma = 0.5;
  std::string label = "knn";
};

struct BenchmarkConfig {
  // Data source: exactly one of synthetic / table.
  std::optional<SyntheticSpec> synthetic;
  std::optional<TabularData> table;

  SplitFractions fractions;
  double cal_d1_fraction = 0.5;
  PredictorKind predictor = PredictorKind::kLinearOls;
  PredictorHyperparams predictor_hp;
  LossKind loss = LossKind::kAbsolute;
  std::vector<BenchmarkEngineSpec> engines;
  double alpha = 0.1;
  std::optional<double> tau_explicit;
  double tau_level = 0.7;
  // locus-default | locus-tuned | locus-alpha | locus-certified |
  // locus-matched | iflag | label-variance
  std::vector<std::string> methods = {"locus-default", "locus-matched", "iflag",
                                      "label-variance"};
  double eta = 0.1;
  double delta = 0.1;
  double rho_min = 0.05;
  double target_acceptance = 0.7;
  std::size_t scarcity_k = 50;
  GammaMapping mapping;
  std::size_t iforest_trees = 100;
  std::size_t iforest_subsample = 256;
  std::size_t label_variance_k = 200;
  // Dump the first seed's per-x test scores (features, loss, one column per
  // score) for external plotting.
  bool dump_scores = false;
};

struct CellSummary {
  double median = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  std::size_t defined = 0;  // seeds contributing (conditional rates can be absent)
};

struct BenchmarkSummary {
  std::vector<std::uint64_t> seeds;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  std::vector<std::string> method_labels;
  std::vector<std::string> metric_names;
  // raw[label][metric][seed position]; NaN marks an undefined value.
  std::map<std::string, std::map<std::string, std::vector<double>>> raw;
  std::map<std::string, std::map<std::string, CellSummary>> cells;
  std::vector<std::uint64_t> split_hashes;
  // Per-x score dump of the first seed (empty unless requested).
  std::vector<std::string> dump_header;
  std::vector<std::vector<double>> dump_columns;

  /// Plain-text table in the "median (p5; p95)" cell format, percentages with
  /// one decimal.
  std::string to_table() const;
};

/// One full pipeline per seed: split, fit g, tau, engines, calibration, every
/// configured method, metrics on the shared test split. Seeds run in parallel
/// with a deterministic reduction; per-seed failures are recorded and
/// excluded with a warning count.
BenchmarkSummary run_benchmark(const BenchmarkConfig& config,
                               std::span<const std::uint64_t> seeds);

}  // namespace locus
