#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "locus/calibration.hpp"
#include "locus/data.hpp"
#include "locus/flagging.hpp"
#include "locus/predictor.hpp"

namespace locus {

/// Everything needed to reload a calibrated pipeline and reproduce scores
/// bit-for-bit. Ensemble members are reconstructed from the stored resample
/// indices and hyperparameters, not from per-member tables.
struct Artifact {
  int schema_version = 1;
  std::string created_at;    // excluded from hashing and determinism checks
  std::string config_hash;
  std::string config_echo;   // canonical JSON of the effective config
  std::uint64_t seed = 0;

  std::vector<std::string> columns;
  std::string target_column;
  Standardizer standardizer;
  Predictor predictor;
  PredictorHyperparams predictor_hp;
  LossKind loss = LossKind::kAbsolute;
  double tau = 0.0;

  EngineKind engine_kind = EngineKind::kKnnEmpirical;
  EngineHyperparams engine_hp;  // resolved values
  Matrix d1_features;           // standardized
  std::vector<double> d1_losses;
  std::vector<std::vector<std::uint32_t>> resamples;  // ensemble only

  bool has_scarcity = false;
  std::size_t scarcity_k = 50;
  GammaMapping mapping;
  double q_lo = 0.0;
  double q_hi = 0.0;
  Matrix scarcity_reference;

  std::string mode_kind = "mean";  // mean | envelope
  bool mode_uses_scarcity = false;
  double fixed_gamma = 1.0;
  double alpha = 0.1;
  double t = 1.0;
  std::vector<double> pit;  // sorted

  bool has_rule = false;
  FlagRule rule;
  double eta = 0.0;
  double delta = 0.0;
  double rho_min = 0.0;
  double eps_h = 0.0;  // certificate deviation terms, when applicable
  double eps_g = 0.0;

  Matrix probe_x;  // standardized features, up to 16 rows
  std::vector<double> probe_u;
  std::vector<double> probe_gamma;  // only in scarcity mode
};

void save_artifact(const Artifact& artifact, const std::string& path);

/// Throws ValidationError on unknown schema_version; never migrates silently.
Artifact load_artifact(const std::string& path);

/// Engine, optional scarcity index, and the calibrated bound reconstructed
/// from artifact state. The recomputed level must match the stored t exactly.
struct ScoringPipeline {
  std::shared_ptr<LossCdfEngine> engine;
  std::shared_ptr<const ScarcityIndex> scarcity;
  std::unique_ptr<CalibratedBound> bound;
};

ScoringPipeline instantiate_pipeline(const Artifact& artifact);

/// Rescores the stored probes; returns false on any bitwise mismatch.
bool verify_probes(const Artifact& artifact);

/// FNV-1a 64 over a string, rendered as fixed-width hex.
std::string fnv1a_hex(const std::string& payload);

}  // namespace locus
