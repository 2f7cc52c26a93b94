#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "locus/data.hpp"
#include "locus/evaluation.hpp"

namespace locus {

/// Effective run configuration: JSON file plus flag overrides (flags win).
/// Defaults are documented in the README; every field is validated before any
/// computation starts.
struct RunConfig {
  // data source: exactly one of csv_path / synthetic (a bundled synthetic
  // spec is the default)
  std::optional<std::string> csv_path;
  std::string target_column = "y";
  std::optional<SyntheticSpec> synthetic = SyntheticSpec{};

  SplitFractions fractions;
  double cal_d1_fraction = 0.5;
  std::uint64_t seed = 1;

  PredictorKind predictor_kind = PredictorKind::kLinearOls;
  PredictorHyperparams predictor_hp;
  LossKind loss = LossKind::kAbsolute;

  EngineKind engine_kind = EngineKind::kKnnEmpirical;
  EngineHyperparams engine_hp;

  std::string mode_kind = "mean";  // mean | envelope | envelope_scarcity
  double fixed_gamma = 0.5;
  std::size_t scarcity_k = 50;
  GammaMapping mapping;

  double alpha = 0.1;
  std::optional<double> tau_explicit;
  double tau_level = 0.7;

  std::string method = "default-tau";  // default-tau | tuned-lambda | tuned-alpha | certified
  double eta = 0.1;
  double delta = 0.1;
  double rho_min = 0.05;
  std::vector<double> lambda_grid;  // empty -> 50 points spanning validation scores
  std::vector<double> alpha_grid;   // empty -> {0.02, ..., 0.30}
  double target_acceptance = 0.7;

  // benchmark section
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> benchmark_methods = {"locus-default", "locus-matched",
                                                "iflag", "label-variance"};
  std::vector<BenchmarkEngineSpec> benchmark_engines;  // empty -> main engine/mode
};

/// Parses and validates; throws ValidationError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& j);

/// Canonical JSON echo of the semantic fields (no timestamps); hashing this
/// string yields the artifact's config hash.
nlohmann::json config_to_json(const RunConfig& config);

nlohmann::json synthetic_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_from_json(const nlohmann::json& j);

/// Builds the benchmark configuration (loads the CSV source if needed).
BenchmarkConfig to_benchmark_config(const RunConfig& config);

}  // namespace locus
