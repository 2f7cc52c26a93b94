#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "locus/cli.hpp"
#include "locus/errors.hpp"
#include "locus/rng.hpp"

namespace {

// Config file plus flag overrides; flags win.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::string> engine;
  std::optional<std::string> mode;
  std::optional<double> gamma;
  std::optional<std::string> predictor;
  std::optional<std::string> loss;
  std::optional<double> tau;
  std::optional<double> tau_level;
  std::optional<std::string> method;
  std::optional<double> eta;
  std::optional<double> delta;
  std::optional<double> rho_min;
  std::optional<std::size_t> n;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the run seed");
  cmd->add_option("--alpha", o.alpha, "Override the calibration level alpha");
  cmd->add_option("--engine", o.engine, "Engine kind (knn_empirical | bootstrap_gaussian_ensemble)");
  cmd->add_option("--mode", o.mode, "Aggregation mode (mean | envelope | envelope_scarcity)");
  cmd->add_option("--gamma", o.gamma, "Fixed envelope gamma");
  cmd->add_option("--predictor", o.predictor, "Predictor kind (linear_ols | knn_regressor)");
  cmd->add_option("--loss", o.loss, "Loss kind (absolute | squared)");
  cmd->add_option("--tau", o.tau, "Explicit loss tolerance tau");
  cmd->add_option("--tau-level", o.tau_level, "Validation quantile level defining tau");
  cmd->add_option("--method", o.method, "Flagging method");
  cmd->add_option("--eta", o.eta, "Target conditional exceedance");
  cmd->add_option("--delta", o.delta, "Certificate failure probability");
  cmd->add_option("--rho-min", o.rho_min, "Minimum acceptance fraction");
  cmd->add_option("--n", o.n, "Synthetic sample size");
}

locus::RunConfig effective_config(const std::string& config_path, const Overrides& o) {
  locus::RunConfig c = config_path.empty() ? locus::RunConfig{}
                                           : locus::cli::load_config_file(config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.engine) c.engine_kind = locus::parse_engine(*o.engine);
  if (o.mode) c.mode_kind = *o.mode;
  if (o.gamma) c.fixed_gamma = *o.gamma;
  if (o.predictor) c.predictor_kind = locus::parse_predictor(*o.predictor);
  if (o.loss) c.loss = locus::parse_loss(*o.loss);
  if (o.tau) c.tau_explicit = *o.tau;
  if (o.tau_level) c.tau_level = *o.tau_level;
  if (o.method) c.method = *o.method;
  if (o.eta) c.eta = *o.eta;
  if (o.delta) c.delta = *o.delta;
  if (o.rho_min) c.rho_min = *o.rho_min;
  if (o.n && c.synthetic) c.synthetic->n = *o.n;
  // --seed reseeds the whole pipeline, including the synthetic draw.
  if (o.seed && c.synthetic) c.synthetic->seed = locus::derive_seed(*o.seed, "data");
  // Re-validate the merged configuration.
  return locus::parse_run_config(locus::config_to_json(c));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"locus: calibrated per-input loss-quantile scores and flagging rules"};
  app.require_subcommand(1);

  std::string config_path, artifact_path, input_path, output_path, report_path,
      table_path;
  std::vector<double> lambda_grid, alpha_grid;
  std::optional<double> tau_override;
  std::string tune_method = "tuned-lambda";
  double eta = 0.1, delta = 0.1, rho_min = 0.05;
  Overrides overrides;

  auto* synth = app.add_subcommand("synth", "Emit a synthetic dataset to CSV");
  synth->add_option("--config", config_path, "Run config JSON");
  synth->add_option("--out", output_path, "Output CSV path")->required();
  add_override_flags(synth, overrides);

  auto* calibrate = app.add_subcommand("calibrate", "Fit and calibrate a scoring artifact");
  calibrate->add_option("--config", config_path, "Run config JSON");
  calibrate->add_option("--out", artifact_path, "Artifact JSON path")->required();
  add_override_flags(calibrate, overrides);

  auto* score = app.add_subcommand("score", "Score a feature CSV with an artifact");
  score->add_option("--artifact", artifact_path, "Artifact JSON path")->required();
  score->add_option("--input", input_path, "Input feature CSV")->required();
  score->add_option("--output", output_path, "Output score CSV")->required();

  auto* flag = app.add_subcommand("flag", "Embed the default lambda = tau rule");
  flag->add_option("--artifact", artifact_path, "Artifact JSON path")->required();
  flag->add_option("--tau", tau_override, "Override the stored tau");

  auto* tune = app.add_subcommand("tune", "Tune lambda or alpha on labeled validation data");
  tune->add_option("--artifact", artifact_path, "Artifact JSON path")->required();
  tune->add_option("--data", input_path, "Labeled validation CSV")->required();
  tune->add_option("--method", tune_method, "tuned-lambda | tuned-alpha");
  tune->add_option("--eta", eta, "Target conditional exceedance");
  tune->add_option("--rho-min", rho_min, "Minimum acceptance fraction");
  tune->add_option("--lambda-grid", lambda_grid, "Explicit lambda candidates");
  tune->add_option("--alpha-grid", alpha_grid, "Explicit alpha candidates");
  tune->add_option("--report", report_path, "Tune report JSON path");

  auto* certify = app.add_subcommand("certify", "Distribution-free certified lambda");
  certify->add_option("--artifact", artifact_path, "Artifact JSON path")->required();
  certify->add_option("--data", input_path, "Labeled validation CSV")->required();
  certify->add_option("--eta", eta, "Target conditional exceedance");
  certify->add_option("--delta", delta, "Certificate failure probability");
  certify->add_option("--lambda-grid", lambda_grid, "Explicit lambda candidates");
  certify->add_option("--report", report_path, "Report JSON path");

  std::string dump_path;
  auto* benchmark = app.add_subcommand("benchmark", "Repeated-seed benchmark harness");
  benchmark->add_option("--config", config_path, "Run config JSON");
  benchmark->add_option("--out", output_path, "Results JSON path")->required();
  benchmark->add_option("--table", table_path, "Plain-text table path");
  benchmark->add_option("--dump", dump_path, "Per-x score dump CSV (first seed)");
  add_override_flags(benchmark, overrides);

  auto* inspect = app.add_subcommand("inspect", "Pretty-print and verify an artifact");
  inspect->add_option("--artifact", artifact_path, "Artifact JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return locus::cli::cmd_synth(effective_config(config_path, overrides), output_path);
    }
    if (calibrate->parsed()) {
      return locus::cli::cmd_calibrate(effective_config(config_path, overrides),
                                       artifact_path);
    }
    if (score->parsed()) {
      return locus::cli::cmd_score(artifact_path, input_path, output_path);
    }
    if (flag->parsed()) {
      return locus::cli::cmd_flag(artifact_path, tau_override);
    }
    if (tune->parsed()) {
      return locus::cli::cmd_tune(artifact_path, input_path, tune_method, eta, rho_min,
                                  lambda_grid, alpha_grid, report_path);
    }
    if (certify->parsed()) {
      return locus::cli::cmd_certify(artifact_path, input_path, eta, delta, lambda_grid,
                                     report_path);
    }
    if (benchmark->parsed()) {
      return locus::cli::cmd_benchmark(effective_config(config_path, overrides),
                                       output_path, table_path, dump_path);
    }
    if (inspect->parsed()) {
      return locus::cli::cmd_inspect(artifact_path);
    }
  } catch (const locus::ValidationError& e) {
    std::cerr << "ERROR config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR config: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
