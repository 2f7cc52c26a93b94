#pragma once

#include <optional>
#include <string>

#include "locus/config.hpp"

namespace locus::cli {

// Exit codes: 0 success, 1 validation/contract error, 2 runtime failure,
// 3 EMPTY-rule outcome. Every error path prints one line to stderr with the
// machine-parsable prefix "ERROR <stage>:".

int cmd_synth(const RunConfig& config, const std::string& out_csv);

int cmd_calibrate(const RunConfig& config, const std::string& artifact_path);

int cmd_score(const std::string& artifact_path, const std::string& input_csv,
              const std::string& output_csv);

int cmd_flag(const std::string& artifact_path, std::optional<double> tau_override);

int cmd_tune(const std::string& artifact_path, const std::string& data_csv,
             const std::string& method, double eta, double rho_min,
             const std::vector<double>& lambda_grid,
             const std::vector<double>& alpha_grid, const std::string& report_path);

int cmd_certify(const std::string& artifact_path, const std::string& data_csv,
                double eta, double delta, const std::vector<double>& lambda_grid,
                const std::string& report_path);

int cmd_benchmark(const RunConfig& config, const std::string& out_json,
                  const std::string& out_table, const std::string& out_dump = "");

int cmd_inspect(const std::string& artifact_path);

/// Shared by main and the tests: parses a config file plus overrides.
RunConfig load_config_file(const std::string& path);

}  // namespace locus::cli
