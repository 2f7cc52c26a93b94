#include "locus/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "locus/artifact.hpp"
#include "locus/errors.hpp"
#include "locus/rng.hpp"

namespace locus::cli {

using nlohmann::json;

namespace {

struct StagedError {
  std::string stage;
  std::string message;
  int code;
};

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (StagedError&) {
    throw;
  } catch (const ValidationError& e) {
    throw StagedError{name, e.what(), 1};
  } catch (const std::exception& e) {
    throw StagedError{name, e.what(), 2};
  }
}

int report_error(const StagedError& e) {
  std::cerr << "ERROR " << e.stage << ": " << e.message << '\n';
  return e.code;
}

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json finite_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

AggregationMode mode_from_config(const RunConfig& config, const Matrix& d1_features,
                                 std::shared_ptr<const ScarcityIndex>* scarcity_out) {
  if (config.mode_kind == "mean") return AggregationMode::mean();
  if (config.mode_kind == "envelope") {
    return AggregationMode::envelope_fixed(config.fixed_gamma);
  }
  auto index = std::make_shared<ScarcityIndex>(
      d1_features, std::min(config.scarcity_k, d1_features.rows), config.mapping);
  if (scarcity_out) *scarcity_out = index;
  return AggregationMode::envelope_scarcity(index);
}

/// Standardized labeled data whose columns have been checked against the
/// artifact signature, with realized losses and scores.
struct LabeledScores {
  std::vector<double> losses;
  std::vector<double> scores;
  std::vector<bool> exceed;
};

void check_columns(const std::vector<std::string>& expected,
                   const std::vector<std::string>& got) {
  for (const auto& name : got) {
    if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
      throw ValidationError("unexpected column \"" + name + "\"");
    }
  }
  for (const auto& name : expected) {
    if (std::find(got.begin(), got.end(), name) == got.end()) {
      throw ValidationError("missing column \"" + name + "\"");
    }
  }
  if (expected != got) {
    throw ValidationError("feature columns must appear in the artifact's order");
  }
}

LabeledScores score_labeled_csv(const Artifact& artifact, const ScoringPipeline& pipe,
                                const std::string& csv_path) {
  TabularData raw = load_csv(csv_path, artifact.target_column);
  check_columns(artifact.columns, raw.column_names);
  TabularData data = apply_standardizer(artifact.standardizer, raw);
  LabeledScores out;
  out.losses = realized_losses(artifact.predictor, artifact.loss, data);
  out.scores = pipe.bound->score_all(data.features);
  out.exceed.resize(out.losses.size());
  for (std::size_t i = 0; i < out.losses.size(); ++i) {
    out.exceed[i] = out.losses[i] > artifact.tau;
  }
  return out;
}

void embed_rule_and_save(Artifact& artifact, const FlagRule& rule,
                         const TuneReport& report, const std::string& artifact_path,
                         const std::string& report_path) {
  artifact.has_rule = true;
  artifact.rule = rule;
  artifact.eta = report.eta;
  artifact.delta = report.delta;
  artifact.rho_min = report.rho_min;
  artifact.eps_h = report.eps_h;
  artifact.eps_g = report.eps_g;
  save_artifact(artifact, artifact_path);

  if (!report_path.empty()) {
    json rows = json::array();
    for (const auto& row : report.rows) {
      rows.push_back(json{{"candidate", row.candidate},
                          {"n_accepted", row.n_accepted},
                          {"acceptance", row.acceptance},
                          {"q", finite_or_null(std::isinf(row.q_value)
                                                   ? std::numeric_limits<double>::quiet_NaN()
                                                   : row.q_value)},
                          {"feasible", row.feasible}});
    }
    json j{{"kind", report.kind},
           {"eta", report.eta},
           {"rho_min", report.rho_min},
           {"delta", report.delta},
           {"eps_h", report.eps_h},
           {"eps_g", report.eps_g},
           {"rows", std::move(rows)}};
    j["chosen"] = report.chosen ? json(*report.chosen) : json(nullptr);
    std::ofstream out(report_path);
    if (!out) throw ValidationError("cannot write report file: " + report_path);
    out << j.dump(2) << '\n';
  }
  std::cout << report.to_table();
}

}  // namespace

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config JSON: ") + e.what());
  }
  return parse_run_config(j);
}

int cmd_synth(const RunConfig& config, const std::string& out_csv) {
  try {
    SyntheticSpec spec = stage("config", [&] {
      if (!config.synthetic) {
        throw ValidationError("synth requires a synthetic data source");
      }
      return *config.synthetic;
    });
    TabularData data = stage("load", [&] { return generate_synthetic(spec); });
    stage("io", [&] { write_csv(out_csv, data, "y"); return 0; });
    std::cout << "wrote " << data.size() << " rows to " << out_csv << '\n';
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_calibrate(const RunConfig& config, const std::string& artifact_path) {
  try {
    TabularData data = stage("load", [&] {
      return config.csv_path ? load_csv(*config.csv_path, config.target_column)
                             : generate_synthetic(*config.synthetic);
    });

    SplitDataset split = stage("split", [&] {
      return make_splits(data, config.fractions, config.cal_d1_fraction, config.seed);
    });

    Artifact artifact;
    artifact.created_at = timestamp_utc();
    artifact.seed = config.seed;
    artifact.columns = data.column_names;
    artifact.target_column = config.csv_path ? config.target_column : "y";
    json echo = config_to_json(config);
    artifact.config_echo = echo.dump();
    artifact.config_hash = fnv1a_hex(artifact.config_echo);

    TabularData d1, d2, validation, test;
    stage("standardize", [&] {
      artifact.standardizer = fit_standardizer(split.train);
      d1 = apply_standardizer(artifact.standardizer, split.cal_d1);
      d2 = apply_standardizer(artifact.standardizer, split.cal_d2);
      validation = apply_standardizer(artifact.standardizer, split.validation);
      test = apply_standardizer(artifact.standardizer, split.test);
      return 0;
    });

    std::vector<double> d1_z, d2_z, val_z;
    stage("predictor", [&] {
      TabularData train = apply_standardizer(artifact.standardizer, split.train);
      artifact.predictor = fit_predictor(train, config.predictor_kind, config.predictor_hp);
      artifact.predictor_hp = config.predictor_hp;
      artifact.loss = config.loss;
      d1_z = realized_losses(artifact.predictor, config.loss, d1);
      d2_z = realized_losses(artifact.predictor, config.loss, d2);
      val_z = realized_losses(artifact.predictor, config.loss, validation);
      artifact.tau = config.tau_explicit ? *config.tau_explicit
                                         : tau_from_quantile(val_z, config.tau_level);
      return 0;
    });

    std::shared_ptr<LossCdfEngine> engine = stage("engine", [&] {
      EngineHyperparams hp = config.engine_hp;
      hp.seed = derive_seed(config.seed, "engine");
      auto fitted = fit_engine(d1.features, d1_z, config.engine_kind, hp);
      artifact.engine_kind = config.engine_kind;
      artifact.engine_hp = hp;
      artifact.d1_features = d1.features;
      artifact.d1_losses = d1_z;
      if (auto* knn = dynamic_cast<const KnnEmpiricalEngine*>(fitted.get())) {
        artifact.engine_hp.k_empirical = knn->k();
      } else if (auto* ens = dynamic_cast<const BootstrapEnsembleEngine*>(fitted.get())) {
        artifact.engine_hp.k_local = ens->k_local();
        artifact.resamples = ens->resamples();
      }
      return fitted;
    });

    std::shared_ptr<const ScarcityIndex> scarcity;
    AggregationMode mode = stage("scarcity", [&] {
      AggregationMode m = mode_from_config(config, d1.features, &scarcity);
      if (scarcity) {
        artifact.has_scarcity = true;
        artifact.scarcity_k = scarcity->k();
        artifact.mapping = scarcity->mapping();
        artifact.q_lo = scarcity->q_lo();
        artifact.q_hi = scarcity->q_hi();
        artifact.scarcity_reference = scarcity->reference();
      }
      artifact.mode_kind = config.mode_kind == "mean" ? "mean" : "envelope";
      artifact.mode_uses_scarcity = config.mode_kind == "envelope_scarcity";
      artifact.fixed_gamma = config.fixed_gamma;
      return m;
    });

    stage("calibration", [&] {
      std::vector<double> pit = pit_values(*engine, mode, d2.features, d2_z);
      CalibratedBound bound(engine, mode, pit, config.alpha);
      artifact.alpha = config.alpha;
      artifact.t = bound.t();
      artifact.pit = bound.sorted_pit();

      std::size_t n_probe = std::min<std::size_t>(16, test.features.rows);
      std::vector<std::size_t> idx(n_probe);
      for (std::size_t i = 0; i < n_probe; ++i) idx[i] = i;
      artifact.probe_x = test.features.take_rows(idx);
      artifact.probe_u.resize(n_probe);
      for (std::size_t i = 0; i < n_probe; ++i) {
        artifact.probe_u[i] = bound.score(artifact.probe_x.row(i));
      }
      if (scarcity) {
        artifact.probe_gamma.resize(n_probe);
        for (std::size_t i = 0; i < n_probe; ++i) {
          artifact.probe_gamma[i] = scarcity->gamma_of(artifact.probe_x.row(i));
        }
      }
      return 0;
    });

    stage("io", [&] { save_artifact(artifact, artifact_path); return 0; });
    std::printf("calibrated: n1=%zu n2=%zu t=%.6f tau=%.6f alpha=%.3f -> %s\n",
                d1.size(), d2.size(), artifact.t, artifact.tau, artifact.alpha,
                artifact_path.c_str());
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_score(const std::string& artifact_path, const std::string& input_csv,
              const std::string& output_csv) {
  try {
    Artifact artifact = stage("load", [&] { return load_artifact(artifact_path); });
    ScoringPipeline pipe = stage("load", [&] { return instantiate_pipeline(artifact); });

    auto [features, names] = stage("io", [&] { return load_feature_csv(input_csv); });
    stage("score", [&] {
      // A trailing target column in the input is tolerated and dropped.
      std::vector<std::string> feature_names = names;
      Matrix feats = features;
      auto it = std::find(feature_names.begin(), feature_names.end(),
                          artifact.target_column);
      if (it != feature_names.end()) {
        std::size_t drop = static_cast<std::size_t>(it - feature_names.begin());
        feature_names.erase(it);
        Matrix trimmed(feats.rows, feats.cols - 1);
        for (std::size_t i = 0; i < feats.rows; ++i) {
          std::size_t c = 0;
          for (std::size_t j = 0; j < feats.cols; ++j) {
            if (j != drop) trimmed.at(i, c++) = feats.at(i, j);
          }
        }
        feats = std::move(trimmed);
      }
      check_columns(artifact.columns, feature_names);

      Matrix std_feats = standardize_features(artifact.standardizer, feats);
      std::ofstream out(output_csv);
      if (!out) throw ValidationError("cannot write output file: " + output_csv);
      out << "row,u_alpha";
      const bool with_gamma = artifact.mode_uses_scarcity && pipe.scarcity != nullptr;
      if (with_gamma) out << ",gamma";
      if (artifact.has_rule) out << ",accept";
      out << '\n';
      char buf[40];
      for (std::size_t i = 0; i < std_feats.rows; ++i) {
        auto x = std_feats.row(i);
        double u = pipe.bound->score(x);
        out << i;
        std::snprintf(buf, sizeof buf, ",%.17g", u);
        out << buf;
        if (with_gamma) {
          std::snprintf(buf, sizeof buf, ",%.17g", pipe.scarcity->gamma_of(x));
          out << buf;
        }
        if (artifact.has_rule) out << (artifact.rule.accepts(u) ? ",1" : ",0");
        out << '\n';
      }
      return 0;
    });
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_flag(const std::string& artifact_path, std::optional<double> tau_override) {
  try {
    Artifact artifact = stage("load", [&] { return load_artifact(artifact_path); });
    ScoringPipeline pipe = stage("load", [&] { return instantiate_pipeline(artifact); });
    stage("flagging", [&] {
      double tau = tau_override.value_or(artifact.tau);
      FlagRule rule = default_rule(*pipe.bound, tau);
      artifact.has_rule = true;
      artifact.rule = rule;
      save_artifact(artifact, artifact_path);
      std::printf("flag rule: lambda=%.6f (default_tau, alpha=%.3f)\n", *rule.lambda,
                  rule.alpha);
      return 0;
    });
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_tune(const std::string& artifact_path, const std::string& data_csv,
             const std::string& method, double eta, double rho_min,
             const std::vector<double>& lambda_grid,
             const std::vector<double>& alpha_grid, const std::string& report_path) {
  try {
    Artifact artifact = stage("load", [&] { return load_artifact(artifact_path); });
    ScoringPipeline pipe = stage("load", [&] { return instantiate_pipeline(artifact); });

    FlagRule rule;
    TuneReport report;
    stage("flagging", [&] {
      LabeledScores labeled = score_labeled_csv(artifact, pipe, data_csv);
      if (method == "tuned-lambda") {
        std::vector<double> grid =
            lambda_grid.empty() ? default_lambda_grid(labeled.scores) : lambda_grid;
        std::tie(rule, report) = tune_lambda(labeled.scores, labeled.exceed, grid, eta,
                                             rho_min, artifact.alpha);
      } else if (method == "tuned-alpha") {
        std::vector<double> grid = alpha_grid.empty() ? default_alpha_grid() : alpha_grid;
        TabularData raw = load_csv(data_csv, artifact.target_column);
        TabularData data = apply_standardizer(artifact.standardizer, raw);
        CalibrationContext ctx{pipe.bound->engine(), pipe.bound->mode(),
                               pipe.bound->sorted_pit()};
        std::tie(rule, report) = tune_alpha(ctx, artifact.tau, grid, eta, rho_min,
                                            data.features, labeled.losses);
      } else {
        throw ValidationError("tune method must be tuned-lambda or tuned-alpha");
      }
      return 0;
    });
    stage("io", [&] {
      embed_rule_and_save(artifact, rule, report, artifact_path, report_path);
      return 0;
    });
    if (rule.empty()) {
      std::cout << "EMPTY rule: no candidate met the constraints\n";
      return 3;
    }
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_certify(const std::string& artifact_path, const std::string& data_csv,
                double eta, double delta, const std::vector<double>& lambda_grid,
                const std::string& report_path) {
  try {
    Artifact artifact = stage("load", [&] { return load_artifact(artifact_path); });
    ScoringPipeline pipe = stage("load", [&] { return instantiate_pipeline(artifact); });

    FlagRule rule;
    TuneReport report;
    stage("flagging", [&] {
      LabeledScores labeled = score_labeled_csv(artifact, pipe, data_csv);
      std::vector<double> grid =
          lambda_grid.empty() ? default_lambda_grid(labeled.scores) : lambda_grid;
      std::tie(rule, report) = certify_lambda(labeled.scores, labeled.exceed, grid, eta,
                                              delta, artifact.alpha);
      return 0;
    });
    stage("io", [&] {
      embed_rule_and_save(artifact, rule, report, artifact_path, report_path);
      return 0;
    });
    if (rule.empty()) {
      std::cout << "EMPTY rule: certificate infeasible on this grid\n";
      return 3;
    }
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_benchmark(const RunConfig& config, const std::string& out_json,
                  const std::string& out_table, const std::string& out_dump) {
  try {
    BenchmarkConfig bench = stage("config", [&] { return to_benchmark_config(config); });
    bench.dump_scores = !out_dump.empty();
    std::vector<std::uint64_t> seeds = config.seeds;
    if (seeds.empty()) {
      for (std::uint64_t s = 1; s <= 30; ++s) seeds.push_back(s);
    }
    BenchmarkSummary summary =
        stage("benchmark", [&] { return run_benchmark(bench, seeds); });

    stage("io", [&] {
      json raw;
      for (const auto& [label, metrics] : summary.raw) {
        for (const auto& [metric, values] : metrics) {
          json arr = json::array();
          for (double v : values) arr.push_back(finite_or_null(v));
          raw[label][metric] = std::move(arr);
        }
      }
      json cells;
      for (const auto& [label, metrics] : summary.cells) {
        for (const auto& [metric, cell] : metrics) {
          cells[label][metric] = json{{"median", finite_or_null(cell.median)},
                                      {"p5", finite_or_null(cell.p5)},
                                      {"p95", finite_or_null(cell.p95)},
                                      {"defined", cell.defined}};
        }
      }
      json j{{"config", config_to_json(config)},
             {"seeds", summary.seeds},
             {"split_hashes", summary.split_hashes},
             {"failures", summary.failures},
             {"failure_messages", summary.failure_messages},
             {"methods", summary.method_labels},
             {"metrics", summary.metric_names},
             {"raw", std::move(raw)},
             {"cells", std::move(cells)}};
      std::ofstream out(out_json);
      if (!out) throw ValidationError("cannot write results file: " + out_json);
      out << j.dump(2) << '\n';

      if (!out_table.empty()) {
        std::ofstream table(out_table);
        if (!table) throw ValidationError("cannot write table file: " + out_table);
        table << summary.to_table();
      }

      if (!out_dump.empty() && !summary.dump_header.empty()) {
        std::ofstream dump(out_dump);
        if (!dump) throw ValidationError("cannot write dump file: " + out_dump);
        for (std::size_t c = 0; c < summary.dump_header.size(); ++c) {
          dump << (c ? "," : "") << summary.dump_header[c];
        }
        dump << '\n';
        char buf[40];
        std::size_t n_rows = summary.dump_columns.front().size();
        for (std::size_t i = 0; i < n_rows; ++i) {
          for (std::size_t c = 0; c < summary.dump_columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%s%.17g", c ? "," : "",
                          summary.dump_columns[c][i]);
            dump << buf;
          }
          dump << '\n';
        }
      }
      return 0;
    });
    std::cout << summary.to_table();
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

int cmd_inspect(const std::string& artifact_path) {
  try {
    Artifact artifact = stage("load", [&] { return load_artifact(artifact_path); });
    std::printf("schema_version: %d\n", artifact.schema_version);
    std::printf("created_at: %s\n", artifact.created_at.c_str());
    std::printf("config_hash: %s\n", artifact.config_hash.c_str());
    std::printf("columns: %zu, target: %s\n", artifact.columns.size(),
                artifact.target_column.c_str());
    std::printf("predictor: %s, loss: %s\n", predictor_name(artifact.predictor.kind).c_str(),
                loss_name(artifact.loss).c_str());
    std::printf("engine: %s (|D1|=%zu)\n", engine_name(artifact.engine_kind).c_str(),
                artifact.d1_losses.size());
    std::printf("mode: %s%s\n", artifact.mode_kind.c_str(),
                artifact.mode_uses_scarcity ? " (scarcity gamma)" : "");
    std::printf("alpha: %.4f, t: %.6f, n2: %zu, tau: %.6f\n", artifact.alpha, artifact.t,
                artifact.pit.size(), artifact.tau);
    if (artifact.has_rule) {
      if (artifact.rule.lambda) {
        std::printf("flag rule: %s, lambda=%.6f\n",
                    provenance_name(artifact.rule.provenance).c_str(),
                    *artifact.rule.lambda);
      } else {
        std::printf("flag rule: %s, EMPTY\n",
                    provenance_name(artifact.rule.provenance).c_str());
      }
    } else {
      std::printf("flag rule: none\n");
    }
    bool ok = stage("score", [&] { return verify_probes(artifact); });
    std::printf("probes: %zu stored, %s\n", artifact.probe_u.size(),
                ok ? "verified" : "MISMATCH");
    if (!ok) throw StagedError{"score", "stored probe outputs do not reproduce", 2};
    return 0;
  } catch (const StagedError& e) {
    return report_error(e);
  }
}

}  // namespace locus::cli
