#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "locus/artifact.hpp"
#include "locus/cli.hpp"
#include "locus/errors.hpp"
#include "support/testers.hpp"

using namespace locus;
using nlohmann::json;

namespace {

std::string tmp(const std::string& name) { return "locus_cli_" + name; }

RunConfig base_config(std::uint64_t seed) {
  RunConfig c;
  c.synthetic = testing::smooth_spec();
  c.synthetic->n = 1500;
  c.synthetic->seed = derive_seed(seed, "data");
  c.seed = seed;
  return c;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

void cleanup(std::initializer_list<std::string> paths) {
  for (const auto& p : paths) std::remove(p.c_str());
}

}  // namespace

TEST_CASE("artifact round-trip reproduces scores bit-for-bit") {
  // Three configurations x 16 probes, exact equality after reload.
  struct Case {
    EngineKind engine;
    std::string mode;
  };
  for (const Case& c : {Case{EngineKind::kKnnEmpirical, "mean"},
                        Case{EngineKind::kBootstrapGaussianEnsemble, "envelope"},
                        Case{EngineKind::kBootstrapGaussianEnsemble,
                             "envelope_scarcity"}}) {
    RunConfig config = base_config(101);
    config.engine_kind = c.engine;
    config.engine_hp.ensemble_size = 8;
    config.mode_kind = c.mode;
    auto path = tmp("artifact.json");
    REQUIRE(cli::cmd_calibrate(config, path) == 0);

    Artifact artifact = load_artifact(path);
    REQUIRE(artifact.probe_u.size() == 16);
    CHECK(verify_probes(artifact));

    // In-memory rescore equals stored probe outputs exactly.
    ScoringPipeline pipe = instantiate_pipeline(artifact);
    for (std::size_t i = 0; i < artifact.probe_u.size(); ++i) {
      CHECK(pipe.bound->score(artifact.probe_x.row(i)) == artifact.probe_u[i]);
    }
    cleanup({path});
  }
}

TEST_CASE("artifact bytes are deterministic up to the timestamp") {
  RunConfig config = base_config(77);
  auto p1 = tmp("det1.json"), p2 = tmp("det2.json");
  REQUIRE(cli::cmd_calibrate(config, p1) == 0);
  REQUIRE(cli::cmd_calibrate(config, p2) == 0);
  json a = load_json(p1), b = load_json(p2);
  a.erase("created_at");
  b.erase("created_at");
  CHECK(a.dump() == b.dump());
  cleanup({p1, p2});
}

TEST_CASE("config hash changes iff a semantic field changes") {
  RunConfig config = base_config(77);
  std::string hash = fnv1a_hex(config_to_json(config).dump());
  RunConfig same = base_config(77);
  CHECK(hash == fnv1a_hex(config_to_json(same).dump()));

  auto hash_of = [](RunConfig c) { return fnv1a_hex(config_to_json(c).dump()); };
  RunConfig c1 = base_config(77);
  c1.alpha = 0.2;
  CHECK(hash != hash_of(c1));
  RunConfig c2 = base_config(77);
  c2.engine_kind = EngineKind::kBootstrapGaussianEnsemble;
  CHECK(hash != hash_of(c2));
  RunConfig c3 = base_config(77);
  c3.tau_level = 0.8;
  CHECK(hash != hash_of(c3));
  RunConfig c4 = base_config(77);
  c4.seed = 78;
  CHECK(hash != hash_of(c4));
  RunConfig c5 = base_config(77);
  c5.mode_kind = "envelope";
  CHECK(hash != hash_of(c5));
}

TEST_CASE("unknown schema versions are refused") {
  RunConfig config = base_config(5);
  auto path = tmp("schema.json");
  REQUIRE(cli::cmd_calibrate(config, path) == 0);
  json j = load_json(path);
  j["schema_version"] = 2;
  std::ofstream(path) << j.dump(2);
  CHECK_THROWS_AS(load_artifact(path), ValidationError);
  cleanup({path});
}

TEST_CASE("score command: empty input, extra column, column order") {
  RunConfig config = base_config(31);
  auto artifact_path = tmp("score_artifact.json");
  REQUIRE(cli::cmd_calibrate(config, artifact_path) == 0);

  auto in_path = tmp("score_in.csv"), out_path = tmp("score_out.csv");
  std::ofstream(in_path) << "x1\n";  // header only
  REQUIRE(cli::cmd_score(artifact_path, in_path, out_path) == 0);
  {
    std::ifstream out(out_path);
    std::string header, rest;
    std::getline(out, header);
    CHECK(header == "row,u_alpha");
    CHECK(!std::getline(out, rest));
  }

  std::ofstream(in_path) << "x1,bogus\n0.5,1\n";
  CHECK(cli::cmd_score(artifact_path, in_path, out_path) == 1);

  std::ofstream(in_path) << "x1\n0.5\n-1.25\n";
  REQUIRE(cli::cmd_score(artifact_path, in_path, out_path) == 0);
  {
    std::ifstream out(out_path);
    std::string line;
    std::getline(out, line);
    CHECK(line == "row,u_alpha");
    std::getline(out, line);
    CHECK(line.substr(0, 2) == "0,");
    std::getline(out, line);
    CHECK(line.substr(0, 2) == "1,");
  }
  cleanup({artifact_path, in_path, out_path});
}

TEST_CASE("flag embeds lambda = tau; tuning is deterministic; certify can be EMPTY") {
  RunConfig config = base_config(53);
  auto artifact_path = tmp("rule_artifact.json");
  REQUIRE(cli::cmd_calibrate(config, artifact_path) == 0);
  double stored_tau = load_artifact(artifact_path).tau;

  REQUIRE(cli::cmd_flag(artifact_path, std::nullopt) == 0);
  Artifact flagged = load_artifact(artifact_path);
  REQUIRE(flagged.has_rule);
  CHECK(flagged.rule.lambda == stored_tau);
  CHECK(flagged.rule.provenance == RuleProvenance::kDefaultTau);

  // Labeled validation file for the tuners.
  SyntheticSpec val_spec = *config.synthetic;
  val_spec.n = 2000;
  val_spec.seed = derive_seed(999, "validation");
  TabularData val = generate_synthetic(val_spec);
  auto val_path = tmp("rule_val.csv");
  write_csv(val_path, val, "y");

  auto report_path = tmp("rule_report.json");
  REQUIRE(cli::cmd_tune(artifact_path, val_path, "tuned-lambda", 0.15, 0.05, {}, {},
                        report_path) == 0);
  Artifact tuned1 = load_artifact(artifact_path);
  REQUIRE(tuned1.has_rule);
  REQUIRE(tuned1.rule.lambda.has_value());
  REQUIRE(cli::cmd_tune(artifact_path, val_path, "tuned-lambda", 0.15, 0.05, {}, {},
                        report_path) == 0);
  Artifact tuned2 = load_artifact(artifact_path);
  CHECK(tuned1.rule.lambda == tuned2.rule.lambda);

  json report = load_json(report_path);
  CHECK(report.at("kind") == "tuned_lambda");
  CHECK(report.at("rows").size() >= 2);

  // eta far below the deviation terms: certified rule must come back EMPTY
  // with the dedicated exit status.
  CHECK(cli::cmd_certify(artifact_path, val_path, 0.001, 0.1, {}, report_path) == 3);
  Artifact certified = load_artifact(artifact_path);
  REQUIRE(certified.has_rule);
  CHECK(certified.rule.empty());
  CHECK(certified.rule.provenance == RuleProvenance::kCertified);

  cleanup({artifact_path, val_path, report_path});
}

TEST_CASE("tuned-alpha via the cli updates the rule's alpha") {
  RunConfig config = base_config(59);
  auto artifact_path = tmp("alpha_artifact.json");
  REQUIRE(cli::cmd_calibrate(config, artifact_path) == 0);

  SyntheticSpec val_spec = *config.synthetic;
  val_spec.n = 1200;
  val_spec.seed = derive_seed(1000, "validation");
  TabularData val = generate_synthetic(val_spec);
  auto val_path = tmp("alpha_val.csv");
  write_csv(val_path, val, "y");

  int rc = cli::cmd_tune(artifact_path, val_path, "tuned-alpha", 0.15, 0.0, {}, {}, "");
  REQUIRE((rc == 0 || rc == 3));
  Artifact tuned = load_artifact(artifact_path);
  REQUIRE(tuned.has_rule);
  CHECK(tuned.rule.provenance == RuleProvenance::kTunedAlpha);
  if (rc == 0) {
    CHECK(tuned.rule.lambda == tuned.tau);
    CHECK(tuned.rule.alpha > 0.0);
    CHECK(tuned.rule.alpha < 1.0);
  }
  cleanup({artifact_path, val_path});
}

TEST_CASE("config validation fails before any computation") {
  json bad = {{"alpha", 1.5}};
  CHECK_THROWS_AS(parse_run_config(bad), ValidationError);
  json bad_fraction = {{"split", {{"fractions", {0.9, 0.05, 0.04, 0.01}}}},
                       {"alpha", 0.1}};
  // fractions sum to 1 but leave tiny parts; calibrate still runs, so only
  // structural errors are rejected here.
  CHECK_NOTHROW(parse_run_config(bad_fraction));
  json bad_method = {{"flagging", {{"method", "magic"}}}};
  CHECK_THROWS_AS(parse_run_config(bad_method), ValidationError);
  json bad_engine = {{"engine", {{"kind", "wavelet"}}}};
  CHECK_THROWS_AS(parse_run_config(bad_engine), ValidationError);
}

TEST_CASE("the all-defaults config calibrates the bundled synthetic spec") {
  RunConfig config;  // bundled defaults
  auto path = tmp("defaults.json");
  CHECK(cli::cmd_calibrate(config, path) == 0);
  cleanup({path});
}

TEST_CASE("synthetic spec JSON round-trips") {
  SyntheticSpec spec = testing::misfit_spec();
  spec.noise = NoiseFamily::kStudentT;
  spec.student_df = 5.0;
  spec.n = 123;
  spec.seed = 99;
  SyntheticSpec back = synthetic_from_json(synthetic_to_json(spec));
  CHECK(back.mean_fn == spec.mean_fn);
  CHECK(back.mean_params == spec.mean_params);
  CHECK(back.scale_fn == spec.scale_fn);
  CHECK(back.scale_params == spec.scale_params);
  CHECK(back.design_params == spec.design_params);
  CHECK(back.noise == spec.noise);
  CHECK(back.student_df == spec.student_df);
  CHECK(back.n == spec.n);
  CHECK(back.seed == spec.seed);
  // Same spec, same draw.
  TabularData a = generate_synthetic(spec);
  TabularData b = generate_synthetic(back);
  CHECK(a.target == b.target);
}

TEST_CASE("calibrate fails cleanly on a missing csv") {
  RunConfig config;
  config.synthetic.reset();
  config.csv_path = "definitely_missing.csv";
  CHECK(cli::cmd_calibrate(config, tmp("never.json")) == 1);
}

TEST_CASE("benchmark results json is reproducible") {
  RunConfig config = base_config(3);
  config.synthetic->n = 600;
  config.seeds = {1, 2, 3};
  config.benchmark_methods = {"locus-default", "locus-matched"};
  auto r1 = tmp("bench1.json"), r2 = tmp("bench2.json");
  REQUIRE(cli::cmd_benchmark(config, r1, "") == 0);
  REQUIRE(cli::cmd_benchmark(config, r2, "") == 0);
  CHECK(load_json(r1).dump() == load_json(r2).dump());
  cleanup({r1, r2});
}
