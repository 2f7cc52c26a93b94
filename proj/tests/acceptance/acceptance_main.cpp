#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Acceptance suite: every criterion runs at its stated tolerance and prints
// one PASS/FAIL line. Tolerances are pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "locus/artifact.hpp"
#include "locus/cli.hpp"
#include "locus/evaluation.hpp"
#include "locus/quantiles.hpp"
#include "support/testers.hpp"

using namespace locus;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(int criterion, bool pass, const char* fmt, ...) {
  std::printf("[criterion %2d] %s  ", criterion, pass ? "PASS" : "FAIL");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
}

std::size_t consistency_k(std::size_t n1) {
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n1), 0.7)));
}

// Shared pipeline for criteria 1 and 3: smooth Gaussian process, OLS
// predictor fit per seed, knn_empirical engine, alpha = 0.1, n2 = 2000,
// 2000 test points, 30 seeds.
struct MarginalRun {
  double mean_coverage = 0.0;
  double mean_joint = 0.0;
  double seconds = 0.0;
};

const MarginalRun& marginal_run() {
  static const MarginalRun run = [] {
    Timer timer;
    SyntheticSpec spec = testing::smooth_spec();
    const double alpha = 0.1;
    double coverage_sum = 0.0, joint_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      testing::SimParts parts = testing::draw_parts(spec, 1000, 2000, 2000, 1000,
                                                    2000, seed);
      Predictor g = fit_predictor(parts.train, PredictorKind::kLinearOls);
      std::vector<double> z1 = realized_losses(g, LossKind::kAbsolute, parts.d1);
      std::vector<double> z2 = realized_losses(g, LossKind::kAbsolute, parts.d2);
      std::vector<double> val_z =
          realized_losses(g, LossKind::kAbsolute, parts.validation);
      std::vector<double> test_z =
          realized_losses(g, LossKind::kAbsolute, parts.test);

      auto engine = fit_engine(parts.d1.features, z1, EngineKind::kKnnEmpirical, {});
      CalibratedBound bound(engine, AggregationMode::mean(),
                            pit_values(*engine, AggregationMode::mean(),
                                       parts.d2.features, z2),
                            alpha);
      double tau = tau_from_quantile(val_z, 0.7);
      std::size_t covered = 0, joint = 0;
      for (std::size_t i = 0; i < test_z.size(); ++i) {
        double u = bound.score(parts.test.features.row(i));
        covered += test_z[i] <= u;
        joint += (test_z[i] > tau) && (u <= tau);
      }
      coverage_sum += static_cast<double>(covered) / static_cast<double>(test_z.size());
      joint_sum += static_cast<double>(joint) / static_cast<double>(test_z.size());
    }
    MarginalRun out;
    out.mean_coverage = coverage_sum / 30.0;
    out.mean_joint = joint_sum / 30.0;
    out.seconds = timer.seconds();
    return out;
  }();
  return run;
}

// Shared fits for criteria 5 and 6: fixed linear predictor, calibration size
// n split evenly into D1/D2, knn_empirical with k_e = ceil(n1^0.7).
struct ConsistencyRun {
  std::vector<std::size_t> n_schedule{1000, 4000, 8000};
  std::vector<double> coverage_gap_median;  // per n
  std::vector<double> disagreement_median;  // per n
};

const ConsistencyRun& consistency_run() {
  static const ConsistencyRun run = [] {
    SyntheticSpec spec = testing::smooth_spec();
    SyntheticOracle oracle(spec);
    Predictor g = testing::fixed_linear_predictor(0.5, 0.0);
    const double alpha = 0.1;

    // 20 fixed probe points for conditional coverage.
    std::vector<double> coverage_probes;
    {
      Rng rng(555);
      for (int i = 0; i < 20; ++i) {
        coverage_probes.push_back(-2.0 + 4.0 * rng.uniform01());
      }
    }
    // 500-point grid and a fixed tau for the decision rule; probes within a
    // 0.02 margin of the oracle boundary are excluded.
    std::vector<double> grid_probes;
    std::vector<double> oracle_q;
    for (int i = 0; i < 500; ++i) {
      double x = -2.0 + 4.0 * (static_cast<double>(i) + 0.5) / 500.0;
      grid_probes.push_back(x);
      oracle_q.push_back(oracle.loss_quantile(
          0.9, std::span(&x, 1), predict(g, std::span(&x, 1)), LossKind::kAbsolute));
    }
    const double tau = empirical_quantile(oracle_q, 0.5);

    ConsistencyRun out;
    for (std::size_t n : out.n_schedule) {
      std::vector<double> gaps, disagreements;
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::size_t n1 = n / 2;
        TabularData d1 = testing::draw_part(spec, n1, seed * 1000 + n, "c56-d1");
        TabularData d2 = testing::draw_part(spec, n - n1, seed * 1000 + n, "c56-d2");
        std::vector<double> z1 = realized_losses(g, LossKind::kAbsolute, d1);
        std::vector<double> z2 = realized_losses(g, LossKind::kAbsolute, d2);
        EngineHyperparams hp;
        hp.k_empirical = consistency_k(n1);
        auto engine = fit_engine(d1.features, z1, EngineKind::kKnnEmpirical, hp);
        CalibratedBound bound(engine, AggregationMode::mean(),
                              pit_values(*engine, AggregationMode::mean(),
                                         d2.features, z2),
                              alpha);

        double gap = 0.0;
        for (double x : coverage_probes) {
          auto xs = std::span(&x, 1);
          double u = bound.score(xs);
          double cond = oracle.loss_cdf(u, xs, predict(g, xs), LossKind::kAbsolute);
          gap += std::abs(cond - 0.9);
        }
        gaps.push_back(gap / static_cast<double>(coverage_probes.size()));

        std::size_t considered = 0, disagree = 0;
        for (double x : grid_probes) {
          auto xs = std::span(&x, 1);
          double exceed =
              oracle.exceed_prob(tau, xs, predict(g, xs), LossKind::kAbsolute);
          if (std::abs(exceed - alpha) < 0.02) continue;  // uniqueness margin
          ++considered;
          bool oracle_accept = exceed <= alpha;
          bool rule_accept = bound.score(xs) <= tau;
          disagree += oracle_accept != rule_accept;
        }
        disagreements.push_back(static_cast<double>(disagree) /
                                static_cast<double>(considered));
      }
      out.coverage_gap_median.push_back(empirical_quantile(gaps, 0.5));
      out.disagreement_median.push_back(empirical_quantile(disagreements, 0.5));
    }
    return out;
  }();
  return run;
}

}  // namespace

TEST_CASE("criterion 1: marginal validity band") {
  const MarginalRun& run = marginal_run();
  const double lo = 0.896, hi = 0.9045 + 0.004;
  bool pass =
      run.mean_coverage >= lo && run.mean_coverage <= hi && run.seconds < 300.0;
  report(1, pass,
         "marginal validity: mean coverage %.4f in [%.3f, %.4f], %.1fs (< 300s)",
         run.mean_coverage, lo, hi, run.seconds);
  CHECK(run.mean_coverage >= lo);
  CHECK(run.mean_coverage <= hi);
  CHECK(run.seconds < 300.0);
}

TEST_CASE("criterion 2: distribution-freeness under a misspecified engine") {
  SyntheticSpec spec = testing::smooth_spec();
  auto engine = testing::constant_cdf_engine(0.9);
  const double alpha = 0.1;
  double coverage_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    testing::SimParts parts = testing::draw_parts(spec, 1000, 10, 2000, 10, 2000, seed);
    Predictor g = fit_predictor(parts.train, PredictorKind::kLinearOls);
    std::vector<double> z2 = realized_losses(g, LossKind::kAbsolute, parts.d2);
    std::vector<double> test_z = realized_losses(g, LossKind::kAbsolute, parts.test);
    CalibratedBound bound(engine, AggregationMode::mean(),
                          pit_values(*engine, AggregationMode::mean(),
                                     parts.d2.features, z2),
                          alpha);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < test_z.size(); ++i) {
      covered += test_z[i] <= bound.score(parts.test.features.row(i));
    }
    coverage_sum += static_cast<double>(covered) / static_cast<double>(test_z.size());
  }
  double mean_coverage = coverage_sum / 30.0;
  bool pass = mean_coverage >= 0.896;
  report(2, pass, "misspecified constant engine: mean coverage %.4f >= 0.896",
         mean_coverage);
  CHECK(mean_coverage >= 0.896);
}

TEST_CASE("criterion 3: joint tail control at lambda = tau") {
  const MarginalRun& run = marginal_run();
  bool pass = run.mean_joint <= 0.104;
  report(3, pass, "joint tail: mean P(Z > tau, U <= tau) = %.4f <= 0.104",
         run.mean_joint);
  CHECK(run.mean_joint <= 0.104);
}

TEST_CASE("criterion 4: conditional exceedance among accepted") {
  SyntheticSpec spec = testing::smooth_spec();
  const double alpha = 0.1;
  double rate_sum = 0.0;
  std::size_t defined = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    testing::SimParts parts =
        testing::draw_parts(spec, 1000, 4000, 4000, 1000, 2000, 100 + seed);
    Predictor g = fit_predictor(parts.train, PredictorKind::kLinearOls);
    std::vector<double> z1 = realized_losses(g, LossKind::kAbsolute, parts.d1);
    std::vector<double> z2 = realized_losses(g, LossKind::kAbsolute, parts.d2);
    std::vector<double> val_z =
        realized_losses(g, LossKind::kAbsolute, parts.validation);
    std::vector<double> test_z = realized_losses(g, LossKind::kAbsolute, parts.test);

    EngineHyperparams hp;
    hp.k_empirical = consistency_k(parts.d1.size());
    auto engine = fit_engine(parts.d1.features, z1, EngineKind::kKnnEmpirical, hp);
    CalibratedBound bound(engine, AggregationMode::mean(),
                          pit_values(*engine, AggregationMode::mean(),
                                     parts.d2.features, z2),
                          alpha);
    double tau = tau_from_quantile(val_z, 0.7);
    std::size_t accepted = 0, bad = 0;
    for (std::size_t i = 0; i < test_z.size(); ++i) {
      if (bound.score(parts.test.features.row(i)) <= tau) {
        ++accepted;
        bad += test_z[i] > tau;
      }
    }
    if (accepted > 0) {
      rate_sum += static_cast<double>(bad) / static_cast<double>(accepted);
      ++defined;
    }
  }
  double mean_rate = rate_sum / static_cast<double>(defined);
  bool pass = defined == 30 && mean_rate <= alpha + 0.03;
  report(4, pass,
         "conditional exceedance: mean P(Z > tau | accepted) = %.4f <= %.2f "
         "(%zu/30 seeds accepted anything)",
         mean_rate, alpha + 0.03, defined);
  CHECK(defined == 30);
  CHECK(mean_rate <= alpha + 0.03);
}

TEST_CASE("criterion 5: conditional coverage gap shrinks with n") {
  const ConsistencyRun& run = consistency_run();
  const auto& g = run.coverage_gap_median;
  bool pass = g[1] < g[0] && g[2] < g[1];
  report(5, pass,
         "oracle coverage gap medians along n {1000, 4000, 8000}: "
         "%.4f > %.4f > %.4f (strict)",
         g[0], g[1], g[2]);
  CHECK(g[1] < g[0]);
  CHECK(g[2] < g[1]);
}

TEST_CASE("criterion 6: decision consistency against the oracle rule") {
  const ConsistencyRun& run = consistency_run();
  const auto& d = run.disagreement_median;
  bool pass = d[1] < d[0] && d[2] < d[1];
  report(6, pass,
         "decision disagreement medians along n {1000, 4000, 8000}: "
         "%.4f > %.4f > %.4f (strict)",
         d[0], d[1], d[2]);
  CHECK(d[1] < d[0]);
  CHECK(d[2] < d[1]);
}

TEST_CASE("criterion 7: certified selection risk and epsilon formulas") {
  // Epsilon arithmetic against hand-evaluated constants.
  struct Eps {
    std::size_t n;
    double eps_g, eps_h;
  };
  bool eps_ok = true;
  for (const Eps& e : {Eps{100, 0.135810, 0.596604}, Eps{2000, 0.030368, 0.159167},
                       Eps{100000, 0.004295, 0.026391}}) {
    CertifyEpsilons got = certify_epsilons(e.n, 0.1);
    eps_ok = eps_ok && std::abs(got.eps_g - e.eps_g) < 1e-4 &&
             std::abs(got.eps_h - e.eps_h) < 1e-4;
    CHECK(std::abs(got.eps_g - e.eps_g) < 1e-4);
    CHECK(std::abs(got.eps_h - e.eps_h) < 1e-4);
  }

  // The misfit process separates a large safe region from concentrated bad
  // regions, which keeps the certificate's feasible set nonempty often enough
  // for the trial count to carry power. g is the population least-squares
  // line of 0.8 x^2 on U(-3, 3).
  SyntheticSpec spec = testing::misfit_spec();
  SyntheticOracle oracle(spec);
  Predictor g = testing::fixed_linear_predictor(0.0, 2.4);
  const double alpha = 0.1, eta = 0.25, delta = 0.1;
  const std::size_t n_val = 5000;

  // Fixed tau: the marginal 0.7 loss quantile from one large offline draw.
  double tau;
  {
    TabularData big = testing::draw_part(spec, 200000, 424242, "c7-tau");
    std::vector<double> z = realized_losses(g, LossKind::kAbsolute, big);
    tau = tau_from_quantile(z, 0.7);
  }

  std::size_t violations = 0, nonempty = 0;
  for (std::uint64_t trial = 1; trial <= 200; ++trial) {
    TabularData d1 = testing::draw_part(spec, 1000, trial, "c7-d1");
    TabularData d2 = testing::draw_part(spec, 1000, trial, "c7-d2");
    TabularData val = testing::draw_part(spec, n_val, trial, "c7-val");
    std::vector<double> z1 = realized_losses(g, LossKind::kAbsolute, d1);
    std::vector<double> z2 = realized_losses(g, LossKind::kAbsolute, d2);
    std::vector<double> val_z = realized_losses(g, LossKind::kAbsolute, val);

    EngineHyperparams hp;
    hp.k_empirical = consistency_k(1000);
    auto engine = fit_engine(d1.features, z1, EngineKind::kKnnEmpirical, hp);
    CalibratedBound bound(engine, AggregationMode::mean(),
                          pit_values(*engine, AggregationMode::mean(), d2.features, z2),
                          alpha);

    std::vector<double> u = bound.score_all(val.features);
    std::vector<bool> exceed(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) exceed[i] = val_z[i] > tau;
    auto [rule, rep] =
        certify_lambda(u, exceed, default_lambda_grid(u), eta, delta, alpha);
    if (rule.empty()) continue;  // empty acceptance: exceedance 0 by convention
    ++nonempty;

    // Oracle conditional exceedance of the selected region on a fresh draw.
    TabularData fresh = testing::draw_part(spec, 4000, trial, "c7-fresh");
    double mass = 0.0, bad_mass = 0.0;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      auto xs = fresh.features.row(i);
      if (bound.score(xs) <= *rule.lambda) {
        mass += 1.0;
        bad_mass += oracle.exceed_prob(tau, xs, predict(g, xs), LossKind::kAbsolute);
      }
    }
    if (mass > 0.0 && bad_mass / mass > eta) ++violations;
  }
  double violation_rate = static_cast<double>(violations) / 200.0;
  bool pass = eps_ok && violation_rate <= delta + 0.05 && nonempty >= 50;
  report(7, pass,
         "certified selection: oracle exceedance > eta in %.1f%% of 200 trials "
         "(<= %.0f%%), %zu nonempty (>= 50 for power); epsilon formulas %s",
         100.0 * violation_rate, 100.0 * (delta + 0.05), nonempty,
         eps_ok ? "match" : "MISMATCH");
  CHECK(violation_rate <= delta + 0.05);
  CHECK(nonempty >= 50);
}

TEST_CASE("criterion 8: envelope conservativeness chain and gamma anchors") {
  // gamma at s in {-50, 0, 50} equals {0.9, 0.525, 0.15} within 1e-6.
  Matrix ref(2, 1, {0.0, 1.0});
  ScarcityIndex anchor(ref, 1);
  bool anchors_ok = std::abs(anchor.gamma_from_score(-50.0) - 0.9) < 1e-6 &&
                    std::abs(anchor.gamma_from_score(0.0) - 0.525) < 1e-6 &&
                    std::abs(anchor.gamma_from_score(50.0) - 0.15) < 1e-6;
  CHECK(anchors_ok);

  SyntheticSpec spec = testing::smooth_spec();
  TabularData d1 = testing::draw_part(spec, 1000, 88, "c8-d1");
  Predictor g = testing::fixed_linear_predictor(0.5, 0.0);
  std::vector<double> z1 = realized_losses(g, LossKind::kAbsolute, d1);
  EngineHyperparams hp;
  hp.ensemble_size = 30;
  hp.seed = 88;
  auto engine = fit_engine(d1.features, z1, EngineKind::kBootstrapGaussianEnsemble, hp);
  auto scarcity = std::make_shared<ScarcityIndex>(d1.features, 50);

  Rng rng(89);
  std::size_t conditioned = 0, violations = 0;
  std::vector<double> scratch(engine->draw_count());
  for (int rep = 0; rep < 200; ++rep) {
    // Probe beyond the design range so scarce regions appear.
    double x = -3.0 + 6.0 * rng.uniform01();
    auto xs = std::span(&x, 1);
    double gamma = scarcity->gamma_of(xs);
    auto query = engine->prepare(xs);

    for (double t : {0.5, 0.9}) {
      double u_mean = invert_prepared(*query, AggregationMode::Kind::kMean, 1.0, t,
                                      engine->bracket_seed());
      // gamma(x) is below the mean-equivalent level at this t exactly when
      // the gamma-envelope sits at or under t where the mean CDF crosses it.
      query->draws_at(u_mean, scratch);
      if (envelope_of_draws(scratch, gamma) > t + 1e-12) continue;
      ++conditioned;
      double u_env = invert_prepared(*query, AggregationMode::Kind::kEnvelope, gamma, t,
                                     engine->bracket_seed());
      if (u_env < u_mean - 1e-9) ++violations;
    }
  }
  bool pass = anchors_ok && violations == 0 && conditioned >= 100;
  report(8, pass,
         "envelope chain: %zu violations over %zu conditioned probe-level pairs; "
         "gamma anchors %s",
         violations, conditioned, anchors_ok ? "exact" : "OFF");
  CHECK(violations == 0);
  CHECK(conditioned >= 100);
}

TEST_CASE("criterion 9: ranking at matched acceptance on the misfit process") {
  BenchmarkConfig config;
  SyntheticSpec spec = testing::misfit_spec();
  spec.n = 5500;
  config.synthetic = spec;
  BenchmarkEngineSpec engine;
  engine.kind = EngineKind::kKnnEmpirical;
  engine.label = "knn";
  config.engines = {engine};
  config.methods = {"locus-matched", "iflag", "label-variance"};
  config.predictor = PredictorKind::kLinearOls;
  config.target_acceptance = 0.7;

  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 30; ++s) seeds.push_back(s);
  BenchmarkSummary summary = run_benchmark(config, seeds);
  REQUIRE(summary.failures == 0);

  const auto& locus_rate =
      summary.raw.at("locus-matched:knn").at("conditional_tail_rate");
  const auto& iflag_rate = summary.raw.at("iflag").at("conditional_tail_rate");
  const auto& var_rate = summary.raw.at("label-variance").at("conditional_tail_rate");
  std::size_t beats_var = 0, beats_iflag = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    beats_var += locus_rate[i] < var_rate[i];
    beats_iflag += locus_rate[i] < iflag_rate[i];
  }
  bool pass = beats_var >= 24 && beats_iflag >= 24;
  report(9, pass,
         "matched-acceptance ranking: locus < label-variance in %zu/30, "
         "locus < iflag in %zu/30 (need >= 24)",
         beats_var, beats_iflag);
  CHECK(beats_var >= 24);
  CHECK(beats_iflag >= 24);
}

TEST_CASE("criterion 10: conformal exactness at n2 = 9") {
  // Continuous engine, k = ceil(0.9 * 10) = 9, coverage is exactly 9/10 in
  // expectation; 1e5 replicates put the Monte Carlo error near 0.001.
  SyntheticSpec spec = testing::smooth_spec();
  SyntheticOracle oracle(spec);
  Predictor g = testing::fixed_linear_predictor(0.5, 0.0);
  auto engine = testing::constant_cdf_engine(1.0);
  const double alpha = 0.1;

  Rng rng(2024);
  auto draw_loss = [&](double& x_out) {
    double x = -2.0 + 4.0 * rng.uniform01();
    auto xs = std::span(&x, 1);
    double eps = testing::normal_quantile_ref(rng.uniform01());
    double y = oracle.mean(xs) + oracle.scale(xs) * eps;
    x_out = x;
    return std::abs(predict(g, xs) - y);
  };

  const int replicates = 100000;
  Matrix d2(9, 1);
  std::vector<double> z2(9);
  long covered = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    for (int i = 0; i < 9; ++i) {
      double x;
      z2[static_cast<std::size_t>(i)] = draw_loss(x);
      d2.at(static_cast<std::size_t>(i), 0) = x;
    }
    CalibratedBound bound(engine, AggregationMode::mean(),
                          pit_values(*engine, AggregationMode::mean(), d2, z2), alpha);
    double x_test;
    double z_test = draw_loss(x_test);
    covered += z_test <= bound.score(std::span(&x_test, 1));
  }
  double coverage = static_cast<double>(covered) / replicates;
  bool pass = std::abs(coverage - 0.9) < 0.005;
  report(10, pass, "tiny-n2 exactness: coverage %.4f within 0.005 of 0.9", coverage);
  CHECK(std::abs(coverage - 0.9) < 0.005);
}

TEST_CASE("criterion 11: persistence and benchmark determinism") {
  RunConfig config;
  config.synthetic = testing::smooth_spec();
  config.synthetic->n = 1500;
  config.synthetic->seed = 7;
  config.seed = 7;
  config.engine_kind = EngineKind::kBootstrapGaussianEnsemble;
  config.engine_hp.ensemble_size = 10;
  config.mode_kind = "envelope_scarcity";

  const std::string artifact_path = "locus_acceptance_artifact.json";
  REQUIRE(cli::cmd_calibrate(config, artifact_path) == 0);
  Artifact artifact = load_artifact(artifact_path);
  bool probes_ok = artifact.probe_u.size() == 16 && verify_probes(artifact);
  CHECK(probes_ok);

  RunConfig bench = config;
  bench.mode_kind = "mean";
  bench.engine_kind = EngineKind::kKnnEmpirical;
  bench.synthetic->n = 800;
  bench.seeds = {11, 12, 13};
  bench.benchmark_methods = {"locus-default", "locus-matched", "iflag"};
  const std::string r1 = "locus_acceptance_bench1.json";
  const std::string r2 = "locus_acceptance_bench2.json";
  REQUIRE(cli::cmd_benchmark(bench, r1, "") == 0);
  REQUIRE(cli::cmd_benchmark(bench, r2, "") == 0);
  std::ifstream f1(r1), f2(r2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  bool bench_ok = !s1.empty() && s1 == s2;
  CHECK(bench_ok);

  bool pass = probes_ok && bench_ok;
  report(11, pass, "persistence: 16 probes bit-exact %s; benchmark JSON identical %s",
         probes_ok ? "yes" : "NO", bench_ok ? "yes" : "NO");
  std::remove(artifact_path.c_str());
  std::remove(r1.c_str());
  std::remove(r2.c_str());
}
