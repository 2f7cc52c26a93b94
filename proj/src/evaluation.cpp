#include "locus/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "locus/errors.hpp"
#include "locus/quantiles.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEulerGamma = 0.57721566490153286;

// Average unsuccessful-search path length in a BST of n points.
double avg_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  double nd = static_cast<double>(n);
  return 2.0 * (std::log(nd - 1.0) + kEulerGamma) - 2.0 * (nd - 1.0) / nd;
}
}  // namespace

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

RunMetrics compute_metrics(std::span<const double> losses,
                           std::span<const double> scores, double tau,
                           std::optional<double> lambda) {
  if (losses.size() != scores.size()) {
    throw ValidationError("compute_metrics: loss/score length mismatch");
  }
  if (losses.empty()) throw ValidationError("compute_metrics: empty sample");

  const auto n = static_cast<double>(losses.size());
  std::size_t accepted = 0, big = 0, big_accepted = 0, covered = 0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    bool a = lambda.has_value() && scores[i] <= *lambda;
    bool b = losses[i] > tau;
    accepted += a;
    big += b;
    big_accepted += a && b;
    covered += losses[i] <= scores[i];
  }
  RunMetrics m;
  m.acceptance_rate = static_cast<double>(accepted) / n;
  m.marginal_tail_rate = static_cast<double>(big) / n;
  if (accepted > 0) {
    m.conditional_tail_rate =
        static_cast<double>(big_accepted) / static_cast<double>(accepted);
  }
  m.marginal_coverage = static_cast<double>(covered) / n;
  return m;
}

// ---------------------------------------------------------------------------
// Isolation forest
// ---------------------------------------------------------------------------

IsolationForest::IsolationForest(const Matrix& train, std::size_t n_trees,
                                 std::size_t subsample, std::uint64_t seed) {
  if (train.rows == 0) throw ValidationError("iforest: empty training set");
  if (n_trees == 0) throw ValidationError("iforest: n_trees must be >= 1");
  const std::size_t psi = std::min(subsample, train.rows);
  c_psi_ = std::max(avg_path_length(psi), 1e-12);
  const int max_depth =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(psi, 2)))));

  Rng rng(derive_seed(seed, "iforest"));
  trees_.resize(n_trees);

  struct Builder {
    const Matrix& x;
    Rng& rng;
    int max_depth;
    Tree& tree;

    std::int32_t build(std::vector<std::size_t>& rows, int depth) {
      auto id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes[id].size = static_cast<std::int32_t>(rows.size());
      if (depth >= max_depth || rows.size() <= 1) return id;

      std::vector<int> candidates;
      for (std::size_t j = 0; j < x.cols; ++j) {
        double lo = x.at(rows[0], j), hi = lo;
        for (std::size_t r : rows) {
          lo = std::min(lo, x.at(r, j));
          hi = std::max(hi, x.at(r, j));
        }
        if (hi > lo) candidates.push_back(static_cast<int>(j));
      }
      if (candidates.empty()) return id;

      int j = candidates[rng.index(candidates.size())];
      double lo = x.at(rows[0], j), hi = lo;
      for (std::size_t r : rows) {
        lo = std::min(lo, x.at(r, static_cast<std::size_t>(j)));
        hi = std::max(hi, x.at(r, static_cast<std::size_t>(j)));
      }
      double split = lo + rng.uniform01() * (hi - lo);

      std::vector<std::size_t> left, right;
      for (std::size_t r : rows) {
        (x.at(r, static_cast<std::size_t>(j)) < split ? left : right).push_back(r);
      }
      rows.clear();
      rows.shrink_to_fit();

      std::int32_t l = build(left, depth + 1);
      std::int32_t r = build(right, depth + 1);
      tree.nodes[id].feature = j;
      tree.nodes[id].split = split;
      tree.nodes[id].left = l;
      tree.nodes[id].right = r;
      return id;
    }
  };

  for (auto& tree : trees_) {
    std::vector<std::size_t> rows = rng.sample_indices(train.rows, psi);
    Builder{train, rng, max_depth, tree}.build(rows, 0);
  }
}

double IsolationForest::path_length(const Tree& tree, std::span<const double> x) const {
  std::int32_t id = 0;
  double depth = 0.0;
  while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const Node& node = tree.nodes[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(node.feature)] < node.split ? node.left : node.right;
    depth += 1.0;
  }
  return depth + avg_path_length(
                     static_cast<std::size_t>(tree.nodes[static_cast<std::size_t>(id)].size));
}

double IsolationForest::score(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& tree : trees_) total += path_length(tree, x);
  double mean_path = total / static_cast<double>(trees_.size());
  return std::pow(2.0, -mean_path / c_psi_);
}

std::vector<double> IsolationForest::score_all(const Matrix& xs) const {
  std::vector<double> out(xs.rows);
  for (std::size_t i = 0; i < xs.rows; ++i) out[i] = score(xs.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// Label-variance baseline
// ---------------------------------------------------------------------------

LabelVarianceScore::LabelVarianceScore(Matrix features, std::vector<double> target,
                                       std::size_t k_local)
    : features_(std::move(features)), target_(std::move(target)), k_(k_local) {
  if (features_.rows != target_.size()) {
    throw ValidationError("label variance: feature/target length mismatch");
  }
  if (k_ == 0 || k_ > features_.rows) {
    throw ValidationError("label variance: k_local must be in [1, n_train]");
  }
}

double LabelVarianceScore::score(std::span<const double> x) const {
  const std::size_t n = features_.rows;
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = {euclidean_distance(x, features_.row(i)), i};
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(k_);
  std::nth_element(d.begin(), mid - 1, d.end());
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < k_; ++i) {
    double y = target_[d[i].second];
    m1 += y;
    m2 += y * y;
  }
  m1 /= static_cast<double>(k_);
  m2 /= static_cast<double>(k_);
  return std::max(0.0, m2 - m1 * m1);
}

std::vector<double> LabelVarianceScore::score_all(const Matrix& xs) const {
  std::vector<double> out(xs.rows);
  for (std::size_t i = 0; i < xs.rows; ++i) out[i] = score(xs.row(i));
  return out;
}

double matched_acceptance_threshold(std::span<const double> scores,
                                    double target_rate) {
  if (scores.empty()) throw ValidationError("matched threshold: empty scores");
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw ValidationError("matched threshold: target rate must be in (0, 1)");
  }
  return empirical_quantile(scores, target_rate);
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

namespace {

const char* kMetricNames[] = {"acceptance_rate", "marginal_tail_rate",
                              "conditional_tail_rate", "marginal_coverage"};

struct SeedCell {
  std::string label;
  RunMetrics metrics;
  bool coverage_meaningful = true;
};

struct SeedOutcome {
  bool ok = false;
  std::string error;
  std::uint64_t hash = 0;
  std::vector<SeedCell> cells;
  std::vector<std::string> dump_header;
  std::vector<std::vector<double>> dump_columns;
};

CellSummary summarize(const std::vector<double>& values) {
  std::vector<double> defined;
  for (double v : values) {
    if (!std::isnan(v)) defined.push_back(v);
  }
  CellSummary cell;
  cell.defined = defined.size();
  if (defined.empty()) {
    cell.median = cell.p5 = cell.p95 = kNaN;
    return cell;
  }
  std::sort(defined.begin(), defined.end());
  cell.p5 = quantile_sorted(defined, 0.05);
  cell.median = quantile_sorted(defined, 0.50);
  cell.p95 = quantile_sorted(defined, 0.95);
  return cell;
}

SeedOutcome run_benchmark_seed(const BenchmarkConfig& config, std::uint64_t seed,
                               bool dump_scores) {
  SeedOutcome out;
  TabularData data;
  if (config.synthetic) {
    SyntheticSpec spec = *config.synthetic;
    spec.seed = derive_seed(seed, "data");
    data = generate_synthetic(spec);
  } else {
    data = *config.table;
  }

  SplitDataset split = make_splits(data, config.fractions, config.cal_d1_fraction, seed);
  out.hash = split_hash(split);

  Standardizer scaler = fit_standardizer(split.train);
  TabularData train = apply_standardizer(scaler, split.train);
  TabularData d1 = apply_standardizer(scaler, split.cal_d1);
  TabularData d2 = apply_standardizer(scaler, split.cal_d2);
  TabularData validation = apply_standardizer(scaler, split.validation);
  TabularData test = apply_standardizer(scaler, split.test);

  Predictor g = fit_predictor(train, config.predictor, config.predictor_hp);
  std::vector<double> d1_z = realized_losses(g, config.loss, d1);
  std::vector<double> d2_z = realized_losses(g, config.loss, d2);
  std::vector<double> val_z = realized_losses(g, config.loss, validation);
  std::vector<double> test_z = realized_losses(g, config.loss, test);

  double tau = config.tau_explicit ? *config.tau_explicit
                                   : tau_from_quantile(val_z, config.tau_level);
  std::vector<bool> exceed_val(val_z.size());
  for (std::size_t i = 0; i < val_z.size(); ++i) exceed_val[i] = val_z[i] > tau;

  if (dump_scores) {
    for (std::size_t j = 0; j < test.dim(); ++j) {
      out.dump_header.push_back(test.column_names[j]);
      std::vector<double> col(test.size());
      for (std::size_t i = 0; i < test.size(); ++i) col[i] = test.features.at(i, j);
      out.dump_columns.push_back(std::move(col));
    }
    out.dump_header.push_back("loss");
    out.dump_columns.push_back(test_z);
  }

  const bool wants_iflag = std::count(config.methods.begin(), config.methods.end(),
                                      std::string("iflag")) > 0;
  const bool wants_var = std::count(config.methods.begin(), config.methods.end(),
                                    std::string("label-variance")) > 0;

  for (const auto& engine_spec : config.engines) {
    EngineHyperparams hp = engine_spec.hp;
    hp.seed = derive_seed(seed, "engine:" + engine_spec.label);
    std::shared_ptr<LossCdfEngine> engine =
        fit_engine(d1.features, d1_z, engine_spec.kind, hp);

    AggregationMode mode;
    if (engine_spec.mode == "mean") {
      mode = AggregationMode::mean();
    } else if (engine_spec.mode == "envelope") {
      mode = AggregationMode::envelope_fixed(engine_spec.fixed_gamma);
    } else if (engine_spec.mode == "envelope_scarcity") {
      auto index = std::make_shared<ScarcityIndex>(
          d1.features, std::min(config.scarcity_k, d1.features.rows), config.mapping);
      mode = AggregationMode::envelope_scarcity(index);
    } else {
      throw ValidationError("benchmark: unknown aggregation mode: " + engine_spec.mode);
    }

    CalibrationContext ctx{engine, mode, pit_values(*engine, mode, d2.features, d2_z)};
    std::sort(ctx.sorted_pit.begin(), ctx.sorted_pit.end());
    CalibratedBound bound = ctx.bound_at(config.alpha);
    std::vector<double> u_val = bound.score_all(validation.features);
    std::vector<double> u_test = bound.score_all(test.features);

    if (dump_scores) {
      out.dump_header.push_back("u:" + engine_spec.label);
      out.dump_columns.push_back(u_test);
    }

    for (const auto& method : config.methods) {
      if (method == "iflag" || method == "label-variance") continue;
      SeedCell cell;
      cell.label = method + ":" + engine_spec.label;
      if (method == "locus-default") {
        cell.metrics = compute_metrics(test_z, u_test, tau, tau);
      } else if (method == "locus-tuned") {
        auto [rule, report] = tune_lambda(u_val, exceed_val, default_lambda_grid(u_val),
                                          config.eta, config.rho_min, config.alpha);
        cell.metrics = compute_metrics(test_z, u_test, tau, rule.lambda);
      } else if (method == "locus-alpha") {
        auto grid = default_alpha_grid();
        auto [rule, report] = tune_alpha(ctx, tau, grid, config.eta, config.rho_min,
                                         validation.features, val_z);
        if (rule.empty()) {
          cell.metrics = compute_metrics(test_z, u_test, tau, std::nullopt);
        } else {
          CalibratedBound tuned = ctx.bound_at(rule.alpha);
          cell.metrics =
              compute_metrics(test_z, tuned.score_all(test.features), tau, rule.lambda);
        }
      } else if (method == "locus-certified") {
        auto [rule, report] =
            certify_lambda(u_val, exceed_val, default_lambda_grid(u_val), config.eta,
                           config.delta, config.alpha);
        cell.metrics = compute_metrics(test_z, u_test, tau, rule.lambda);
      } else if (method == "locus-matched") {
        double lambda = matched_acceptance_threshold(u_val, config.target_acceptance);
        cell.metrics = compute_metrics(test_z, u_test, tau, lambda);
      } else {
        throw ValidationError("benchmark: unknown method: " + method);
      }
      out.cells.push_back(std::move(cell));
    }
  }

  if (wants_iflag) {
    IsolationForest forest(train.features, config.iforest_trees,
                           config.iforest_subsample, derive_seed(seed, "iflag"));
    std::vector<double> s_val = forest.score_all(validation.features);
    std::vector<double> s_test = forest.score_all(test.features);
    double lambda = matched_acceptance_threshold(s_val, config.target_acceptance);
    out.cells.push_back(
        {"iflag", compute_metrics(test_z, s_test, tau, lambda), false});
    if (dump_scores) {
      out.dump_header.push_back("iflag");
      out.dump_columns.push_back(s_test);
    }
  }
  if (wants_var) {
    LabelVarianceScore var(train.features, train.target,
                           std::min(config.label_variance_k, train.size()));
    std::vector<double> s_val = var.score_all(validation.features);
    std::vector<double> s_test = var.score_all(test.features);
    double lambda = matched_acceptance_threshold(s_val, config.target_acceptance);
    out.cells.push_back(
        {"label-variance", compute_metrics(test_z, s_test, tau, lambda), false});
    if (dump_scores) {
      out.dump_header.push_back("label_variance");
      out.dump_columns.push_back(s_test);
    }
  }
  out.ok = true;
  return out;
}

}  // namespace

BenchmarkSummary run_benchmark(const BenchmarkConfig& config,
                               std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ValidationError("benchmark: empty seed list");
  if (config.synthetic.has_value() == config.table.has_value()) {
    throw ValidationError("benchmark: exactly one data source must be set");
  }
  if (config.engines.empty()) throw ValidationError("benchmark: no engines configured");
  if (config.methods.empty()) throw ValidationError("benchmark: no methods configured");

  // Seeds are independent; run them on a small pool and reduce in seed order
  // so the summary does not depend on scheduling.
  std::vector<SeedOutcome> outcomes(seeds.size());
  std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, seeds.size());
  std::atomic<std::size_t> cursor{0};
  auto work = [&] {
    for (std::size_t i; (i = cursor.fetch_add(1)) < seeds.size();) {
      try {
        outcomes[i] = run_benchmark_seed(config, seeds[i],
                                         config.dump_scores && i == 0);
      } catch (const std::exception& e) {
        outcomes[i].ok = false;
        outcomes[i].error =
            "seed " + std::to_string(seeds[i]) + ": " + e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  BenchmarkSummary summary;
  summary.seeds.assign(seeds.begin(), seeds.end());
  summary.metric_names.assign(std::begin(kMetricNames), std::end(kMetricNames));
  for (const SeedOutcome& outcome : outcomes) {
    if (!outcome.ok) {
      ++summary.failures;
      summary.failure_messages.push_back(outcome.error);
      continue;
    }
    summary.split_hashes.push_back(outcome.hash);
    for (const SeedCell& cell : outcome.cells) {
      auto& slot = summary.raw[cell.label];
      slot["acceptance_rate"].push_back(cell.metrics.acceptance_rate);
      slot["marginal_tail_rate"].push_back(cell.metrics.marginal_tail_rate);
      slot["conditional_tail_rate"].push_back(
          cell.metrics.conditional_tail_rate ? *cell.metrics.conditional_tail_rate
                                             : kNaN);
      slot["marginal_coverage"].push_back(
          cell.coverage_meaningful ? cell.metrics.marginal_coverage : kNaN);
    }
    if (!outcome.dump_header.empty() && summary.dump_header.empty()) {
      summary.dump_header = outcome.dump_header;
      summary.dump_columns = outcome.dump_columns;
    }
  }

  for (const auto& [label, metrics] : summary.raw) {
    summary.method_labels.push_back(label);
    for (const auto& [metric, values] : metrics) {
      summary.cells[label][metric] = summarize(values);
    }
  }
  return summary;
}

std::string BenchmarkSummary::to_table() const {
  std::ostringstream out;
  out << "method";
  for (const auto& metric : metric_names) out << '\t' << metric;
  out << '\n';
  char buf[64];
  for (const auto& label : method_labels) {
    out << label;
    for (const auto& metric : metric_names) {
      const CellSummary& cell = cells.at(label).at(metric);
      if (cell.defined == 0) {
        out << "\t-- (--; --)";
      } else {
        std::snprintf(buf, sizeof buf, "\t%.1f (%.1f; %.1f)", 100.0 * cell.median,
                      100.0 * cell.p5, 100.0 * cell.p95);
        out << buf;
      }
    }
    out << '\n';
  }
  if (failures > 0) {
    out << "warning: " << failures << " seed(s) failed and were excluded\n";
  }
  return out.str();
}

}  // namespace locus
