#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "locus/artifact.hpp"
#include "locus/cli.hpp"
#include "locus/errors.hpp"
#include "locus/evaluation.hpp"
#include "locus/quantiles.hpp"

namespace py = pybind11;
using namespace locus;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& arr) {
  if (arr.ndim() != 2) throw ValidationError("expected a 2-D float array");
  Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
  std::memcpy(m.values.data(), arr.data(), sizeof(double) * m.values.size());
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> arr({m.rows, m.cols});
  std::memcpy(arr.mutable_data(), m.values.data(), sizeof(double) * m.values.size());
  return arr;
}

std::vector<double> row_vector(const DoubleArray& arr) {
  if (arr.ndim() != 1) throw ValidationError("expected a 1-D float array");
  return {arr.data(), arr.data() + arr.shape(0)};
}

SyntheticSpec spec_from_json_str(const std::string& text) {
  return synthetic_from_json(nlohmann::json::parse(text));
}

std::string run_benchmark_json(const std::string& config_text) {
  RunConfig config = parse_run_config(nlohmann::json::parse(config_text));
  BenchmarkConfig bench = to_benchmark_config(config);
  std::vector<std::uint64_t> seeds = config.seeds;
  if (seeds.empty()) {
    for (std::uint64_t s = 1; s <= 30; ++s) seeds.push_back(s);
  }
  BenchmarkSummary summary = run_benchmark(bench, seeds);
  nlohmann::json raw;
  for (const auto& [label, metrics] : summary.raw) {
    for (const auto& [metric, values] : metrics) {
      nlohmann::json arr = nlohmann::json::array();
      for (double v : values) arr.push_back(std::isnan(v) ? nlohmann::json(nullptr)
                                                          : nlohmann::json(v));
      raw[label][metric] = std::move(arr);
    }
  }
  nlohmann::json j{{"seeds", summary.seeds},
                   {"failures", summary.failures},
                   {"methods", summary.method_labels},
                   {"raw", std::move(raw)},
                   {"table", summary.to_table()}};
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Calibrated per-input loss-quantile scores with distribution-free "
            "flagging rules";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);

  // ---- data -----------------------------------------------------------
  py::class_<TabularData>(m, "TabularData")
      .def(py::init([](const DoubleArray& features, const DoubleArray& target,
                       std::vector<std::string> columns) {
             TabularData d;
             d.features = to_matrix(features);
             d.target = row_vector(target);
             if (columns.empty()) {
               for (std::size_t j = 0; j < d.features.cols; ++j) {
                 columns.push_back("x" + std::to_string(j + 1));
               }
             }
             d.column_names = std::move(columns);
             if (d.target.size() != d.features.rows) {
               throw ValidationError("target length must match feature rows");
             }
             return d;
           }),
           py::arg("features"), py::arg("target"),
           py::arg("columns") = std::vector<std::string>{})
      .def_property_readonly("features",
                             [](const TabularData& d) { return to_array(d.features); })
      .def_property_readonly("target", [](const TabularData& d) { return d.target; })
      .def_property_readonly("columns",
                             [](const TabularData& d) { return d.column_names; })
      .def("__len__", &TabularData::size);

  m.def("load_csv", &load_csv, py::arg("path"), py::arg("target_column"));
  m.def("write_csv", &write_csv, py::arg("path"), py::arg("data"),
        py::arg("target_column") = "y");

  m.def("synthetic_spec_from_json", &spec_from_json_str, py::arg("json_text"),
        "Parse a synthetic-process spec from its JSON form");
  py::class_<SyntheticSpec>(m, "SyntheticSpec").def(py::init<>());
  m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));

  py::class_<SyntheticOracle>(m, "SyntheticOracle")
      .def(py::init<SyntheticSpec>())
      .def("mean", [](const SyntheticOracle& o, const DoubleArray& x) {
        return o.mean(row_vector(x));
      })
      .def("scale", [](const SyntheticOracle& o, const DoubleArray& x) {
        return o.scale(row_vector(x));
      })
      .def("loss_quantile",
           [](const SyntheticOracle& o, double level, const DoubleArray& x, double gx,
              const std::string& loss) {
             return o.loss_quantile(level, row_vector(x), gx, parse_loss(loss));
           },
           py::arg("level"), py::arg("x"), py::arg("gx"), py::arg("loss") = "absolute")
      .def("loss_cdf",
           [](const SyntheticOracle& o, double z, const DoubleArray& x, double gx,
              const std::string& loss) {
             return o.loss_cdf(z, row_vector(x), gx, parse_loss(loss));
           },
           py::arg("z"), py::arg("x"), py::arg("gx"), py::arg("loss") = "absolute");

  py::class_<Standardizer>(m, "Standardizer")
      .def_readonly("feature_means", &Standardizer::feature_means)
      .def_readonly("feature_sds", &Standardizer::feature_sds)
      .def_readonly("target_mean", &Standardizer::target_mean)
      .def_readonly("target_sd", &Standardizer::target_sd);
  m.def("fit_standardizer", &fit_standardizer);
  m.def("apply_standardizer", &apply_standardizer);
  m.def("invert_standardizer", &invert_standardizer);

  py::class_<SplitDataset>(m, "SplitDataset")
      .def_readonly("train", &SplitDataset::train)
      .def_readonly("cal_d1", &SplitDataset::cal_d1)
      .def_readonly("cal_d2", &SplitDataset::cal_d2)
      .def_readonly("validation", &SplitDataset::validation)
      .def_readonly("test", &SplitDataset::test);
  m.def("make_splits",
        [](const TabularData& data, std::vector<double> fractions,
           double cal_d1_fraction, std::uint64_t seed) {
          if (fractions.size() != 4) {
            throw ValidationError("fractions must have 4 entries");
          }
          return make_splits(data,
                             {fractions[0], fractions[1], fractions[2], fractions[3]},
                             cal_d1_fraction, seed);
        },
        py::arg("data"), py::arg("fractions") = std::vector<double>{0.4, 0.4, 0.1, 0.1},
        py::arg("cal_d1_fraction") = 0.5, py::arg("seed") = 1);

  // ---- predictors ------------------------------------------------------
  py::class_<Predictor>(m, "Predictor")
      .def_property_readonly("kind",
                             [](const Predictor& p) { return predictor_name(p.kind); })
      .def_property_readonly("coefficients",
                             [](const Predictor& p) { return p.coefficients; })
      .def_property_readonly("intercept", [](const Predictor& p) { return p.intercept; });
  m.def("fit_predictor",
        [](const TabularData& train, const std::string& kind, std::size_t knn_k) {
          return fit_predictor(train, parse_predictor(kind), {knn_k});
        },
        py::arg("train"), py::arg("kind") = "linear_ols", py::arg("knn_k") = 5);
  m.def("predict_all", [](const Predictor& p, const DoubleArray& xs) {
    return predict_all(p, to_matrix(xs));
  });
  m.def("realized_losses",
        [](const Predictor& p, const std::string& loss, const TabularData& data) {
          return realized_losses(p, parse_loss(loss), data);
        },
        py::arg("predictor"), py::arg("loss"), py::arg("data"));
  m.def("tau_from_quantile",
        [](std::vector<double> losses, double level) {
          return tau_from_quantile(losses, level);
        },
        py::arg("losses"), py::arg("level") = 0.7);

  // ---- loss-CDF engines ------------------------------------------------
  py::class_<LossCdfEngine, std::shared_ptr<LossCdfEngine>>(m, "LossCdfEngine")
      .def_property_readonly("draw_count", &LossCdfEngine::draw_count);
  m.def("fit_engine",
        [](const DoubleArray& d1_x, std::vector<double> d1_z, const std::string& kind,
           std::size_t ensemble_size, std::size_t k_local, std::size_t k_empirical,
           double scale_floor, std::uint64_t seed) {
          EngineHyperparams hp{ensemble_size, k_local, k_empirical, scale_floor, seed};
          return fit_engine(to_matrix(d1_x), d1_z, parse_engine(kind), hp);
        },
        py::arg("d1_features"), py::arg("d1_losses"),
        py::arg("kind") = "knn_empirical", py::arg("ensemble_size") = 30,
        py::arg("k_local") = 0, py::arg("k_empirical") = 0,
        py::arg("scale_floor") = 1e-6, py::arg("seed") = 0);
  m.def("cdf_draws", [](const LossCdfEngine& engine, const DoubleArray& x, double z) {
    return cdf_draws(engine, row_vector(x), z);
  });
  m.def("mean_cdf", [](const LossCdfEngine& engine, const DoubleArray& x, double z) {
    return mean_cdf(engine, row_vector(x), z);
  });
  m.def("envelope_cdf",
        [](const LossCdfEngine& engine, const DoubleArray& x, double z, double gamma) {
          return envelope_cdf(engine, row_vector(x), z, gamma);
        });

  // ---- scarcity ----------------------------------------------------------
  py::class_<ScarcityIndex, std::shared_ptr<ScarcityIndex>>(m, "ScarcityIndex")
      .def(py::init([](const DoubleArray& reference, std::size_t k, double gamma_min,
                       double gamma_max, double midpoint, double slope_scale,
                       double eps) {
             GammaMapping mapping{gamma_min, gamma_max, midpoint, slope_scale, eps};
             return ScarcityIndex(to_matrix(reference), k, mapping);
           }),
           py::arg("reference"), py::arg("k") = 50, py::arg("gamma_min") = 0.15,
           py::arg("gamma_max") = 0.9, py::arg("midpoint") = 0.0,
           py::arg("slope_scale") = 1.0, py::arg("eps") = 1e-6)
      .def("radius", [](const ScarcityIndex& s, const DoubleArray& x) {
        return s.radius(row_vector(x));
      })
      .def("scarcity_score", [](const ScarcityIndex& s, const DoubleArray& x) {
        return s.scarcity_score(row_vector(x));
      })
      .def("gamma_of", [](const ScarcityIndex& s, const DoubleArray& x) {
        return s.gamma_of(row_vector(x));
      })
      .def("gamma_from_score", &ScarcityIndex::gamma_from_score)
      .def_property_readonly("q_lo", &ScarcityIndex::q_lo)
      .def_property_readonly("q_hi", &ScarcityIndex::q_hi);

  // ---- calibration ---------------------------------------------------------
  py::class_<AggregationMode>(m, "AggregationMode");
  m.def("mode_mean", [] { return AggregationMode::mean(); });
  m.def("mode_envelope", &AggregationMode::envelope_fixed, py::arg("gamma"));
  m.def("mode_envelope_scarcity",
        [](std::shared_ptr<ScarcityIndex> index) {
          return AggregationMode::envelope_scarcity(std::move(index));
        },
        py::arg("index"));

  m.def("pit_values",
        [](const std::shared_ptr<LossCdfEngine>& engine, const AggregationMode& mode,
           const DoubleArray& d2_x, std::vector<double> d2_z) {
          return pit_values(*engine, mode, to_matrix(d2_x), d2_z);
        },
        py::arg("engine"), py::arg("mode"), py::arg("d2_features"),
        py::arg("d2_losses"));
  m.def("calibrate_level",
        [](std::vector<double> pit, double alpha) { return calibrate_level(pit, alpha); },
        py::arg("pit"), py::arg("alpha"));
  m.def("invert_cdf",
        [](const std::shared_ptr<LossCdfEngine>& engine, const AggregationMode& mode,
           const DoubleArray& x, double t) {
          return invert_cdf(*engine, mode, row_vector(x), t);
        });

  py::class_<CalibratedBound>(m, "CalibratedBound")
      .def(py::init([](std::shared_ptr<LossCdfEngine> engine, const AggregationMode& mode,
                       std::vector<double> pit, double alpha) {
             return CalibratedBound(std::move(engine), mode, std::move(pit), alpha);
           }),
           py::arg("engine"), py::arg("mode"), py::arg("pit"), py::arg("alpha"))
      .def("score", [](const CalibratedBound& b, const DoubleArray& x) {
        return b.score(row_vector(x));
      })
      .def("score_all", [](const CalibratedBound& b, const DoubleArray& xs) {
        return b.score_all(to_matrix(xs));
      })
      .def_property_readonly("alpha", &CalibratedBound::alpha)
      .def_property_readonly("t", &CalibratedBound::t)
      .def_property_readonly("n2", &CalibratedBound::n2)
      .def_property_readonly("pit", &CalibratedBound::sorted_pit);

  // ---- flagging --------------------------------------------------------
  py::class_<FlagRule>(m, "FlagRule")
      .def_property_readonly("empty", &FlagRule::empty)
      .def_property_readonly("lambda_",
                             [](const FlagRule& r) {
                               return r.lambda ? py::object(py::float_(*r.lambda))
                                               : py::object(py::none());
                             })
      .def_readonly("alpha", &FlagRule::alpha)
      .def_property_readonly("provenance",
                             [](const FlagRule& r) { return provenance_name(r.provenance); })
      .def("accepts", &FlagRule::accepts);

  py::class_<TuneRow>(m, "TuneRow")
      .def_readonly("candidate", &TuneRow::candidate)
      .def_readonly("n_accepted", &TuneRow::n_accepted)
      .def_readonly("acceptance", &TuneRow::acceptance)
      .def_readonly("q_value", &TuneRow::q_value)
      .def_readonly("feasible", &TuneRow::feasible);
  py::class_<TuneReport>(m, "TuneReport")
      .def_readonly("kind", &TuneReport::kind)
      .def_readonly("rows", &TuneReport::rows)
      .def_property_readonly("chosen",
                             [](const TuneReport& r) {
                               return r.chosen ? py::object(py::float_(*r.chosen))
                                               : py::object(py::none());
                             })
      .def_readonly("eps_h", &TuneReport::eps_h)
      .def_readonly("eps_g", &TuneReport::eps_g)
      .def("to_table", &TuneReport::to_table);

  m.def("default_rule", &default_rule, py::arg("bound"), py::arg("tau"));
  m.def("tune_lambda",
        [](std::vector<double> scores, std::vector<bool> exceed,
           std::vector<double> grid, double eta, double rho_min, double alpha) {
          return tune_lambda(scores, exceed, grid, eta, rho_min, alpha);
        },
        py::arg("scores"), py::arg("exceed"), py::arg("grid"), py::arg("eta"),
        py::arg("rho_min") = 0.05, py::arg("alpha") = 0.1);
  m.def("certify_lambda",
        [](std::vector<double> scores, std::vector<bool> exceed,
           std::vector<double> grid, double eta, double delta, double alpha) {
          return certify_lambda(scores, exceed, grid, eta, delta, alpha);
        },
        py::arg("scores"), py::arg("exceed"), py::arg("grid"), py::arg("eta"),
        py::arg("delta") = 0.1, py::arg("alpha") = 0.1);
  m.def("tune_alpha",
        [](std::shared_ptr<LossCdfEngine> engine, const AggregationMode& mode,
           std::vector<double> pit, double tau, std::vector<double> grid, double eta,
           double rho_min, const DoubleArray& val_x, std::vector<double> val_z) {
          std::sort(pit.begin(), pit.end());
          CalibrationContext ctx{std::move(engine), mode, std::move(pit)};
          return tune_alpha(ctx, tau, grid, eta, rho_min, to_matrix(val_x), val_z);
        },
        py::arg("engine"), py::arg("mode"), py::arg("pit"), py::arg("tau"),
        py::arg("grid"), py::arg("eta"), py::arg("rho_min"), py::arg("val_features"),
        py::arg("val_losses"));
  m.def("certify_epsilons", [](std::size_t n, double delta) {
    CertifyEpsilons e = certify_epsilons(n, delta);
    return py::make_tuple(e.eps_h, e.eps_g);
  });
  m.def("default_lambda_grid",
        [](std::vector<double> scores, std::size_t count) {
          return default_lambda_grid(scores, count);
        },
        py::arg("scores"), py::arg("count") = 50);
  m.def("default_alpha_grid", &default_alpha_grid);

  // ---- evaluation ------------------------------------------------------
  py::class_<RunMetrics>(m, "RunMetrics")
      .def_readonly("acceptance_rate", &RunMetrics::acceptance_rate)
      .def_readonly("marginal_tail_rate", &RunMetrics::marginal_tail_rate)
      .def_property_readonly("conditional_tail_rate",
                             [](const RunMetrics& r) {
                               return r.conditional_tail_rate
                                          ? py::object(py::float_(*r.conditional_tail_rate))
                                          : py::object(py::none());
                             })
      .def_readonly("marginal_coverage", &RunMetrics::marginal_coverage);
  m.def("compute_metrics",
        [](std::vector<double> losses, std::vector<double> scores, double tau,
           py::object lambda) {
          std::optional<double> l;
          if (!lambda.is_none()) l = lambda.cast<double>();
          return compute_metrics(losses, scores, tau, l);
        },
        py::arg("losses"), py::arg("scores"), py::arg("tau"), py::arg("lambda_"));

  py::class_<IsolationForest>(m, "IsolationForest")
      .def(py::init([](const DoubleArray& train, std::size_t n_trees,
                       std::size_t subsample, std::uint64_t seed) {
             return IsolationForest(to_matrix(train), n_trees, subsample, seed);
           }),
           py::arg("train"), py::arg("n_trees") = 100, py::arg("subsample") = 256,
           py::arg("seed") = 0)
      .def("score", [](const IsolationForest& f, const DoubleArray& x) {
        return f.score(row_vector(x));
      })
      .def("score_all", [](const IsolationForest& f, const DoubleArray& xs) {
        return f.score_all(to_matrix(xs));
      });

  py::class_<LabelVarianceScore>(m, "LabelVarianceScore")
      .def(py::init([](const DoubleArray& x, std::vector<double> y, std::size_t k) {
             return LabelVarianceScore(to_matrix(x), std::move(y), k);
           }),
           py::arg("features"), py::arg("target"), py::arg("k_local") = 200)
      .def("score", [](const LabelVarianceScore& s, const DoubleArray& x) {
        return s.score(row_vector(x));
      })
      .def("score_all", [](const LabelVarianceScore& s, const DoubleArray& xs) {
        return s.score_all(to_matrix(xs));
      });

  m.def("matched_acceptance_threshold",
        [](std::vector<double> scores, double target) {
          return matched_acceptance_threshold(scores, target);
        },
        py::arg("scores"), py::arg("target_rate") = 0.7);

  // ---- pipeline-level helpers -------------------------------------------
  m.def("run_benchmark_json", &run_benchmark_json, py::arg("config_json"),
        "Run the benchmark harness from a run-config JSON string; returns the "
        "results as a JSON string");
  m.def("calibrate_artifact",
        [](const std::string& config_json, const std::string& artifact_path) {
          RunConfig config = parse_run_config(nlohmann::json::parse(config_json));
          return cli::cmd_calibrate(config, artifact_path);
        },
        py::arg("config_json"), py::arg("artifact_path"),
        "Run the calibrate pipeline and write an artifact; returns the exit code");
  m.def("score_csv", &cli::cmd_score, py::arg("artifact_path"), py::arg("input_csv"),
        py::arg("output_csv"));
  m.def("verify_artifact_probes", [](const std::string& path) {
    return verify_probes(load_artifact(path));
  });
  m.def("empirical_quantile",
        [](std::vector<double> values, double level) {
          return empirical_quantile(values, level);
        },
        py::arg("values"), py::arg("level"));

#ifdef LOCUS_VERSION
  m.attr("__version__") = LOCUS_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
