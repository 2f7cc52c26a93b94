#include "locus/artifact.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "locus/errors.hpp"

namespace locus {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows}, {"cols", m.cols}, {"values", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const json& rows = j.at("values");
  if (rows.size() != m.rows) throw ValidationError("artifact: matrix row count mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) {
    const json& row = rows[i];
    if (row.size() != m.cols) throw ValidationError("artifact: matrix column mismatch");
    for (std::size_t j2 = 0; j2 < m.cols; ++j2) m.at(i, j2) = row[j2].get<double>();
  }
  return m;
}

json predictor_to_json(const Predictor& p, const PredictorHyperparams& hp) {
  json j{{"kind", predictor_name(p.kind)}};
  if (p.kind == PredictorKind::kKnnRegressor) {
    j["k"] = p.k;
    j["train_features"] = matrix_to_json(p.train_features);
    j["train_target"] = p.train_target;
  } else {
    j["coefficients"] = p.coefficients;
    j["intercept"] = p.intercept;
  }
  j["hyperparams"] = json{{"knn_k", hp.knn_k}};
  return j;
}

void predictor_from_json(const json& j, Predictor& p, PredictorHyperparams& hp) {
  p.kind = parse_predictor(j.at("kind").get<std::string>());
  if (p.kind == PredictorKind::kKnnRegressor) {
    p.k = j.at("k").get<std::size_t>();
    p.train_features = matrix_from_json(j.at("train_features"));
    p.train_target = j.at("train_target").get<std::vector<double>>();
  } else {
    p.coefficients = j.at("coefficients").get<std::vector<double>>();
    p.intercept = j.at("intercept").get<double>();
  }
  hp.knn_k = j.at("hyperparams").at("knn_k").get<std::size_t>();
}

}  // namespace

std::string fnv1a_hex(const std::string& payload) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_artifact(const Artifact& a, const std::string& path) {
  json j;
  j["schema_version"] = a.schema_version;
  j["created_at"] = a.created_at;
  j["config_hash"] = a.config_hash;
  j["config"] = a.config_echo.empty() ? json(nullptr) : json::parse(a.config_echo);
  j["seed"] = a.seed;
  j["columns"] = a.columns;
  j["target_column"] = a.target_column;
  j["standardizer"] = json{{"feature_means", a.standardizer.feature_means},
                           {"feature_sds", a.standardizer.feature_sds},
                           {"target_mean", a.standardizer.target_mean},
                           {"target_sd", a.standardizer.target_sd}};
  j["predictor"] = predictor_to_json(a.predictor, a.predictor_hp);
  j["loss"] = loss_name(a.loss);
  j["tau"] = a.tau;

  json engine{{"kind", engine_name(a.engine_kind)},
              {"ensemble_size", a.engine_hp.ensemble_size},
              {"k_local", a.engine_hp.k_local},
              {"k_empirical", a.engine_hp.k_empirical},
              {"scale_floor", a.engine_hp.scale_floor},
              {"seed", a.engine_hp.seed},
              {"d1_features", matrix_to_json(a.d1_features)},
              {"d1_losses", a.d1_losses}};
  if (a.engine_kind == EngineKind::kBootstrapGaussianEnsemble) {
    engine["resamples"] = a.resamples;
  }
  j["engine"] = std::move(engine);

  if (a.has_scarcity) {
    j["scarcity"] = json{{"k", a.scarcity_k},
                         {"gamma_min", a.mapping.gamma_min},
                         {"gamma_max", a.mapping.gamma_max},
                         {"midpoint", a.mapping.midpoint},
                         {"slope_scale", a.mapping.slope_scale},
                         {"eps", a.mapping.eps},
                         {"q_lo", a.q_lo},
                         {"q_hi", a.q_hi},
                         {"reference", matrix_to_json(a.scarcity_reference)}};
  } else {
    j["scarcity"] = nullptr;
  }

  j["calibration"] = json{{"mode", a.mode_kind},
                          {"uses_scarcity", a.mode_uses_scarcity},
                          {"fixed_gamma", a.fixed_gamma},
                          {"alpha", a.alpha},
                          {"t", a.t},
                          {"n2", a.pit.size()},
                          {"pit", a.pit}};

  if (a.has_rule) {
    json rule{{"provenance", provenance_name(a.rule.provenance)},
              {"alpha", a.rule.alpha},
              {"eta", a.eta},
              {"delta", a.delta},
              {"rho_min", a.rho_min},
              {"eps_h", a.eps_h},
              {"eps_g", a.eps_g}};
    rule["lambda"] = a.rule.lambda ? json(*a.rule.lambda) : json(nullptr);
    j["flag_rule"] = std::move(rule);
  } else {
    j["flag_rule"] = nullptr;
  }

  json probes{{"x", matrix_to_json(a.probe_x)}, {"u", a.probe_u}};
  probes["gamma"] = a.probe_gamma;
  j["probes"] = std::move(probes);

  std::ofstream out(path);
  if (!out) throw ValidationError("artifact: cannot write " + path);
  out << j.dump(2) << '\n';
}

Artifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("artifact: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("artifact: malformed JSON: ") + e.what());
  }

  Artifact a;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw ValidationError("artifact: missing schema_version");
  }
  a.schema_version = j["schema_version"].get<int>();
  if (a.schema_version != 1) {
    throw ValidationError("artifact: unsupported schema_version " +
                          std::to_string(a.schema_version));
  }

  a.created_at = j.value("created_at", "");
  a.config_hash = j.value("config_hash", "");
  if (j.contains("config") && !j["config"].is_null()) {
    a.config_echo = j["config"].dump();
  }
  a.seed = j.at("seed").get<std::uint64_t>();
  a.columns = j.at("columns").get<std::vector<std::string>>();
  a.target_column = j.at("target_column").get<std::string>();

  const json& s = j.at("standardizer");
  a.standardizer.feature_means = s.at("feature_means").get<std::vector<double>>();
  a.standardizer.feature_sds = s.at("feature_sds").get<std::vector<double>>();
  a.standardizer.target_mean = s.at("target_mean").get<double>();
  a.standardizer.target_sd = s.at("target_sd").get<double>();

  predictor_from_json(j.at("predictor"), a.predictor, a.predictor_hp);
  a.loss = parse_loss(j.at("loss").get<std::string>());
  a.tau = j.at("tau").get<double>();

  const json& e = j.at("engine");
  a.engine_kind = parse_engine(e.at("kind").get<std::string>());
  a.engine_hp.ensemble_size = e.at("ensemble_size").get<std::size_t>();
  a.engine_hp.k_local = e.at("k_local").get<std::size_t>();
  a.engine_hp.k_empirical = e.at("k_empirical").get<std::size_t>();
  a.engine_hp.scale_floor = e.at("scale_floor").get<double>();
  a.engine_hp.seed = e.at("seed").get<std::uint64_t>();
  a.d1_features = matrix_from_json(e.at("d1_features"));
  a.d1_losses = e.at("d1_losses").get<std::vector<double>>();
  if (a.engine_kind == EngineKind::kBootstrapGaussianEnsemble) {
    a.resamples = e.at("resamples").get<std::vector<std::vector<std::uint32_t>>>();
  }

  if (j.contains("scarcity") && !j["scarcity"].is_null()) {
    const json& sc = j["scarcity"];
    a.has_scarcity = true;
    a.scarcity_k = sc.at("k").get<std::size_t>();
    a.mapping.gamma_min = sc.at("gamma_min").get<double>();
    a.mapping.gamma_max = sc.at("gamma_max").get<double>();
    a.mapping.midpoint = sc.at("midpoint").get<double>();
    a.mapping.slope_scale = sc.at("slope_scale").get<double>();
    a.mapping.eps = sc.at("eps").get<double>();
    a.q_lo = sc.at("q_lo").get<double>();
    a.q_hi = sc.at("q_hi").get<double>();
    a.scarcity_reference = matrix_from_json(sc.at("reference"));
  }

  const json& c = j.at("calibration");
  a.mode_kind = c.at("mode").get<std::string>();
  a.mode_uses_scarcity = c.at("uses_scarcity").get<bool>();
  a.fixed_gamma = c.at("fixed_gamma").get<double>();
  a.alpha = c.at("alpha").get<double>();
  a.t = c.at("t").get<double>();
  a.pit = c.at("pit").get<std::vector<double>>();
  if (a.pit.size() != c.at("n2").get<std::size_t>()) {
    throw ValidationError("artifact: n2 does not match stored PIT vector");
  }

  if (j.contains("flag_rule") && !j["flag_rule"].is_null()) {
    const json& r = j["flag_rule"];
    a.has_rule = true;
    a.rule.provenance = parse_provenance(r.at("provenance").get<std::string>());
    a.rule.alpha = r.at("alpha").get<double>();
    if (!r.at("lambda").is_null()) a.rule.lambda = r.at("lambda").get<double>();
    a.eta = r.value("eta", 0.0);
    a.delta = r.value("delta", 0.0);
    a.rho_min = r.value("rho_min", 0.0);
    a.eps_h = r.value("eps_h", 0.0);
    a.eps_g = r.value("eps_g", 0.0);
  }

  const json& pr = j.at("probes");
  a.probe_x = matrix_from_json(pr.at("x"));
  a.probe_u = pr.at("u").get<std::vector<double>>();
  a.probe_gamma = pr.at("gamma").get<std::vector<double>>();
  return a;
}

ScoringPipeline instantiate_pipeline(const Artifact& a) {
  ScoringPipeline p;
  if (a.engine_kind == EngineKind::kKnnEmpirical) {
    p.engine = std::make_shared<KnnEmpiricalEngine>(a.d1_features, a.d1_losses,
                                                    a.engine_hp.k_empirical);
  } else {
    p.engine = std::make_shared<BootstrapEnsembleEngine>(
        a.d1_features, a.d1_losses, a.resamples, a.engine_hp.k_local,
        a.engine_hp.scale_floor);
  }

  AggregationMode mode;
  if (a.mode_kind == "mean") {
    mode = AggregationMode::mean();
  } else if (a.mode_kind == "envelope") {
    if (a.mode_uses_scarcity) {
      if (!a.has_scarcity) {
        throw ValidationError("artifact: scarcity mode without scarcity state");
      }
      p.scarcity = std::make_shared<ScarcityIndex>(a.scarcity_reference, a.scarcity_k,
                                                   a.mapping, a.q_lo, a.q_hi);
      mode = AggregationMode::envelope_scarcity(p.scarcity);
    } else {
      mode = AggregationMode::envelope_fixed(a.fixed_gamma);
    }
  } else {
    throw ValidationError("artifact: unknown aggregation mode " + a.mode_kind);
  }

  p.bound = std::make_unique<CalibratedBound>(p.engine, mode, a.pit, a.alpha);
  if (p.bound->t() != a.t) {
    throw ValidationError("artifact: stored calibrated level does not match PITs");
  }
  return p;
}

bool verify_probes(const Artifact& a) {
  ScoringPipeline p = instantiate_pipeline(a);
  if (a.probe_u.size() != a.probe_x.rows) return false;
  for (std::size_t i = 0; i < a.probe_x.rows; ++i) {
    auto x = a.probe_x.row(i);
    if (p.bound->score(x) != a.probe_u[i]) return false;
    if (!a.probe_gamma.empty() && p.scarcity) {
      if (p.scarcity->gamma_of(x) != a.probe_gamma[i]) return false;
    }
  }
  return true;
}

}  // namespace locus
