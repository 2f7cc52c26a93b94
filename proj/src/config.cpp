#include "locus/config.hpp"

#include "locus/errors.hpp"

namespace locus {

using nlohmann::json;

namespace {

void require_range(double v, double lo, double hi, const std::string& field,
                   bool open_lo = true, bool open_hi = true) {
  bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
  if (!ok) {
    throw ValidationError("config: " + field + " out of range (" +
                          std::to_string(v) + ")");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: field \"" + key + "\" has the wrong type");
  }
}

}  // namespace

json synthetic_to_json(const SyntheticSpec& s) {
  return json{{"mean_fn", s.mean_fn},
              {"mean_params", s.mean_params},
              {"scale_fn", s.scale_fn},
              {"scale_params", s.scale_params},
              {"design", s.design},
              {"design_params", s.design_params},
              {"dim", s.dim},
              {"noise", noise_name(s.noise)},
              {"student_df", s.student_df},
              {"n", s.n},
              {"seed", s.seed}};
}

SyntheticSpec synthetic_from_json(const json& j) {
  SyntheticSpec s;
  s.mean_fn = get_or<std::string>(j, "mean_fn", s.mean_fn);
  s.mean_params = get_or(j, "mean_params", s.mean_params);
  s.scale_fn = get_or<std::string>(j, "scale_fn", s.scale_fn);
  s.scale_params = get_or(j, "scale_params", s.scale_params);
  s.design = get_or<std::string>(j, "design", s.design);
  s.design_params = get_or(j, "design_params", s.design_params);
  s.dim = get_or<std::size_t>(j, "dim", s.dim);
  if (j.contains("noise")) s.noise = parse_noise(j.at("noise").get<std::string>());
  s.student_df = get_or(j, "student_df", s.student_df);
  s.n = get_or<std::size_t>(j, "n", s.n);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  SyntheticOracle validate(s);  // constructor performs the checks
  return s;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;

  if (j.contains("data")) {
    const json& d = j.at("data");
    c.synthetic.reset();
    if (d.contains("csv")) {
      c.csv_path = d.at("csv").get<std::string>();
      c.target_column = get_or<std::string>(d, "target", c.target_column);
    }
    if (d.contains("synthetic")) c.synthetic = synthetic_from_json(d.at("synthetic"));
    if (c.csv_path.has_value() == c.synthetic.has_value()) {
      throw ValidationError("config: data must name exactly one of csv / synthetic");
    }
  }

  if (j.contains("split")) {
    const json& s = j.at("split");
    if (s.contains("fractions")) {
      auto f = s.at("fractions").get<std::vector<double>>();
      if (f.size() != 4) throw ValidationError("config: split.fractions needs 4 entries");
      c.fractions = {f[0], f[1], f[2], f[3]};
    }
    c.cal_d1_fraction = get_or(s, "cal_d1_fraction", c.cal_d1_fraction);
    c.seed = get_or<std::uint64_t>(s, "seed", c.seed);
  }
  require_range(c.cal_d1_fraction, 0.0, 1.0, "split.cal_d1_fraction");

  if (j.contains("predictor")) {
    const json& p = j.at("predictor");
    if (p.contains("kind")) c.predictor_kind = parse_predictor(p.at("kind").get<std::string>());
    c.predictor_hp.knn_k = get_or<std::size_t>(p, "knn_k", c.predictor_hp.knn_k);
  }
  if (j.contains("loss")) c.loss = parse_loss(j.at("loss").get<std::string>());

  if (j.contains("engine")) {
    const json& e = j.at("engine");
    if (e.contains("kind")) c.engine_kind = parse_engine(e.at("kind").get<std::string>());
    c.engine_hp.ensemble_size = get_or<std::size_t>(e, "ensemble_size", c.engine_hp.ensemble_size);
    c.engine_hp.k_local = get_or<std::size_t>(e, "k_local", c.engine_hp.k_local);
    c.engine_hp.k_empirical = get_or<std::size_t>(e, "k_empirical", c.engine_hp.k_empirical);
    c.engine_hp.scale_floor = get_or(e, "scale_floor", c.engine_hp.scale_floor);
    if (c.engine_hp.ensemble_size == 0) {
      throw ValidationError("config: engine.ensemble_size must be >= 1");
    }
    if (!(c.engine_hp.scale_floor > 0.0)) {
      throw ValidationError("config: engine.scale_floor must be positive");
    }
  }

  if (j.contains("mode")) {
    const json& m = j.at("mode");
    c.mode_kind = get_or<std::string>(m, "kind", c.mode_kind);
    c.fixed_gamma = get_or(m, "gamma", c.fixed_gamma);
    c.scarcity_k = get_or<std::size_t>(m, "scarcity_k", c.scarcity_k);
    c.mapping.gamma_min = get_or(m, "gamma_min", c.mapping.gamma_min);
    c.mapping.gamma_max = get_or(m, "gamma_max", c.mapping.gamma_max);
    c.mapping.midpoint = get_or(m, "midpoint", c.mapping.midpoint);
    c.mapping.slope_scale = get_or(m, "slope_scale", c.mapping.slope_scale);
    c.mapping.eps = get_or(m, "eps", c.mapping.eps);
  }
  if (c.mode_kind != "mean" && c.mode_kind != "envelope" &&
      c.mode_kind != "envelope_scarcity") {
    throw ValidationError("config: mode.kind must be mean, envelope, or envelope_scarcity");
  }
  if (c.mode_kind == "envelope") require_range(c.fixed_gamma, 0.0, 1.0, "mode.gamma", true, false);
  if (!(c.mapping.gamma_min > 0.0 && c.mapping.gamma_min < c.mapping.gamma_max &&
        c.mapping.gamma_max <= 1.0)) {
    throw ValidationError("config: mode gamma_min/gamma_max out of order");
  }

  c.alpha = get_or(j, "alpha", c.alpha);
  require_range(c.alpha, 0.0, 1.0, "alpha");

  if (j.contains("tau")) {
    const json& t = j.at("tau");
    if (t.contains("value")) c.tau_explicit = t.at("value").get<double>();
    c.tau_level = get_or(t, "level", c.tau_level);
  }
  require_range(c.tau_level, 0.0, 1.0, "tau.level");

  if (j.contains("flagging")) {
    const json& f = j.at("flagging");
    c.method = get_or<std::string>(f, "method", c.method);
    c.eta = get_or(f, "eta", c.eta);
    c.delta = get_or(f, "delta", c.delta);
    c.rho_min = get_or(f, "rho_min", c.rho_min);
    c.lambda_grid = get_or(f, "lambda_grid", c.lambda_grid);
    c.alpha_grid = get_or(f, "alpha_grid", c.alpha_grid);
    c.target_acceptance = get_or(f, "target_acceptance", c.target_acceptance);
  }
  if (c.method != "default-tau" && c.method != "tuned-lambda" &&
      c.method != "tuned-alpha" && c.method != "certified") {
    throw ValidationError("config: flagging.method must be default-tau, tuned-lambda, "
                          "tuned-alpha, or certified");
  }
  require_range(c.eta, 0.0, 1.0, "flagging.eta");
  require_range(c.delta, 0.0, 1.0, "flagging.delta");
  require_range(c.rho_min, 0.0, 1.0, "flagging.rho_min", false, true);
  require_range(c.target_acceptance, 0.0, 1.0, "flagging.target_acceptance");
  for (double a : c.alpha_grid) require_range(a, 0.0, 1.0, "flagging.alpha_grid entry");

  if (j.contains("benchmark")) {
    const json& b = j.at("benchmark");
    c.seeds = get_or(b, "seeds", c.seeds);
    c.benchmark_methods = get_or(b, "methods", c.benchmark_methods);
    if (b.contains("engines")) {
      for (const json& e : b.at("engines")) {
        BenchmarkEngineSpec spec;
        spec.kind = parse_engine(e.at("kind").get<std::string>());
        spec.hp.ensemble_size = get_or<std::size_t>(e, "ensemble_size", spec.hp.ensemble_size);
        spec.hp.k_local = get_or<std::size_t>(e, "k_local", spec.hp.k_local);
        spec.hp.k_empirical = get_or<std::size_t>(e, "k_empirical", spec.hp.k_empirical);
        spec.hp.scale_floor = get_or(e, "scale_floor", spec.hp.scale_floor);
        spec.mode = get_or<std::string>(e, "mode", spec.mode);
        spec.fixed_gamma = get_or(e, "gamma", spec.fixed_gamma);
        spec.label = get_or<std::string>(e, "label", engine_name(spec.kind));
        c.benchmark_engines.push_back(std::move(spec));
      }
    }
  }

  // Split fraction checks come last so the error names the stage precisely.
  const double parts[4] = {c.fractions.train, c.fractions.calibration,
                           c.fractions.validation, c.fractions.test};
  double sum = 0.0;
  for (double v : parts) {
    if (!(v > 0.0)) throw ValidationError("config: split fractions must be positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("config: split fractions must sum to 1");
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json data;
  if (c.csv_path) {
    data = json{{"csv", *c.csv_path}, {"target", c.target_column}};
  } else {
    data = json{{"synthetic", synthetic_to_json(*c.synthetic)}};
  }
  json j{
      {"data", std::move(data)},
      {"split", json{{"fractions",
                      {c.fractions.train, c.fractions.calibration,
                       c.fractions.validation, c.fractions.test}},
                     {"cal_d1_fraction", c.cal_d1_fraction},
                     {"seed", c.seed}}},
      {"predictor", json{{"kind", predictor_name(c.predictor_kind)},
                         {"knn_k", c.predictor_hp.knn_k}}},
      {"loss", loss_name(c.loss)},
      {"engine", json{{"kind", engine_name(c.engine_kind)},
                      {"ensemble_size", c.engine_hp.ensemble_size},
                      {"k_local", c.engine_hp.k_local},
                      {"k_empirical", c.engine_hp.k_empirical},
                      {"scale_floor", c.engine_hp.scale_floor}}},
      {"mode", json{{"kind", c.mode_kind},
                    {"gamma", c.fixed_gamma},
                    {"scarcity_k", c.scarcity_k},
                    {"gamma_min", c.mapping.gamma_min},
                    {"gamma_max", c.mapping.gamma_max},
                    {"midpoint", c.mapping.midpoint},
                    {"slope_scale", c.mapping.slope_scale},
                    {"eps", c.mapping.eps}}},
      {"alpha", c.alpha},
      {"flagging", json{{"method", c.method},
                        {"eta", c.eta},
                        {"delta", c.delta},
                        {"rho_min", c.rho_min},
                        {"lambda_grid", c.lambda_grid},
                        {"alpha_grid", c.alpha_grid},
                        {"target_acceptance", c.target_acceptance}}},
  };
  json tau;
  if (c.tau_explicit) tau["value"] = *c.tau_explicit;
  tau["level"] = c.tau_level;
  j["tau"] = std::move(tau);
  if (!c.seeds.empty() || !c.benchmark_engines.empty()) {
    json engines = json::array();
    for (const auto& e : c.benchmark_engines) {
      engines.push_back(json{{"kind", engine_name(e.kind)},
                             {"ensemble_size", e.hp.ensemble_size},
                             {"k_local", e.hp.k_local},
                             {"k_empirical", e.hp.k_empirical},
                             {"scale_floor", e.hp.scale_floor},
                             {"mode", e.mode},
                             {"gamma", e.fixed_gamma},
                             {"label", e.label}});
    }
    j["benchmark"] = json{{"seeds", c.seeds},
                          {"methods", c.benchmark_methods},
                          {"engines", std::move(engines)}};
  }
  return j;
}

BenchmarkConfig to_benchmark_config(const RunConfig& c) {
  BenchmarkConfig b;
  if (c.synthetic) {
    b.synthetic = *c.synthetic;
  } else {
    b.table = load_csv(*c.csv_path, c.target_column);
  }
  b.fractions = c.fractions;
  b.cal_d1_fraction = c.cal_d1_fraction;
  b.predictor = c.predictor_kind;
  b.predictor_hp = c.predictor_hp;
  b.loss = c.loss;
  if (c.benchmark_engines.empty()) {
    BenchmarkEngineSpec spec;
    spec.kind = c.engine_kind;
    spec.hp = c.engine_hp;
    spec.mode = c.mode_kind == "envelope_scarcity" ? "envelope_scarcity"
              : c.mode_kind == "envelope"          ? "envelope"
                                                   : "mean";
    spec.fixed_gamma = c.fixed_gamma;
    spec.label = engine_name(c.engine_kind);
    b.engines.push_back(std::move(spec));
  } else {
    b.engines = c.benchmark_engines;
  }
  b.alpha = c.alpha;
  b.tau_explicit = c.tau_explicit;
  b.tau_level = c.tau_level;
  b.methods = c.benchmark_methods;
  b.eta = c.eta;
  b.delta = c.delta;
  b.rho_min = c.rho_min;
  b.target_acceptance = c.target_acceptance;
  b.scarcity_k = c.scarcity_k;
  b.mapping = c.mapping;
  return b;
}

}  // namespace locus
