#pragma once

// Shared test fixtures: analytic reference engines, independent numeric
// oracles, and the synthetic processes the suites run on. Everything here is
// test-only and independent of the library's implementation paths it checks.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "locus/data.hpp"
#include "locus/engine.hpp"
#include "locus/predictor.hpp"
#include "locus/rng.hpp"

namespace locus::testing {

// Acklam's rational approximation to the standard normal quantile
// (|relative error| < 1.15e-9); an oracle independent of boost.
inline double normal_quantile_ref(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double normal_cdf_ref(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Two-sided KS distance of a sample against Uniform(0,1).
inline double ks_uniform(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double hi = (static_cast<double>(i) + 1.0) / n - samples[i];
    double lo = samples[i] - static_cast<double>(i) / n;
    worst = std::max(worst, std::max(hi, lo));
  }
  return worst;
}

/// Engine whose draws come from arbitrary closed-form CDFs; draw s is
/// members[s](x, z).
class AnalyticEngine final : public LossCdfEngine {
 public:
  using Member = std::function<double(std::span<const double>, double)>;

  AnalyticEngine(std::vector<Member> members, double bracket)
      : members_(std::move(members)), bracket_(bracket) {}

  static std::shared_ptr<AnalyticEngine> single(Member member, double bracket) {
    std::vector<Member> m{std::move(member)};
    return std::make_shared<AnalyticEngine>(std::move(m), bracket);
  }

  std::size_t draw_count() const override { return members_.size(); }
  double bracket_seed() const override { return bracket_; }

  std::unique_ptr<CdfQueryState> prepare(std::span<const double> x) const override {
    struct State final : CdfQueryState {
      const AnalyticEngine* engine;
      std::vector<double> x_copy;
      std::size_t draw_count() const override { return engine->members_.size(); }
      void draws_at(double z, std::span<double> out) const override {
        for (std::size_t s = 0; s < engine->members_.size(); ++s) {
          out[s] = engine->members_[s](x_copy, z);
        }
      }
    };
    auto state = std::make_unique<State>();
    state->engine = this;
    state->x_copy.assign(x.begin(), x.end());
    return state;
  }

 private:
  std::vector<Member> members_;
  double bracket_;
};

/// The true conditional loss CDF of a synthetic process under a fixed
/// predictor; the "engine is correct" reference.
inline std::shared_ptr<AnalyticEngine> oracle_engine(
    std::shared_ptr<const SyntheticOracle> oracle, Predictor g, LossKind loss,
    double bracket = 4.0) {
  auto member = [oracle = std::move(oracle), g = std::move(g), loss](
                    std::span<const double> x, double z) {
    return oracle->loss_cdf(z, x, predict(g, x), loss);
  };
  return AnalyticEngine::single(std::move(member), bracket);
}

/// Deliberately misspecified engine: one fixed continuous CDF for every x
/// (Exponential(scale)); strictly increasing on [0, inf) so PITs stay
/// tie-free.
inline std::shared_ptr<AnalyticEngine> constant_cdf_engine(double scale = 1.0) {
  return AnalyticEngine::single(
      [scale](std::span<const double>, double z) {
        return z <= 0.0 ? 0.0 : 1.0 - std::exp(-z / scale);
      },
      4.0 * scale);
}

/// Independent draws of the process parts used by the Monte Carlo suites.
struct SimParts {
  TabularData train, d1, d2, validation, test;
};

inline TabularData draw_part(SyntheticSpec spec, std::size_t n, std::uint64_t seed,
                             const char* tag) {
  spec.n = n;
  spec.seed = derive_seed(seed, tag);
  return generate_synthetic(spec);
}

inline SimParts draw_parts(const SyntheticSpec& spec, std::size_t n_train,
                           std::size_t n_d1, std::size_t n_d2, std::size_t n_val,
                           std::size_t n_test, std::uint64_t seed) {
  SimParts parts;
  parts.train = draw_part(spec, n_train, seed, "train");
  parts.d1 = draw_part(spec, n_d1, seed, "d1");
  parts.d2 = draw_part(spec, n_d2, seed, "d2");
  parts.validation = draw_part(spec, n_val, seed, "validation");
  parts.test = draw_part(spec, n_test, seed, "test");
  return parts;
}

/// Smooth heteroskedastic process: f = sin(2x) + 0.5x, sigma = 0.3 + 0.1|x|,
/// X ~ U(-2, 2), Gaussian noise (the library default spec).
inline SyntheticSpec smooth_spec() { return SyntheticSpec{}; }

/// Misfit regime for the ranking comparisons: curved f = 0.8 x^2 under a
/// linear deployed predictor, with sigma largest where the misfit is small.
inline SyntheticSpec misfit_spec() {
  SyntheticSpec spec;
  spec.mean_fn = "quadratic";
  spec.mean_params = {0.8, 0.0, 0.0};
  spec.scale_fn = "linear_abs";
  spec.scale_params = {0.8, -0.2};
  spec.design = "uniform";
  spec.design_params = {-3.0, 3.0};
  return spec;
}

/// Fixed (non-fitted) linear predictor, for suites that hold g constant.
inline Predictor fixed_linear_predictor(double slope, double intercept) {
  Predictor g;
  g.kind = PredictorKind::kLinearOls;
  g.coefficients = {slope};
  g.intercept = intercept;
  return g;
}

inline std::vector<double> losses_of(const Predictor& g, LossKind loss,
                                     const TabularData& data) {
  return realized_losses(g, loss, data);
}

}  // namespace locus::testing
