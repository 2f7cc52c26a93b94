#include <doctest.h>

#include <cmath>

#include "locus/calibration.hpp"
#include "locus/errors.hpp"
#include "locus/scarcity.hpp"
#include "support/testers.hpp"

using namespace locus;

TEST_CASE("knn radius by enumeration") {
  Matrix ref(4, 1, {0.0, 1.0, 2.0, 3.0});
  ScarcityIndex index(ref, 2);
  double x = 0.0;
  CHECK(index.radius(std::span(&x, 1)) == 1.0);  // self at 0, then 1
  x = 1.5;
  CHECK(index.radius(std::span(&x, 1)) == 0.5);
  CHECK_THROWS_AS(ScarcityIndex(ref, 5), ValidationError);
  CHECK_THROWS_AS(ScarcityIndex(ref, 0), ValidationError);
}

TEST_CASE("duplicated reference set degenerates to zero radii") {
  Matrix ref(6, 1, {2.0, 2.0, 2.0, 2.0, 2.0, 2.0});
  ScarcityIndex index(ref, 1);
  CHECK(index.q_lo() == 0.0);
  CHECK(index.q_hi() == 0.0);
  double x = 2.0;
  CHECK(index.scarcity_score(std::span(&x, 1)) == 0.0);  // 0 / (0 + eps)
}

TEST_CASE("rebuilding the index reproduces the reference quantiles") {
  TabularData d = testing::draw_part(testing::smooth_spec(), 400, 3, "scarcity");
  ScarcityIndex a(d.features, 20);
  ScarcityIndex b(d.features, 20);
  CHECK(a.q_lo() == b.q_lo());
  CHECK(a.q_hi() == b.q_hi());
  CHECK(a.q_lo() <= a.q_hi());
}

TEST_CASE("scarcity score fixed points") {
  // Radii engineered so q_lo = 1 and q_hi = 2: score is (r - 1) / (1 + eps).
  Matrix ref(2, 1, {0.0, 10.0});
  ScarcityIndex probe(ref, 1, GammaMapping{}, 1.0, 2.0);
  double x = 0.0;  // distance 0 to the nearest reference point... radius 0
  // radius(x) = 0 -> s = (0 - 1) / (1 + 1e-6)
  CHECK(probe.scarcity_score(std::span(&x, 1)) ==
        doctest::Approx(-1.0 / (1.0 + 1e-6)));
  x = 1.0;  // radius 1 = q_lo -> s = 0
  CHECK(probe.scarcity_score(std::span(&x, 1)) == 0.0);
  x = 2.0;  // radius 2 = q_hi -> s = 1 / (1 + 1e-6)
  CHECK(probe.scarcity_score(std::span(&x, 1)) ==
        doctest::Approx(1.0 / (1.0 + 1e-6)).epsilon(1e-12));
}

TEST_CASE("gamma logistic map at its anchor points") {
  Matrix ref(2, 1, {0.0, 1.0});
  ScarcityIndex index(ref, 1);
  CHECK(index.gamma_from_score(0.0) == doctest::Approx(0.525));  // 0.9 - 0.75 * 0.5
  CHECK(index.gamma_from_score(50.0) == doctest::Approx(0.15).epsilon(1e-10));
  CHECK(index.gamma_from_score(-50.0) == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("gamma is nonincreasing in the radius and stays in range") {
  Matrix ref(2, 1, {0.0, 1.0});
  ScarcityIndex index(ref, 1, GammaMapping{}, 0.5, 1.5);
  double prev = 1.0;
  for (int i = 0; i < 1000; ++i) {
    double r = 0.01 * i;
    double s = (r - index.q_lo()) / (index.q_hi() - index.q_lo() + 1e-6);
    double gamma = index.gamma_from_score(s);
    CHECK(gamma <= prev + 1e-15);
    CHECK(gamma > 0.15);
    CHECK(gamma < 0.9);
    prev = gamma;
  }
}

TEST_CASE("smaller gamma from a larger radius inflates the bound") {
  // The conservativeness chain: r1 < r2 -> gamma(r1) >= gamma(r2) -> the
  // envelope CDF under gamma(r2) sits lower, so its inverse is larger.
  TabularData d = testing::draw_part(testing::smooth_spec(), 500, 7, "chain");
  Predictor g = testing::fixed_linear_predictor(0.5, 0.0);
  std::vector<double> z = realized_losses(g, LossKind::kAbsolute, d);
  EngineHyperparams hp;
  hp.ensemble_size = 16;
  hp.seed = 11;
  auto engine = fit_engine(d.features, z, EngineKind::kBootstrapGaussianEnsemble, hp);
  ScarcityIndex index(d.features, 25);

  Rng rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    double x = -2.0 + 4.0 * rng.uniform01();
    auto xs = std::span(&x, 1);
    double r1 = 0.5 * rng.uniform01();
    double r2 = r1 + 0.1 + rng.uniform01();
    auto gamma_at = [&](double r) {
      double s = (r - index.q_lo()) / (index.q_hi() - index.q_lo() + 1e-6);
      return index.gamma_from_score(s);
    };
    double g1 = gamma_at(r1), g2 = gamma_at(r2);
    REQUIRE(g1 >= g2);
    for (double t : {0.5, 0.8, 0.95}) {
      double u1 = invert_cdf(*engine, AggregationMode::envelope_fixed(g1), xs, t);
      double u2 = invert_cdf(*engine, AggregationMode::envelope_fixed(g2), xs, t);
      CHECK(u1 <= u2 + 1e-9);
    }
  }
}
