#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "locus/calibration.hpp"

namespace locus {

enum class RuleProvenance { kDefaultTau, kTunedLambda, kTunedAlpha, kCertified };

/// Acceptance threshold on the calibrated score. An absent lambda is the
/// EMPTY rule: accept nothing.
struct FlagRule {
  std::optional<double> lambda;
  double alpha = 0.1;
  RuleProvenance provenance = RuleProvenance::kDefaultTau;

  bool empty() const { return !lambda.has_value(); }
  bool accepts(double u) const { return lambda.has_value() && u <= *lambda; }
};

struct TuneRow {
  double candidate = 0.0;
  std::size_t n_accepted = 0;
  double acceptance = 0.0;
  double q_value = 0.0;  // q_hat for tuners, q_bar for the certificate
  bool feasible = false;
};

/// Per-candidate scan table. Rows are in ascending candidate order.
struct TuneReport {
  std::string kind;  // "tuned_lambda" | "tuned_alpha" | "certified"
  std::vector<TuneRow> rows;
  std::optional<double> chosen;
  double eta = 0.0;
  double rho_min = 0.0;
  double delta = 0.0;
  double eps_h = 0.0;  // certificate only
  double eps_g = 0.0;  // certificate only

  std::string to_table() const;
};

/// U_alpha(x) <= lambda, ties accept.
bool accept(const CalibratedBound& bound, double lambda, std::span<const double> x);

/// lambda = tau (the default flagging rule).
FlagRule default_rule(const CalibratedBound& bound, double tau);

/// Validation-tuned lambda: argmin over the grid of |q_hat(lambda) - eta|
/// among candidates with acceptance >= rho_min; ties broken toward the
/// largest lambda. All-excluded yields the EMPTY rule.
std::pair<FlagRule, TuneReport> tune_lambda(std::span<const double> scores,
                                            const std::vector<bool>& exceed,
                                            std::span<const double> grid, double eta,
                                            double rho_min, double bound_alpha);

/// Validation-tuned alpha with lambda fixed at tau; the PIT vector in `ctx`
/// is shared across the alpha grid. Ties toward the largest alpha.
std::pair<FlagRule, TuneReport> tune_alpha(const CalibrationContext& ctx, double tau,
                                           std::span<const double> alpha_grid,
                                           double eta, double rho_min,
                                           const Matrix& val_features,
                                           std::span<const double> val_losses);

struct CertifyEpsilons {
  double eps_h = 0.0;
  double eps_g = 0.0;
};

/// eps_H = 2 sqrt(log(2(N+1)) / N) + sqrt(log(4/delta) / (2N)),
/// eps_G = sqrt(log(4/delta) / (2N)).
CertifyEpsilons certify_epsilons(std::size_t n, double delta);

/// Distribution-free certified threshold: the largest grid lambda with
/// G_hat > eps_G and (H_hat + eps_H) / (G_hat - eps_G) <= eta, or EMPTY.
std::pair<FlagRule, TuneReport> certify_lambda(std::span<const double> scores,
                                               const std::vector<bool>& exceed,
                                               std::span<const double> grid, double eta,
                                               double delta, double bound_alpha);

/// 50 equally spaced candidates spanning [min scores, max scores].
std::vector<double> default_lambda_grid(std::span<const double> scores,
                                        std::size_t count = 50);

/// {0.02, 0.04, ..., 0.30}.
std::vector<double> default_alpha_grid();

std::string provenance_name(RuleProvenance p);
RuleProvenance parse_provenance(const std::string& name);

}  // namespace locus
