#include "locus/flagging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "locus/errors.hpp"

namespace locus {

namespace {

void check_tuning_args(std::size_t n_scores, std::size_t n_exceed,
                       std::size_t grid_size, double eta, double rho_min) {
  if (n_scores == 0) throw ValidationError("tuning: empty score vector");
  if (n_scores != n_exceed) {
    throw ValidationError("tuning: score/exceed length mismatch");
  }
  if (grid_size == 0) throw ValidationError("tuning: empty candidate grid");
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("tuning: eta must be in (0, 1)");
  if (!(rho_min >= 0.0 && rho_min < 1.0)) {
    throw ValidationError("tuning: rho_min must be in [0, 1)");
  }
}

/// Scan rows in ascending candidate order and pick the feasible argmin of
/// |q - eta|; on ties the later (larger) candidate wins.
std::optional<double> argmin_to_target(const std::vector<TuneRow>& rows, double eta) {
  std::optional<double> best;
  double best_dist = 0.0;
  for (const auto& row : rows) {
    if (!row.feasible) continue;
    double dist = std::abs(row.q_value - eta);
    if (!best || dist <= best_dist) {
      best = row.candidate;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

bool accept(const CalibratedBound& bound, double lambda, std::span<const double> x) {
  return bound.score(x) <= lambda;
}

FlagRule default_rule(const CalibratedBound& bound, double tau) {
  FlagRule rule;
  rule.lambda = tau;
  rule.alpha = bound.alpha();
  rule.provenance = RuleProvenance::kDefaultTau;
  return rule;
}

std::pair<FlagRule, TuneReport> tune_lambda(std::span<const double> scores,
                                            const std::vector<bool>& exceed,
                                            std::span<const double> grid, double eta,
                                            double rho_min, double bound_alpha) {
  check_tuning_args(scores.size(), exceed.size(), grid.size(), eta, rho_min);
  const auto n = static_cast<double>(scores.size());

  std::vector<double> candidates(grid.begin(), grid.end());
  std::sort(candidates.begin(), candidates.end());

  TuneReport report;
  report.kind = "tuned_lambda";
  report.eta = eta;
  report.rho_min = rho_min;
  for (double lambda : candidates) {
    TuneRow row;
    row.candidate = lambda;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] <= lambda) {
        ++row.n_accepted;
        if (exceed[i]) ++hits;
      }
    }
    row.acceptance = static_cast<double>(row.n_accepted) / n;
    row.q_value = static_cast<double>(hits) /
                  static_cast<double>(std::max<std::size_t>(row.n_accepted, 1));
    row.feasible = row.acceptance >= rho_min;
    report.rows.push_back(row);
  }
  report.chosen = argmin_to_target(report.rows, eta);

  FlagRule rule;
  rule.lambda = report.chosen;
  rule.alpha = bound_alpha;
  rule.provenance = RuleProvenance::kTunedLambda;
  return {rule, report};
}

std::pair<FlagRule, TuneReport> tune_alpha(const CalibrationContext& ctx, double tau,
                                           std::span<const double> alpha_grid,
                                           double eta, double rho_min,
                                           const Matrix& val_features,
                                           std::span<const double> val_losses) {
  check_tuning_args(val_losses.size(), val_losses.size(), alpha_grid.size(), eta,
                    rho_min);
  if (val_features.rows != val_losses.size()) {
    throw ValidationError("tune_alpha: feature/loss length mismatch");
  }
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) {
      throw ValidationError("tune_alpha: alpha grid values must be in (0, 1)");
    }
  }

  const std::size_t n = val_losses.size();
  std::vector<double> candidates(alpha_grid.begin(), alpha_grid.end());
  std::sort(candidates.begin(), candidates.end());

  // One prepared query per validation point, inverted once per alpha; the
  // PIT vector is shared so each alpha only moves the level t.
  std::vector<std::unique_ptr<CdfQueryState>> queries(n);
  std::vector<double> gammas(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = val_features.row(i);
    queries[i] = ctx.engine->prepare(x);
    gammas[i] = ctx.mode.gamma_at(x);
  }

  TuneReport report;
  report.kind = "tuned_alpha";
  report.eta = eta;
  report.rho_min = rho_min;
  for (double alpha : candidates) {
    double t = calibrate_level(ctx.sorted_pit, alpha);
    TuneRow row;
    row.candidate = alpha;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double u = invert_prepared(*queries[i], ctx.mode.kind, gammas[i], t,
                                 ctx.engine->bracket_seed());
      if (u <= tau) {
        ++row.n_accepted;
        if (val_losses[i] > tau) ++hits;
      }
    }
    row.acceptance = static_cast<double>(row.n_accepted) / static_cast<double>(n);
    row.q_value = static_cast<double>(hits) /
                  static_cast<double>(std::max<std::size_t>(row.n_accepted, 1));
    row.feasible = row.acceptance >= rho_min;
    report.rows.push_back(row);
  }
  report.chosen = argmin_to_target(report.rows, eta);

  FlagRule rule;
  rule.provenance = RuleProvenance::kTunedAlpha;
  if (report.chosen) {
    rule.lambda = tau;
    rule.alpha = *report.chosen;
  } else {
    rule.alpha = candidates.front();
  }
  return {rule, report};
}

CertifyEpsilons certify_epsilons(std::size_t n, double delta) {
  if (n == 0) throw ValidationError("certify: N must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("certify: delta must be in (0, 1)");
  }
  const auto nd = static_cast<double>(n);
  CertifyEpsilons e;
  e.eps_g = std::sqrt(std::log(4.0 / delta) / (2.0 * nd));
  e.eps_h = 2.0 * std::sqrt(std::log(2.0 * (nd + 1.0)) / nd) + e.eps_g;
  return e;
}

std::pair<FlagRule, TuneReport> certify_lambda(std::span<const double> scores,
                                               const std::vector<bool>& exceed,
                                               std::span<const double> grid, double eta,
                                               double delta, double bound_alpha) {
  check_tuning_args(scores.size(), exceed.size(), grid.size(), eta, 0.0);
  CertifyEpsilons eps = certify_epsilons(scores.size(), delta);
  const auto n = static_cast<double>(scores.size());

  std::vector<double> candidates(grid.begin(), grid.end());
  std::sort(candidates.begin(), candidates.end());

  TuneReport report;
  report.kind = "certified";
  report.eta = eta;
  report.delta = delta;
  report.eps_h = eps.eps_h;
  report.eps_g = eps.eps_g;
  for (double lambda : candidates) {
    TuneRow row;
    row.candidate = lambda;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] <= lambda) {
        ++row.n_accepted;
        if (exceed[i]) ++hits;
      }
    }
    row.acceptance = static_cast<double>(row.n_accepted) / n;  // G_hat
    double h_hat = static_cast<double>(hits) / n;
    if (row.acceptance > eps.eps_g) {
      row.q_value = (h_hat + eps.eps_h) / (row.acceptance - eps.eps_g);
      row.feasible = row.q_value <= eta;
    } else {
      row.q_value = std::numeric_limits<double>::infinity();
      row.feasible = false;
    }
    report.rows.push_back(row);
  }
  // lambda* = max of the feasible set.
  for (auto it = report.rows.rbegin(); it != report.rows.rend(); ++it) {
    if (it->feasible) {
      report.chosen = it->candidate;
      break;
    }
  }

  FlagRule rule;
  rule.lambda = report.chosen;
  rule.alpha = bound_alpha;
  rule.provenance = RuleProvenance::kCertified;
  return {rule, report};
}

std::vector<double> default_lambda_grid(std::span<const double> scores,
                                        std::size_t count) {
  if (scores.empty()) throw ValidationError("lambda grid: empty scores");
  if (count < 2) throw ValidationError("lambda grid: need at least 2 candidates");
  auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it, hi = *hi_it;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 15; ++i) grid.push_back(0.02 * i);
  return grid;
}

std::string TuneReport::to_table() const {
  std::ostringstream out;
  const bool certified = kind == "certified";
  out << "candidate      n   accept%   " << (certified ? "q_bar" : "q_hat")
      << "   feasible\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%9.6g %6zu %8.1f%% %7.4g   %s\n", row.candidate,
                  row.n_accepted, 100.0 * row.acceptance, row.q_value,
                  row.feasible ? "yes" : "no");
    out << buf;
  }
  if (certified) {
    std::snprintf(buf, sizeof buf, "eps_H = %.6f, eps_G = %.6f\n", eps_h, eps_g);
    out << buf;
  }
  if (chosen) {
    std::snprintf(buf, sizeof buf, "chosen: %.6g\n", *chosen);
    out << buf;
  } else {
    out << "chosen: EMPTY (no feasible candidate)\n";
  }
  return out.str();
}

std::string provenance_name(RuleProvenance p) {
  switch (p) {
    case RuleProvenance::kDefaultTau: return "default_tau";
    case RuleProvenance::kTunedLambda: return "tuned_lambda";
    case RuleProvenance::kTunedAlpha: return "tuned_alpha";
    case RuleProvenance::kCertified: return "certified";
  }
  return "default_tau";
}

RuleProvenance parse_provenance(const std::string& name) {
  if (name == "default_tau") return RuleProvenance::kDefaultTau;
  if (name == "tuned_lambda") return RuleProvenance::kTunedLambda;
  if (name == "tuned_alpha") return RuleProvenance::kTunedAlpha;
  if (name == "certified") return RuleProvenance::kCertified;
  throw ValidationError("unknown rule provenance: " + name);
}

}  // namespace locus
