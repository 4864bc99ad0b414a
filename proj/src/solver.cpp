#include "ppreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ppreg/error.hpp"

namespace ppreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kMaxHalvings = 40;

void check_plan(const QuadratureScheme& s, const PenaltyPlan& plan) {
  if (plan.multipliers.size() != s.num_columns()) {
    throw Error(ErrorCode::InvalidArgument, "penalty plan length differs from design width");
  }
  if ((plan.multipliers.array() < 0.0).any() || !plan.multipliers.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "penalty multipliers must be finite and nonnegative");
  }
}

VectorXd starting_point(const QuadratureScheme& s, const std::vector<Index>& free) {
  VectorXd theta = VectorXd::Zero(s.num_columns());
  const Index c = s.intercept_column;
  if (c >= 0 && std::find(free.begin(), free.end(), c) != free.end()) {
    const double n = std::max(static_cast<double>(s.n_data), 0.5);
    theta(c) = std::log(n / s.weights.sum());
  }
  return theta;
}

// Rank check on the correlation-scaled Hessian of the free columns.
void require_full_rank(const MatrixXd& h) {
  const VectorXd d = h.diagonal();
  if ((d.array() <= 0.0).any()) {
    throw Error(ErrorCode::Singular, "design has a column that vanishes on every node");
  }
  const VectorXd inv = d.array().rsqrt().matrix();
  const MatrixXd corr = inv.asDiagonal() * h * inv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw Error(ErrorCode::Singular, "design is rank deficient");
  }
}

// Damped Newton ascent of approx_loglik - ridge/2 |theta_free|^2 over the free
// columns; all other coefficients stay at zero.
VectorXd newton_fit(const QuadratureScheme& s, const std::vector<Index>& free, double ridge,
                    double gradient_tolerance = 1e-8, int max_iterations = 50) {
  VectorXd theta = starting_point(s, free);
  const auto nfree = static_cast<Index>(free.size());
  if (nfree == 0) return theta;

  const auto objective = [&](const VectorXd& t) {
    double penalty = 0.0;
    for (Index j : free) penalty += t(j) * t(j);
    return approx_loglik(s, t) - 0.5 * ridge * penalty;
  };

  double value = objective(theta);
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "objective overflow at start");
  for (int it = 0; it <= max_iterations; ++it) {
    const GradientHessian gh = gradient_and_hessian(s, theta);
    VectorXd g(nfree);
    MatrixXd h(nfree, nfree);
    for (Index a = 0; a < nfree; ++a) {
      g(a) = gh.gradient(free[a]) - ridge * theta(free[a]);
      for (Index b = 0; b < nfree; ++b) h(a, b) = gh.hessian(free[a], free[b]);
      h(a, a) += ridge;
    }
    if (it == 0 && ridge == 0.0) require_full_rank(h);
    if (g.lpNorm<Eigen::Infinity>() < gradient_tolerance * std::max(1.0, std::abs(value))) {
      return theta;
    }
    if (it == max_iterations) break;
    const VectorXd step = h.ldlt().solve(g);
    if (!step.allFinite()) throw Error(ErrorCode::NonFinite, "Newton step is not finite");
    double scale = 1.0;
    for (Index j : free) scale = std::max(scale, std::abs(theta(j)));
    if (step.lpNorm<Eigen::Infinity>() <= 1e-10 * scale) {
      for (Index a = 0; a < nfree; ++a) theta(free[a]) += step(a);
      return theta;
    }
    double t = 1.0;
    VectorXd candidate = theta;
    double cand_value = value;
    bool improved = false;
    for (int k = 0; k < kMaxHalvings && !improved; ++k, t *= 0.5) {
      candidate = theta;
      for (Index a = 0; a < nfree; ++a) candidate(free[a]) += t * step(a);
      cand_value = objective(candidate);
      improved = std::isfinite(cand_value) && cand_value > value;
    }
    // No strict ascent along a Newton direction: rounding floor reached.
    if (!improved) return theta;
    theta = candidate;
    value = cand_value;
  }
  std::ostringstream msg;
  msg << "Newton iterations did not converge within " << max_iterations << " steps";
  throw Error(ErrorCode::Diverged, msg.str());
}

std::vector<Index> all_columns(const QuadratureScheme& s) {
  std::vector<Index> cols(static_cast<std::size_t>(s.num_columns()));
  for (Index j = 0; j < s.num_columns(); ++j) cols[static_cast<std::size_t>(j)] = j;
  return cols;
}

double kkt_from_gradient(const VectorXd& gradient, double mu_hat, const PenaltyPlan& plan,
                         double tau, const VectorXd& beta) {
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double g = gradient(j) / mu_hat;
    const double lam = tau * plan.multipliers(j);
    double v;
    if (beta(j) != 0.0) {
      v = std::abs(g - lam * (beta(j) > 0.0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(g) - lam);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

// Reparametrisation beta = T b in which penalized columns are centred (when an
// unpenalized intercept is present) and scaled to unit weighted SD. The
// problem in b is the same problem; only its conditioning changes.
struct Standardization {
  MatrixXd to_original;  // T
  MatrixXd to_standard;  // T^{-1}
  VectorXd penalty;      // v_j scaled to the b coordinates
};

Standardization standardize(const QuadratureScheme& s, const PenaltyPlan& plan, bool enabled) {
  const Index q = s.num_columns();
  Standardization out;
  out.to_original = MatrixXd::Identity(q, q);
  out.penalty = plan.multipliers;
  if (enabled) {
    const double total = s.weights.sum();
    const Index c = s.intercept_column;
    const bool center = c >= 0 && plan.multipliers(c) == 0.0;
    for (Index j = 0; j < q; ++j) {
      if (plan.multipliers(j) == 0.0) continue;
      const double mean = s.weights.dot(s.design.col(j)) / total;
      const double var =
          (s.weights.array() * (s.design.col(j).array() - mean).square()).sum() / total;
      const double sd = std::sqrt(var);
      if (!(sd > 0.0) || !std::isfinite(sd)) continue;
      out.to_original(j, j) = 1.0 / sd;
      if (center) out.to_original(c, j) = -mean / sd;
      out.penalty(j) = plan.multipliers(j) / sd;
    }
  }
  out.to_standard = out.to_original.inverse();
  return out;
}

double sweep(const MatrixXd& a, const VectorXd& c, const VectorXd& lambda, VectorXd& b,
             VectorXd& ab, const std::vector<Index>& set) {
  double largest = 0.0;
  for (Index j : set) {
    const double ajj = a(j, j);
    if (!(ajj > 0.0)) continue;
    const double r = c(j) - ab(j) + ajj * b(j);
    const double updated = soft_threshold(r, lambda(j)) / ajj;
    const double delta = updated - b(j);
    if (delta != 0.0) {
      ab.noalias() += a.col(j) * delta;
      b(j) = updated;
      largest = std::max(largest, std::abs(delta));
    }
  }
  return largest;
}

// Maximises c'b - b'Ab/2 - sum_j lambda_j |b_j| by cyclic coordinate descent:
// full sweeps alternate with passes restricted to the current active set.
VectorXd coordinate_descent(const MatrixXd& a, const VectorXd& c, const VectorXd& lambda,
                            VectorXd b, const SolverOptions& opt) {
  const Index q = b.size();
  if ((lambda.array() == 0.0).all()) {
    VectorXd exact = a.ldlt().solve(c);
    if (exact.allFinite()) return exact;
  }
  VectorXd ab = a * b;
  std::vector<Index> everything(static_cast<std::size_t>(q));
  for (Index j = 0; j < q; ++j) everything[static_cast<std::size_t>(j)] = j;
  int sweeps = 0;
  while (sweeps < opt.max_sweeps) {
    const double full = sweep(a, c, lambda, b, ab, everything);
    ++sweeps;
    if (full < opt.cd_tolerance) break;
    std::vector<Index> active;
    for (Index j = 0; j < q; ++j) {
      if (b(j) != 0.0 || lambda(j) == 0.0) active.push_back(j);
    }
    while (sweeps < opt.max_sweeps) {
      const double change = sweep(a, c, lambda, b, ab, active);
      ++sweeps;
      if (change < opt.cd_tolerance) break;
    }
  }
  return b;
}

}  // namespace

PenaltyPlan lasso_plan(const std::vector<bool>& mask) {
  PenaltyPlan plan;
  plan.multipliers = VectorXd::Zero(static_cast<Index>(mask.size()));
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) plan.multipliers(static_cast<Index>(j)) = 1.0;
  }
  return plan;
}

PenaltyPlan adaptive_plan(const VectorXd& pilot, const std::vector<bool>& mask, double gamma) {
  if (pilot.size() != static_cast<Index>(mask.size())) {
    throw Error(ErrorCode::InvalidArgument, "pilot length differs from penalty mask length");
  }
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "adaptive exponent gamma must be positive");
  PenaltyPlan plan;
  plan.gamma = gamma;
  plan.pilot = pilot;
  plan.multipliers = VectorXd::Zero(pilot.size());
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (!mask[j]) continue;
    const double b = pilot(static_cast<Index>(j));
    if (b == 0.0 || !std::isfinite(b)) {
      std::ostringstream msg;
      msg << "pilot coefficient " << j << " is zero or non-finite";
      throw Error(ErrorCode::ZeroPilotCoefficient, msg.str());
    }
    plan.multipliers(static_cast<Index>(j)) = 1.0 / std::pow(std::abs(b), gamma);
  }
  return plan;
}

double normalization(const QuadratureScheme& s) {
  return std::max(1.0, static_cast<double>(s.n_data));
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double penalized_objective(const QuadratureScheme& s, const PenaltyPlan& plan, double tau,
                           const VectorXd& beta) {
  check_plan(s, plan);
  return approx_loglik(s, beta) / normalization(s) -
         tau * plan.multipliers.dot(beta.cwiseAbs());
}

double kkt_residual(const QuadratureScheme& s, const PenaltyPlan& plan, double tau,
                    const VectorXd& beta) {
  check_plan(s, plan);
  return kkt_from_gradient(loglik_gradient(s, beta), normalization(s), plan, tau, beta);
}

VectorXd fit_unpenalized(const QuadratureScheme& s) { return newton_fit(s, all_columns(s), 0.0); }

VectorXd fit_ridge(const QuadratureScheme& s, double ridge) {
  if (!(ridge >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge must be nonnegative");
  return newton_fit(s, all_columns(s), ridge);
}

PilotFit fit_pilot(const QuadratureScheme& s) {
  try {
    return {fit_unpenalized(s), false, 0.0};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Singular) throw;
  }
  const auto cols = all_columns(s);
  const GradientHessian gh = gradient_and_hessian(s, starting_point(s, cols));
  const double ridge = 1e-6 * gh.hessian.trace() / static_cast<double>(s.num_columns());
  return {fit_ridge(s, ridge), true, ridge};
}

VectorXd restricted_optimum(const QuadratureScheme& s, const PenaltyPlan& plan) {
  check_plan(s, plan);
  std::vector<Index> free;
  for (Index j = 0; j < s.num_columns(); ++j) {
    if (plan.multipliers(j) == 0.0) free.push_back(j);
  }
  return newton_fit(s, free, 0.0);
}

double tau_max(const QuadratureScheme& s, const PenaltyPlan& plan) {
  check_plan(s, plan);
  if (!plan.has_penalized()) {
    throw Error(ErrorCode::NoPenalizedCoefficients, "every penalty multiplier is zero");
  }
  const VectorXd g = loglik_gradient(s, restricted_optimum(s, plan)) / normalization(s);
  double best = 0.0;
  for (Index j = 0; j < g.size(); ++j) {
    const double v = plan.multipliers(j);
    if (v > 0.0) best = std::max(best, std::abs(g(j)) / v);
  }
  return best;
}

TauFit fit_at_tau(const QuadratureScheme& s, const PenaltyPlan& plan, double tau,
                  const VectorXd& start, const SolverOptions& opt) {
  check_plan(s, plan);
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidArgument, "tau must be finite and nonnegative");
  }
  if (start.size() != s.num_columns()) {
    throw Error(ErrorCode::InvalidArgument, "start vector length differs from design width");
  }
  const double mu_hat = normalization(s);
  const Standardization st = standardize(s, plan, opt.standardize);
  const VectorXd lambda = tau * st.penalty;
  const MatrixXd& t_mat = st.to_original;

  VectorXd b = st.to_standard * start;
  VectorXd beta = t_mat * b;
  double q = penalized_objective(s, plan, tau, beta);
  if (!std::isfinite(q)) throw Error(ErrorCode::NonFinite, "objective overflow at start");

  TauFit fit;
  double dq = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const GradientHessian gh = gradient_and_hessian(s, beta);
    fit.kkt = kkt_from_gradient(gh.gradient, mu_hat, plan, tau, beta);
    fit.iterations = it;
    if (fit.kkt <= opt.kkt_target) break;
    if (std::abs(dq) < opt.outer_tolerance && fit.kkt <= opt.kkt_accept) break;
    if (it == opt.max_outer) break;

    const MatrixXd a = t_mat.transpose() * gh.hessian * t_mat / mu_hat;
    const VectorXd c = t_mat.transpose() * gh.gradient / mu_hat + a * b;
    const VectorXd target = coordinate_descent(a, c, lambda, b, opt);
    const VectorXd dir = target - b;

    double step = 1.0;
    bool moved = false;
    for (int k = 0; k < kMaxHalvings; ++k, step *= 0.5) {
      const VectorXd cand = b + step * dir;
      const double cq = penalized_objective(s, plan, tau, t_mat * cand);
      if (std::isfinite(cq) && cq >= q) {
        dq = cq - q;
        b = cand;
        q = cq;
        moved = true;
        break;
      }
    }
    beta = t_mat * b;
    // Exact zeros must survive the change of coordinates.
    for (Index j = 0; j < b.size(); ++j) {
      if (plan.multipliers(j) > 0.0 && b(j) == 0.0) beta(j) = 0.0;
    }
    if (!moved) {
      const GradientHessian last = gradient_and_hessian(s, beta);
      fit.kkt = kkt_from_gradient(last.gradient, mu_hat, plan, tau, beta);
      fit.iterations = it + 1;
      break;
    }
  }
  fit.coefficients = beta;
  fit.objective = q;
  fit.converged = fit.kkt <= opt.kkt_accept;
  return fit;
}

PathFit fit_path(const QuadratureScheme& s, const PenaltyPlan& plan, int n_tau, double tau_min_ratio,
                 const SolverOptions& opt) {
  check_plan(s, plan);
  if (n_tau < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least two tau values");
  if (!(tau_min_ratio > 0.0 && tau_min_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau_min_ratio must lie in (0, 1)");
  }
  PathFit path;
  path.names = s.column_names;
  path.mu_hat = normalization(s);
  path.domain_area = s.domain.area();
  path.n_points = s.n_data;
  path.tau_max = tau_max(s, plan);

  for (int k = 0; k < n_tau; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(n_tau - 1);
    path.taus.push_back(path.tau_max * std::pow(tau_min_ratio, frac));
  }
  path.taus.push_back(0.0);

  const Index q = s.num_columns();
  const std::size_t rows = path.taus.size();
  path.coefficients = MatrixXd::Constant(static_cast<Index>(rows), q,
                                         std::numeric_limits<double>::quiet_NaN());
  path.loglik.assign(rows, std::numeric_limits<double>::quiet_NaN());
  path.active.assign(rows, 0);
  path.kkt.assign(rows, std::numeric_limits<double>::quiet_NaN());
  path.converged.assign(rows, false);
  path.failures.assign(rows, "");

  // The restricted optimum is the exact solution at tau_max.
  VectorXd warm = restricted_optimum(s, plan);
  for (std::size_t k = 0; k < rows; ++k) {
    const double tau = path.taus[k];
    try {
      VectorXd beta;
      bool converged;
      double kkt;
      if (k == 0) {
        beta = warm;
        kkt = kkt_residual(s, plan, tau, beta);
        converged = kkt <= opt.kkt_accept;
      } else {
        const TauFit fit = fit_at_tau(s, plan, tau, warm, opt);
        beta = fit.coefficients;
        kkt = fit.kkt;
        converged = fit.converged;
      }
      path.coefficients.row(static_cast<Index>(k)) = beta.transpose();
      path.loglik[k] = approx_loglik(s, beta);
      path.kkt[k] = kkt;
      path.converged[k] = converged;
      std::size_t nz = 0;
      for (Index j = 0; j < q; ++j) {
        if (plan.multipliers(j) > 0.0 && beta(j) != 0.0) ++nz;
      }
      path.active[k] = nz;
      if (!converged) path.failures[k] = "E_DIVERGED: KKT residual above tolerance";
      warm = beta;
    } catch (const Error& e) {
      path.failures[k] = std::string(error_token(e.code())) + ": " + e.what();
    }
  }
  return path;
}

}  // namespace ppreg
