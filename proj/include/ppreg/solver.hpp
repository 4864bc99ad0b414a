#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "ppreg/quadrature.hpp"

namespace ppreg {

/// Per-coefficient L1 multipliers v_j (0 = unpenalized). The penalty applied
/// at tuning level tau is tau * sum_j v_j |beta_j|.
struct PenaltyPlan {
  Eigen::VectorXd multipliers;
  double gamma = 1.0;
  std::optional<Eigen::VectorXd> pilot;  // set for adaptive plans

  bool has_penalized() const { return (multipliers.array() > 0.0).any(); }
};

/// v_j = 1 for every masked coefficient.
PenaltyPlan lasso_plan(const std::vector<bool>& mask);

/// v_j = 1 / |pilot_j|^gamma for every masked coefficient. Throws
/// ZeroPilotCoefficient when a masked pilot entry is zero.
PenaltyPlan adaptive_plan(const Eigen::VectorXd& pilot, const std::vector<bool>& mask,
                          double gamma = 1.0);

struct SolverOptions {
  double cd_tolerance = 1e-9;     // max coefficient change within a CD pass
  int max_sweeps = 100;           // CD sweeps per quadratic subproblem
  double outer_tolerance = 1e-8;  // change in Q between IRLS iterations
  int max_outer = 25;
  double kkt_target = 1e-7;       // IRLS stops once the KKT residual is this small
  double kkt_accept = 1e-6;       // a point is flagged converged below this residual
  bool standardize = true;
};

/// Normalisation mu_hat used in Q: the number of data nodes (at least 1).
double normalization(const QuadratureScheme& scheme);

double soft_threshold(double z, double t);

/// Q(beta) = approx_loglik / mu_hat - tau * sum_j v_j |beta_j|.
double penalized_objective(const QuadratureScheme& scheme, const PenaltyPlan& plan, double tau,
                           const Eigen::VectorXd& beta);

/// Largest violation of the subgradient optimality conditions of Q.
double kkt_residual(const QuadratureScheme& scheme, const PenaltyPlan& plan, double tau,
                    const Eigen::VectorXd& beta);

/// Newton maximiser of approx_loglik. Throws Singular, Diverged or NonFinite.
Eigen::VectorXd fit_unpenalized(const QuadratureScheme& scheme);

/// Maximiser of approx_loglik - ridge/2 |theta|^2.
Eigen::VectorXd fit_ridge(const QuadratureScheme& scheme, double ridge);

struct PilotFit {
  Eigen::VectorXd coefficients;
  bool ridge = false;
  double ridge_value = 0.0;
};

/// Unpenalized fit, falling back to a ridge of 1e-6 trace(H)/q when the design
/// is rank deficient.
PilotFit fit_pilot(const QuadratureScheme& scheme);

/// Optimum over the unpenalized coefficients with every penalized one fixed at 0.
Eigen::VectorXd restricted_optimum(const QuadratureScheme& scheme, const PenaltyPlan& plan);

/// Smallest tau at which every penalized coefficient is zero.
double tau_max(const QuadratureScheme& scheme, const PenaltyPlan& plan);

struct TauFit {
  Eigen::VectorXd coefficients;
  double objective = 0.0;
  double kkt = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximises Q at one tau by IRLS with coordinate-descent inner solves,
/// starting from `start`.
TauFit fit_at_tau(const QuadratureScheme& scheme, const PenaltyPlan& plan, double tau,
                  const Eigen::VectorXd& start, const SolverOptions& options = {});

struct PathFit {
  std::vector<std::string> names;
  std::vector<double> taus;        // decreasing, last entry 0
  Eigen::MatrixXd coefficients;    // one row per tau
  std::vector<double> loglik;
  std::vector<std::size_t> active; // nonzero penalized coefficients
  std::vector<double> kkt;
  std::vector<bool> converged;
  std::vector<std::string> failures;
  double mu_hat = 1.0;
  double domain_area = 0.0;
  std::size_t n_points = 0;
  double tau_max = 0.0;

  std::size_t size() const { return taus.size(); }
};

/// Regularisation path over n_tau geometric values from tau_max down to
/// tau_min_ratio * tau_max, followed by tau = 0. Warm-started; failures at a
/// single tau are recorded and the path continues.
PathFit fit_path(const QuadratureScheme& scheme, const PenaltyPlan& plan, int n_tau = 100,
                 double tau_min_ratio = 1e-4, const SolverOptions& options = {});

}  // namespace ppreg
