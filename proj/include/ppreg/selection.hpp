#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "ppreg/quadrature.hpp"
#include "ppreg/solver.hpp"

namespace ppreg {

enum class DofMode { Count, Sandwich };
enum class Criterion { Cbic, Ceric };

/// Number of nonzero coefficients.
double effective_dof(const Eigen::VectorXd& beta);

/// trace(H Sigma) on the active set, Sigma = H^{-1} V H^{-1}, with H the
/// quadrature Hessian at beta and V a user-supplied score variance (q x q).
double effective_dof_sandwich(const QuadratureScheme& scheme, const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& score_variance);

/// -2 loglik + log(N) dof.
double cbic(double loglik, double dof, std::size_t n_points);

/// -2 loglik + log(N / (area tau)) dof. Throws ZeroTau for tau <= 0.
double ceric(double loglik, double dof, std::size_t n_points, double area, double tau);

struct CriterionRecord {
  double tau = 0.0;
  double loglik = 0.0;
  double dof = 0.0;
  double cbic = 0.0;
  std::optional<double> ceric;  // absent at tau = 0
  bool converged = false;
};

struct CriterionTable {
  std::vector<CriterionRecord> records;
  std::optional<std::size_t> best_cbic;
  std::optional<std::size_t> best_ceric;
  bool dof_monotone = true;  // diagnostic only

  std::optional<std::size_t> best(Criterion c) const {
    return c == Criterion::Cbic ? best_cbic : best_ceric;
  }
};

/// Criteria along a path. Sandwich mode needs the scheme and a score variance.
CriterionTable criterion_table(const PathFit& path, DofMode mode = DofMode::Count,
                               const QuadratureScheme* scheme = nullptr,
                               const Eigen::MatrixXd* score_variance = nullptr);

struct Selection {
  std::size_t index = 0;
  double tau = 0.0;
  Eigen::VectorXd coefficients;
  double value = 0.0;
};

/// Argmin of the criterion over converged path points; ties go to the larger
/// tau. Throws NoConvergedPoint when nothing is rankable.
Selection select(const PathFit& path, const CriterionTable& table, Criterion criterion);
Selection select(const PathFit& path, Criterion criterion);

}  // namespace ppreg
