#include "ppreg/selection.hpp"

#include <cmath>
#include <limits>

#include "ppreg/error.hpp"

namespace ppreg {

using Eigen::Index;

double effective_dof(const Eigen::VectorXd& beta) {
  return static_cast<double>((beta.array() != 0.0).count());
}

double effective_dof_sandwich(const QuadratureScheme& scheme, const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& score_variance) {
  const Index q = scheme.num_columns();
  if (score_variance.rows() != q || score_variance.cols() != q) {
    throw Error(ErrorCode::InvalidArgument, "score variance must be q x q");
  }
  std::vector<Index> active;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) active.push_back(j);
  }
  if (active.empty()) return 0.0;
  const Eigen::MatrixXd h = gradient_and_hessian(scheme, beta).hessian;
  const auto k = static_cast<Index>(active.size());
  Eigen::MatrixXd ha(k, k), va(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      ha(a, b) = h(active[a], active[b]);
      va(a, b) = score_variance(active[a], active[b]);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ha);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      (ldlt.vectorD().array() <= 1e-12 * ha.diagonal().maxCoeff()).any()) {
    throw Error(ErrorCode::SingularActiveHessian, "active-set Hessian is singular");
  }
  // trace(H Sigma) = trace(H^{-1} V) on the active block.
  return ldlt.solve(va).trace();
}

double cbic(double loglik, double dof, std::size_t n_points) {
  if (n_points < 1) throw Error(ErrorCode::InvalidArgument, "cBIC needs at least one point");
  return -2.0 * loglik + std::log(static_cast<double>(n_points)) * dof;
}

double ceric(double loglik, double dof, std::size_t n_points, double area, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::ZeroTau, "cERIC is undefined at tau = 0");
  if (!(area > 0.0)) throw Error(ErrorCode::InvalidArgument, "window area must be positive");
  if (n_points < 1) throw Error(ErrorCode::InvalidArgument, "cERIC needs at least one point");
  return -2.0 * loglik + std::log(static_cast<double>(n_points) / (area * tau)) * dof;
}

CriterionTable criterion_table(const PathFit& path, DofMode mode, const QuadratureScheme* scheme,
                               const Eigen::MatrixXd* score_variance) {
  if (mode == DofMode::Sandwich && (scheme == nullptr || score_variance == nullptr)) {
    throw Error(ErrorCode::InvalidArgument, "sandwich dof needs the scheme and a score variance");
  }
  const std::size_t n = std::max<std::size_t>(path.n_points, 1);
  CriterionTable table;
  double prev_dof = -1.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    CriterionRecord r;
    r.tau = path.taus[k];
    r.loglik = path.loglik[k];
    r.converged = path.converged[k] && std::isfinite(r.loglik);
    if (r.converged) {
      const Eigen::VectorXd beta = path.coefficients.row(static_cast<Index>(k)).transpose();
      r.dof = mode == DofMode::Count ? effective_dof(beta)
                                     : effective_dof_sandwich(*scheme, beta, *score_variance);
      r.cbic = cbic(r.loglik, r.dof, n);
      if (r.tau > 0.0) r.ceric = ceric(r.loglik, r.dof, n, path.domain_area, r.tau);
      // taus decrease along the path, so dof should not drop.
      if (prev_dof >= 0.0 && r.dof + 1e-9 < prev_dof) table.dof_monotone = false;
      prev_dof = r.dof;

      if (!table.best_cbic || r.cbic < table.records[*table.best_cbic].cbic) table.best_cbic = k;
      if (r.ceric && (!table.best_ceric || *r.ceric < *table.records[*table.best_ceric].ceric)) {
        table.best_ceric = k;
      }
    } else {
      r.dof = std::numeric_limits<double>::quiet_NaN();
      r.cbic = std::numeric_limits<double>::quiet_NaN();
    }
    table.records.push_back(r);
  }
  return table;
}

Selection select(const PathFit& path, const CriterionTable& table, Criterion criterion) {
  const auto best = table.best(criterion);
  if (!best) throw Error(ErrorCode::NoConvergedPoint, "no converged path point can be ranked");
  Selection s;
  s.index = *best;
  s.tau = path.taus[*best];
  s.coefficients = path.coefficients.row(static_cast<Index>(*best)).transpose();
  const auto& r = table.records[*best];
  s.value = criterion == Criterion::Cbic ? r.cbic : *r.ceric;
  return s;
}

Selection select(const PathFit& path, Criterion criterion) {
  return select(path, criterion_table(path), criterion);
}

}  // namespace ppreg
