#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ppreg/geometry.hpp"
#include "ppreg/model.hpp"

namespace ppreg {

struct DummyGrid {
  int nx = 32;
  int ny = 32;
};

/// Berman-Turner quadrature: N data nodes followed by M dummy nodes, with
/// counting weights, pseudo-responses y_i = 1(data)/w_i and one design row
/// per node. Fitting the log-linear model then reduces to a weighted Poisson
/// regression of y on the design.
struct QuadratureScheme {
  Window domain{0.0, 1.0, 0.0, 1.0};
  std::vector<Point> nodes;
  std::vector<bool> is_data;
  Eigen::VectorXd weights;
  Eigen::VectorXd responses;
  Eigen::MatrixXd design;  // (N + M) x q
  std::vector<std::string> column_names;
  std::size_t n_data = 0;
  int intercept_column = -1;  // index of an all-ones column, if any

  std::size_t size() const { return nodes.size(); }
  Eigen::Index num_columns() const { return design.cols(); }
};

/// Builds the scheme on the window (Poisson models) or the window eroded by
/// the interaction range (Strauss models). Dummy points sit at the centres of
/// an nx x ny tiling of that domain; each node in a tile holding k nodes gets
/// weight tile_area / k. The Strauss column uses x \ {u} at data nodes and the
/// full pattern at dummy nodes.
QuadratureScheme build_scheme(const PointPattern& pattern, const ModelSpec& model, DummyGrid grid);

/// sum_i w_i (y_i eta_i - exp(eta_i)); returns -inf when exp overflows.
double approx_loglik(const QuadratureScheme& scheme, const Eigen::VectorXd& theta);

struct GradientHessian {
  Eigen::VectorXd gradient;  // sum_i w_i (y_i - exp(eta_i)) z_i
  Eigen::MatrixXd hessian;   // negated second derivative, sum_i w_i exp(eta_i) z_i z_i'
};

GradientHessian gradient_and_hessian(const QuadratureScheme& scheme, const Eigen::VectorXd& theta);

/// Gradient only; cheaper than gradient_and_hessian.
Eigen::VectorXd loglik_gradient(const QuadratureScheme& scheme, const Eigen::VectorXd& theta);

}  // namespace ppreg
