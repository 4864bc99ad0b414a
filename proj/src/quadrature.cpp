#include "ppreg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppreg/error.hpp"

namespace ppreg {

namespace {

std::size_t tile_index(double coord, double origin, double length, int n) {
  const double c = std::floor((coord - origin) * static_cast<double>(n) / length);
  return std::min(static_cast<std::size_t>(std::max(c, 0.0)), static_cast<std::size_t>(n - 1));
}

Eigen::ArrayXd linear_predictor(const QuadratureScheme& s, const Eigen::VectorXd& theta) {
  if (theta.size() != s.design.cols()) {
    throw Error(ErrorCode::InvalidArgument, "coefficient vector length differs from design width");
  }
  return (s.design * theta).array();
}

}  // namespace

QuadratureScheme build_scheme(const PointPattern& pattern, const ModelSpec& model, DummyGrid grid) {
  if (grid.nx < 1 || grid.ny < 1) {
    throw Error(ErrorCode::InvalidArgument, "dummy grid dimensions must be positive");
  }
  if (!(pattern.window() == model.window())) {
    throw Error(ErrorCode::InvalidArgument, "pattern and model windows differ");
  }
  const bool strauss = model.interaction().is_strauss();
  QuadratureScheme s;
  s.domain = strauss ? erode(pattern.window(), model.interaction().range) : pattern.window();
  const Window& d = s.domain;

  for (const auto& u : pattern.points()) {
    if (d.contains(u)) s.nodes.push_back(u);
  }
  s.n_data = s.nodes.size();
  const double dx = d.width() / grid.nx;
  const double dy = d.height() / grid.ny;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      s.nodes.push_back({d.xmin() + (i + 0.5) * dx, d.ymin() + (j + 0.5) * dy});
    }
  }
  const std::size_t n = s.nodes.size();
  s.is_data.assign(n, false);
  std::fill(s.is_data.begin(), s.is_data.begin() + static_cast<std::ptrdiff_t>(s.n_data), true);

  std::vector<std::size_t> tile(n);
  std::vector<std::size_t> occupancy(static_cast<std::size_t>(grid.nx) * grid.ny, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const Point u = s.nodes[k];
    tile[k] = tile_index(u.y, d.ymin(), d.height(), grid.ny) * grid.nx +
              tile_index(u.x, d.xmin(), d.width(), grid.nx);
    ++occupancy[tile[k]];
  }
  const double tile_area = dx * dy;
  s.weights.resize(static_cast<Eigen::Index>(n));
  s.responses.resize(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double w = tile_area / static_cast<double>(occupancy[tile[k]]);
    s.weights(static_cast<Eigen::Index>(k)) = w;
    s.responses(static_cast<Eigen::Index>(k)) = s.is_data[k] ? 1.0 / w : 0.0;
  }

  const auto q = static_cast<Eigen::Index>(model.num_coefficients());
  const auto p = static_cast<Eigen::Index>(model.num_covariates());
  s.design.resize(static_cast<Eigen::Index>(n), q);
  for (Eigen::Index j = 0; j < p; ++j) {
    const CovariateField& f = model.covariates()[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < n; ++k) s.design(static_cast<Eigen::Index>(k), j) = f(s.nodes[k]);
  }
  if (strauss) {
    const IndexedPattern indexed(pattern, model.interaction().range);
    for (std::size_t k = 0; k < n; ++k) {
      const std::optional<Point> exclude =
          s.is_data[k] ? std::optional<Point>(s.nodes[k]) : std::nullopt;
      s.design(static_cast<Eigen::Index>(k), p) =
          interaction_statistic(model, s.nodes[k], indexed, exclude);
    }
  }
  s.column_names = model.coefficient_names();
  for (Eigen::Index j = 0; j < q; ++j) {
    if ((s.design.col(j).array() == 1.0).all()) {
      s.intercept_column = static_cast<int>(j);
      break;
    }
  }
  return s;
}

double approx_loglik(const QuadratureScheme& s, const Eigen::VectorXd& theta) {
  const Eigen::ArrayXd eta = linear_predictor(s, theta);
  const Eigen::ArrayXd mu = eta.exp();
  // w_i y_i is 1 at data nodes and 0 elsewhere.
  const double value = (s.weights.array() * s.responses.array() * eta).sum() -
                       (s.weights.array() * mu).sum();
  if (std::isnan(value) || !std::isfinite(value)) return -std::numeric_limits<double>::infinity();
  return value;
}

Eigen::VectorXd loglik_gradient(const QuadratureScheme& s, const Eigen::VectorXd& theta) {
  const Eigen::ArrayXd mu = linear_predictor(s, theta).exp();
  if (!mu.allFinite()) throw Error(ErrorCode::NonFinite, "intensity overflow in gradient");
  const Eigen::VectorXd resid = (s.weights.array() * (s.responses.array() - mu)).matrix();
  return s.design.transpose() * resid;
}

GradientHessian gradient_and_hessian(const QuadratureScheme& s, const Eigen::VectorXd& theta) {
  const Eigen::ArrayXd mu = linear_predictor(s, theta).exp();
  if (!mu.allFinite()) throw Error(ErrorCode::NonFinite, "intensity overflow in Hessian");
  const Eigen::VectorXd resid = (s.weights.array() * (s.responses.array() - mu)).matrix();
  const Eigen::ArrayXd root = (s.weights.array() * mu).sqrt();
  const Eigen::MatrixXd scaled = s.design.array().colwise() * root;
  GradientHessian out;
  out.gradient = s.design.transpose() * resid;
  const auto q = s.design.cols();
  out.hessian = Eigen::MatrixXd::Zero(q, q);
  out.hessian.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  out.hessian = out.hessian.selfadjointView<Eigen::Lower>();
  return out;
}

}  // namespace ppreg
