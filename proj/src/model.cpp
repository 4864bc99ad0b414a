#include "ppreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppreg/error.hpp"

namespace ppreg {

Raster::Raster(std::size_t nrows_, std::size_t ncols_, Window extent_, std::vector<double> values_)
    : nrows(nrows_), ncols(ncols_), extent(extent_), values(std::move(values_)) {
  if (nrows == 0 || ncols == 0) {
    throw Error(ErrorCode::InvalidArgument, "raster must have at least one row and column");
  }
  if (values.size() != nrows * ncols) {
    throw Error(ErrorCode::InvalidArgument, "raster value count does not match nrows*ncols");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "raster contains non-finite values");
  }
}

double raster_lookup(const Raster& raster, Point u) {
  const Window& e = raster.extent;
  if (!e.contains(u)) {
    std::ostringstream msg;
    msg << "point (" << u.x << "," << u.y << ") outside raster extent";
    throw Error(ErrorCode::OutOfExtent, msg.str());
  }
  const auto index = [](double offset, double length, std::size_t n) {
    const double c = std::floor(offset * static_cast<double>(n) / length);
    return std::min(static_cast<std::size_t>(std::max(c, 0.0)), n - 1);
  };
  const std::size_t col = index(u.x - e.xmin(), e.width(), raster.ncols);
  const std::size_t row = index(e.ymax() - u.y, e.height(), raster.nrows);
  return raster.at(row, col);
}

struct CovariateField::Parents {
  CovariateField first;
  CovariateField second;
};

CovariateField CovariateField::constant(std::string name, double value) {
  CovariateField f(Kind::Constant, std::move(name));
  f.value_ = value;
  return f;
}

CovariateField CovariateField::coord_x(std::string name) { return {Kind::CoordX, std::move(name)}; }

CovariateField CovariateField::coord_y(std::string name) { return {Kind::CoordY, std::move(name)}; }

CovariateField CovariateField::raster(std::string name, Raster grid) {
  CovariateField f(Kind::Raster, std::move(name));
  f.raster_ = std::make_shared<const Raster>(std::move(grid));
  return f;
}

CovariateField CovariateField::product(std::string name, const CovariateField& a,
                                       const CovariateField& b) {
  CovariateField f(Kind::Product, std::move(name));
  f.parents_ = std::make_shared<const Parents>(Parents{a, b});
  return f;
}

double CovariateField::operator()(Point u) const {
  switch (kind_) {
    case Kind::Constant: return value_;
    case Kind::CoordX: return u.x;
    case Kind::CoordY: return u.y;
    case Kind::Raster: return raster_lookup(*raster_, u);
    case Kind::Product: return parents_->first(u) * parents_->second(u);
  }
  return 0.0;
}

bool CovariateField::covers(const Window& w) const {
  switch (kind_) {
    case Kind::Raster: return raster_->extent.contains(w);
    case Kind::Product: return parents_->first.covers(w) && parents_->second.covers(w);
    default: return true;
  }
}

InteractionSpec InteractionSpec::strauss(double range) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw Error(ErrorCode::InvalidArgument, "Strauss interaction range must be positive");
  }
  return {Kind::Strauss, range};
}

ModelSpec::ModelSpec(Window window, std::vector<CovariateField> covariates, InteractionSpec interaction)
    : window_(window), covariates_(std::move(covariates)), interaction_(interaction) {
  if (covariates_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "model needs at least one covariate");
  }
  if (interaction_.is_strauss() && !(interaction_.range > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Strauss interaction range must be positive");
  }
  for (const auto& f : covariates_) {
    if (!f.covers(window_)) {
      throw Error(ErrorCode::OutOfExtent, "covariate '" + f.name() + "' does not cover the window");
    }
  }
  beta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(covariates_.size()));
  penalty_mask_.clear();
  for (const auto& f : covariates_) penalty_mask_.push_back(!f.is_intercept());
  if (interaction_.is_strauss()) penalty_mask_.push_back(false);
}

ModelSpec ModelSpec::with_coefficients(Eigen::VectorXd beta, double psi) const {
  if (beta.size() != static_cast<Eigen::Index>(covariates_.size())) {
    throw Error(ErrorCode::InvalidArgument, "coefficient vector length differs from covariate count");
  }
  ModelSpec m = *this;
  m.beta_ = std::move(beta);
  m.psi_ = interaction_.is_strauss() ? psi : 0.0;
  return m;
}

ModelSpec ModelSpec::with_penalty_mask(std::vector<bool> mask) const {
  if (mask.size() != num_coefficients()) {
    throw Error(ErrorCode::InvalidArgument, "penalty mask length differs from coefficient count");
  }
  ModelSpec m = *this;
  m.penalty_mask_ = std::move(mask);
  return m;
}

Eigen::VectorXd ModelSpec::coefficients() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(num_coefficients()));
  theta.head(beta_.size()) = beta_;
  if (interaction_.is_strauss()) theta(beta_.size()) = psi_;
  return theta;
}

std::vector<std::string> ModelSpec::coefficient_names() const {
  std::vector<std::string> names;
  for (const auto& f : covariates_) names.push_back(f.name());
  if (interaction_.is_strauss()) names.emplace_back("psi");
  return names;
}

namespace {

void require_inside(const ModelSpec& m, Point u) {
  if (!m.window().contains(u)) {
    std::ostringstream msg;
    msg << "location (" << u.x << "," << u.y << ") outside the model window";
    throw Error(ErrorCode::OutOfWindow, msg.str());
  }
}

double trend_predictor(const ModelSpec& m, Point u) {
  double eta = 0.0;
  for (std::size_t j = 0; j < m.num_covariates(); ++j) {
    eta += m.beta()(static_cast<Eigen::Index>(j)) * m.covariates()[j](u);
  }
  return eta;
}

}  // namespace

double interaction_statistic(const ModelSpec& m, Point u, const IndexedPattern& x,
                             std::optional<Point> exclude) {
  if (!m.interaction().is_strauss()) return 0.0;
  return static_cast<double>(x.count_within(u, m.interaction().range, exclude));
}

Eigen::VectorXd covariate_vector(const ModelSpec& m, Point u) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(m.num_covariates()));
  for (std::size_t j = 0; j < m.num_covariates(); ++j) {
    z(static_cast<Eigen::Index>(j)) = m.covariates()[j](u);
  }
  return z;
}

Eigen::VectorXd design_vector(const ModelSpec& m, Point u, const PointPattern* x) {
  require_inside(m, u);
  if (!m.interaction().is_strauss()) return covariate_vector(m, u);
  if (x == nullptr) {
    throw Error(ErrorCode::MissingPattern, "Strauss design vector needs a point pattern");
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(m.num_coefficients()));
  z.head(static_cast<Eigen::Index>(m.num_covariates())) = covariate_vector(m, u);
  z(z.size() - 1) = static_cast<double>(neighbors_within(*x, u, m.interaction().range, u));
  return z;
}

double intensity(const ModelSpec& m, Point u, const PointPattern* x) {
  return std::exp(m.coefficients().dot(design_vector(m, u, x)));
}

double conditional_intensity(const ModelSpec& m, Point u, const IndexedPattern& x,
                             std::optional<Point> exclude) {
  double eta = trend_predictor(m, u);
  if (m.interaction().is_strauss()) eta += m.psi() * interaction_statistic(m, u, x, exclude);
  return std::exp(eta);
}

double trend_intensity(const ModelSpec& m, Point u) { return std::exp(trend_predictor(m, u)); }

std::optional<double> local_stability_bound(const ModelSpec& m, int grid_resolution) {
  if (grid_resolution < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid resolution must be positive");
  }
  if (m.interaction().is_strauss() && m.psi() > 0.0) return std::nullopt;
  const Window& w = m.window();
  const auto lattice = [grid_resolution](double lo, double hi, int k) {
    if (grid_resolution == 1) return 0.5 * (lo + hi);
    if (k == grid_resolution - 1) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_resolution - 1);
  };
  double best = 0.0;
  for (int i = 0; i < grid_resolution; ++i) {
    for (int j = 0; j < grid_resolution; ++j) {
      const Point u{lattice(w.xmin(), w.xmax(), i), lattice(w.ymin(), w.ymax(), j)};
      best = std::max(best, trend_intensity(m, u));
    }
  }
  return best;
}

}  // namespace ppreg
