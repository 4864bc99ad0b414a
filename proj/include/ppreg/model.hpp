#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppreg/geometry.hpp"

namespace ppreg {

/// Georeferenced grid of covariate values. Row 0 is the top (max y) row;
/// values are stored row-major.
struct Raster {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  Window extent{0.0, 1.0, 0.0, 1.0};
  std::vector<double> values;

  Raster(std::size_t nrows, std::size_t ncols, Window extent, std::vector<double> values);

  double at(std::size_t row, std::size_t col) const { return values[row * ncols + col]; }
};

/// Piecewise-constant lookup of the cell containing u. Points on an interior
/// cell edge go to the cell with the larger row/column index.
double raster_lookup(const Raster& raster, Point u);

/// A spatial covariate z(u). Cheap to copy; shares immutable storage.
class CovariateField {
 public:
  enum class Kind { Constant, CoordX, CoordY, Raster, Product };

  static CovariateField constant(std::string name = "(Intercept)", double value = 1.0);
  static CovariateField coord_x(std::string name = "x");
  static CovariateField coord_y(std::string name = "y");
  static CovariateField raster(std::string name, Raster grid);
  static CovariateField product(std::string name, const CovariateField& a, const CovariateField& b);

  double operator()(Point u) const;

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool is_intercept() const { return kind_ == Kind::Constant && value_ == 1.0; }
  // True when every raster this field reads from covers w.
  bool covers(const Window& w) const;
  const Raster* raster_data() const { return raster_.get(); }

 private:
  CovariateField(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  struct Parents;

  Kind kind_;
  std::string name_;
  double value_ = 1.0;
  std::shared_ptr<const Raster> raster_;
  std::shared_ptr<const Parents> parents_;
};

struct InteractionSpec {
  enum class Kind { None, Strauss };

  Kind kind = Kind::None;
  double range = 0.0;

  static InteractionSpec none() { return {}; }
  static InteractionSpec strauss(double range);

  bool is_strauss() const { return kind == Kind::Strauss; }
};

/// Log-linear (conditional) intensity model
///   lambda(u, x) = exp(beta' z(u) + psi s(u, x)),
/// where s is the Strauss neighbour count when the interaction is enabled.
/// The coefficient vector theta is (beta, psi) in that order.
class ModelSpec {
 public:
  ModelSpec(Window window, std::vector<CovariateField> covariates,
            InteractionSpec interaction = InteractionSpec::none());

  ModelSpec with_coefficients(Eigen::VectorXd beta, double psi = 0.0) const;
  ModelSpec with_penalty_mask(std::vector<bool> mask) const;

  const Window& window() const { return window_; }
  const std::vector<CovariateField>& covariates() const { return covariates_; }
  const InteractionSpec& interaction() const { return interaction_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  double psi() const { return psi_; }
  const std::vector<bool>& penalty_mask() const { return penalty_mask_; }

  std::size_t num_covariates() const { return covariates_.size(); }
  std::size_t num_coefficients() const {
    return covariates_.size() + (interaction_.is_strauss() ? 1 : 0);
  }
  Eigen::VectorXd coefficients() const;
  std::vector<std::string> coefficient_names() const;

 private:
  Window window_;
  std::vector<CovariateField> covariates_;
  InteractionSpec interaction_;
  Eigen::VectorXd beta_;
  double psi_ = 0.0;
  std::vector<bool> penalty_mask_;
};

/// Strauss statistic s1(u, x): neighbours of u within the range, skipping
/// `exclude`. Zero for models without interaction.
double interaction_statistic(const ModelSpec& m, Point u, const IndexedPattern& x,
                             std::optional<Point> exclude);

/// z(u) evaluated for every covariate.
Eigen::VectorXd covariate_vector(const ModelSpec& m, Point u);

/// z_lambda(u, x): covariates followed by s1(u, x) for Strauss models. When u is
/// a point of x it is left out of its own neighbour count.
Eigen::VectorXd design_vector(const ModelSpec& m, Point u, const PointPattern* x = nullptr);

/// exp(theta' z(u, x)); the Papangelou conditional intensity for Strauss models.
double intensity(const ModelSpec& m, Point u, const PointPattern* x = nullptr);

/// Conditional intensity with an explicit exclusion and an indexed pattern.
double conditional_intensity(const ModelSpec& m, Point u, const IndexedPattern& x,
                             std::optional<Point> exclude);

/// exp(beta' z(u)) without the interaction term.
double trend_intensity(const ModelSpec& m, Point u);

/// Upper bound of the conditional intensity from a lattice maximum of the
/// trend, or nullopt (unbounded) when psi > 0. The lattice includes the window
/// edges, so it is exact for affine trends and for rasters whose extent is the
/// window and which have fewer than grid_resolution - 1 cells per side.
std::optional<double> local_stability_bound(const ModelSpec& m, int grid_resolution = 256);

}  // namespace ppreg
