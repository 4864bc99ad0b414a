#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

#include "ppreg/geometry.hpp"
#include "ppreg/model.hpp"
#include "ppreg/quadrature.hpp"
#include "ppreg/selection.hpp"
#include "ppreg/solver.hpp"

namespace ppreg {

/// Every numeric output goes through here: 17 significant digits, so values
/// round-trip exactly. NaN prints as NA.
std::string format_real(double value);

/// Points CSV: header `x,y`, then one point per line. The window is supplied
/// by the caller; points outside it are an error.
PointPattern read_points_csv(std::istream& in, const Window& window);
PointPattern read_points_file(const std::string& path, const Window& window);
void write_points_csv(std::ostream& out, const PointPattern& pattern);

/// Raster CSV: `nrows=`, `ncols=`, `xmin=`, `xmax=`, `ymin=`, `ymax=` lines,
/// then nrows lines of ncols comma-separated values, top row first.
Raster read_raster_csv(std::istream& in);
Raster read_raster_file(const std::string& path);
void write_raster_csv(std::ostream& out, const Raster& raster);

/// Plain numeric matrix, one comma-separated row per line.
Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd read_matrix_file(const std::string& path);

/// `# domain=xmin,xmax,ymin,ymax` then `x,y,w,y_resp,is_data,<columns>`.
void write_scheme_csv(std::ostream& out, const QuadratureScheme& scheme);

/// Tidy coefficient path: `tau,coefficient,value`.
void write_path_csv(std::ostream& out, const PathFit& path);

/// `tau,loglik,dof,cbic,ceric,converged`; cERIC is NA at tau = 0.
void write_criteria_csv(std::ostream& out, const CriterionTable& table);

/// Parses "a,b,c" into doubles; throws Format on junk.
std::vector<double> parse_real_list(const std::string& text);
double parse_real(const std::string& text);

}  // namespace ppreg
