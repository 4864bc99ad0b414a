#include "ppreg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ppreg/error.hpp"

namespace ppreg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_real(const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Format, "not a number: '" + t + "'");
  }
  if (used != t.size()) throw Error(ErrorCode::Format, "not a number: '" + t + "'");
  return v;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  if (out.empty()) throw Error(ErrorCode::Format, "empty number list");
  return out;
}

PointPattern read_points_csv(std::istream& in, const Window& window) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,y") {
    throw Error(ErrorCode::Format, "points CSV must start with the header 'x,y'");
  }
  std::vector<Point> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto values = parse_real_list(line);
    if (values.size() != 2) {
      throw Error(ErrorCode::Format, "line " + std::to_string(lineno) + ": expected two values");
    }
    points.push_back({values[0], values[1]});
  }
  try {
    return PointPattern(window, std::move(points));
  } catch (const Error& e) {
    throw Error(ErrorCode::Format, std::string("invalid point pattern: ") + e.what());
  }
}

PointPattern read_points_file(const std::string& path, const Window& window) {
  auto in = open_input(path);
  return read_points_csv(in, window);
}

void write_points_csv(std::ostream& out, const PointPattern& pattern) {
  out << "x,y\n";
  for (const auto& u : pattern.points()) out << format_real(u.x) << ',' << format_real(u.y) << '\n';
}

Raster read_raster_csv(std::istream& in) {
  static const char* keys[] = {"nrows", "ncols", "xmin", "xmax", "ymin", "ymax"};
  std::map<std::string, std::string> meta;
  std::string line;
  for (const char* expected : keys) {
    if (!std::getline(in, line)) throw Error(ErrorCode::Format, "raster header is truncated");
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)) != expected) {
      throw Error(ErrorCode::Format, std::string("raster header expects '") + expected + "='");
    }
    meta[expected] = line.substr(eq + 1);
  }
  const double nr = parse_real(meta["nrows"]);
  const double nc = parse_real(meta["ncols"]);
  if (nr < 1 || nc < 1 || nr != std::floor(nr) || nc != std::floor(nc)) {
    throw Error(ErrorCode::Format, "raster dimensions must be positive integers");
  }
  const auto nrows = static_cast<std::size_t>(nr);
  const auto ncols = static_cast<std::size_t>(nc);
  std::vector<double> values;
  values.reserve(nrows * ncols);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto row = parse_real_list(line);
    if (row.size() != ncols) {
      throw Error(ErrorCode::Format, "raster row " + std::to_string(rows) + " has wrong length");
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows != nrows) throw Error(ErrorCode::Format, "raster has the wrong number of rows");
  try {
    return Raster(nrows, ncols,
                  Window(parse_real(meta["xmin"]), parse_real(meta["xmax"]), parse_real(meta["ymin"]),
                         parse_real(meta["ymax"])),
                  std::move(values));
  } catch (const Error& e) {
    if (e.is_io()) throw;
    throw Error(ErrorCode::Format, std::string("invalid raster: ") + e.what());
  }
}

Raster read_raster_file(const std::string& path) {
  auto in = open_input(path);
  return read_raster_csv(in);
}

void write_raster_csv(std::ostream& out, const Raster& r) {
  out << "nrows=" << r.nrows << "\nncols=" << r.ncols << "\nxmin=" << format_real(r.extent.xmin())
      << "\nxmax=" << format_real(r.extent.xmax()) << "\nymin=" << format_real(r.extent.ymin())
      << "\nymax=" << format_real(r.extent.ymax()) << '\n';
  for (std::size_t i = 0; i < r.nrows; ++i) {
    for (std::size_t j = 0; j < r.ncols; ++j) out << (j ? "," : "") << format_real(r.at(i, j));
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(parse_real_list(line));
    if (rows.back().size() != rows.front().size()) {
      throw Error(ErrorCode::Format, "matrix rows have different lengths");
    }
  }
  if (rows.empty()) throw Error(ErrorCode::Format, "matrix file is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  auto in = open_input(path);
  return read_matrix_csv(in);
}

void write_scheme_csv(std::ostream& out, const QuadratureScheme& s) {
  const Window& d = s.domain;
  out << "# domain=" << format_real(d.xmin()) << ',' << format_real(d.xmax()) << ','
      << format_real(d.ymin()) << ',' << format_real(d.ymax()) << '\n';
  out << "x,y,w,y_resp,is_data";
  for (const auto& name : s.column_names) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << format_real(s.nodes[k].x) << ',' << format_real(s.nodes[k].y) << ','
        << format_real(s.weights(i)) << ',' << format_real(s.responses(i)) << ','
        << (s.is_data[k] ? 1 : 0);
    for (Eigen::Index j = 0; j < s.design.cols(); ++j) out << ',' << format_real(s.design(i, j));
    out << '\n';
  }
}

void write_path_csv(std::ostream& out, const PathFit& path) {
  out << "tau,coefficient,value\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    for (std::size_t j = 0; j < path.names.size(); ++j) {
      out << format_real(path.taus[k]) << ',' << path.names[j] << ','
          << format_real(path.coefficients(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)))
          << '\n';
    }
  }
}

void write_criteria_csv(std::ostream& out, const CriterionTable& table) {
  out << "tau,loglik,dof,cbic,ceric,converged\n";
  for (const auto& r : table.records) {
    out << format_real(r.tau) << ',' << format_real(r.loglik) << ',' << format_real(r.dof) << ','
        << format_real(r.cbic) << ',' << (r.ceric ? format_real(*r.ceric) : "NA") << ','
        << (r.converged ? 1 : 0) << '\n';
  }
}

}  // namespace ppreg
