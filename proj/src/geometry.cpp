#include "ppreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppreg/error.hpp"

namespace ppreg {

double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

Window::Window(double xmin, double xmax, double ymin, double ymax)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
  if (!(std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) && std::isfinite(ymax))) {
    throw Error(ErrorCode::InvalidArgument, "window bounds must be finite");
  }
  if (!(xmin < xmax) || !(ymin < ymax)) {
    std::ostringstream msg;
    msg << "degenerate window [" << xmin << "," << xmax << "]x[" << ymin << "," << ymax << "]";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

bool Window::contains(const Window& other) const {
  return other.xmin_ >= xmin_ && other.xmax_ <= xmax_ && other.ymin_ >= ymin_ &&
         other.ymax_ <= ymax_;
}

PointPattern::PointPattern(Window window, std::vector<Point> points)
    : window_(window), points_(std::move(points)) {
  for (const auto& u : points_) {
    if (!window_.contains(u)) {
      std::ostringstream msg;
      msg << "point (" << u.x << "," << u.y << ") lies outside the window";
      throw Error(ErrorCode::OutOfWindow, msg.str());
    }
  }
  std::vector<Point> sorted = points_;
  std::sort(sorted.begin(), sorted.end(), [](Point a, Point b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::InvalidArgument, "point pattern contains duplicated locations");
  }
}

Window erode(const Window& w, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::InvalidArgument, "erosion distance must be finite and nonnegative");
  }
  if (!(w.width() > 2.0 * r) || !(w.height() > 2.0 * r)) {
    std::ostringstream msg;
    msg << "eroding by " << r << " leaves an empty window";
    throw Error(ErrorCode::EmptyErosion, msg.str());
  }
  return Window(w.xmin() + r, w.xmax() - r, w.ymin() + r, w.ymax() - r);
}

std::size_t count_in(const PointPattern& p, const Window& b) {
  return static_cast<std::size_t>(
      std::count_if(p.points().begin(), p.points().end(), [&](Point u) { return b.contains(u); }));
}

std::size_t neighbors_within(const PointPattern& p, Point u, double r, std::optional<Point> exclude) {
  const double r2 = r * r;
  std::size_t n = 0;
  for (const auto& v : p.points()) {
    if (exclude && v == *exclude) continue;
    if (squared_distance(u, v) <= r2) ++n;
  }
  return n;
}

namespace {
constexpr std::size_t kMaxCellsPerSide = 2048;
}

NeighborIndex::NeighborIndex(std::span<const Point> points, const Window& extent, double cell_size)
    : x0_(extent.xmin()), y0_(extent.ymin()) {
  if (!(cell_size > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "neighbor index cell size must be positive");
  }
  const double side = std::max(extent.width(), extent.height());
  cell_ = std::max(cell_size, side / static_cast<double>(kMaxCellsPerSide));
  nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extent.width() / cell_)));
  ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extent.height() / cell_)));

  std::vector<std::size_t> cell_ids(points.size());
  start_.assign(nx_ * ny_ + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t id = cell_of(points[i].y, y0_, ny_) * nx_ + cell_of(points[i].x, x0_, nx_);
    cell_ids[i] = id;
    ++start_[id + 1];
  }
  for (std::size_t c = 0; c < nx_ * ny_; ++c) start_[c + 1] += start_[c];
  sorted_.resize(points.size());
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) sorted_[fill[cell_ids[i]]++] = points[i];
}

std::size_t NeighborIndex::cell_of(double coord, double origin, std::size_t n) const {
  const double c = std::floor((coord - origin) / cell_);
  if (!(c > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(c), n - 1);
}

std::size_t NeighborIndex::count_within(Point u, double r, std::optional<Point> exclude) const {
  const double r2 = r * r;
  const std::size_t cx0 = cell_of(u.x - r, x0_, nx_);
  const std::size_t cx1 = cell_of(u.x + r, x0_, nx_);
  const std::size_t cy0 = cell_of(u.y - r, y0_, ny_);
  const std::size_t cy1 = cell_of(u.y + r, y0_, ny_);
  std::size_t n = 0;
  for (std::size_t cy = cy0; cy <= cy1; ++cy) {
    for (std::size_t cx = cx0; cx <= cx1; ++cx) {
      const std::size_t id = cy * nx_ + cx;
      for (std::size_t k = start_[id]; k < start_[id + 1]; ++k) {
        const Point& v = sorted_[k];
        if (exclude && v == *exclude) continue;
        if (squared_distance(u, v) <= r2) ++n;
      }
    }
  }
  return n;
}

IndexedPattern::IndexedPattern(const PointPattern& pattern, double range)
    : pattern_(&pattern), index_(pattern.points(), pattern.window(), range) {}

}  // namespace ppreg
