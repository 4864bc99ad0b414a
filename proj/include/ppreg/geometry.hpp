#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ppreg {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double squared_distance(Point a, Point b);

/// Closed axis-aligned rectangle [xmin, xmax] x [ymin, ymax] with positive area.
class Window {
 public:
  Window(double xmin, double xmax, double ymin, double ymax);

  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  double ymin() const { return ymin_; }
  double ymax() const { return ymax_; }
  double width() const { return xmax_ - xmin_; }
  double height() const { return ymax_ - ymin_; }
  double area() const { return width() * height(); }

  bool contains(Point u) const {
    return u.x >= xmin_ && u.x <= xmax_ && u.y >= ymin_ && u.y <= ymax_;
  }
  bool contains(const Window& other) const;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  double xmin_, xmax_, ymin_, ymax_;
};

/// A simple planar point configuration observed in a window. Points keep
/// their input order; construction rejects points outside the window and
/// duplicated locations.
class PointPattern {
 public:
  explicit PointPattern(Window window, std::vector<Point> points = {});

  const Window& window() const { return window_; }
  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  friend bool operator==(const PointPattern&, const PointPattern&) = default;

 private:
  Window window_;
  std::vector<Point> points_;
};

/// Shrinks every side by r. Throws EmptyErosion when a side would collapse.
Window erode(const Window& w, double r);

/// Number of points of p inside b (closed boundaries).
std::size_t count_in(const PointPattern& p, const Window& b);

/// Number of points v with |v - u| <= r; a point equal to `exclude` is skipped.
/// Brute-force scan.
std::size_t neighbors_within(const PointPattern& p, Point u, double r,
                             std::optional<Point> exclude = std::nullopt);

/// Uniform bucket grid over a fixed point set. Queries give the same counts as
/// neighbors_within for any radius.
class NeighborIndex {
 public:
  NeighborIndex(std::span<const Point> points, const Window& extent, double cell_size);

  std::size_t count_within(Point u, double r, std::optional<Point> exclude = std::nullopt) const;

 private:
  std::size_t cell_of(double coord, double origin, std::size_t n) const;

  double x0_, y0_, cell_;
  std::size_t nx_, ny_;
  std::vector<std::size_t> start_;  // CSR offsets, size nx*ny + 1
  std::vector<Point> sorted_;
};

/// A pattern together with a bucket index sized for one interaction range.
class IndexedPattern {
 public:
  IndexedPattern(const PointPattern& pattern, double range);

  const PointPattern& pattern() const { return *pattern_; }
  std::size_t count_within(Point u, double r, std::optional<Point> exclude = std::nullopt) const {
    return index_.count_within(u, r, exclude);
  }

 private:
  const PointPattern* pattern_;
  NeighborIndex index_;
};

}  // namespace ppreg
