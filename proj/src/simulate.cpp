#include "ppreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ppreg/error.hpp"
#include "ppreg/parallel.hpp"

namespace ppreg {

namespace {

constexpr double kNegligibleIntensity = 1e-30;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

Point uniform_point(const Window& w, Rng& rng) {
  return {w.xmin() + w.width() * uniform01(rng), w.ymin() + w.height() * uniform01(rng)};
}

// Mutable configuration with a bucket grid whose cells are at least the
// interaction range wide, so neighbour counts only visit a 3x3 block.
class DynamicConfiguration {
 public:
  DynamicConfiguration(const Window& w, double range) : window_(w), range_(range) {
    const auto cells = [range](double len) {
      const double k = range > 0.0 ? std::floor(len / range) : 1.0;
      return static_cast<std::size_t>(std::clamp(k, 1.0, 1024.0));
    };
    nx_ = cells(w.width());
    ny_ = cells(w.height());
    buckets_.resize(nx_ * ny_);
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  Point at(std::size_t i) const { return points_[i]; }

  void insert(Point u) {
    const std::size_t b = bucket_of(u);
    slot_.push_back(buckets_[b].size());
    buckets_[b].push_back(points_.size());
    points_.push_back(u);
  }

  void erase(std::size_t i) {
    detach(i);
    const std::size_t last = points_.size() - 1;
    if (i != last) {
      // Move the last point into slot i and repoint its bucket entry.
      const std::size_t b = bucket_of(points_[last]);
      buckets_[b][slot_[last]] = i;
      points_[i] = points_[last];
      slot_[i] = slot_[last];
    }
    points_.pop_back();
    slot_.pop_back();
  }

  // Neighbours of u within the range, skipping index `skip` (size() = none).
  std::size_t count_within(Point u, std::size_t skip) const {
    const double r2 = range_ * range_;
    const std::size_t cx = cell(u.x, window_.xmin(), window_.width(), nx_);
    const std::size_t cy = cell(u.y, window_.ymin(), window_.height(), ny_);
    std::size_t n = 0;
    for (std::size_t y = (cy == 0 ? 0 : cy - 1); y <= std::min(cy + 1, ny_ - 1); ++y) {
      for (std::size_t x = (cx == 0 ? 0 : cx - 1); x <= std::min(cx + 1, nx_ - 1); ++x) {
        for (std::size_t idx : buckets_[y * nx_ + x]) {
          if (idx != skip && squared_distance(u, points_[idx]) <= r2) ++n;
        }
      }
    }
    return n;
  }

 private:
  static std::size_t cell(double v, double origin, double len, std::size_t n) {
    const double c = std::floor((v - origin) * static_cast<double>(n) / len);
    return std::min(static_cast<std::size_t>(std::max(c, 0.0)), n - 1);
  }

  std::size_t bucket_of(Point u) const {
    return cell(u.y, window_.ymin(), window_.height(), ny_) * nx_ +
           cell(u.x, window_.xmin(), window_.width(), nx_);
  }

  void detach(std::size_t i) {
    auto& bucket = buckets_[bucket_of(points_[i])];
    const std::size_t s = slot_[i];
    const std::size_t moved = bucket.back();
    bucket[s] = moved;
    slot_[moved] = s;
    bucket.pop_back();
  }

  Window window_;
  double range_;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<Point> points_;
  std::vector<std::size_t> slot_;
  std::vector<std::vector<std::size_t>> buckets_;
};

double trend_bound(const ModelSpec& model, int resolution) {
  const ModelSpec trend = model.interaction().is_strauss() ? model.with_coefficients(model.beta(), 0.0)
                                                           : model;
  const auto bound = local_stability_bound(trend, resolution);
  if (!bound || !std::isfinite(*bound)) {
    throw Error(ErrorCode::UnboundedTrend, "trend intensity has no finite bound on the window");
  }
  return *bound;
}

std::vector<Point> thin_trend(const ModelSpec& model, Rng& rng, int resolution) {
  const double bound = trend_bound(model, resolution);
  const Window& w = model.window();
  std::vector<Point> kept;
  if (bound <= kNegligibleIntensity) return kept;
  std::poisson_distribution<long> count(bound * w.area());
  const long n = count(rng);
  kept.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const Point u = uniform_point(w, rng);
    const double rho = trend_intensity(model, u);
    if (rho > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "trend " << rho << " exceeds the lattice bound " << bound;
      throw Error(ErrorCode::UnboundedTrend, msg.str());
    }
    if (uniform01(rng) * bound < rho) kept.push_back(u);
  }
  return kept;
}

double mean_of(const std::vector<double>& v) {
  return compensated_sum(v) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return std::sqrt(compensated_sum(sq) / static_cast<double>(v.size() - 1) /
                   static_cast<double>(v.size()));
}

double z_score(double diff, double se) {
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return diff > 0.0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

PointPattern sample_poisson(const ModelSpec& model, Rng& rng, int bound_resolution) {
  if (model.interaction().is_strauss()) {
    throw Error(ErrorCode::InvalidArgument, "Poisson sampler needs a model without interaction");
  }
  return PointPattern(model.window(), thin_trend(model, rng, bound_resolution));
}

PointPattern sample_poisson(const SimConfig& config) {
  Rng rng = make_rng(config.seed, config.stream);
  return sample_poisson(config.model, rng, config.bound_resolution);
}

PointPattern sample_strauss(const SimConfig& config) {
  const ModelSpec& m = config.model;
  if (m.interaction().is_strauss() && m.psi() > 0.0) {
    throw Error(ErrorCode::UnstableModel, "Strauss sampling needs psi <= 0 (local stability)");
  }
  const Window& w = m.window();
  const double range = m.interaction().is_strauss() ? m.interaction().range : 0.0;
  const double psi = m.psi();
  Rng rng = make_rng(config.seed, config.stream);

  DynamicConfiguration state(w, range);
  for (const Point& u : thin_trend(m, rng, config.bound_resolution)) state.insert(u);

  const double area = w.area();
  const auto log_papangelou = [&](Point u, std::size_t skip) {
    double eta = std::log(trend_intensity(m, u));
    if (range > 0.0 && psi != 0.0) eta += psi * static_cast<double>(state.count_within(u, skip));
    return eta;
  };
  const std::size_t steps = config.burn_in + config.sweeps;
  for (std::size_t step = 0; step < steps; ++step) {
    const double n = static_cast<double>(state.size());
    if (uniform01(rng) < 0.5) {
      const Point u = uniform_point(w, rng);
      const double log_ratio = log_papangelou(u, state.size()) + std::log(area / (n + 1.0));
      if (std::log(uniform01(rng)) < log_ratio) state.insert(u);
    } else if (state.size() > 0) {
      const auto i = static_cast<std::size_t>(uniform01(rng) * n);
      const std::size_t victim = std::min(i, state.size() - 1);
      const double log_ratio = std::log(n / area) - log_papangelou(state.at(victim), victim);
      if (std::log(uniform01(rng)) < log_ratio) state.erase(victim);
    }
  }
  return PointPattern(w, state.points());
}

ConditionalTestFunction gnz_unit() {
  return [](Point, const IndexedPattern&, std::optional<Point>) { return 1.0; };
}

ConditionalTestFunction gnz_strauss_statistic(double range) {
  return [range](Point u, const IndexedPattern& x, std::optional<Point> exclude) {
    return static_cast<double>(x.count_within(u, range, exclude));
  };
}

CheckResult campbell_check(const ModelSpec& model, const TestFunction& h, const CheckOptions& opt) {
  if (model.interaction().is_strauss()) {
    throw Error(ErrorCode::InvalidArgument, "Campbell check needs a Poisson model");
  }
  if (opt.replicates < 1 || opt.grid < 1) {
    throw Error(ErrorCode::InvalidArgument, "Campbell check needs replicates and grid >= 1");
  }
  const Window& w = model.window();
  const double dx = w.width() / opt.grid;
  const double dy = w.height() / opt.grid;
  std::vector<double> cells(static_cast<std::size_t>(opt.grid) * opt.grid);
  for (int j = 0; j < opt.grid; ++j) {
    for (int i = 0; i < opt.grid; ++i) {
      const Point u{w.xmin() + (i + 0.5) * dx, w.ymin() + (j + 0.5) * dy};
      cells[static_cast<std::size_t>(j) * opt.grid + i] = h(u) * trend_intensity(model, u) * dx * dy;
    }
  }
  CheckResult out;
  out.replicates = opt.replicates;
  out.rhs = compensated_sum(cells);

  std::vector<double> sums(opt.replicates);
  parallel_for(opt.replicates, opt.threads, [&](std::size_t r) {
    Rng rng = make_rng(opt.seed, r);
    const PointPattern x = sample_poisson(model, rng);
    std::vector<double> terms;
    terms.reserve(x.size());
    for (const Point& u : x.points()) terms.push_back(h(u));
    sums[r] = compensated_sum(terms);
  });
  out.lhs = mean_of(sums);
  out.z = z_score(out.lhs - out.rhs, standard_error(sums, out.lhs));
  return out;
}

CheckResult gnz_check(const ModelSpec& model, const ConditionalTestFunction& h,
                      const CheckOptions& opt) {
  if (opt.replicates < 1 || opt.grid < 1) {
    throw Error(ErrorCode::InvalidArgument, "GNZ check needs replicates and grid >= 1");
  }
  const bool strauss = model.interaction().is_strauss();
  if (strauss && model.psi() > 0.0) {
    throw Error(ErrorCode::UnstableModel, "GNZ check needs psi <= 0");
  }
  const double range = strauss ? model.interaction().range : 0.0;
  const Window domain = strauss ? erode(model.window(), range) : model.window();
  const double dx = domain.width() / opt.grid;
  const double dy = domain.height() / opt.grid;
  const double index_cell = strauss ? range : std::max(domain.width(), domain.height()) / 16.0;

  std::vector<double> lhs(opt.replicates), rhs(opt.replicates);
  parallel_for(opt.replicates, opt.threads, [&](std::size_t r) {
    PointPattern x(model.window());
    if (strauss) {
      x = sample_strauss({model, opt.seed, r, opt.burn_in, opt.sweeps});
    } else {
      Rng rng = make_rng(opt.seed, r);
      x = sample_poisson(model, rng);
    }
    const IndexedPattern indexed(x, index_cell);
    std::vector<double> terms;
    for (const Point& u : x.points()) {
      if (domain.contains(u)) terms.push_back(h(u, indexed, u));
    }
    lhs[r] = compensated_sum(terms);
    terms.assign(static_cast<std::size_t>(opt.grid) * opt.grid, 0.0);
    for (int j = 0; j < opt.grid; ++j) {
      for (int i = 0; i < opt.grid; ++i) {
        const Point u{domain.xmin() + (i + 0.5) * dx, domain.ymin() + (j + 0.5) * dy};
        const double value = h(u, indexed, std::nullopt);
        if (value != 0.0) {
          terms[static_cast<std::size_t>(j) * opt.grid + i] =
              value * conditional_intensity(model, u, indexed, std::nullopt) * dx * dy;
        }
      }
    }
    rhs[r] = compensated_sum(terms);
  });

  std::vector<double> diff(opt.replicates);
  for (std::size_t r = 0; r < opt.replicates; ++r) diff[r] = lhs[r] - rhs[r];
  CheckResult out;
  out.replicates = opt.replicates;
  out.lhs = mean_of(lhs);
  out.rhs = mean_of(rhs);
  const double d = mean_of(diff);
  out.z = z_score(d, standard_error(diff, d));
  return out;
}

}  // namespace ppreg
