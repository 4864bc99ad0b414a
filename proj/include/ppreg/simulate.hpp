#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "ppreg/geometry.hpp"
#include "ppreg/model.hpp"

namespace ppreg {

/// All simulation randomness comes from std::mt19937_64 seeded through
/// std::seed_seq{seed, stream}; both are fully specified by the standard.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

struct SimConfig {
  ModelSpec model;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;      // replicate index; streams share the seed
  std::size_t burn_in = 100000;  // birth-death steps before output (Strauss)
  std::size_t sweeps = 10000;    // further steps before the returned state
  int bound_resolution = 256;
};

/// Inhomogeneous Poisson process on the model window by thinning a
/// homogeneous process at the local stability bound.
PointPattern sample_poisson(const SimConfig& config);
PointPattern sample_poisson(const ModelSpec& model, Rng& rng, int bound_resolution = 256);

/// Strauss process on the model window (empty outside) by birth-death
/// Metropolis-Hastings started from a Poisson draw of the trend.
/// Throws UnstableModel when psi > 0.
PointPattern sample_strauss(const SimConfig& config);

struct CheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double z = 0.0;
  std::size_t replicates = 0;

  bool passed(double threshold = 3.0) const { return std::abs(z) < threshold; }
};

using TestFunction = std::function<double(Point)>;
/// h(u, x) where `exclude` (if set) is treated as removed from x.
using ConditionalTestFunction =
    std::function<double(Point, const IndexedPattern&, std::optional<Point>)>;

ConditionalTestFunction gnz_unit();
ConditionalTestFunction gnz_strauss_statistic(double range);

struct CheckOptions {
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  int grid = 512;                // quadrature resolution of the deterministic side
  std::size_t burn_in = 100000;
  std::size_t sweeps = 10000;
  unsigned threads = 0;          // 0 = hardware concurrency
};

/// Monte-Carlo mean of sum_{u in X} h(u) against the grid integral of h rho.
/// Poisson models only.
CheckResult campbell_check(const ModelSpec& model, const TestFunction& h, const CheckOptions& options);

/// Monte-Carlo check of E sum_{u in X, u in W-R} h(u, X\u) = E int_{W-R} h(u, X) lambda(u, X) du.
/// z is the standardised mean of the per-replicate difference.
CheckResult gnz_check(const ModelSpec& model, const ConditionalTestFunction& h,
                      const CheckOptions& options);

}  // namespace ppreg
