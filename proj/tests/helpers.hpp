#pragma once

#include <random>
#include <vector>

#include "ppreg/error.hpp"
#include "ppreg/geometry.hpp"
#include "ppreg/model.hpp"

namespace testutil {

// True when fn throws ppreg::Error with the given code.
bool throws_code(ppreg::ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const ppreg::Error& e) {
    return e.code() == code;
  }
  return false;
}

inline ppreg::Window unit() { return {0.0, 1.0, 0.0, 1.0}; }

// n distinct uniform points in w; continuous draws never collide in practice.
inline ppreg::PointPattern uniform_pattern(const ppreg::Window& w, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(w.xmin(), w.xmax()), uy(w.ymin(), w.ymax());
  std::vector<ppreg::Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back({ux(rng), uy(rng)});
  return ppreg::PointPattern(w, std::move(pts));
}

inline ppreg::ModelSpec intercept_model(const ppreg::Window& w, double beta0,
                                        ppreg::InteractionSpec inter = ppreg::InteractionSpec::none(),
                                        double psi = 0.0) {
  ppreg::ModelSpec m(w, {ppreg::CovariateField::constant()}, inter);
  Eigen::VectorXd b(1);
  b << beta0;
  return m.with_coefficients(b, psi);
}

}  // namespace testutil
