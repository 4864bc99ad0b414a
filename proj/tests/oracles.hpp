#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "ppreg/quadrature.hpp"

namespace testutil {

// Brute-force maximiser of the penalised quadrature objective for a scheme
// with two columns (column 0 all ones). For fixed b1 the objective separates as
//   (b0 D0 + b1 D1 - exp(b0) S(b1)) / mu - tau v1 |b1|,
// so a grid over (b0, b1) only needs S on the b1 grid. Coarse-to-fine search
// over [-10, 10]^2 from step 1e-2 down to 1e-5.
class GridSearch2 {
 public:
  GridSearch2(const ppreg::QuadratureScheme& s) : s_(s) {
    for (Eigen::Index i = 0; i < s.design.rows(); ++i) {
      const double wy = s.weights(i) * s.responses(i);
      d0_ += wy * s.design(i, 0);
      d1_ += wy * s.design(i, 1);
    }
    std::size_t n = 0;
    for (bool b : s.is_data) n += b ? 1 : 0;
    mu_ = std::max<double>(static_cast<double>(n), 1.0);
  }

  double objective(double b0, double b1, double s_b1, double tau, double v1) const {
    return (b0 * d0_ + b1 * d1_ - std::exp(b0) * s_b1) / mu_ - tau * v1 * std::abs(b1);
  }

  double exp_sum(double b1) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < s_.design.rows(); ++i) total += s_.weights(i) * std::exp(b1 * s_.design(i, 1));
    return total;
  }

  Eigen::Vector2d maximise(double tau, double v1) {
    if (coarse_s_.empty()) {
      for (int k = 0; k <= 2000; ++k) {
        coarse_s_.push_back(exp_sum(-10.0 + 0.01 * k));
        coarse_e_.push_back(std::exp(-10.0 + 0.01 * k));
      }
    }
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Vector2d arg(0.0, 0.0);
    for (int j = 0; j <= 2000; ++j) {
      const double b1 = -10.0 + 0.01 * j;
      const double sb = coarse_s_[static_cast<std::size_t>(j)];
      const double fixed = b1 * d1_ / mu_ - tau * v1 * std::abs(b1);
      for (int i = 0; i <= 2000; ++i) {
        const double b0 = -10.0 + 0.01 * i;
        const double q = fixed + (b0 * d0_ - coarse_e_[static_cast<std::size_t>(i)] * sb) / mu_;
        if (q > best) {
          best = q;
          arg = {b0, b1};
        }
      }
    }
    for (double step = 1e-3; step >= 1e-5 * 0.999; step /= 10.0) {
      const Eigen::Vector2d centre = arg;
      for (int j = -30; j <= 30; ++j) {
        const double b1 = centre(1) + step * j;
        const double sb = exp_sum(b1);
        for (int i = -30; i <= 30; ++i) {
          const double b0 = centre(0) + step * i;
          const double q = objective(b0, b1, sb, tau, v1);
          if (q > best) {
            best = q;
            arg = {b0, b1};
          }
        }
      }
    }
    return arg;
  }

 private:
  const ppreg::QuadratureScheme& s_;
  double d0_ = 0.0, d1_ = 0.0, mu_ = 1.0;
  std::vector<double> coarse_s_, coarse_e_;
};

}  // namespace testutil
