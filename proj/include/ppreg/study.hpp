#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ppreg/model.hpp"
#include "ppreg/selection.hpp"

namespace ppreg {

/// Replicated simulation study over an increasing-domain ladder of square
/// windows [0, s]^2: simulate, fit the adaptive-lasso path, select tau, and
/// score estimation error and support recovery against the true model.
struct StudyConfig {
  // [study]
  std::uint64_t seed = 1;
  std::size_t replicates = 100;
  std::vector<double> ladder{1.0};
  Criterion criterion = Criterion::Cbic;
  double gamma = 1.0;
  int n_tau = 100;
  double tau_min_ratio = 1e-4;
  int dummy_per_unit = 48;
  std::vector<double> alphas;  // extra fits at tau = mu_hat^-alpha
  bool compare_lasso = true;
  unsigned threads = 0;
  std::size_t burn_in = 100000;
  std::size_t sweeps = 10000;

  // [model]
  std::vector<double> active{1.0, -1.0};
  std::size_t noise = 8;
  double target_density = 400.0;      // expected points per unit area
  std::optional<double> intercept;    // overrides the tuned intercept
  InteractionSpec interaction;
  double psi = 0.0;

  // [covariates]
  int raster_per_unit = 16;
  int waves = 4;
  std::vector<std::string> raster_files;  // replaces synthetic fields when set

  std::size_t num_covariates() const { return active.size() + noise; }
};

/// Reads the INI-style config (sections [study], [model], [covariates]).
StudyConfig parse_study_config(std::istream& in);
StudyConfig read_study_config(const std::string& path);

/// Smooth synthetic covariate: a seeded sum of `waves` plane sinusoids sampled
/// at cell centres of a raster covering `window`, standardised to mean 0 and
/// variance 1 over that grid.
Raster synthetic_field(std::uint64_t seed, std::size_t index, const Window& window,
                       std::size_t cells_x, std::size_t cells_y, int waves);

/// True model for one rung: intercept, active coefficients, zeros.
ModelSpec study_model(const StudyConfig& config, double side);

struct MethodOutcome {
  bool ok = false;
  std::string failure;
  double tau = 0.0;
  Eigen::VectorXd coefficients;
  double l2_error = 0.0;
  double tpr = 0.0;
  std::optional<double> fpr;
  bool exact_support = false;
  std::optional<double> a_n;  // max tau_j over truly active coefficients
  std::optional<double> b_n;  // min tau_j over truly inactive coefficients
};

struct ReplicateOutcome {
  std::size_t rung = 0;
  std::size_t replicate = 0;
  std::size_t n_points = 0;
  std::string failure;  // set when the replicate could not be fitted at all
  std::vector<MethodOutcome> methods;
};

struct MethodSummary {
  std::size_t rung = 0;
  double side = 0.0;
  std::string method;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  double mean_points = 0.0;
  double median_l2_error = 0.0;
  double median_error_sqrt_mu = 0.0;         // error * sqrt(mu_hat)
  double median_error_sqrt_mu_over_p = 0.0;  // error * sqrt(mu_hat / p)
  double tpr = 0.0;
  std::optional<double> fpr;
  double exact_support_rate = 0.0;
};

struct StudyReport {
  StudyConfig config;
  std::vector<std::string> methods;
  std::vector<ReplicateOutcome> replicates;
  std::vector<MethodSummary> summary;

  const MethodSummary* find(std::size_t rung, const std::string& method) const;
};

StudyReport run_study(const StudyConfig& config);

void write_study_summary_csv(std::ostream& out, const StudyReport& report);
void write_study_replicates_csv(std::ostream& out, const StudyReport& report);

}  // namespace ppreg
