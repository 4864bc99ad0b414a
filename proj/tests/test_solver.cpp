#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "ppreg/simulate.hpp"
#include "ppreg/solver.hpp"

using namespace ppreg;
using testutil::throws_code;

namespace {

ModelSpec xy_model(const Window& w, const Eigen::VectorXd& beta) {
  return ModelSpec(w, {CovariateField::constant(), CovariateField::coord_x("x"), CovariateField::coord_y("y")})
      .with_coefficients(beta);
}

QuadratureScheme simulated_scheme(const ModelSpec& truth, std::uint64_t seed, DummyGrid g = {40, 40}) {
  Rng rng = make_rng(seed, 0);
  return build_scheme(sample_poisson(truth, rng), truth, g);
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
}

TEST_CASE("intercept-only maximum likelihood is log(N / |D|)") {
  const auto x = testutil::uniform_pattern(testutil::unit(), 100, 21);
  const auto s = build_scheme(x, testutil::intercept_model(testutil::unit(), 0.0), {32, 32});
  const Eigen::VectorXd b = fit_unpenalized(s);
  CHECK(std::abs(b(0) - std::log(100.0)) < 1e-10);
  CHECK(loglik_gradient(s, b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("an all-zero interaction column is singular") {
  const auto m = testutil::intercept_model(testutil::unit(), 0.0, InteractionSpec::strauss(0.01));
  const PointPattern x(testutil::unit(), {{0.3, 0.3}, {0.7, 0.7}});
  const auto s = build_scheme(x, m, {4, 4});
  REQUIRE(s.design.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(throws_code(ErrorCode::Singular, [&] { fit_unpenalized(s); }));
  const PilotFit pilot = fit_pilot(s);
  CHECK(pilot.ridge);
  CHECK(pilot.ridge_value > 0.0);
}

TEST_CASE("unpenalized estimates are unbiased over replicates") {
  Eigen::VectorXd truth(2);
  truth << 4.0, 1.0;
  const ModelSpec m = ModelSpec(testutil::unit(), {CovariateField::constant(), CovariateField::coord_x()})
                          .with_coefficients(truth);
  const int reps = 500;
  Eigen::MatrixXd est(reps, 2);
  for (int r = 0; r < reps; ++r) {
    est.row(r) = fit_unpenalized(simulated_scheme(m, 100 + r, {32, 32})).transpose();
  }
  const Eigen::RowVectorXd mean = est.colwise().mean();
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double sd = std::sqrt((est.col(j).array() - mean(j)).square().sum() / (reps - 1));
    CHECK(std::abs(mean(j) - truth(j)) < 3.0 * sd / std::sqrt(static_cast<double>(reps)));
  }
}

TEST_CASE("penalty plans") {
  const std::vector<bool> mask{false, true, true};
  const PenaltyPlan lasso = lasso_plan(mask);
  CHECK(lasso.multipliers(0) == 0.0);
  CHECK(lasso.multipliers(1) == 1.0);
  Eigen::VectorXd pilot(3);
  pilot << 3.0, -0.5, 2.0;
  const PenaltyPlan adaptive = adaptive_plan(pilot, mask, 2.0);
  CHECK(adaptive.multipliers(0) == 0.0);
  CHECK(adaptive.multipliers(1) == doctest::Approx(4.0));
  CHECK(adaptive.multipliers(2) == doctest::Approx(0.25));
  pilot(2) = 0.0;
  CHECK(throws_code(ErrorCode::ZeroPilotCoefficient, [&] { adaptive_plan(pilot, mask); }));
  CHECK(throws_code(ErrorCode::NoPenalizedCoefficients, [&] {
    const auto x = testutil::uniform_pattern(testutil::unit(), 30, 1);
    tau_max(build_scheme(x, testutil::intercept_model(testutil::unit(), 0.0), {8, 8}), lasso_plan({false}));
  }));
}

TEST_CASE("tau_max") {
  Eigen::VectorXd truth(3);
  truth << 5.0, 0.8, -0.4;
  const auto s = simulated_scheme(xy_model(testutil::unit(), truth), 3);
  const PenaltyPlan plan = lasso_plan({false, true, true});
  const double t = tau_max(s, plan);
  CHECK(t > 0.0);

  PenaltyPlan doubled = plan;
  doubled.multipliers *= 2.0;
  CHECK(tau_max(s, doubled) == doctest::Approx(t / 2.0).epsilon(1e-12));

  const Eigen::VectorXd start = restricted_optimum(s, plan);
  const TauFit at = fit_at_tau(s, plan, t, start);
  CHECK(at.coefficients(1) == 0.0);
  CHECK(at.coefficients(2) == 0.0);
  const TauFit below = fit_at_tau(s, plan, 0.99 * t, start);
  CHECK((below.coefficients(1) != 0.0 || below.coefficients(2) != 0.0));

  // A covariate orthogonal to the score gives tau_max = 0.
  const PointPattern sym(testutil::unit(), {{0.2, 0.3}, {0.8, 0.3}, {0.4, 0.6}, {0.6, 0.6}});
  const ModelSpec centred(testutil::unit(), {CovariateField::constant(), CovariateField::coord_x()});
  const auto s2 = build_scheme(sym, centred, {4, 4});
  CHECK(tau_max(s2, lasso_plan({false, true})) < 1e-12);
}

TEST_CASE("regularization path invariants") {
  Eigen::VectorXd truth(3);
  truth << 5.0, 1.0, 0.0;
  const auto s = simulated_scheme(xy_model(testutil::unit(), truth), 8);
  const PenaltyPlan plan = adaptive_plan(fit_unpenalized(s), {false, true, true});
  const PathFit path = fit_path(s, plan, 30, 1e-4);
  REQUIRE(path.size() == 31);
  CHECK(path.taus.front() == path.tau_max);
  CHECK(path.taus.back() == 0.0);
  for (std::size_t k = 1; k < path.size(); ++k) CHECK(path.taus[k] < path.taus[k - 1]);
  CHECK(path.coefficients(0, 1) == 0.0);
  CHECK(path.coefficients(0, 2) == 0.0);
  for (std::size_t k = 0; k < path.size(); ++k) {
    CHECK(path.converged[k]);
    CHECK(path.kkt[k] < 1e-6);
    const Eigen::VectorXd beta = path.coefficients.row(static_cast<Eigen::Index>(k)).transpose();
    CHECK(kkt_residual(s, plan, path.taus[k], beta) == doctest::Approx(path.kkt[k]));
  }
  const Eigen::VectorXd last = path.coefficients.row(30).transpose();
  CHECK((last - fit_unpenalized(s)).cwiseAbs().maxCoeff() < 1e-4);

  const PathFit again = fit_path(s, plan, 30, 1e-4);
  CHECK(again.coefficients == path.coefficients);
  CHECK(again.taus == path.taus);
}

TEST_CASE("path solutions agree with a brute-force grid search") {
  Eigen::VectorXd truth(2);
  truth << std::log(200.0), 1.0;
  const ModelSpec m = ModelSpec(testutil::unit(), {CovariateField::constant(), CovariateField::coord_x()})
                          .with_coefficients(truth);
  const auto s = simulated_scheme(m, 31, {32, 32});
  const PenaltyPlan plan = adaptive_plan(fit_unpenalized(s), {false, true});
  const PathFit path = fit_path(s, plan, 8, 1e-3);
  testutil::GridSearch2 oracle(s);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Eigen::Vector2d best = oracle.maximise(path.taus[k], plan.multipliers(1));
    const Eigen::Vector2d got = path.coefficients.row(static_cast<Eigen::Index>(k)).transpose();
    CHECK((got - best).cwiseAbs().maxCoeff() < 5e-3);
  }
}

TEST_CASE("KKT residual") {
  Eigen::VectorXd truth(3);
  truth << 5.0, 1.0, -1.0;
  const auto s = simulated_scheme(xy_model(testutil::unit(), truth), 12);
  const PenaltyPlan plan = lasso_plan({false, true, true});
  const Eigen::VectorXd opt = fit_unpenalized(s);
  CHECK(kkt_residual(s, plan, 0.0, opt) < 1e-8);
  Eigen::VectorXd bumped = opt;
  bumped(1) += 0.1;
  CHECK(kkt_residual(s, plan, 0.0, bumped) > 1e-3);

  const double tau = 0.3 * tau_max(s, plan);
  const TauFit fit = fit_at_tau(s, plan, tau, restricted_optimum(s, plan));
  CHECK(fit.converged);
  CHECK(fit.kkt < 1e-6);
  bumped = fit.coefficients;
  bumped(0) += 0.1;
  CHECK(kkt_residual(s, plan, tau, bumped) > 1e-3);
  CHECK(fit.objective >= penalized_objective(s, plan, tau, restricted_optimum(s, plan)));
}

TEST_CASE("rescaling a covariate rescales its coefficient") {
  Eigen::VectorXd truth(3);
  truth << 5.0, 1.0, 0.2;
  const ModelSpec m = xy_model(testutil::unit(), truth);
  Rng rng = make_rng(77, 0);
  const PointPattern x = sample_poisson(m, rng);
  const double c = 10.0;
  const ModelSpec scaled(testutil::unit(),
                         {CovariateField::constant(),
                          CovariateField::product("cx", CovariateField::constant("c", c), CovariateField::coord_x()),
                          CovariateField::coord_y("y")});
  const auto s1 = build_scheme(x, m, {32, 32});
  const auto s2 = build_scheme(x, scaled, {32, 32});
  const std::vector<bool> mask{false, true, true};
  const PenaltyPlan p1 = adaptive_plan(fit_unpenalized(s1), mask);
  const PenaltyPlan p2 = adaptive_plan(fit_unpenalized(s2), mask);
  for (double frac : {0.05, 0.3, 0.7}) {
    const double tau = frac * tau_max(s1, p1);
    const TauFit f1 = fit_at_tau(s1, p1, tau, restricted_optimum(s1, p1));
    const TauFit f2 = fit_at_tau(s2, p2, tau, restricted_optimum(s2, p2));
    CHECK(f2.coefficients(1) == doctest::Approx(f1.coefficients(1) / c).epsilon(1e-6));
    const Eigen::VectorXd eta1 = s1.design * f1.coefficients;
    const Eigen::VectorXd eta2 = s2.design * f2.coefficients;
    CHECK((eta1.array().exp() - eta2.array().exp()).abs().maxCoeff() <=
          1e-6 * eta1.array().exp().maxCoeff());
  }
}

TEST_CASE("collinear designs fall back to a ridge pilot") {
  const ModelSpec m(testutil::unit(), {CovariateField::constant(), CovariateField::coord_x("x"),
                                       CovariateField::coord_x("x2")});
  const auto s = build_scheme(testutil::uniform_pattern(testutil::unit(), 80, 4), m, {16, 16});
  CHECK(throws_code(ErrorCode::Singular, [&] { fit_unpenalized(s); }));
  const PilotFit pilot = fit_pilot(s);
  CHECK(pilot.ridge);
  CHECK(pilot.coefficients.allFinite());
}
