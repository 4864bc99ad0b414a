#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "ppreg/quadrature.hpp"
#include "ppreg/study.hpp"

using namespace ppreg;
using testutil::throws_code;

namespace {

StudyConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_study_config(in);
}

std::string summary_csv(const StudyReport& r) {
  std::ostringstream out;
  write_study_summary_csv(out, r);
  return out.str();
}

std::string replicate_csv(const StudyReport& r) {
  std::ostringstream out;
  write_study_replicates_csv(out, r);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const StudyConfig c = parse(
      "[study]\nseed = 12\nreplicates = 7\nladder = 1, 2, 4\ncriterion = ceric\ngamma = 0.5\nntau = 30\n"
      "alphas = 0.6,0.7\ncompare_lasso = false\n\n[model]\nactive = 2,-1,0.5\nnoise = 3\n"
      "interaction = strauss:0.05\npsi = -0.4\n\n[covariates]\nraster_per_unit = 8\nwaves = 3\n");
  CHECK(c.seed == 12);
  CHECK(c.replicates == 7);
  CHECK(c.ladder == std::vector<double>{1.0, 2.0, 4.0});
  CHECK(c.criterion == Criterion::Ceric);
  CHECK(c.gamma == 0.5);
  CHECK(c.n_tau == 30);
  CHECK(c.alphas == std::vector<double>{0.6, 0.7});
  CHECK_FALSE(c.compare_lasso);
  CHECK(c.num_covariates() == 6);
  CHECK(c.interaction.is_strauss());
  CHECK(c.interaction.range == 0.05);
  CHECK(c.psi == -0.4);
  CHECK(c.raster_per_unit == 8);

  CHECK(parse("").replicates == StudyConfig{}.replicates);
  CHECK(throws_code(ErrorCode::Format, [] { parse("[study]\nsead = 1\n"); }));
  CHECK(throws_code(ErrorCode::Format, [] { parse("[stuff]\na = 1\n"); }));
  CHECK(throws_code(ErrorCode::Format, [] { parse("[study]\nreplicates = many\n"); }));
  CHECK(throws_code(ErrorCode::Format, [] { parse("[study]\nreplicates = 2.5\n"); }));
  CHECK(throws_code(ErrorCode::InvalidArgument, [] { parse("[study]\nladder = 2,1\n"); }));
  CHECK(throws_code(ErrorCode::InvalidArgument, [] { parse("[study]\nladder = 1,1\n"); }));
  CHECK(throws_code(ErrorCode::UnstableModel, [] { parse("[model]\ninteraction = strauss:0.1\npsi = 0.2\n"); }));
  CHECK(throws_code(ErrorCode::Io, [] { read_study_config("/nonexistent/study.ini"); }));
}

TEST_CASE("synthetic fields are standardised") {
  const Window w(0.0, 2.0, 0.0, 2.0);
  for (std::size_t j = 0; j < 5; ++j) {
    const Raster r = synthetic_field(9, j, w, 32, 32, 4);
    double mean = 0.0, sq = 0.0;
    for (double v : r.values) mean += v;
    mean /= static_cast<double>(r.values.size());
    for (double v : r.values) sq += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(sq / static_cast<double>(r.values.size()) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(synthetic_field(9, 0, w, 32, 32, 4).values == synthetic_field(9, 0, w, 32, 32, 4).values);
  CHECK_FALSE(synthetic_field(9, 0, w, 32, 32, 4).values == synthetic_field(9, 1, w, 32, 32, 4).values);
}

TEST_CASE("study model hits the target expected count") {
  StudyConfig c;
  c.target_density = 400.0;
  for (double side : {1.0, 2.0}) {
    const ModelSpec m = study_model(c, side);
    CHECK(m.num_covariates() == 11);
    CHECK(m.beta()(1) == 1.0);
    CHECK(m.beta()(2) == -1.0);
    CHECK(m.beta().tail(8).isZero());
    // Dummy tiles nest inside raster cells, so the empty-pattern quadrature
    // integral of the trend is exact.
    const int n = static_cast<int>(48 * side);
    const auto s = build_scheme(PointPattern(m.window()), m, {n, n});
    const Eigen::VectorXd eta = s.design * m.coefficients();
    const double mass = (s.weights.array() * eta.array().exp()).sum();
    CHECK(mass == doctest::Approx(400.0 * side * side).epsilon(1e-10));
  }
}

TEST_CASE("zero-noise designs report FPR as NA") {
  StudyConfig c;
  c.replicates = 3;
  c.noise = 0;
  c.n_tau = 20;
  c.target_density = 200.0;
  const StudyReport r = run_study(c);
  REQUIRE(r.find(0, "adaptive") != nullptr);
  CHECK_FALSE(r.find(0, "adaptive")->fpr.has_value());
  const std::string csv = summary_csv(r);
  CHECK(csv.find(",NA,") != std::string::npos);
}

TEST_CASE("reports do not depend on the thread count") {
  StudyConfig c;
  c.replicates = 6;
  c.noise = 3;
  c.n_tau = 20;
  c.target_density = 200.0;
  c.ladder = {1.0, 1.5};
  c.alphas = {0.6};
  c.threads = 1;
  const StudyReport a = run_study(c);
  c.threads = 3;
  const StudyReport b = run_study(c);
  CHECK(summary_csv(a) == summary_csv(b));
  CHECK(replicate_csv(a) == replicate_csv(b));
  CHECK(a.methods == std::vector<std::string>{"adaptive", "lasso", "adaptive_alpha=0.6"});
  CHECK(a.summary.size() == 6);
  for (const auto& s : a.summary) CHECK(s.failures == 0);
}

TEST_CASE("a psi = 0 Strauss study matches the Poisson study") {
  StudyConfig c;
  c.replicates = 40;
  c.noise = 4;
  c.n_tau = 30;
  c.compare_lasso = false;
  c.target_density = 300.0;
  c.burn_in = 20000;
  c.sweeps = 0;
  const StudyReport poisson = run_study(c);
  c.interaction = InteractionSpec::strauss(0.03);
  c.psi = 0.0;
  const StudyReport strauss = run_study(c);
  const auto* p = poisson.find(0, "adaptive");
  const auto* s = strauss.find(0, "adaptive");
  REQUIRE(p);
  REQUIRE(s);
  const auto se = [&](double a, double b) {
    return std::sqrt((a * (1 - a) + b * (1 - b)) / static_cast<double>(c.replicates)) + 1e-12;
  };
  CHECK(std::abs(p->exact_support_rate - s->exact_support_rate) < 3.0 * se(p->exact_support_rate, s->exact_support_rate));
  // Points in the eroded domain: the trend mass shrinks with the area.
  CHECK(s->mean_points < p->mean_points);
  CHECK(s->mean_points > 0.8 * p->mean_points);
}
