#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "ppreg/cli.hpp"
#include "ppreg/io.hpp"
#include "ppreg/quadrature.hpp"
#include "ppreg/solver.hpp"

using namespace ppreg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ppreg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ppreg_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate writes a pattern that reads back identically") {
  const auto dir = scratch("simulate");
  const auto file = (dir / "x.csv").string();
  const Run r = run({"simulate", "--window", "0,1,0,1", "--beta", "5", "--seed", "4", "--out", file});
  REQUIRE(r.code == 0);
  const PointPattern x = read_points_file(file, testutil::unit());
  CHECK(x.size() > 50);
  std::ostringstream again;
  write_points_csv(again, x);
  CHECK(again.str() == slurp(file));
  const Run same = run({"simulate", "--window", "0,1,0,1", "--beta", "5", "--seed", "4"});
  CHECK(same.out == slurp(file));
}

TEST_CASE("fit on a homogeneous pattern") {
  const auto dir = scratch("fit");
  const auto points = (dir / "x.csv").string();
  REQUIRE(run({"simulate", "--window", "0,2,0,1", "--beta", "5", "--seed", "1", "--out", points}).code == 0);
  const auto n = static_cast<double>(read_points_file(points, Window(0, 2, 0, 1)).size());

  const Run r = run({"fit", "--points", points, "--window", "0,2,0,1", "--out", (dir / "res").string()});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "res" / "result.json"));
  CHECK(doc["format_version"] == 1);
  CHECK(std::abs(doc["selected"]["beta"][0].get<double>() - std::log(n / 2.0)) < 1e-6);
  CHECK(doc["selected"]["penalized_support"].empty());
  CHECK(fs::exists(dir / "res" / "path.csv"));
  CHECK(slurp(dir / "res" / "criteria.csv").rfind("tau,loglik,dof,cbic,ceric,converged\n", 0) == 0);
  CHECK(std::abs(doc["diagnostics"]["weight_sum"].get<double>() - 2.0) < 1e-10);
}

TEST_CASE("fit with covariates, penalties and criteria") {
  const auto dir = scratch("fitcov");
  const auto points = (dir / "x.csv").string();
  REQUIRE(run({"simulate", "--window", "0,1,0,1", "--covariate-expr", "x=x", "--covariate-expr", "y=y",
               "--beta", "5.5,1,0", "--seed", "2", "--out", points})
              .code == 0);
  const std::vector<std::string> base{"fit", "--points", points, "--window", "0,1,0,1", "--covariate-expr",
                                      "x=x", "--covariate-expr", "y=y", "--covariate-expr", "xy=prod:x,y"};

  auto args = base;
  args.insert(args.end(), {"--penalty", "none"});
  const Run none = run(args);
  REQUIRE(none.code == 0);
  const auto doc = nlohmann::json::parse(none.out);
  const ModelSpec m(testutil::unit(), {CovariateField::constant(), CovariateField::coord_x("x"),
                                       CovariateField::coord_y("y"),
                                       CovariateField::product("xy", CovariateField::coord_x(), CovariateField::coord_y())});
  const auto s = build_scheme(read_points_file(points, testutil::unit()), m, {32, 32});
  const Eigen::VectorXd direct = fit_unpenalized(s);
  for (Eigen::Index j = 0; j < direct.size(); ++j) {
    CHECK(doc["selected"]["beta"][static_cast<std::size_t>(j)].get<double>() == direct(j));
  }

  for (const char* penalty : {"lasso", "adaptive"}) {
    for (const char* crit : {"cbic", "ceric"}) {
      args = base;
      args.insert(args.end(), {"--penalty", penalty, "--criterion", crit, "--ntau", "40", "--dummy", "48x48"});
      const Run r = run(args);
      REQUIRE(r.code == 0);
      const auto d = nlohmann::json::parse(r.out);
      CHECK(d["criteria"].size() == 41);
      CHECK(d["selected"]["tau"].get<double>() >= 0.0);
      CHECK(d["diagnostics"]["kkt_max_converged"].get<double>() < 1e-6);
    }
  }
}

TEST_CASE("warning for sparse dummy grids") {
  const auto dir = scratch("warn");
  const auto points = (dir / "x.csv").string();
  REQUIRE(run({"simulate", "--window", "0,1,0,1", "--beta", "6", "--out", points}).code == 0);
  const Run r = run({"fit", "--points", points, "--window", "0,1,0,1", "--dummy", "8x8"});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning:") != std::string::npos);
}

TEST_CASE("error reporting") {
  const auto dir = scratch("errors");
  const auto points = (dir / "x.csv").string();
  REQUIRE(run({"simulate", "--window", "0,1,0,1", "--beta", "4", "--out", points}).code == 0);

  const Run missing = run({"fit", "--points", points, "--window", "0,1,0,1", "--covariate",
                           "z=" + (dir / "nope.csv").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("error: E_IO: ", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  const Run bad_window = run({"fit", "--points", points, "--window", "0,1,0"});
  CHECK(bad_window.code == 2);
  CHECK(bad_window.err.rfind("error: E_FORMAT: ", 0) == 0);

  const Run erosion = run({"dump-quad", "--window", "0,1,0,1", "--interaction", "strauss:0.6"});
  CHECK(erosion.code == 1);
  CHECK(erosion.err.rfind("error: E_EMPTY_EROSION: ", 0) == 0);

  const Run unstable = run({"check", "gnz", "--window", "0,1,0,1", "--interaction", "strauss:0.05", "--beta", "3",
                            "--psi", "0.5", "--replicates", "5"});
  CHECK(unstable.code == 1);
  CHECK(unstable.err.rfind("error: E_UNSTABLE_MODEL: ", 0) == 0);

  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("dump-quad") {
  const Run r = run({"dump-quad", "--window", "0,1,0,1", "--dummy", "2x2"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# domain=0,1,0,1");
  std::getline(in, line);
  CHECK(line == "x,y,w,y_resp,is_data,(Intercept)");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.find(",0.25,0,0,1") != std::string::npos);
  }
  CHECK(rows == 4);

  const Run st = run({"dump-quad", "--window", "0,1,0,1", "--interaction", "strauss:0.1"});
  REQUIRE(st.code == 0);
  CHECK(st.out.rfind("# domain=0.10000000000000001,0.90000000000000002,0.10000000000000001,0.90000000000000002\n", 0) == 0);

  const auto dir = scratch("dump");
  const auto points = (dir / "x.csv").string();
  {
    std::ofstream f(points);
    f << "x,y\n0.1,0.1\n";
  }
  const Run d = run({"dump-quad", "--window", "0,1,0,1", "--dummy", "2x2", "--points", points});
  REQUIRE(d.code == 0);
  std::istringstream din(d.out);
  std::getline(din, line);
  std::getline(din, line);
  std::getline(din, line);
  CHECK(line == "0.10000000000000001,0.10000000000000001,0.125,8,1,1");
}

TEST_CASE("check subcommand") {
  const Run r = run({"check", "campbell", "--window", "0,1,0,1", "--beta", std::to_string(std::log(100.0)),
                     "--replicates", "200"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "check,h,lhs,rhs,z,replicates,pass");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("campbell,", 0) == 0);
  }
  CHECK(rows == 2);
}

TEST_CASE("study subcommand is reproducible") {
  const auto dir = scratch("study");
  const auto config = (dir / "study.ini").string();
  {
    std::ofstream f(config);
    f << "[study]\nseed = 3\nreplicates = 4\nladder = 1\nntau = 20\n\n[model]\nactive = 1,-1\nnoise = 2\n"
         "target_density = 200\n";
  }
  const Run a = run({"study", "--config", config, "--out", (dir / "a").string()});
  const Run b = run({"study", "--config", config, "--out", (dir / "b").string(), "--threads", "2"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(dir / "a" / "study_replicates.csv") == slurp(dir / "b" / "study_replicates.csv"));
  CHECK(slurp(dir / "a" / "study_summary.csv") == a.out);
}
