#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "ppreg/io.hpp"

using namespace ppreg;
using testutil::throws_code;

TEST_CASE("numbers print with 17 significant digits") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(2.0) == "2");
  CHECK(format_real(NAN) == "NA");
  CHECK(format_real(-INFINITY) == "-Inf");
  for (double v : {1.0 / 3.0, -2.5e-300, 6.02214076e23, std::log(7.0)}) CHECK(parse_real(format_real(v)) == v);
  CHECK(throws_code(ErrorCode::Format, [] { parse_real("1.5x"); }));
  CHECK(parse_real_list("1, 2,3") == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("points round-trip") {
  const Window w(-1.0, 2.0, 0.0, 3.0);
  const auto p = testutil::uniform_pattern(w, 57, 3);
  std::stringstream ss;
  write_points_csv(ss, p);
  CHECK(read_points_csv(ss, w) == p);

  std::stringstream empty("x,y\n");
  CHECK(read_points_csv(empty, w).empty());
}

TEST_CASE("points format errors") {
  const Window w = testutil::unit();
  std::stringstream no_header("0.1,0.2\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_points_csv(no_header, w); }));
  std::stringstream three("x,y\n0.1,0.2,0.3\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_points_csv(three, w); }));
  std::stringstream outside("x,y\n0.1,2\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_points_csv(outside, w); }));
  std::stringstream junk("x,y\n0.1,abc\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_points_csv(junk, w); }));
  CHECK(throws_code(ErrorCode::Io, [&] { read_points_file("/nonexistent/points.csv", w); }));
}

TEST_CASE("raster round-trip and orientation") {
  std::stringstream in("nrows=2\nncols=3\nxmin=0\nxmax=3\nymin=0\nymax=2\n1,2,3\n4,5,6\n");
  const Raster r = read_raster_csv(in);
  CHECK(r.nrows == 2);
  CHECK(r.ncols == 3);
  CHECK(raster_lookup(r, {0.5, 1.5}) == 1.0);
  CHECK(raster_lookup(r, {2.5, 0.5}) == 6.0);
  std::stringstream out;
  write_raster_csv(out, r);
  const Raster back = read_raster_csv(out);
  CHECK(back.values == r.values);
  CHECK(back.extent == r.extent);
}

TEST_CASE("raster format errors") {
  std::stringstream missing("nrows=1\nncols=1\nxmin=0\nxmax=1\nymin=0\n1\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_raster_csv(missing); }));
  std::stringstream short_row("nrows=1\nncols=2\nxmin=0\nxmax=1\nymin=0\nymax=1\n1\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_raster_csv(short_row); }));
  std::stringstream rows("nrows=2\nncols=1\nxmin=0\nxmax=1\nymin=0\nymax=1\n1\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_raster_csv(rows); }));
  std::stringstream nan("nrows=1\nncols=1\nxmin=0\nxmax=1\nymin=0\nymax=1\nnan\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_raster_csv(nan); }));
}

TEST_CASE("matrix reader") {
  std::stringstream in("1,2\n3,4\n");
  const Eigen::MatrixXd m = read_matrix_csv(in);
  CHECK(m(1, 0) == 3.0);
  std::stringstream ragged("1,2\n3\n");
  CHECK(throws_code(ErrorCode::Format, [&] { read_matrix_csv(ragged); }));
}
