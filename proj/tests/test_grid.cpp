#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "coflow/grid.hpp"

using namespace coflow;

TEST_CASE("circuit grid with doubling boundaries") {
  IntervalGrid g = make_grid(GridKind::circuit, 1.0, 8.0);
  CHECK(g.intervals() == 4);
  CHECK(g.bounds() == std::vector<double>{0.0, 1.0, 2.0, 4.0, 8.0});
  CHECK(g.lower(0) == 0.0);
  CHECK(g.upper(0) == 1.0);
  CHECK(g.lower(3) == 4.0);
  CHECK(g.upper(3) == 8.0);
  CHECK(g.length(0) == 1.0);
  CHECK(g.length(3) == 4.0);
}

TEST_CASE("circuit grid covering a unit horizon needs one interval") {
  IntervalGrid g = make_grid(GridKind::circuit, 0.5436, 1.0);
  CHECK(g.intervals() == 1);
  CHECK(g.bounds() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("packet grid boundaries double from one") {
  IntervalGrid g = make_grid(GridKind::packet, 1.0, 5.0);
  CHECK(g.intervals() == 4);
  CHECK(g.bounds() == std::vector<double>{1.0, 2.0, 4.0, 8.0});
}

TEST_CASE("grid construction rejects bad parameters") {
  CHECK_THROWS(make_grid(GridKind::circuit, 0.0, 4.0));
  CHECK_THROWS(make_grid(GridKind::circuit, -1.0, 4.0));
  CHECK_THROWS(make_grid(GridKind::circuit, 1.0, 0.0));
  CHECK_THROWS(make_grid(GridKind::packet, 0.5, 4.0));
}

TEST_CASE("consecutive boundaries grow by exactly the growth factor") {
  for (double eps : {0.25, 0.5436890126920764, 1.0, 2.0}) {
    IntervalGrid g = make_grid(GridKind::circuit, eps, 100.0);
    REQUIRE(g.intervals() >= 2);
    for (int l = 0; l + 1 < g.intervals() + 4; ++l) {
      CHECK(g.upper(l + 1) / g.upper(l) == Catch::Approx(1.0 + eps).epsilon(1e-13));
      CHECK(g.upper(l) > g.lower(l));
    }
  }
}

TEST_CASE("rate divisor is one for the first interval and the left endpoint after") {
  IntervalGrid g = make_grid(GridKind::circuit, 1.0, 16.0);
  CHECK(g.rate_divisor(0) == 1.0);
  CHECK(g.rate_divisor(1) == 1.0);
  CHECK(g.rate_divisor(2) == 2.0);
  CHECK(g.rate_divisor(3) == 4.0);
}

TEST_CASE("interval_of finds the covering interval") {
  IntervalGrid g = make_grid(GridKind::circuit, 1.0, 16.0);
  CHECK(g.interval_of(0.5) == 0);
  CHECK(g.interval_of(1.0) == 0);
  CHECK(g.interval_of(1.5) == 1);
  CHECK(g.interval_of(2.0) == 1);
  CHECK(g.interval_of(2.0001) == 2);
  CHECK(g.interval_of(16.0) == 4);
  CHECK_THROWS(g.interval_of(0.0));
  CHECK_THROWS(g.interval_of(-1.0));
}
