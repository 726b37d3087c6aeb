#include <doctest.h>

#include "spectune/time_grid.hpp"

using namespace spectune;

TEST_CASE("grid point count matches the rounded span") {
    CHECK(TimeGrid::make(1.0, 0.01).n_points == 101);
    CHECK(TimeGrid::make(2.0, 0.25).n_points == 9);
    CHECK(TimeGrid::make(10.0, 0.01).n_points == 1001);
    CHECK(TimeGrid::make(1.0, 0.3).n_points == 4); // rounds 3.33 steps to 3
}

TEST_CASE("grid times are multiplicative, not accumulated") {
    const TimeGrid grid = TimeGrid::make(10.0, 0.01);
    for (int k : {0, 1, 500, 1000})
        CHECK(grid.time(k) == 0.0 + static_cast<double>(k) * 0.01);

    // Repeated addition drifts; the multiplicative form must not.
    double accumulated = 0.0;
    for (int k = 0; k < 1000; ++k) accumulated += 0.01;
    CHECK(accumulated != 1000.0 * 0.01); // demonstrates why this matters
    CHECK(grid.time(1000) == 1000.0 * 0.01);
}

TEST_CASE("grid construction validates its arguments") {
    CHECK_THROWS_AS(TimeGrid::make(0.0, 0.01), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(-1.0, 0.01), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, -0.1), ConfigError);
}

TEST_CASE("grid identity comparison") {
    const TimeGrid a = TimeGrid::make(1.0, 0.01);
    const TimeGrid b = TimeGrid::make(1.0, 0.01);
    const TimeGrid c = TimeGrid::make(1.0, 0.02);
    CHECK(a.same_as(b));
    CHECK(!a.same_as(c));
}
