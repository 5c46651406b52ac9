#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "qvi/grid.hpp"

using namespace qvi;

TEST_CASE("build_grid produces the stated node layout") {
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {3});
    CHECK(g->node_count() == 3);
    CHECK(g->node_coord(0)[0] == doctest::Approx(-1.0));
    CHECK(g->node_coord(1)[0] == doctest::Approx(0.0));
    CHECK(g->node_coord(2)[0] == doctest::Approx(1.0));

    auto g2 = build_grid(Vec{0.0, 0.0}, Vec{1.0, 2.0}, {2, 3});
    CHECK(g2->node_count() == 6);
    CHECK(g2->spacing()[0] == doctest::Approx(1.0));
    CHECK(g2->spacing()[1] == doctest::Approx(1.0));
    // row-major, axis 0 slowest
    CHECK(g2->node_coord(1) == Vec{0.0, 1.0});
    CHECK(g2->node_coord(3) == Vec{1.0, 0.0});

    CHECK_THROWS_AS(build_grid(Vec{1.0}, Vec{0.0}, {2}), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(Vec{0.0}, Vec{1.0}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(Vec{0.0, 0.0, 0.0, 0.0}, Vec{1.0, 1.0, 1.0, 1.0},
                               {2000000, 2000000, 2000000, 2000000}),
                    std::invalid_argument); // node count overflows the index space
}

TEST_CASE("node coordinates reproduce lo + i * dx bitwise") {
    auto g = build_grid(Vec{-3.0, 0.7}, Vec{3.0, 2.9}, {241, 7});
    for (std::size_t flat = 0; flat < g->node_count(); flat += 17) {
        const auto mi = g->multi_index(flat);
        const Vec x = g->node_coord(flat);
        for (std::size_t k = 0; k < g->dim(); ++k)
            CHECK(x[k] == g->lo()[k] + mi[k] * g->spacing()[k]);
    }
}

TEST_CASE("interpolation: linearity, node exactness, clamping") {
    auto g = build_grid(Vec{0.0}, Vec{1.0}, {2});
    ValueField f(g);
    f.values = {0.0, 10.0};
    CHECK(interpolate(f, Vec{0.25}) == doctest::Approx(2.5));
    CHECK(interpolate(f, Vec{5.0}) == 10.0); // clamped to the box edge

    auto g2 = build_grid(Vec{-2.0}, Vec{2.0}, {17});
    ValueField f2(g2);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (auto& v : f2.values) v = u(rng);
    for (std::size_t i = 0; i < g2->node_count(); ++i)
        CHECK(interpolate(f2, g2->node_coord(i)) == f2.values[i]); // bitwise at nodes
}

TEST_CASE("interpolation is a convex combination within a cell") {
    auto g = build_grid(Vec{0.0, -1.0}, Vec{1.0, 1.0}, {5, 7});
    ValueField f(g);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto& v : f.values) v = u(rng);
    std::uniform_real_distribution<double> ux(-0.5, 1.5), uy(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        const Vec x{ux(rng), uy(rng)};
        const double v = interpolate(f, x);
        double lo = 1e300, hi = -1e300;
        for (double w : f.values) {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("interpolation properties: monotone, nonexpansive, constant shift") {
    auto g = build_grid(Vec{-1.0, -1.0}, Vec{1.0, 1.0}, {9, 9});
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    std::uniform_real_distribution<double> ux(-1.3, 1.3);

    for (int trial = 0; trial < 50; ++trial) {
        ValueField f1(g), f2(g);
        for (std::size_t i = 0; i < f1.values.size(); ++i) {
            f1.values[i] = u(rng);
            f2.values[i] = f1.values[i] + bump(rng); // f1 <= f2 nodewise
        }
        const Vec x{ux(rng), ux(rng)};
        CHECK(interpolate(f1, x) <= interpolate(f2, x));

        ValueField f3(g);
        for (auto& v : f3.values) v = u(rng);
        CHECK(std::abs(interpolate(f1, x) - interpolate(f3, x)) <=
              sup_norm_diff(f1, f3) + 1e-12);

        const double k = u(rng);
        ValueField f1k(g);
        for (std::size_t i = 0; i < f1.values.size(); ++i) f1k.values[i] = f1.values[i] + k;
        CHECK(interpolate(f1k, x) ==
              doctest::Approx(interpolate(f1, x) + k).epsilon(1e-12));
    }
}

TEST_CASE("sup_norm_diff basics") {
    auto g = build_grid(Vec{0.0}, Vec{1.0}, {2});
    ValueField a(g), b(g);
    a.values = {3.0, 3.0};
    b.values = {1.0, 1.0};
    CHECK(sup_norm_diff(a, a) == 0.0);
    CHECK(sup_norm_diff(a, b) == 2.0);
    a.values = {0.0, 4.0};
    b.values = {1.0, 1.0};
    CHECK(sup_norm_diff(a, b) == 3.0);

    auto g2 = build_grid(Vec{0.0}, Vec{1.0}, {3});
    ValueField c(g2);
    CHECK_THROWS_AS(sup_norm_diff(a, c), std::invalid_argument);
}

TEST_CASE("field CSV round trip preserves values bitwise") {
    auto g = build_grid(Vec{-1.0, 0.0}, Vec{1.0, 3.0}, {5, 4});
    ValueField f(g);
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (auto& v : f.values) v = u(rng);

    const auto path = std::filesystem::temp_directory_path() / "qvi_field_roundtrip.csv";
    write_field_csv(f, path.string());
    const ValueField back = read_field_csv(g, path.string());
    CHECK(sup_norm_diff(f, back) == 0.0);
    std::filesystem::remove(path);
}
