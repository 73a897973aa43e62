#include <doctest.h>

#include <cmath>

#include "jamset/error.hpp"
#include "jamset/quadrature.hpp"

using namespace jamset;

TEST_SUITE("quadrature") {

TEST_CASE("smooth integrals") {
    const auto r = quad::integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13);
    CHECK(r.converged);
    CHECK(std::abs(r.value - (std::exp(1.0) - 1.0)) < 1e-13);
    CHECK(std::abs(quad::integrate_or_throw([](double x) { return std::cos(x); }, 0.0, 10.0, 1e-12, "cos") -
                   std::sin(10.0)) < 1e-12);
    CHECK(quad::integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-12).value == 0.0);
}

TEST_CASE("peaked integrand needs subdivision") {
    const auto r = quad::integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, 1e-9);
    CHECK(r.converged);
    CHECK(r.intervals > 1);
    CHECK(std::abs(r.value - 2.0 * std::atan(1e2) / 1e-2) < 1e-8);
}

TEST_CASE("unconverged integrals throw") {
    CHECK_THROWS_AS(quad::integrate_or_throw([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-10, "1/x"),
                    NumericalError);
}

TEST_CASE("upper limit") {
    const auto g = [](double x) { return std::exp(-x); };
    const auto r = quad::solve_upper_limit(g, 0.0, 0.5, 1e-12);
    CHECK(std::abs(r.x - std::log(2.0)) < 1e-11);
    CHECK(std::abs(r.excess) < 1e-12);
    // from a later start
    const auto s = quad::solve_upper_limit(g, 1.0, std::exp(-1.0) - std::exp(-3.0), 1e-12, 0.1);
    CHECK(std::abs(s.x - 3.0) < 1e-10);
    CHECK(quad::solve_upper_limit(g, 2.0, 0.0, 1e-12).x == 2.0);
}

TEST_CASE("upper limit beyond the total mass") {
    CHECK_THROWS_AS(quad::solve_upper_limit([](double x) { return std::exp(-x); }, 0.0, 2.0, 1e-10), NumericalError);
    CHECK_THROWS_AS(quad::solve_upper_limit([](double x) { return x; }, 0.0, 1.0, 0.0), ConfigError);
}

}
