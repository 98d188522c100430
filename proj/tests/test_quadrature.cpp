#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wgreen/quadrature.hpp"

using namespace wgreen;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {2, 4, 8, 16}) {
        const int deg = 2 * n - 1;
        const quad::GaussLegendre& rule = quad::gauss_legendre(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            acc += rule.weights[i] * std::pow(rule.nodes[i], deg - 1);
        }
        // integral of x^{deg-1} over [-1,1], deg-1 even
        const double exact = 2.0 / deg;
        CHECK(acc == doctest::Approx(exact).epsilon(1e-14));
    }
}

TEST_CASE("composite rule reproduces smooth integrals") {
    const double val = quad::integrate([](double x) { return std::cos(x); }, 0.0, 10.0, 8, 16);
    CHECK(val == doctest::Approx(std::sin(10.0)).epsilon(1e-13));
}

TEST_CASE("square-root endpoint substitution removes the singularity") {
    // integral_0^1 dx / sqrt(x) = 2; with x = t^2 the integrand is constant.
    const double direct =
        quad::integrate([](double t) { return (1.0 / t) * 2.0 * t; }, 0.0, 1.0, 1, 16);
    CHECK(direct == doctest::Approx(2.0).epsilon(1e-15));
    // beta-type integral: integral_0^1 dx / (sqrt(x) sqrt(1-x)) = pi,
    // split at 1/2 with a square-root substitution on each side.
    auto left = quad::integrate(
        [](double t) { return 2.0 / std::sqrt(1.0 - t * t); }, 0.0, std::sqrt(0.5), 4, 16);
    auto right = quad::integrate(
        [](double s) { return 2.0 / std::sqrt(1.0 - s * s); }, 0.0, std::sqrt(0.5), 4, 16);
    CHECK(left + right == doctest::Approx(std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("nodes are strictly interior") {
    const quad::PanelRule rule = quad::composite(0.0, 1.0, 3, 16);
    for (double x : rule.x) {
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}
