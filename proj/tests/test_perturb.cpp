#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "wgreen/errors.hpp"
#include "wgreen/field.hpp"
#include "wgreen/perturb.hpp"

using namespace wgreen;
using field::ComplexField;
using field::Grid2D;
using perturb::BumpFunction;
using perturb::PerturbationMap;

namespace {

modal::WaveguideProfile slab() { return modal::WaveguideProfile(5.0, 0.2, 2.0, 1.0); }

const BumpFunction Sb{0.1, 0.0, 0.6};
const BumpFunction Tb{1.0, 0.2, 0.5};

} // namespace

TEST_CASE("bump function is C2 with compact support") {
    const BumpFunction b{0.7, 0.3, 0.5};
    CHECK(b.value(b.lo() - 0.01) == 0.0);
    CHECK(b.value(b.hi() + 0.01) == 0.0);
    CHECK(b.value(0.3) == doctest::Approx(0.7));
    // derivatives match finite differences in the interior
    for (double x : {0.1, 0.3, 0.55, 0.75}) {
        const double d = 1e-6;
        const double fd1 = (b.value(x + d) - b.value(x - d)) / (2 * d);
        const double fd2 = (b.value(x + d) - 2 * b.value(x) + b.value(x - d)) / (d * d);
        CHECK(b.d1(x) == doctest::Approx(fd1).epsilon(1e-6));
        CHECK(b.d2(x) == doctest::Approx(fd2).epsilon(1e-4).scale(10.0));
    }
    // value and both derivatives vanish continuously at the support edge;
    // the mismatch over a step d is bounded by the next derivative, e.g.
    // |f''(edge - d)| <= |f'''| d with |f'''| <= 48 A / w^3.
    for (double edge : {b.lo(), b.hi()}) {
        const double d = 1e-5;
        const double w3 = b.half_width * b.half_width * b.half_width;
        CHECK(std::abs(b.value(edge - d) - b.value(edge + d)) < 1e-12);
        CHECK(std::abs(b.d1(edge - d) - b.d1(edge + d)) <
              1.5 * 24.0 * b.amplitude / w3 * d * d);
        CHECK(std::abs(b.d2(edge - d) - b.d2(edge + d)) < 1.5 * 48.0 * b.amplitude / w3 * d);
    }
}

TEST_CASE("identity map: zero coefficients and K = 0") {
    const PerturbationMap pmap = PerturbationMap::product({0.0, 0.0, 0.6}, Tb);
    CHECK(pmap.a22(0.0, 0.2) == 0.0);
    CHECK(pmap.a12(0.0, 0.2) == 0.0);
    CHECK(pmap.b2(0.0, 0.2) == 0.0);
    const estimates::WeightSpec weight(2.0);
    CHECK(perturb::coefficient_bound(pmap, weight) == 0.0);
}

TEST_CASE("product-map coefficients match the numeric map-inversion oracle") {
    const PerturbationMap pmap = PerturbationMap::product(Sb, Tb);
    const double pts[][2] = {{0.1, 0.3}, {-0.3, 0.0}, {0.45, 0.5}, {0.0, 0.2}, {-0.5, -0.2}};
    for (const auto& pt : pts) {
        const double s = pt[0], t = pt[1];
        double err_prev = -1.0;
        for (double eps : {1e-3, 1e-4}) {
            const auto num = oracles::product_map_coefficients_numeric(Sb, Tb, eps, s, t);
            const double err = std::max({std::abs(num.a11 - pmap.a11(s, t)),
                                         std::abs(num.a12 - pmap.a12(s, t)),
                                         std::abs(num.a22 - pmap.a22(s, t)),
                                         std::abs(num.b2 - pmap.b2(s, t))});
            CHECK(err < 50.0 * eps + 1e-4);
            if (err_prev > 0.0 && err_prev > 1e-4) CHECK(err < err_prev);
            err_prev = err;
        }
    }
}

TEST_CASE("general map reduces to the product map for a pure axial displacement") {
    const PerturbationMap prod = PerturbationMap::product(Sb, Tb);
    const PerturbationMap gen = PerturbationMap::general(
        {0.0, 0.0, 0.6}, {1.0, 0.0, 0.6}, Sb, Tb, slab());
    for (double s : {-0.4, 0.0, 0.3}) {
        for (double t : {-0.1, 0.2, 0.6}) {
            CHECK(gen.a11(s, t) == doctest::Approx(prod.a11(s, t)));
            CHECK(gen.a12(s, t) == doctest::Approx(prod.a12(s, t)));
            CHECK(gen.a22(s, t) == doctest::Approx(prod.a22(s, t)));
            CHECK(gen.b1(s, t) == doctest::Approx(prod.b1(s, t)));
            CHECK(gen.b2(s, t) == doctest::Approx(prod.b2(s, t)));
            CHECK(gen.c(s, t) == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("general map with a transverse displacement through the interface is rejected") {
    CHECK_THROWS_AS(PerturbationMap::general({0.1, 0.0, 0.6}, {1.0, 0.0, 0.6},
                                             {0.0, 0.0, 0.6}, {1.0, 0.0, 0.6}, slab()),
                    DomainError);
}

TEST_CASE("zero-amplitude map produces an identically zero RHS") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    const PerturbationMap pmap = PerturbationMap::product({0.0, 0.0, 0.6}, Tb);
    const Grid2D g = Grid2D::make(-1.0, 1.0, 41, -1.0, 1.0, 41);
    const ComplexField rhs = perturb::first_order_rhs_analytic(pmap, profile, modes[0], g);
    CHECK(rhs.max_abs() == 0.0);
}

TEST_CASE("coefficient bound scales with the bump amplitude") {
    const estimates::WeightSpec weight(2.0);
    BumpFunction S2 = Sb;
    S2.amplitude *= 2.0;
    const double k1 = perturb::coefficient_bound(PerturbationMap::product(Sb, Tb), weight);
    const double k2 = perturb::coefficient_bound(PerturbationMap::product(S2, Tb), weight);
    CHECK(k2 == doctest::Approx(2.0 * k1).epsilon(1e-12));
    CHECK(estimates::epsilon_threshold(10.0, k2) < estimates::epsilon_threshold(10.0, k1));
}

TEST_CASE("coefficient bound is stable under refinement") {
    const PerturbationMap pmap = PerturbationMap::product(Sb, Tb);
    const estimates::WeightSpec weight(2.0);
    const double K = perturb::coefficient_bound(pmap, weight);
    CHECK(K > 0.0);
    // recompute on an extra-fine grid; must agree to one percent
    double fine = 0.0;
    const int n = 3001;
    for (int i = 0; i < n; ++i) {
        const double s = pmap.s_lo() + (pmap.s_hi() - pmap.s_lo()) * i / (n - 1);
        for (int j = 0; j < n; j += 3) {
            const double t = pmap.t_lo() + (pmap.t_hi() - pmap.t_lo()) * j / (n - 1);
            const double mu = weight.mu(s, t);
            const double a12 = pmap.a12(s, t);
            const double fa = std::sqrt(2.0 * a12 * a12 + pmap.a22(s, t) * pmap.a22(s, t));
            const double fb = std::abs(pmap.b2(s, t));
            fine = std::max({fine, fa / mu, fb / mu});
        }
    }
    CHECK(K == doctest::Approx(fine).epsilon(0.01));
}

TEST_CASE("invertibility check scales with eps") {
    const PerturbationMap pmap = PerturbationMap::product({0.4, 0.0, 0.3}, {1.0, 0.0, 0.3});
    CHECK_NOTHROW(pmap.require_invertible(0.1));
    CHECK_THROWS_AS(pmap.require_invertible(3.0), DomainError);
}

TEST_CASE("zeroth-order field: unit modulus along the axis direction") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    const Grid2D g = Grid2D::make(-1.0, 1.0, 41, -1.0, 1.0, 41);
    const ComplexField w0 = perturb::zeroth_order_field(profile, modes[0], g);
    for (int i : {0, 10, 20, 33}) {
        const double ref = std::abs(w0.at(i, 0));
        for (int j = 1; j < g.nz; ++j) {
            CHECK(std::abs(w0.at(i, j)) == doctest::Approx(ref).epsilon(1e-12));
        }
    }
    // exponential decay in the cladding
    const perturb::GuidedModeField gm(profile, modes[0]);
    for (double x : {0.5, 1.0, 1.8}) {
        const double expect =
            modes[0].phi_h * std::exp(-modes[0].decay * (x - profile.h()));
        CHECK(gm.value(x, 0.37).real() ==
              doctest::Approx(expect * std::cos(modes[0].beta * 0.37)).epsilon(1e-12));
    }
}

TEST_CASE("guided-mode field derivatives match finite differences") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    const perturb::GuidedModeField gm(profile, modes[1]);
    const double d = 1e-5;
    for (double s : {0.0, 0.11, 0.19, 0.4, -0.7}) {
        for (double t : {-0.3, 0.0, 1.1}) {
            const auto fd_s = (gm.value(s + d, t) - gm.value(s - d, t)) / (2 * d);
            const auto fd_t = (gm.value(s, t + d) - gm.value(s, t - d)) / (2 * d);
            const auto fd_tt =
                (gm.value(s, t + d) - 2.0 * gm.value(s, t) + gm.value(s, t - d)) / (d * d);
            CHECK(std::abs(gm.ds(s, t) - fd_s) < 1e-6 * (1.0 + std::abs(fd_s)));
            CHECK(std::abs(gm.dt(s, t) - fd_t) < 1e-6 * (1.0 + std::abs(fd_t)));
            CHECK(std::abs(gm.dtt(s, t) - fd_tt) < 1e-4 * (1.0 + std::abs(fd_tt)));
            if (std::abs(std::abs(s) - profile.h()) > 2 * d) {
                const auto fd_ss =
                    (gm.value(s + d, t) - 2.0 * gm.value(s, t) + gm.value(s - d, t)) / (d * d);
                CHECK(std::abs(gm.dss(s, t) - fd_ss) < 1e-4 * (1.0 + std::abs(fd_ss)));
            }
        }
    }
}

TEST_CASE("first-order RHS assembles the expected terms") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    const PerturbationMap pmap = PerturbationMap::product(Sb, Tb);
    const Grid2D g = Grid2D::make(-1.5, 1.5, 61, -1.0, 1.2, 45);
    const ComplexField rhs = perturb::first_order_rhs_analytic(pmap, profile, modes[0], g);
    const perturb::GuidedModeField gm(profile, modes[0]);
    for (int i = 0; i < g.nx; i += 5) {
        for (int j = 0; j < g.nz; j += 4) {
            const double s = g.x(i), t = g.z(j);
            // term-by-term assembly with the bump derivatives
            const std::complex<double> expect =
                -(-2.0 * Sb.value(s) * Tb.d1(t) * gm.dtt(s, t) -
                  2.0 * Sb.d1(s) * Tb.value(t) * gm.dst(s, t) -
                  (Sb.d2(s) * Tb.value(t) + Sb.value(s) * Tb.d2(t)) * gm.dt(s, t));
            CHECK(std::abs(rhs.at(i, j) - expect) < 1e-12 * (1.0 + std::abs(expect)));
        }
    }
    // support containment
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nz; ++j) {
            if (std::abs(rhs.at(i, j)) > 0.0) {
                CHECK(g.x(i) > pmap.s_lo());
                CHECK(g.x(i) < pmap.s_hi());
                CHECK(g.z(j) > pmap.t_lo());
                CHECK(g.z(j) < pmap.t_hi());
            }
        }
    }
}

TEST_CASE("stencil RHS converges to the analytic RHS") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    const PerturbationMap pmap = PerturbationMap::product(Sb, Tb);
    auto max_diff = [&](int n) {
        const Grid2D g = Grid2D::make(-1.5, 1.5, n, -1.2, 1.2, n);
        const ComplexField w0 = perturb::zeroth_order_field(profile, modes[0], g);
        const ComplexField a = perturb::first_order_rhs(pmap, w0, profile);
        const ComplexField b = perturb::first_order_rhs_analytic(pmap, profile, modes[0], g);
        double worst = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.nz; ++j) {
                worst = std::max(worst, std::abs(a.at(i, j) - b.at(i, j)));
            }
        }
        return worst;
    };
    const double d1 = max_diff(121);
    const double d2 = max_diff(241);
    CHECK(d2 < d1);
    CHECK(d1 / d2 > 2.5); // second-order convergence, allowing slack
}

TEST_CASE("RHS scales linearly with the map amplitude") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    BumpFunction S2 = Sb;
    S2.amplitude *= 2.0;
    const Grid2D g = Grid2D::make(-1.0, 1.0, 41, -0.8, 1.0, 37);
    const ComplexField r1 =
        perturb::first_order_rhs_analytic(PerturbationMap::product(Sb, Tb), profile, modes[0], g);
    const ComplexField r2 =
        perturb::first_order_rhs_analytic(PerturbationMap::product(S2, Tb), profile, modes[0], g);
    for (int i = 0; i < g.nx; i += 3) {
        for (int j = 0; j < g.nz; j += 3) {
            CHECK(std::abs(r2.at(i, j) - 2.0 * r1.at(i, j)) <=
                  1e-15 * (1.0 + std::abs(r1.at(i, j))));
        }
    }
}

TEST_CASE("alternative coefficient assignment differs and is selectable") {
    const PerturbationMap derived = PerturbationMap::product(Sb, Tb);
    const PerturbationMap variant =
        PerturbationMap::product(Sb, Tb, perturb::RhsFormula::ss_variant);
    CHECK(variant.a11(0.1, 0.3) == doctest::Approx(-2.0 * Sb.d1(0.1) * Tb.value(0.3)));
    CHECK(variant.a22(0.1, 0.3) == 0.0);
    CHECK(derived.a11(0.1, 0.3) == 0.0);
    CHECK(derived.a22(0.1, 0.3) == doctest::Approx(-2.0 * Sb.value(0.1) * Tb.d1(0.3)));
    CHECK(derived.b2(0.1, 0.3) == doctest::Approx(variant.b2(0.1, 0.3)));
}

TEST_CASE("zero RHS produces a zero first-order field") {
    const auto profile = slab();
    const auto ev = green::GreenEvaluator::build(profile, 1e-5);
    const Grid2D g = Grid2D::make(-1.0, 1.0, 21, -1.0, 1.0, 21);
    const Grid2D out = Grid2D::make(-1.0, 1.0, 21, -1.0 + 0.05, 1.0 + 0.05, 21);
    const ComplexField w1 = perturb::first_order_field(ev, ComplexField(g), out, 1);
    CHECK(w1.max_abs() == 0.0);
}

TEST_CASE("first-order field is stable under tolerance halving") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    const PerturbationMap pmap = PerturbationMap::product(Sb, Tb);
    const Grid2D src = Grid2D::make(-1.0, 1.0, 51, -0.8, 1.2, 51);
    const Grid2D out = Grid2D::make(-1.0, 1.0, 51, -0.8 + 0.02, 1.2 + 0.02, 51);
    const ComplexField rhs = perturb::first_order_rhs_analytic(pmap, profile, modes[0], src);
    const double tol = 2e-5;
    const auto ev1 = green::GreenEvaluator::build(profile, tol);
    const auto ev2 = green::GreenEvaluator::build(profile, tol / 2.0);
    const ComplexField w1a = perturb::first_order_field(ev1, rhs, out, 2);
    const ComplexField w1b = perturb::first_order_field(ev2, rhs, out, 2);
    double worst = 0.0;
    for (int i = 0; i < out.nx; i += 2) {
        for (int j = 0; j < out.nz; j += 2) {
            worst = std::max(worst, std::abs(w1a.at(i, j) - w1b.at(i, j)));
        }
    }
    // per-pair quadrature differences are within tol; the integral against
    // the source keeps them within 2 tol x ||rhs||_1
    double rhs_l1 = 0.0;
    for (int i = 0; i < src.nx; ++i) {
        for (int j = 0; j < src.nz; ++j) rhs_l1 += std::abs(rhs.at(i, j));
    }
    rhs_l1 *= src.dx() * src.dz();
    CHECK(worst <= 2.0 * tol * rhs_l1);
}

TEST_CASE("perturbation excites the antisymmetric mode downstream") {
    const auto profile = slab();
    const auto ev = green::GreenEvaluator::build(profile, 1e-6);
    const auto& modes = ev.modes();
    REQUIRE(modes.size() == 2);
    // The transverse bump sits off the guide axis: an even S(s) keeps the
    // first-order source parity-even and cannot excite the odd mode at all.
    // The short axial bump gives the conversion a forward directivity.
    const PerturbationMap pmap = PerturbationMap::product({0.15, 0.1, 0.3}, {1.0, 0.0, 0.25});

    const Grid2D src = Grid2D::make(-1.0, 1.0, 51, -0.8, 0.8, 41);
    const Grid2D out = Grid2D::make(-4.0, 4.0, 161, -5.0 + 0.02, 5.0 + 0.02, 251);
    const ComplexField rhs = perturb::first_order_rhs_analytic(pmap, profile, modes[0], src);
    const ComplexField w1 = perturb::first_order_field(ev, rhs, out, 2);
    const ComplexField w0 = perturb::zeroth_order_field(profile, modes[0], out);
    const ComplexField composite = w0 + 1.0 * w1;

    // The incoming field carries no antisymmetric content at the input
    // section; after the bump the composite does.
    const auto c_incoming = perturb::mode_overlap(profile, modes[1], w0, -4.5);
    const auto c_in = perturb::mode_overlap(profile, modes[1], composite, -4.5);
    const auto c_out = perturb::mode_overlap(profile, modes[1], composite, 4.5);
    CHECK(std::abs(c_incoming) < 1e-12);
    CHECK(std::abs(c_out) > 3e-3);
    // the back-scattered conversion is much weaker than the transmitted one
    CHECK(std::abs(c_in) < 0.25 * std::abs(c_out));
    // upstream, the composite is still dominated by the incoming mode
    const auto s_in = perturb::mode_overlap(profile, modes[0], composite, -4.5);
    CHECK(std::abs(s_in) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("mode overlap separates parities") {
    const auto profile = slab();
    const auto modes = modal::find_guided_modes(profile);
    REQUIRE(modes.size() == 2);
    const Grid2D g = Grid2D::make(-4.0, 4.0, 201, -1.0, 1.0, 11);
    const ComplexField w0 = perturb::zeroth_order_field(profile, modes[0], g);
    // the symmetric mode has zero overlap with the antisymmetric one
    const auto cross = perturb::mode_overlap(profile, modes[1], w0, 0.0);
    CHECK(std::abs(cross) < 1e-12);
    // and near-unit overlap with itself (normalization r * integral v^2 = 1)
    const auto self = perturb::mode_overlap(profile, modes[0], w0, 0.0);
    CHECK(std::abs(self) == doctest::Approx(1.0).epsilon(1e-3));
}
