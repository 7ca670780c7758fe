#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conestab/functionals.hpp"
#include "conestab/geometry.hpp"
#include "conestab/quadrature.hpp"

using namespace conestab;

TEST_CASE("cap cone constructor validates its arguments") {
    const ConeDomain cone = make_cap_cone(3, 0.25 * pi);
    CHECK(cone.dim() == 3);
    CHECK(cone.is_cap());
    CHECK(cone.cap_aperture() == 0.25 * pi);

    CHECK_THROWS_AS(make_cap_cone(2, 0.25 * pi), DimensionTooSmall);
    // the closed hemisphere is excluded
    CHECK_THROWS_AS(make_cap_cone(4, 0.5 * pi), ApertureOutOfRange);
    CHECK_THROWS_AS(make_cap_cone(4, 0.0), ApertureOutOfRange);
    CHECK_THROWS_AS(make_cap_cone(4, -0.3), ApertureOutOfRange);
}

TEST_CASE("abstract cones carry (lambda1, |D|) through") {
    const ConeDomain cone = make_abstract_cone(5, 7.3, 2.0);
    CHECK(!cone.is_cap());
    CHECK(cone.abstract_spec()->lambda1 == 7.3);
    CHECK(cone.measure() == 2.0);
    CHECK_THROWS_AS(make_abstract_cone(5, -1.0, 2.0), Error);
    CHECK_THROWS_AS(make_abstract_cone(5, 1.0, 0.0), Error);
}

TEST_CASE("cap measure against closed forms") {
    // oracle: |D| = 2 pi int_0^{pi/2} sin = 2 pi for the N=3 hemisphere
    CHECK(cap_measure(3, 0.5 * pi) == Catch::Approx(2.0 * pi).epsilon(1e-13));
    // oracle: half of |S^3| = pi^2 by symmetry
    CHECK(cap_measure(4, 0.5 * pi) == Catch::Approx(pi * pi).epsilon(1e-13));
}

TEST_CASE("cap measure is strictly increasing and vanishes at zero aperture") {
    double prev = 0.0;
    for (double theta0 = 0.05; theta0 < 0.5 * pi; theta0 += 0.05) {
        const double m = cap_measure(3, theta0);
        CHECK(m > prev);
        prev = m;
    }
    CHECK(cap_measure(3, 1e-4) < 1e-7);
}

TEST_CASE("sphere measures from the Gamma formula") {
    CHECK(sphere_measure(0) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(sphere_measure(1) == Catch::Approx(2.0 * pi).epsilon(1e-14));
    CHECK(sphere_measure(2) == Catch::Approx(4.0 * pi).epsilon(1e-14));
    CHECK(sphere_measure(3) == Catch::Approx(2.0 * pi * pi).epsilon(1e-14));
}

TEST_CASE("bubble is positive and strictly decreasing") {
    const Bubble u(5, 0.7, 2.0);
    double prev = u.value(0.0);
    CHECK(prev > 0.0);
    for (double r = 0.1; r < 30.0; r *= 1.5) {
        const double v = u.value(r);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("normalizer fixes the gradient norm for every scale") {
    const RadialGrid grid = make_radial_grid();
    for (int N : {3, 5}) {
        const ConeDomain cone = make_cap_cone(N, 0.8);
        const double k0 = bubble_normalizer(cone, grid);
        for (double s : {0.5, 1.0, 2.0, 10.0}) {
            const TestFunction us =
                tf_radial(cone, bubble_profile(Bubble(N, k0, s)));
            CHECK(grad_norm_sq(us, cone, grid) == Catch::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("normalizer routes agree and shrink with the aperture") {
    const RadialGrid grid = make_radial_grid();
    for (int N : {3, 4}) {
        const ConeDomain narrow = make_cap_cone(N, 0.6);
        const ConeDomain wide = make_cap_cone(N, 1.1);
        const double k_narrow = bubble_normalizer(narrow, grid);
        const double k_wide = bubble_normalizer(wide, grid);
        CHECK(k_narrow > k_wide);  // smaller |D| needs a taller bubble
        CHECK(bubble_normalizer_direct(narrow, grid) ==
              Catch::Approx(k_narrow).epsilon(1e-12));
        CHECK(bubble_normalizer_direct(wide, grid) ==
              Catch::Approx(k_wide).epsilon(1e-12));
    }
}

TEST_CASE("S_U scales like |D|^{1/N}") {
    // brute-quadrature homogeneity oracle at two apertures
    const RadialGrid grid = make_radial_grid();
    const int N = 4;
    const ConeDomain a = make_cap_cone(N, 0.5);
    const ConeDomain b = make_cap_cone(N, 1.2);
    const double Sa = best_constant_bubble(a, grid);
    const double Sb = best_constant_bubble(b, grid);
    const double predicted = std::pow(a.measure() / b.measure(), 1.0 / N);
    CHECK(Sa / Sb == Catch::Approx(predicted).epsilon(1e-10));
}
