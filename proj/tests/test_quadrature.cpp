#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conestab/functionals.hpp"
#include "conestab/quadrature.hpp"
#include "conestab/spectrum.hpp"

using namespace conestab;

namespace {
// closed-form oracle: int_0^inf r^{N-1} (1+r^2)^{-N} dr = B(N/2, N/2) / 2
double beta_oracle(int N) { return 0.5 * std::beta(0.5 * N, 0.5 * N); }
}  // namespace

TEST_CASE("grid nodes are increasing and weights positive") {
    for (MapKind kind : {MapKind::rational_map, MapKind::double_exponential}) {
        for (std::size_t n : {64, 256, 511}) {
            const RadialGrid grid = make_radial_grid(n, kind);
            REQUIRE(grid.size() == n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(grid.weights[i] > 0.0);
                if (i > 0) CHECK(grid.nodes[i] > grid.nodes[i - 1]);
            }
        }
    }
    CHECK_THROWS_AS(make_radial_grid(4), QuadratureFailure);
}

TEST_CASE("grid reproduces the Beta integral on both maps") {
    for (MapKind kind : {MapKind::rational_map, MapKind::double_exponential}) {
        const RadialGrid grid = make_radial_grid(256, kind);
        for (int N : {3, 4, 5, 6}) {
            const double I = integrate_radial(
                [N](double r) {
                    return std::pow(1.0 + r * r, -static_cast<double>(N));
                },
                N, grid);
            CHECK(I == Catch::Approx(beta_oracle(N)).epsilon(1e-10));
        }
    }
}

TEST_CASE("integrate_radial examples") {
    const RadialGrid grid = make_radial_grid();
    // int r^2 (1+r^2)^{-3} = pi/16 (Beta closed form)
    CHECK(integrate_radial(
              [](double r) { return std::pow(1.0 + r * r, -3.0); }, 3, grid) ==
          Catch::Approx(pi / 16.0).epsilon(1e-12));
    CHECK(integrate_radial([](double) { return 0.0; }, 3, grid) == 0.0);
    // int r^2 e^{-r} = Gamma(3) = 2
    CHECK(integrate_radial([](double r) { return std::exp(-r); }, 3, grid) ==
          Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("checked integration flags a non-settling integrand") {
    const RadialGrid grid = make_radial_grid(64);
    CHECK_THROWS_AS(integrate_radial_checked(
                        [](double r) { return 1.0 / (1.0 + r * r); }, 3, grid),
                    NonConvergent);

    // inadmissible profile for an angular index: the centrifugal weight
    // r^{N-3} of a non-decaying profile diverges
    const ConeDomain cone = make_cap_cone(3, 0.8);
    RadialProfileFn constant{[](double) { return 1.0; },
                             [](double) { return 0.0; }};
    CHECK_THROWS_AS(grad_inner_checked(constant, constant, 1, 2.5, cone, grid),
                    NonConvergent);
}

TEST_CASE("radial integration-by-parts identity on the cone") {
    // int (1+|x|^2)^{-N} |x|^2 = N/(2(N-1)) int (1+|x|^2)^{-N+1}
    const RadialGrid grid = make_radial_grid();
    for (int N : {3, 4, 5}) {
        const ConeDomain cone = make_cap_cone(N, 0.7);
        const double lhs = integrate_cone(
            [N](double r) {
                return r * r * std::pow(1.0 + r * r, -static_cast<double>(N));
            },
            cone, cone.measure(), grid);
        const double rhs =
            N / (2.0 * (N - 1.0)) *
            integrate_cone(
                [N](double r) { return std::pow(1.0 + r * r, -(N - 1.0)); },
                cone, cone.measure(), grid);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-9));
        CHECK(integrate_cone([](double) { return 1.0; }, cone, 0.0, grid) == 0.0);
    }
}

TEST_CASE("normalizer identity chain closes") {
    const RadialGrid grid = make_radial_grid();
    for (int N : {3, 5}) {
        const ConeDomain cone = make_cap_cone(N, 1.0);
        const double twostar = critical_exponent(N);
        const double S = best_constant_bubble(cone, grid);
        const double k0 = bubble_normalizer_direct(cone, grid);
        CHECK(std::pow(k0, twostar - 2.0) * std::pow(S, twostar) /
                  (N * (N - 2.0)) ==
              Catch::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("grad_inner on normalized pairs") {
    const RadialGrid grid = make_radial_grid();
    const int N = 4;
    const ConeDomain cone = make_cap_cone(N, 0.9);
    const double k0 = bubble_normalizer(cone, grid);
    const double rootD = std::sqrt(cone.measure());
    const Bubble U(N, k0);

    // paired with the normalized constant angular factor, the bubble's
    // profile picks up sqrt(|D|), and the inner product is its unit norm
    RadialProfileFn f{[&](double r) { return rootD * U.value(r); },
                      [&](double r) { return rootD * U.deriv(r); }};
    CHECK(grad_inner(f, f, 0, 0.0, cone, grid) ==
          Catch::Approx(1.0).epsilon(1e-10));

    // first vs second eigenfunction: orthogonal
    const SmoothRadialFn ds = ds_bubble_profile(N, k0, 1.0);
    RadialProfileFn g{ds.value, ds.deriv};
    RadialProfileFn u{[&](double r) { return U.value(r); },
                      [&](double r) { return U.deriv(r); }};
    CHECK(std::abs(grad_inner(u, g, 0, 0.0, cone, grid)) < 1e-12);

    // symmetry is structural
    CHECK(grad_inner(u, g, 0, 0.0, cone, grid) ==
          grad_inner(g, u, 0, 0.0, cone, grid));
}

TEST_CASE("grad_inner satisfies the eigen-relation on the lambda1 branch") {
    const RadialGrid grid = make_radial_grid();
    const int N = 4;
    const double l1 = 5.0;
    const ConeDomain cone = make_abstract_cone(N, l1, 0.5 * sphere_measure(N - 1));
    const BubbleData bub = make_bubble_data(cone, grid);
    const SmoothRadialFn R = lambda1_eigenprofile(N, l1);
    const double mu = mu_lambda1(N, l1, bub.S).mu;
    const double twostar = critical_exponent(N);
    const Bubble U(N, bub.k0);

    const double lhs =
        grad_inner(RadialProfileFn{R.value, R.deriv},
                   RadialProfileFn{R.value, R.deriv}, 1, l1, cone, grid);
    const double rhs = mu * integrate_radial(
                                [&](double r) {
                                    const double v = R.value(r);
                                    return std::pow(U.value(r), twostar - 2.0) *
                                           v * v;
                                },
                                N, grid);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("eigenprofiles are pairwise orthogonal") {
    const RadialGrid grid = make_radial_grid();
    const int N = 3;
    const ConeDomain cone = make_cap_cone(N, 0.8);
    const BubbleData bub = make_bubble_data(cone, grid);
    const double twostar = critical_exponent(N);
    const Bubble U(N, bub.k0);

    std::vector<TestFunction> psi;
    psi.push_back(tf_radial(cone, bubble_profile(U)));
    psi.push_back(tf_radial(cone, ds_bubble_profile(N, bub.k0, 1.0)));
    psi.push_back(tf_radial(cone, radial_eigenfunction(N, 3, bub.k0)));
    for (auto& p : psi)
        p = tf_scale(p, 1.0 / std::sqrt(grad_norm_sq(p, cone, grid)));

    for (std::size_t i = 0; i < psi.size(); ++i) {
        for (std::size_t j = i + 1; j < psi.size(); ++j) {
            CHECK(std::abs(grad_inner_tf(psi[i], psi[j], cone, grid)) < 1e-8);
            const double w = weighted_inner(
                psi[i], psi[j],
                [&](double r) { return std::pow(U.value(r), twostar - 2.0); },
                cone, grid);
            CHECK(std::abs(w) < 1e-8);
        }
    }
}

TEST_CASE("doubling the grid does not move the acceptance integrands") {
    const RadialGrid coarse = make_radial_grid(256);
    const RadialGrid fine = make_radial_grid(512);
    for (int N : {3, 6}) {
        const double a = integrate_radial(
            [N](double r) { return std::pow(1.0 + r * r, -static_cast<double>(N)); },
            N, coarse);
        const double b = integrate_radial(
            [N](double r) { return std::pow(1.0 + r * r, -static_cast<double>(N)); },
            N, fine);
        CHECK(std::abs(a - b) < 1e-9 * std::abs(b));
    }
}
