#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conestab/angular_spectrum.hpp"
#include "conestab/detail/gauss.hpp"

using namespace conestab;

TEST_CASE("hemisphere m=1 eigenvalue is N-1") {
    // coordinate functions x_i are Neumann eigenfunctions of the hemisphere
    for (int N : {3, 4, 5}) {
        const AngularEigen e = cap_eigenvalue(N, 0.5 * pi, 1, 1);
        CHECK(e.lambda == Catch::Approx(static_cast<double>(N - 1)).margin(1e-8));
        CHECK(std::abs(e.profile_deriv(0.5 * pi)) < 1e-6);
    }
    // N=3: eigenfunction sin(theta), f'(pi/2) = cos(pi/2) = 0
    const AngularEigen e3 = cap_eigenvalue(3, 0.5 * pi, 1, 1);
    const double ratio = e3.profile(1.0) / std::sin(1.0);
    CHECK(e3.profile(0.6) == Catch::Approx(ratio * std::sin(0.6)).epsilon(1e-7));
}

TEST_CASE("hemisphere first nonconstant axisymmetric mode (N=3) is 6") {
    const AngularEigen e = cap_eigenvalue(3, 0.5 * pi, 0, 2);
    CHECK(e.lambda == Catch::Approx(6.0).margin(1e-7));
}

TEST_CASE("domain monotonicity of cap eigenvalues") {
    for (int N : {3, 4}) {
        const double a = cap_eigenvalue(N, pi / 3.0, 1, 1).lambda;
        const double b = cap_eigenvalue(N, 0.5 * pi, 1, 1).lambda;
        CHECK(a > b);
    }
}

TEST_CASE("node counts match the index") {
    const double theta0 = 1.1;
    for (int index : {2, 3}) {
        const AngularEigen e = cap_eigenvalue(3, theta0, 0, index);
        int zeros = 0;
        double prev = e.profile(1e-4);
        for (double t = 1e-4; t < theta0; t += theta0 / 4000.0) {
            const double v = e.profile(t);
            if (prev * v < 0.0) ++zeros;
            if (v != 0.0) prev = v;
        }
        CHECK(zeros == index - 1);
    }
}

TEST_CASE("the constant slot is excluded for m=0") {
    CHECK_THROWS_AS(cap_eigenvalue(3, 1.0, 0, 1), NoConvergence);
}

TEST_CASE("profile satisfies the colatitude ODE") {
    const int N = 4, m = 1;
    const double theta0 = 1.2;
    const AngularEigen e = cap_eigenvalue(N, theta0, m, 1);
    const double cm = m * (m + N - 3.0);
    double worst = 0.0;
    for (double t = 0.05; t < theta0; t += theta0 / 97.0) {
        const double f = e.profile(t);
        const double df = e.profile_deriv(t);
        const double ddf = e.profile_second_deriv(t);
        const double s = std::sin(t);
        const double res = ddf + (N - 2.0) * std::cos(t) / s * df +
                           (e.lambda - cm / (s * s)) * f;
        const double scale = std::abs(ddf) + std::abs(df) + std::abs(f) + 1.0;
        worst = std::max(worst, std::abs(res) / scale);
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("profiles are L2-normalized on the cap") {
    const int N = 3;
    const double theta0 = 0.9;
    const AngularEigen e = cap_eigenvalue(N, theta0, 1, 1);
    const detail::GaussRule rule = detail::gauss_legendre_on(400, 1e-6, theta0);
    double nrm = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double f = e.profile(rule.nodes[i]);
        nrm += rule.weights[i] * f * f *
               std::pow(std::sin(rule.nodes[i]), N - 2);
    }
    CHECK(nrm == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lambda1 takes the minimum over the two candidate branches") {
    const ConeDomain cone = make_cap_cone(3, 1.0);
    const double l1 = lambda1(cone);
    const double axi = cap_eigenvalue(3, 1.0, 0, 2).lambda;
    const double m1 = cap_eigenvalue(3, 1.0, 1, 1).lambda;
    CHECK(l1 == std::min(axi, m1));
    CHECK(l1 == m1);  // the m=1 branch wins on caps
}

TEST_CASE("abstract cones pass through their lambda1") {
    CHECK(lambda1(make_abstract_cone(4, 7.3, 1.0)) == 7.3);
}

TEST_CASE("higher azimuthal orders never give lambda1") {
    // the debug scan over m <= 4 validates the centrifugal-monotonicity claim
    for (double theta0 : {0.6, 1.2}) {
        const ConeDomain cone = make_cap_cone(4, theta0);
        CHECK(lambda1_scan(cone, 4) == lambda1(cone));
    }
}

TEST_CASE("lambda1 of a cap exceeds N-1 strictly inside the hemisphere") {
    for (int N : {3, 4, 5}) {
        for (double theta0 : {0.5, 0.9, 1.3}) {
            CHECK(lambda1(make_cap_cone(N, theta0)) > N - 1.0);
        }
    }
}
