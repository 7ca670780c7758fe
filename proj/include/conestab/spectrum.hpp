#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "conestab/errors.hpp"
#include "conestab/geometry.hpp"
#include "conestab/quadrature.hpp"

namespace conestab {

// ---------------------------------------------------------------------------
// Closed-form eigenvalues of the weighted linearized operator on the cone.
// ---------------------------------------------------------------------------

/// Radial branch: mu_k = ((k-1)(k+N-2) * 4/(N(N-2)) + 1) * S^{2*}.
inline double mu_radial(int dim, int k, double S) {
    if (k < 1) throw Error("mu_radial: k must be >= 1");
    const double twostar = critical_exponent(dim);
    return ((k - 1.0) * (k + dim - 2.0) * 4.0 / (dim * (dim - 2.0)) + 1.0) *
           std::pow(S, twostar);
}

struct Mu1Lambda {
    double beta;  // positive root of beta^2 + (N-2) beta - lambda1 = 0
    double mu;
};

/// lambda1 branch: beta(lambda1) and
/// mu = S^{2*}/(N(N-2)) * sqrt((N-2)^2+4 lambda1) (2 + sqrt((N-2)^2+4 lambda1)).
/// Strictly increasing in lambda1.
inline Mu1Lambda mu_lambda1(int dim, double lambda1, double S) {
    if (!(lambda1 > 0.0)) throw Error("mu_lambda1: lambda1 must be positive");
    const double T = std::sqrt((dim - 2.0) * (dim - 2.0) + 4.0 * lambda1);
    const double twostar = critical_exponent(dim);
    Mu1Lambda out;
    out.beta = 0.5 * (-(dim - 2.0) + T);
    out.mu = std::pow(S, twostar) / (dim * (dim - 2.0)) * T * (2.0 + T);
    return out;
}

enum class ProfileKind { closed_form_polynomial, closed_form_beta, numerical };

struct EigenPair {
    double mu = 0.0;
    int angular_index = 0;  // 0: radial branch, 1: lambda1 branch
    int radial_index = 1;
    bool simple = false;
    ProfileKind profile_kind = ProfileKind::numerical;
};

enum class TiePolicy { error, merge };

/// Ordering condition (k-1)(k+N-3) < lambda1 < k(k+N-2): returns k, or
/// throws ThresholdAmbiguity at an exact boundary unless merging.
inline int ordering_index(int dim, double lambda1, TiePolicy tie = TiePolicy::error,
                          bool* at_boundary = nullptr) {
    if (at_boundary) *at_boundary = false;
    for (int k = 1;; ++k) {
        const double upper = static_cast<double>(k) * (k + dim - 2.0);
        if (std::abs(lambda1 - upper) <= 8.0 * std::numeric_limits<double>::epsilon() * upper) {
            if (tie == TiePolicy::error)
                throw ThresholdAmbiguity(
                    "ordered_spectrum: lambda1 sits exactly on k(k+N-2); "
                    "opt into tie handling to merge the eigenspaces");
            if (at_boundary) *at_boundary = true;
            return k;
        }
        if (lambda1 < upper) return k;
        if (k > 1000) throw Error("ordering_index: lambda1 implausibly large");
    }
}

/// The verified initial segment of the spectrum: mu_1..mu_k from the radial
/// branch (simple) followed by mu_{k+1} from the lambda1 branch.  Beyond
/// that the ordering is not certified, so count is clamped to k+1.
inline std::vector<EigenPair> ordered_spectrum(int dim, double lambda1, double S,
                                               int count,
                                               TiePolicy tie = TiePolicy::error) {
    if (count < 1) throw Error("ordered_spectrum: count must be >= 1");
    bool boundary = false;
    const int k = ordering_index(dim, lambda1, tie, &boundary);
    std::vector<EigenPair> out;
    const int emit = std::min(count, k + 1);
    for (int i = 1; i <= emit && i <= k; ++i) {
        out.push_back(EigenPair{mu_radial(dim, i, S), 0, i, true,
                                ProfileKind::closed_form_polynomial});
    }
    if (emit == k + 1) {
        EigenPair lam;
        lam.mu = mu_lambda1(dim, lambda1, S).mu;
        lam.angular_index = 1;
        lam.radial_index = 1;
        // multiplicity of lambda1(D); merged with the radial branch at a tie
        lam.simple = false;
        lam.profile_kind = ProfileKind::closed_form_beta;
        out.push_back(lam);
    }
    (void)boundary;
    return out;
}

/// Spectral-gap operationalization of nondegeneracy: the minimizer is
/// nondegenerate iff mu_2 is simple and mu_3 exceeds it by more than
/// gap_tol * mu_2.  For lambda1 <= N-1 the bubble is degenerate (or not
/// even a local minimizer).
struct GapCheck {
    bool nondegenerate = false;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double gap = 0.0;
};

inline GapCheck nondegeneracy_check(int dim, double lambda1, double S,
                                    double gap_rtol = 1e-9) {
    GapCheck out;
    const double mu2_std = mu_radial(dim, 2, S);
    const double mu_lam = mu_lambda1(dim, lambda1, S).mu;
    if (lambda1 <= dim - 1.0) {
        out.mu2 = std::min(mu_lam, mu2_std);
        out.mu3 = std::max(mu_lam, mu2_std);
        out.gap = out.mu3 - out.mu2;
        out.nondegenerate = false;
        return out;
    }
    out.mu2 = mu2_std;
    out.mu3 = std::min(mu_lam, mu_radial(dim, 3, S));
    out.gap = out.mu3 - out.mu2;
    out.nondegenerate = out.gap > gap_rtol * out.mu2;
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form eigenfunctions via harmonic polynomials on S^N.
// ---------------------------------------------------------------------------

/// The (k-1)-th y0-derivative of |y|^{1-N}, brought to polynomial form by
/// multiplying with |y|^{N-1+2(k-1)}: a harmonic polynomial in R^{N+1},
/// homogeneous of degree k-1, stored as sum of coef * y0^a * (|y|^2)^b.
struct HarmonicPolynomial {
    int dim = 3;
    int k = 1;
    struct Term {
        double coef;
        int y0_pow;
        int ysq_pow;
    };
    std::vector<Term> terms;

    double eval(double y0, double ysq) const {
        double s = 0.0;
        for (const auto& t : terms)
            s += t.coef * std::pow(y0, t.y0_pow) * std::pow(ysq, t.ysq_pow);
        return s;
    }

    /// Restriction to the unit sphere |y| = 1 (a polynomial in y0 alone).
    double eval_on_sphere(double y0) const {
        double s = 0.0;
        for (const auto& t : terms) s += t.coef * std::pow(y0, t.y0_pow);
        return s;
    }

    /// Spherical eigenvalue of this polynomial on S^N: (k-1)(k+N-2).
    double sphere_eigenvalue() const { return (k - 1.0) * (k + dim - 2.0); }
};

namespace detail {

// Repeated exact differentiation of |y|^{1-N} with respect to y0.  Terms
// are c * y0^a * |y|^e with integer c and odd negative e; both derivative
// contributions keep the coefficients integral.
struct KernelTerm {
    long long coef;
    int y0_pow;
    int y_pow;  // exponent of |y| (odd, negative)
};

inline std::vector<KernelTerm> kernel_derivative(int dim, int order) {
    std::vector<KernelTerm> cur{{1, 0, 1 - dim}};
    for (int d = 0; d < order; ++d) {
        std::vector<KernelTerm> next;
        auto add = [&](long long c, int a, int e) {
            if (c == 0) return;
            for (auto& t : next) {
                if (t.y0_pow == a && t.y_pow == e) {
                    t.coef += c;
                    return;
                }
            }
            next.push_back({c, a, e});
        };
        for (const auto& t : cur) {
            // d/dy0 [ y0^a |y|^e ] = a y0^{a-1} |y|^e + e y0^{a+1} |y|^{e-2}
            if (t.y0_pow > 0) add(t.coef * t.y0_pow, t.y0_pow - 1, t.y_pow);
            add(t.coef * t.y_pow, t.y0_pow + 1, t.y_pow - 2);
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace detail

/// Exact symbolic construction for k <= 12 (coefficient growth stays well
/// inside 64-bit integers there).
inline HarmonicPolynomial harmonic_polynomial(int dim, int k) {
    if (dim < 3) throw DimensionTooSmall("harmonic_polynomial: dim >= 3");
    if (k < 1 || k > 12)
        throw Error("harmonic_polynomial: k must lie in 1..12");
    const std::vector<detail::KernelTerm> raw =
        detail::kernel_derivative(dim, k - 1);
    HarmonicPolynomial poly;
    poly.dim = dim;
    poly.k = k;
    const int lift = (dim - 1) + 2 * (k - 1);
    for (const auto& t : raw) {
        const int e = t.y_pow + lift;
        if (e < 0 || e % 2 != 0)
            throw Error("harmonic_polynomial: internal exponent bookkeeping");
        poly.terms.push_back(
            {static_cast<double>(t.coef), t.y0_pow, e / 2});
    }
    return poly;
}

namespace detail {

// Coefficients (ascending in u = r^2) of the numerator polynomial of the
// k-th radial eigenfunction: P(u) = sum_a c_a (u-1)^a (u+1)^{k-1-a} where
// c_a are the sphere-restricted harmonic coefficients; for k >= 2 the
// common (N-1) factor is divided out so k=2 lands exactly on d/ds U_s.
inline std::vector<double> radial_numerator(int dim, int k) {
    const HarmonicPolynomial poly = harmonic_polynomial(dim, k);
    std::vector<long long> coef(static_cast<std::size_t>(k), 0);
    auto binom = [](int n, int j) {
        long long b = 1;
        for (int i = 1; i <= j; ++i) b = b * (n - j + i) / i;
        return b;
    };
    for (const auto& t : poly.terms) {
        const int a = t.y0_pow;
        const int rest = k - 1 - a;
        const long long c = static_cast<long long>(t.coef);
        // (u-1)^a (u+1)^rest
        for (int i = 0; i <= a; ++i) {
            const long long ci = binom(a, i) * ((a - i) % 2 == 0 ? 1 : -1);
            for (int j = 0; j <= rest; ++j)
                coef[static_cast<std::size_t>(i + j)] += c * ci * binom(rest, j);
        }
    }
    std::vector<double> out(coef.size());
    if (k >= 2) {
        for (std::size_t i = 0; i < coef.size(); ++i) {
            if (coef[i] % (dim - 1) != 0)
                throw Error("radial_numerator: (N-1) division not exact");
            out[i] = static_cast<double>(coef[i] / (dim - 1));
        }
    } else {
        for (std::size_t i = 0; i < coef.size(); ++i)
            out[i] = static_cast<double>(coef[i]);
    }
    return out;
}

inline double poly_eval(const std::vector<double>& c, double u) {
    double s = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) s = s * u + c[i];
    return s;
}

inline std::vector<double> poly_deriv(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i)
        d.push_back(c[i] * static_cast<double>(i));
    if (d.empty()) d.push_back(0.0);
    return d;
}

}  // namespace detail

/// Closed-form radial eigenfunction R_k(r) = k0 P_k(r^2) (1+r^2)^{-(N/2+k-2)}
/// (k=1 is the bubble itself, k=2 equals d/ds U_s at s=1, k=3 starts at N k0).
inline SmoothRadialFn radial_eigenfunction(int dim, int k, double k0) {
    const std::vector<double> P = detail::radial_numerator(dim, k);
    const std::vector<double> dP = detail::poly_deriv(P);
    const std::vector<double> ddP = detail::poly_deriv(dP);
    const double q = 0.5 * dim + k - 2.0;

    auto g = [P, q](double u) {
        return detail::poly_eval(P, u) * std::pow(1.0 + u, -q);
    };
    auto dg = [P, dP, q](double u) {
        const double base = std::pow(1.0 + u, -q);
        return (detail::poly_eval(dP, u) -
                q * detail::poly_eval(P, u) / (1.0 + u)) *
               base;
    };
    auto ddg = [P, dP, ddP, q](double u) {
        const double base = std::pow(1.0 + u, -q);
        return (detail::poly_eval(ddP, u) -
                2.0 * q * detail::poly_eval(dP, u) / (1.0 + u) +
                q * (q + 1.0) * detail::poly_eval(P, u) / ((1.0 + u) * (1.0 + u))) *
               base;
    };

    SmoothRadialFn fn;
    fn.value = [g, k0](double r) { return k0 * g(r * r); };
    fn.deriv = [dg, k0](double r) { return 2.0 * r * k0 * dg(r * r); };
    fn.second_deriv = [dg, ddg, k0](double r) {
        const double u = r * r;
        return k0 * (4.0 * u * ddg(u) + 2.0 * dg(u));
    };
    return fn;
}

/// Closed-form lambda1-branch profile R(r) = (1+r^2)^{1-N/2-beta} r^beta.
inline SmoothRadialFn lambda1_eigenprofile(int dim, double lambda1) {
    const double beta = mu_lambda1(dim, lambda1, 1.0).beta;
    const double p = 0.5 * dim - 1.0 + beta;
    SmoothRadialFn fn;
    fn.value = [beta, p](double r) {
        return std::pow(r, beta) * std::pow(1.0 + r * r, -p);
    };
    fn.deriv = [beta, p](double r) {
        const double q = 1.0 + r * r;
        return std::pow(r, beta - 1.0) * std::pow(q, -p - 1.0) *
               (beta * q - 2.0 * p * r * r);
    };
    fn.second_deriv = [beta, p](double r) {
        const double q = 1.0 + r * r;
        return beta * (beta - 1.0) * std::pow(r, beta - 2.0) * std::pow(q, -p) -
               2.0 * p * (2.0 * beta + 1.0) * std::pow(r, beta) *
                   std::pow(q, -p - 1.0) +
               4.0 * p * (p + 1.0) * std::pow(r, beta + 2.0) *
                   std::pow(q, -p - 2.0);
    };
    return fn;
}

/// Residual of the radial eigen-equation
///   R'' + (N-1)/r R' + (-lambda/r^2 + mu k0^{2*-2} (1+r^2)^{-2}) R = 0
/// at a point, scaled by the magnitude of its terms.
inline double radial_ode_residual(const SmoothRadialFn& R, int dim,
                                  double lambda, double mu, double k0,
                                  double r) {
    const double w = mu * std::pow(k0, 4.0 / (dim - 2.0));
    const double q = 1.0 + r * r;
    const double t1 = R.second_deriv(r);
    const double t2 = (dim - 1.0) / r * R.deriv(r);
    const double t3 = (-lambda / (r * r) + w / (q * q)) * R.value(r);
    const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + 1e-300;
    return (t1 + t2 + t3) / scale;
}

}  // namespace conestab
