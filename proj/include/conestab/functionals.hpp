#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "conestab/angular_spectrum.hpp"
#include "conestab/errors.hpp"
#include "conestab/geometry.hpp"
#include "conestab/quadrature.hpp"
#include "conestab/spectrum.hpp"

namespace conestab {

// ---------------------------------------------------------------------------
// Test functions in separated form
// ---------------------------------------------------------------------------

/// One separated component R(r) * Y_j(theta).  For j = 0 the angular part
/// is the constant 1 (so angular_norm_sq = |D|); for j = 1 it is the
/// L^2(D)-normalized lambda1 eigenfunction (angular_norm_sq = 1), whose
/// colatitude factor is needed whenever a critical norm is requested.
struct TestComponent {
    SmoothRadialFn radial;
    int angular_index = 0;
    double lambda = 0.0;
    double angular_norm_sq = 1.0;
    std::function<double(double)> colat;  // empty for j = 0 / abstract cones
};

struct TestFunction {
    int dim = 3;
    std::vector<TestComponent> parts;

    bool has_angular() const {
        for (const auto& p : parts)
            if (p.angular_index != 0) return true;
        return false;
    }
};

inline TestFunction tf_radial(const ConeDomain& cone, SmoothRadialFn fn) {
    TestFunction tf;
    tf.dim = cone.dim();
    TestComponent c;
    c.radial = std::move(fn);
    c.angular_index = 0;
    c.lambda = 0.0;
    c.angular_norm_sq = cone.measure();
    tf.parts.push_back(std::move(c));
    return tf;
}

inline TestFunction tf_angular1(const ConeDomain& cone, SmoothRadialFn fn,
                                double lambda1,
                                std::function<double(double)> colat = {}) {
    TestFunction tf;
    tf.dim = cone.dim();
    TestComponent c;
    c.radial = std::move(fn);
    c.angular_index = 1;
    c.lambda = lambda1;
    c.angular_norm_sq = 1.0;
    c.colat = std::move(colat);
    tf.parts.push_back(std::move(c));
    return tf;
}

inline TestFunction tf_add(TestFunction a, const TestFunction& b) {
    if (a.dim != b.dim) throw Error("tf_add: dimension mismatch");
    for (const auto& p : b.parts) a.parts.push_back(p);
    return a;
}

inline TestFunction tf_scale(TestFunction a, double c) {
    for (auto& p : a.parts) {
        SmoothRadialFn old = p.radial;
        p.radial.value = [old, c](double r) { return c * old.value(r); };
        p.radial.deriv = [old, c](double r) { return c * old.deriv(r); };
        p.radial.second_deriv = [old, c](double r) {
            return c * old.second_deriv(r);
        };
    }
    return a;
}

inline SmoothRadialFn bubble_profile(const Bubble& b) {
    return SmoothRadialFn{[b](double r) { return b.value(r); },
                          [b](double r) { return b.deriv(r); },
                          [b](double r) { return b.second_deriv(r); }};
}

/// d/ds U_s as a radial profile: k0 (1 + c r^2)^{-N/2} (1 - c r^2) with
/// c = s^{4/(N-2)}.  At s = 1 this is the second eigenfunction.
inline SmoothRadialFn ds_bubble_profile(int dim, double k0, double s) {
    const double c = std::pow(s, 4.0 / (dim - 2.0));
    const double halfN = 0.5 * dim;
    auto h = [c, halfN](double u) {
        return (1.0 - c * u) * std::pow(1.0 + c * u, -halfN);
    };
    auto dh = [c, halfN](double u) {
        const double q = 1.0 + c * u;
        return -c * std::pow(q, -halfN - 1.0) *
               (q + halfN * (1.0 - c * u));
    };
    auto ddh = [c, halfN](double u) {
        const double q = 1.0 + c * u;
        // derivative of dh
        return -c * c *
               ((1.0 - halfN) * std::pow(q, -halfN - 1.0) +
                (-halfN - 1.0) * std::pow(q, -halfN - 2.0) *
                    ((1.0 + halfN) + c * u * (1.0 - halfN)));
    };
    SmoothRadialFn fn;
    fn.value = [h, k0](double r) { return k0 * h(r * r); };
    fn.deriv = [dh, k0](double r) { return 2.0 * r * k0 * dh(r * r); };
    fn.second_deriv = [dh, ddh, k0](double r) {
        const double u = r * r;
        return k0 * (4.0 * u * ddh(u) + 2.0 * dh(u));
    };
    return fn;
}

// ---------------------------------------------------------------------------
// Norms and inner products
// ---------------------------------------------------------------------------

namespace detail {

struct Consolidated {
    bool has0 = false;
    bool has1 = false;
    std::vector<const TestComponent*> p0;
    std::vector<const TestComponent*> p1;
    double a0 = 0.0;
    double lambda1 = 0.0;
    const std::function<double(double)>* colat = nullptr;

    double r0(double r) const {
        double s = 0.0;
        for (const auto* p : p0) s += p->radial.value(r);
        return s;
    }
    double dr0(double r) const {
        double s = 0.0;
        for (const auto* p : p0) s += p->radial.deriv(r);
        return s;
    }
    double r1(double r) const {
        double s = 0.0;
        for (const auto* p : p1) s += p->radial.value(r);
        return s;
    }
    double dr1(double r) const {
        double s = 0.0;
        for (const auto* p : p1) s += p->radial.deriv(r);
        return s;
    }
};

inline Consolidated consolidate(const TestFunction& tf) {
    Consolidated c;
    for (const auto& p : tf.parts) {
        if (p.angular_index == 0) {
            c.p0.push_back(&p);
            c.has0 = true;
            c.a0 = p.angular_norm_sq;
        } else if (p.angular_index == 1) {
            if (c.has1 && std::abs(p.lambda - c.lambda1) >
                              1e-9 * std::max(1.0, std::abs(c.lambda1)))
                throw Error("TestFunction: mixed lambda1 values among j=1 parts");
            c.p1.push_back(&p);
            c.has1 = true;
            c.lambda1 = p.lambda;
            if (p.colat) c.colat = &p.colat;
        } else {
            throw Error("TestFunction: only angular indices 0 and 1 are supported");
        }
    }
    return c;
}

}  // namespace detail

/// Membership check for D^{1,2}: the gradient norm must be finite and
/// settle under grid refinement.
inline void validate(const TestFunction& tf, const ConeDomain& cone,
                     const RadialGrid& grid);

inline double grad_norm_sq(const TestFunction& tf, const ConeDomain& cone,
                           const RadialGrid& grid) {
    if (tf.dim != cone.dim()) throw Error("grad_norm_sq: dimension mismatch");
    const detail::Consolidated c = detail::consolidate(tf);
    double sum = 0.0;
    if (c.has0) {
        sum += c.a0 * integrate_radial(
                          [&](double r) {
                              const double d = c.dr0(r);
                              return d * d;
                          },
                          tf.dim, grid);
    }
    if (c.has1) {
        sum += integrate_radial(
            [&](double r) {
                const double d = c.dr1(r);
                return d * d;
            },
            tf.dim, grid);
        sum += c.lambda1 * integrate_radial(
                               [&](double r) {
                                   const double v = c.r1(r);
                                   return v * v / (r * r);
                               },
                               tf.dim, grid);
    }
    return sum;
}

inline void validate(const TestFunction& tf, const ConeDomain& cone,
                     const RadialGrid& grid) {
    const double coarse = grad_norm_sq(tf, cone, grid);
    const RadialGrid fine = make_radial_grid(2 * grid.size(), grid.map_kind);
    const double refined = grad_norm_sq(tf, cone, fine);
    if (!std::isfinite(coarse) || !std::isfinite(refined))
        throw NonConvergent("validate: gradient norm is not finite");
    const double scale = std::max({1e-300, coarse, refined});
    if (std::abs(refined - coarse) > 1e-7 * scale)
        throw NonConvergent("validate: gradient norm does not settle");
}

/// <grad phi, grad psi> for separated test functions (components with
/// different angular index are orthogonal).
inline double grad_inner_tf(const TestFunction& phi, const TestFunction& psi,
                            const ConeDomain& cone, const RadialGrid& grid) {
    if (phi.dim != cone.dim() || psi.dim != cone.dim())
        throw Error("grad_inner_tf: dimension mismatch");
    const detail::Consolidated a = detail::consolidate(phi);
    const detail::Consolidated b = detail::consolidate(psi);
    const int dim = phi.dim;
    double sum = 0.0;
    if (a.has0 && b.has0) {
        sum += a.a0 * integrate_radial(
                          [&](double r) { return a.dr0(r) * b.dr0(r); }, dim,
                          grid);
    }
    if (a.has1 && b.has1) {
        sum += integrate_radial(
            [&](double r) { return a.dr1(r) * b.dr1(r); }, dim, grid);
        sum += a.lambda1 * integrate_radial(
                               [&](double r) {
                                   return a.r1(r) * b.r1(r) / (r * r);
                               },
                               dim, grid);
    }
    return sum;
}

/// int_Sigma W(r) phi psi dx for separated phi, psi (W radial).
inline double weighted_inner(const TestFunction& phi, const TestFunction& psi,
                             const std::function<double(double)>& W,
                             const ConeDomain& cone, const RadialGrid& grid) {
    if (phi.dim != cone.dim() || psi.dim != cone.dim())
        throw Error("weighted_inner: dimension mismatch");
    const detail::Consolidated a = detail::consolidate(phi);
    const detail::Consolidated b = detail::consolidate(psi);
    double sum = 0.0;
    if (a.has0 && b.has0) {
        sum += a.a0 * integrate_radial(
                          [&](double r) { return W(r) * a.r0(r) * b.r0(r); },
                          phi.dim, grid);
    }
    if (a.has1 && b.has1) {
        sum += integrate_radial(
            [&](double r) { return W(r) * a.r1(r) * b.r1(r); }, phi.dim, grid);
    }
    return sum;
}

struct CritOptions {
    std::size_t theta_nodes = 96;
    std::size_t azimuth_nodes = 64;
};

/// ||phi||_{2*}^{2*}.  Separable for purely radial functions; with a j=1
/// component the cap is integrated in (r, theta, azimuthal angle) using
/// the S^{N-2} symmetry of the cap, which reduces the azimuthal sphere to
/// one angle.  Requires the colatitude profile of Y_1 in that case.
inline double crit_norm_power(const TestFunction& tf, const ConeDomain& cone,
                              const RadialGrid& grid,
                              const CritOptions& opt = {}) {
    const int dim = tf.dim;
    const double twostar = critical_exponent(dim);
    const detail::Consolidated c = detail::consolidate(tf);
    if (!c.has1) {
        if (!c.has0) return 0.0;
        return c.a0 * integrate_radial(
                          [&](double r) {
                              return std::pow(std::abs(c.r0(r)), twostar);
                          },
                          dim, grid);
    }
    if (!cone.is_cap())
        throw MissingAngularProfile(
            "crit_norm_power: critical norm with an angular component needs "
            "a cap cone");
    if (c.colat == nullptr || !(*c.colat))
        throw MissingAngularProfile(
            "crit_norm_power: j=1 component carries no colatitude profile");

    const double theta0 = cone.cap_aperture();
    const auto& g = *c.colat;
    // Y1(theta, w) = g(theta) * cw * w_1,  cw normalizing the linear
    // harmonic on S^{N-2}; azimuthal reduction w_1 = cos(t) with weight
    // |S^{N-3}| sin^{N-3}(t).
    const double cw = std::sqrt((dim - 1.0) / sphere_measure(dim - 2));
    const detail::GaussRule th = detail::gauss_legendre_on(opt.theta_nodes, 0.0, theta0);
    const detail::GaussRule az = detail::gauss_legendre_on(opt.azimuth_nodes, 0.0, pi);
    const double szf = sphere_measure(dim - 3);

    std::vector<double> gvals(th.nodes.size());
    std::vector<double> thw(th.nodes.size());
    for (std::size_t i = 0; i < th.nodes.size(); ++i) {
        gvals[i] = g(th.nodes[i]);
        thw[i] = th.weights[i] * std::pow(std::sin(th.nodes[i]), dim - 2);
    }
    std::vector<double> azu(az.nodes.size());
    std::vector<double> azw(az.nodes.size());
    for (std::size_t i = 0; i < az.nodes.size(); ++i) {
        azu[i] = std::cos(az.nodes[i]);
        azw[i] = az.weights[i] * std::pow(std::sin(az.nodes[i]), dim - 3);
    }

    double total = 0.0;
    for (std::size_t ir = 0; ir < grid.size(); ++ir) {
        const double r = grid.nodes[ir];
        const double v0 = c.has0 ? c.r0(r) : 0.0;
        const double v1 = c.r1(r) * cw;
        double ang = 0.0;
        for (std::size_t it = 0; it < gvals.size(); ++it) {
            const double gv = v1 * gvals[it];
            double inner = 0.0;
            for (std::size_t ia = 0; ia < azu.size(); ++ia)
                inner += azw[ia] * std::pow(std::abs(v0 + gv * azu[ia]), twostar);
            ang += thw[it] * inner;
        }
        total += grid.weights[ir] * std::pow(r, dim - 1) * ang * szf;
    }
    if (!std::isfinite(total))
        throw QuadratureFailure("crit_norm_power: non-finite result");
    return total;
}

/// ||phi||_{2*}^2
inline double crit_norm_sq(const TestFunction& tf, const ConeDomain& cone,
                           const RadialGrid& grid, const CritOptions& opt = {}) {
    const double p = crit_norm_power(tf, cone, grid, opt);
    return std::pow(p, 2.0 / critical_exponent(tf.dim));
}

// ---------------------------------------------------------------------------
// Sobolev quotient, best constant and normalizer
// ---------------------------------------------------------------------------

inline double sobolev_quotient(const TestFunction& phi, const ConeDomain& cone,
                               const RadialGrid& grid,
                               const CritOptions& opt = {}) {
    const double denom_p = crit_norm_power(phi, cone, grid, opt);
    if (!(denom_p > 1e-280))
        throw ZeroFunction("sobolev_quotient: function vanishes");
    const double num = grad_norm_sq(phi, cone, grid);
    return std::sqrt(num) / std::pow(denom_p, 1.0 / critical_exponent(phi.dim));
}

/// S_U: the quotient of the (any-normalization) bubble; homogeneous of
/// degree zero in k0 and invariant under rescaling.
inline double best_constant_bubble(const ConeDomain& cone,
                                   const RadialGrid& grid) {
    const Bubble u(cone.dim(), 1.0, 1.0);
    return sobolev_quotient(tf_radial(cone, bubble_profile(u)), cone, grid);
}

/// k0 from the identity k0^{2*-2} = S_U^{-2*} N(N-2).
inline double bubble_normalizer(const ConeDomain& cone, const RadialGrid& grid) {
    const int dim = cone.dim();
    const double S = best_constant_bubble(cone, grid);
    const double twostar = critical_exponent(dim);
    const double k0pow = std::pow(S, -twostar) * dim * (dim - 2.0);
    return std::pow(k0pow, 0.25 * (dim - 2.0));
}

/// Independent route: enforce ||grad U||_2 = 1 directly by quadrature.
inline double bubble_normalizer_direct(const ConeDomain& cone,
                                       const RadialGrid& grid) {
    const int dim = cone.dim();
    const double I = integrate_radial(
        [dim](double r) {
            return r * r * std::pow(1.0 + r * r, -static_cast<double>(dim));
        },
        dim, grid);
    return 1.0 / ((dim - 2.0) * std::sqrt(cone.measure() * I));
}

struct BubbleData {
    double S = 0.0;   // S_U
    double k0 = 0.0;  // gradient normalizer
};

inline BubbleData make_bubble_data(const ConeDomain& cone,
                                   const RadialGrid& grid) {
    BubbleData d;
    d.S = best_constant_bubble(cone, grid);
    const int dim = cone.dim();
    d.k0 = std::pow(std::pow(d.S, -critical_exponent(dim)) * dim * (dim - 2.0),
                    0.25 * (dim - 2.0));
    return d;
}

// ---------------------------------------------------------------------------
// Distance to the manifold of rescaled bubbles
// ---------------------------------------------------------------------------

struct DistanceResult {
    double distance = 0.0;
    double c0 = 0.0;
    double s0 = 1.0;
    bool multimodal = false;
};

struct DistanceOptions {
    double log_s_min = -6.0;
    double log_s_max = 6.0;
    std::size_t coarse_points = 121;
    double golden_tol = 1e-10;
};

/// d(phi, M)^2 = inf_{c,s} ||grad(phi - c U_s)||^2.  c is eliminated in
/// closed form (c = <grad phi, grad U_s> for the normalized family), s by a
/// coarse scan plus golden section on log s; the returned distance is then
/// re-evaluated as ||grad(phi - c0 U_{s0})|| with the difference formed
/// inside the integrand, which is exact for points on the manifold.
inline DistanceResult distance_to_manifold(const TestFunction& phi,
                                           const BubbleData& bub,
                                           const ConeDomain& cone,
                                           const RadialGrid& grid,
                                           const DistanceOptions& opt = {}) {
    const int dim = cone.dim();
    const double twostar = critical_exponent(dim);
    const double Spow = std::pow(bub.S, twostar);
    const detail::Consolidated c = detail::consolidate(phi);

    // <grad phi, grad U_s> = S^{2*} int phi U_s^{2*-1}; only the radial part
    // of phi sees the (radial) bubble.
    auto F = [&](double s) {
        if (!c.has0) return 0.0;
        const Bubble us(dim, bub.k0, s);
        return Spow * c.a0 *
               integrate_radial(
                   [&](double r) {
                       return c.r0(r) * std::pow(us.value(r), twostar - 1.0);
                   },
                   dim, grid);
    };
    auto G = [&](double s) {
        const Bubble us(dim, bub.k0, s);
        return Spow * cone.measure() *
               integrate_radial(
                   [&](double r) { return std::pow(us.value(r), twostar); },
                   dim, grid);
    };

    // coarse scan of F^2 over log s
    const std::size_t n = opt.coarse_points;
    std::vector<double> xs(n), f2(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = opt.log_s_min +
                (opt.log_s_max - opt.log_s_min) * static_cast<double>(i) /
                    static_cast<double>(n - 1);
        const double v = F(std::exp(xs[i]));
        f2[i] = v * v;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (f2[i] > f2[best]) best = i;

    bool multimodal = false;
    {
        double second = -1.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (i == best) continue;
            if (f2[i] >= f2[i - 1] && f2[i] >= f2[i + 1])
                second = std::max(second, f2[i]);
        }
        if (second >= 0.0 &&
            std::abs(f2[best] - second) <=
                1e-6 * std::max({f2[best], second, 1e-30}))
            multimodal = true;
    }

    // golden section (maximize f2) on the bracketing triple
    double a = xs[best == 0 ? 0 : best - 1];
    double b = xs[best + 1 < n ? best + 1 : n - 1];
    if (a == b) {
        a = xs[best] - 0.1;
        b = xs[best] + 0.1;
    }
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double h1 = -1.0, h2 = -1.0;
    {
        const double v1 = F(std::exp(x1)), v2 = F(std::exp(x2));
        h1 = v1 * v1;
        h2 = v2 * v2;
    }
    while (b - a > opt.golden_tol) {
        if (h1 < h2) {
            a = x1;
            x1 = x2;
            h1 = h2;
            x2 = a + gr * (b - a);
            const double v = F(std::exp(x2));
            h2 = v * v;
        } else {
            b = x2;
            x2 = x1;
            h2 = h1;
            x1 = b - gr * (b - a);
            const double v = F(std::exp(x1));
            h1 = v * v;
        }
    }
    // Polish the stationary point on the analytic derivative of F along
    // log s: the golden section alone stalls at the sqrt(eps) flatness of
    // the peak, which is not enough for points on the manifold.
    auto Dlog = [&](double x) {
        const double s = std::exp(x);
        const Bubble us(dim, bub.k0, s);
        const SmoothRadialFn dus = ds_bubble_profile(dim, bub.k0, s);
        return Spow * (twostar - 1.0) * c.a0 * s *
               integrate_radial(
                   [&](double r) {
                       return c.r0(r) *
                              std::pow(us.value(r), twostar - 2.0) *
                              dus.value(r);
                   },
                   dim, grid);
    };
    double xbest = 0.5 * (a + b);
    if (c.has0 && f2[best] > 1e-24) {
        double width = 1e-7;
        double lo = xbest, hi = xbest, dlo = 0.0, dhi = 0.0;
        bool bracketed = false;
        while (width < 0.5) {
            lo = xbest - width;
            hi = xbest + width;
            dlo = Dlog(lo);
            dhi = Dlog(hi);
            if (dlo * dhi < 0.0) {
                bracketed = true;
                break;
            }
            width *= 4.0;
        }
        if (bracketed) {
            for (int it = 0; it < 90 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = Dlog(mid);
                if (dlo * dm <= 0.0) {
                    hi = mid;
                    dhi = dm;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            xbest = 0.5 * (lo + hi);
        }
    }
    const double s0 = std::exp(xbest);
    const double F0 = F(s0);
    const double c0 = (c.has0 ? F0 / G(s0) : 0.0);

    // residual form of the distance
    const Bubble us0(dim, bub.k0, s0);
    TestFunction resid = phi;
    {
        SmoothRadialFn neg;
        neg.value = [us0, c0](double r) { return -c0 * us0.value(r); };
        neg.deriv = [us0, c0](double r) { return -c0 * us0.deriv(r); };
        neg.second_deriv = [us0, c0](double r) {
            return -c0 * us0.second_deriv(r);
        };
        TestComponent comp;
        comp.radial = std::move(neg);
        comp.angular_index = 0;
        comp.lambda = 0.0;
        comp.angular_norm_sq = cone.measure();
        resid.parts.push_back(std::move(comp));
    }
    const double d2 = grad_norm_sq(resid, cone, grid);

    DistanceResult out;
    out.distance = std::sqrt(std::max(0.0, d2));
    out.c0 = c0;
    out.s0 = s0;
    out.multimodal = multimodal;
    return out;
}

// ---------------------------------------------------------------------------
// Deficit reports
// ---------------------------------------------------------------------------

/// The unit residual of the manifold projection: phi = c0 V_{s0} + d v with
/// ||grad v|| = 1 and v orthogonal to the tangent space at the projection.
inline TestFunction manifold_residual(const TestFunction& phi,
                                      const BubbleData& bub,
                                      const ConeDomain& cone,
                                      const DistanceResult& dr) {
    if (!(dr.distance > 0.0))
        throw Error("manifold_residual: phi lies on the manifold");
    TestFunction v = phi;
    const Bubble us0(cone.dim(), bub.k0, dr.s0);
    TestComponent comp;
    comp.radial = bubble_profile(us0);
    comp.angular_index = 0;
    comp.lambda = 0.0;
    comp.angular_norm_sq = cone.measure();
    v.parts.push_back(std::move(comp));
    const double c0 = dr.c0;
    auto& back = v.parts.back().radial;
    SmoothRadialFn base = back;
    back.value = [base, c0](double r) { return -c0 * base.value(r); };
    back.deriv = [base, c0](double r) { return -c0 * base.deriv(r); };
    back.second_deriv = [base, c0](double r) {
        return -c0 * base.second_deriv(r);
    };
    return tf_scale(std::move(v), 1.0 / dr.distance);
}

struct DeficitReport {
    double grad_norm_sq = 0.0;
    double crit_norm_sq = 0.0;  // ||phi||_{2*}^2
    double S_used = 0.0;
    double deficit = 0.0;       // grad_norm_sq - S_used^2 * crit_norm_sq
    double distance = 0.0;      // d(phi, M_U)
    double quotient = 0.0;      // deficit / distance^2 when distance > 0
    double c0 = 0.0;
    double s0 = 1.0;
    bool multimodal = false;
};

/// Full report with S_used = S_U (bubble surrogate: the global constant of
/// the cone is unknown in general, so the deficit is measured against the
/// bubble quotient; this is the regime all the local statements live in).
inline DeficitReport deficit_report(const TestFunction& phi,
                                    const ConeDomain& cone,
                                    const BubbleData& bub,
                                    const RadialGrid& grid,
                                    const CritOptions& copt = {},
                                    const DistanceOptions& dopt = {}) {
    DeficitReport rep;
    rep.S_used = bub.S;
    rep.grad_norm_sq = grad_norm_sq(phi, cone, grid);
    rep.crit_norm_sq = crit_norm_sq(phi, cone, grid, copt);
    rep.deficit = rep.grad_norm_sq - bub.S * bub.S * rep.crit_norm_sq;
    const DistanceResult d = distance_to_manifold(phi, bub, cone, grid, dopt);
    rep.distance = d.distance;
    rep.c0 = d.c0;
    rep.s0 = d.s0;
    rep.multimodal = d.multimodal;
    // below the noise floor the quotient would only amplify rounding
    const double floor = 1e-9 * std::max(1.0, std::sqrt(rep.grad_norm_sq));
    rep.quotient = rep.distance > floor
                       ? rep.deficit / (rep.distance * rep.distance)
                       : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Second variation
// ---------------------------------------------------------------------------

struct SecondVariation {
    double full = 0.0;     // Q_V(eta), complete quadratic form
    double reduced = 0.0;  // form with the first-variation identity substituted
};

inline SecondVariation second_variation(const TestFunction& eta,
                                        const ConeDomain& cone,
                                        const BubbleData& bub,
                                        const RadialGrid& grid) {
    const int dim = cone.dim();
    const double twostar = critical_exponent(dim);
    const double Spow = std::pow(bub.S, twostar);
    const Bubble V(dim, bub.k0, 1.0);

    const double D = grad_norm_sq(eta, cone, grid);
    const detail::Consolidated c = detail::consolidate(eta);
    double A = 0.0;  // int V^{2*-1} eta
    double B = 0.0;  // <grad V, grad eta>
    if (c.has0) {
        A = c.a0 * integrate_radial(
                       [&](double r) {
                           return std::pow(V.value(r), twostar - 1.0) * c.r0(r);
                       },
                       dim, grid);
        B = c.a0 * integrate_radial(
                       [&](double r) { return V.deriv(r) * c.dr0(r); }, dim,
                       grid);
    }
    const double C = weighted_inner(
        eta, eta,
        [&](double r) { return std::pow(V.value(r), twostar - 2.0); }, cone,
        grid);

    SecondVariation sv;
    sv.full = D - 4.0 * Spow * A * B +
              Spow * (-(twostar - 1.0) * C + Spow * (twostar + 2.0) * A * A);
    sv.reduced = D + (twostar - 2.0) * B * B - Spow * (twostar - 1.0) * C;
    return sv;
}

// ---------------------------------------------------------------------------
// Hardy inequality check
// ---------------------------------------------------------------------------

struct HardyResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// (N-4+2eps)^2/4 int u^2/|x|^{4-2eps} vs int |grad u|^2/|x|^{2-2eps};
/// ratio <= 1 for admissible u.
inline HardyResult hardy_check(const TestFunction& u, int dim, double eps,
                               const RadialGrid& grid) {
    const detail::Consolidated c = detail::consolidate(u);
    const double cst = 0.25 * (dim - 4.0 + 2.0 * eps) * (dim - 4.0 + 2.0 * eps);

    auto checked = [&](const std::function<double(double)>& f) {
        const double coarse = integrate_radial(f, dim, grid);
        const RadialGrid fine = make_radial_grid(2 * grid.size(), grid.map_kind);
        const double refined = integrate_radial(f, dim, fine);
        const double scale =
            std::max({1e-300, std::abs(coarse), std::abs(refined)});
        if (std::abs(refined - coarse) > 1e-7 * scale)
            throw DivergentIntegral("hardy_check: integral does not settle");
        return refined;
    };

    double mass = 0.0;   // int u^2 |x|^{2eps-4}
    double energy = 0.0; // int |grad u|^2 |x|^{2eps-2}
    if (c.has0) {
        mass += c.a0 * checked([&](double r) {
            const double v = c.r0(r);
            return v * v * std::pow(r, 2.0 * eps - 4.0);
        });
        energy += c.a0 * checked([&](double r) {
            const double d = c.dr0(r);
            return d * d * std::pow(r, 2.0 * eps - 2.0);
        });
    }
    if (c.has1) {
        mass += checked([&](double r) {
            const double v = c.r1(r);
            return v * v * std::pow(r, 2.0 * eps - 4.0);
        });
        energy += checked([&](double r) {
            const double d = c.dr1(r);
            const double v = c.r1(r);
            return (d * d + c.lambda1 * v * v / (r * r)) *
                   std::pow(r, 2.0 * eps - 2.0);
        });
    }

    HardyResult out;
    out.lhs = cst * mass;
    out.rhs = energy;
    out.ratio = (out.lhs == 0.0 && out.rhs == 0.0) ? 0.0 : out.lhs / out.rhs;
    return out;
}

// ---------------------------------------------------------------------------
// The local stability constant
// ---------------------------------------------------------------------------

enum class ConstantBranch { lambda1_branch, radial_branch };

struct LocalConstant {
    double c_star = 0.0;
    ConstantBranch branch = ConstantBranch::lambda1_branch;
    bool degenerate = false;  // lambda1 <= N-1: c_star <= 0, bound meaningless
};

/// Two-branch closed form; equals 1 - mu2/mu3 whenever lambda1 > N-1.
inline LocalConstant local_constant(int dim, double lambda1) {
    LocalConstant out;
    if (lambda1 > 2.0 * dim) {
        out.c_star = 4.0 / (dim + 4.0);
        out.branch = ConstantBranch::radial_branch;
        return out;
    }
    const double arg = dim * static_cast<double>(dim) +
                       4.0 * (lambda1 - dim + 1.0);
    const double T = std::sqrt(arg);
    out.c_star = (2.0 * T - 2.0 * dim + 4.0 * (lambda1 - dim + 1.0)) /
                 (T * (2.0 + T));
    out.branch = ConstantBranch::lambda1_branch;
    out.degenerate = !(lambda1 > dim - 1.0);
    return out;
}

inline double local_constant_from_gap(double mu2, double mu3) {
    return 1.0 - mu2 / mu3;
}

/// C_D <= min_i (1 - mu2^i / mu3^i) over the supplied minimizer spectra.
inline double cd_upper_bound(const std::vector<std::pair<double, double>>& spectra) {
    if (spectra.empty()) throw Error("cd_upper_bound: no spectra supplied");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [mu2, mu3] : spectra) {
        if (!(mu2 > 0.0) || !(mu3 > mu2))
            throw GapViolation("cd_upper_bound: degenerate spectrum (mu3 <= mu2)");
        best = std::min(best, 1.0 - mu2 / mu3);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Probes
// ---------------------------------------------------------------------------

/// Third eigenfunction of the linearized operator, gradient-normalized.
/// Branch selected by the ordering condition: radial k=3 for lambda1 > 2N,
/// otherwise the lambda1 branch (which needs the cap's angular profile for
/// any later critical norm).
inline TestFunction third_eigenfunction(const ConeDomain& cone, double lambda1,
                                        const BubbleData& bub,
                                        const RadialGrid& grid,
                                        const AngularEigen* mode = nullptr) {
    const int dim = cone.dim();
    TestFunction w3;
    if (lambda1 > 2.0 * dim) {
        w3 = tf_radial(cone, radial_eigenfunction(dim, 3, bub.k0));
    } else {
        std::function<double(double)> colat;
        if (mode != nullptr) {
            const AngularEigen copy = *mode;
            colat = [copy](double th) { return copy.profile(th); };
        }
        w3 = tf_angular1(cone, lambda1_eigenprofile(dim, lambda1), lambda1,
                         std::move(colat));
    }
    const double nrm = std::sqrt(grad_norm_sq(w3, cone, grid));
    return tf_scale(std::move(w3), 1.0 / nrm);
}

struct ProbeRow {
    double d = 0.0;
    double deficit = 0.0;
    double distance = 0.0;
    double ratio = 0.0;  // deficit / distance^2
};

struct ExpansionProbe {
    std::vector<ProbeRow> rows;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double limit = 0.0;  // 1 - mu2/mu3
    ConstantBranch branch = ConstantBranch::radial_branch;
};

/// phi = U + d w3 for each d; the ratio deficit/d^2 converges to
/// 1 - mu2/mu3 linearly in d (the cubic term drives the first correction).
inline ExpansionProbe expansion_probe(const ConeDomain& cone, double lambda1,
                                      const std::vector<double>& d_values,
                                      const RadialGrid& grid,
                                      const AngularEigen* mode = nullptr,
                                      const CritOptions& copt = {}) {
    const int dim = cone.dim();
    if (!(lambda1 > dim - 1.0))
        throw Error("expansion_probe: requires lambda1 > N-1");
    const BubbleData bub = make_bubble_data(cone, grid);
    const GapCheck gap = nondegeneracy_check(dim, lambda1, bub.S);

    ExpansionProbe probe;
    probe.mu2 = gap.mu2;
    probe.mu3 = gap.mu3;
    probe.limit = 1.0 - gap.mu2 / gap.mu3;
    probe.branch = (lambda1 > 2.0 * dim) ? ConstantBranch::radial_branch
                                         : ConstantBranch::lambda1_branch;

    const TestFunction w3 = third_eigenfunction(cone, lambda1, bub, grid, mode);
    const TestFunction U = tf_radial(cone, bubble_profile(Bubble(dim, bub.k0)));

    for (double d : d_values) {
        const TestFunction phi = tf_add(U, tf_scale(w3, d));
        const DeficitReport rep = deficit_report(phi, cone, bub, grid, copt);
        ProbeRow row;
        row.d = d;
        row.deficit = rep.deficit;
        row.distance = rep.distance;
        row.ratio = rep.quotient;
        probe.rows.push_back(row);
    }
    return probe;
}

struct Richardson {
    double limit = 0.0;
    double order = 0.0;
};

/// Extrapolate ratio(d) -> L assuming ratio = L - C d^p from three rows at
/// d, d/2, d/4 (Aitken on a geometric sequence).
inline Richardson richardson_extrapolate(const std::vector<ProbeRow>& rows) {
    if (rows.size() < 3) throw Error("richardson_extrapolate: need 3 rows");
    const double r1 = rows[rows.size() - 3].ratio;
    const double r2 = rows[rows.size() - 2].ratio;
    const double r3 = rows[rows.size() - 1].ratio;
    const double num = r1 - r2, den = r2 - r3;
    Richardson out;
    if (den == 0.0 || num / den <= 0.0) {
        out.limit = r3;
        out.order = 2.0;  // differences below noise: already converged
        return out;
    }
    out.order = std::log2(num / den);
    out.limit = r3 + (r3 - r2) / (std::pow(2.0, out.order) - 1.0);
    return out;
}

enum class RhoChoice { radial_psi3, symmetric_product };

struct StrictnessProbe {
    double cubic = 0.0;    // int V^{2*-3} rho^3
    double quartic = 0.0;  // int V^{2*-4} rho^4
    bool verdict = false;  // a sign of eps makes the strictness bracket positive
};

namespace detail {

// int_0^theta0 sin^{N-2+2p} theta dtheta
inline double cap_sin_moment(int dim, double theta0, int p) {
    const GaussRule rule = gauss_legendre_on(256, 0.0, theta0);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] *
             std::pow(std::sin(rule.nodes[i]), dim - 2 + 2 * p);
    return s;
}

// int_D q_i^{2a} q_j^{2b} q_l^{2c} over a cap, i,j,l distinct and < N.
inline double cap_even_moment(int dim, double theta0, int a, int b, int c) {
    auto dfact = [](int m) {  // (2m-1)!!
        double v = 1.0;
        for (int i = 2 * m - 1; i > 1; i -= 2) v *= i;
        return v;
    };
    const int n = dim - 1;  // ambient dimension of S^{N-2}
    const int A = a + b + c;
    double denom = 1.0;
    for (int i = 0; i < A; ++i) denom *= (n + 2 * i);
    const double Emoment = dfact(a) * dfact(b) * dfact(c) / denom;
    return cap_sin_moment(dim, theta0, A) * sphere_measure(dim - 2) * Emoment;
}

}  // namespace detail

/// Strictness integrals of the cubic/quartic correction.  radial_psi3 uses
/// the (gradient-normalized) radial third eigenfunction and requires
/// lambda1 > 2N.  symmetric_product evaluates rho = U * (w_i w_j + w_i w_l
/// + w_j w_l) composed with the inverse stereographic projection on a cap
/// (N >= 4); the integrals are computed as written without asserting that
/// this candidate satisfies the Neumann condition away from the hemisphere.
inline StrictnessProbe strictness_probe(const ConeDomain& cone, double lambda1,
                                        RhoChoice rho_choice,
                                        const RadialGrid& grid) {
    const int dim = cone.dim();
    const double twostar = critical_exponent(dim);
    const BubbleData bub = make_bubble_data(cone, grid);
    const Bubble U(dim, bub.k0);

    auto checked_radial = [&](const std::function<double(double)>& f) {
        try {
            const double coarse = integrate_radial(f, dim, grid);
            const RadialGrid fine =
                make_radial_grid(2 * grid.size(), grid.map_kind);
            const double refined = integrate_radial(f, dim, fine);
            const double scale =
                std::max({1e-300, std::abs(coarse), std::abs(refined)});
            if (std::abs(refined - coarse) > 1e-7 * scale)
                throw NonConvergent("strictness integrand");
            return refined;
        } catch (const NonConvergent&) {
            // slow decay fallback
            const RadialGrid de =
                make_radial_grid(std::max<std::size_t>(grid.size(), 512),
                                 MapKind::double_exponential);
            const RadialGrid de2 =
                make_radial_grid(2 * de.size(), MapKind::double_exponential);
            const double v1 = integrate_radial(f, dim, de);
            const double v2 = integrate_radial(f, dim, de2);
            const double scale = std::max({1e-300, std::abs(v1), std::abs(v2)});
            if (std::abs(v2 - v1) > 1e-7 * scale)
                throw DivergentIntegral(
                    "strictness_probe: cubic/quartic integral diverges");
            return v2;
        }
    };

    StrictnessProbe out;
    if (rho_choice == RhoChoice::radial_psi3) {
        if (!(lambda1 > 2.0 * dim))
            throw Error(
                "strictness_probe: a radial third eigenfunction requires "
                "lambda1 > 2N");
        const SmoothRadialFn psi3 = radial_eigenfunction(dim, 3, bub.k0);
        const TestFunction w3 = tf_radial(cone, psi3);
        const double nrm = std::sqrt(grad_norm_sq(w3, cone, grid));
        const double inv = 1.0 / nrm;
        out.cubic = cone.measure() *
                    checked_radial([&](double r) {
                        const double rho = inv * psi3.value(r);
                        return std::pow(U.value(r), twostar - 3.0) * rho * rho * rho;
                    });
        out.quartic = cone.measure() *
                      checked_radial([&](double r) {
                          const double rho = inv * psi3.value(r);
                          const double rho2 = rho * rho;
                          return std::pow(U.value(r), twostar - 4.0) * rho2 * rho2;
                      });
    } else {
        if (!cone.is_cap())
            throw MissingAngularProfile(
                "strictness_probe: symmetric_product needs a cap");
        if (dim < 4)
            throw Error(
                "strictness_probe: symmetric_product needs three distinct "
                "tangential coordinates (N >= 4)");
        const double theta0 = cone.cap_aperture();
        // rho = A(r) P(q), A = U * 4r^2/(1+r^2)^2, P = q_i q_j + q_i q_l + q_j q_l
        auto A = [&U](double r) {
            const double q = 1.0 + r * r;
            return U.value(r) * 4.0 * r * r / (q * q);
        };
        auto dA = [&U, &A](double r) {
            const double q = 1.0 + r * r;
            return U.deriv(r) * 4.0 * r * r / (q * q) +
                   U.value(r) * (8.0 * r * q - 16.0 * r * r * r) / (q * q * q);
        };
        const double M11 = detail::cap_even_moment(dim, theta0, 1, 1, 0);
        const double M111 = detail::cap_even_moment(dim, theta0, 1, 1, 1);
        const double M22 = detail::cap_even_moment(dim, theta0, 2, 2, 0);
        const double M211 = detail::cap_even_moment(dim, theta0, 2, 1, 1);
        const double Mq2 = detail::cap_even_moment(dim, theta0, 1, 0, 0);
        const double P2 = 3.0 * M11;
        const double P3 = 6.0 * M111;
        const double P4 = 3.0 * M22 + 18.0 * M211;
        const double Pgrad = 6.0 * Mq2 - 4.0 * P2;

        const double gA2 = checked_radial([&](double r) {
            const double d = dA(r);
            return d * d;
        });
        const double cA2 = checked_radial([&](double r) {
            const double v = A(r);
            return v * v / (r * r);
        });
        const double norm2 = P2 * gA2 + Pgrad * cA2;
        const double inv = 1.0 / std::sqrt(norm2);

        out.cubic = P3 * checked_radial([&](double r) {
                        const double rho = inv * A(r);
                        return std::pow(U.value(r), twostar - 3.0) * rho * rho * rho;
                    });
        out.quartic = P4 * checked_radial([&](double r) {
                          const double rho = inv * A(r);
                          const double rho2 = rho * rho;
                          return std::pow(U.value(r), twostar - 4.0) * rho2 * rho2;
                      });
    }

    const double cubic_scale =
        std::max(std::abs(out.quartic), 1e-12);
    if (std::abs(out.cubic) > 1e-10 * cubic_scale) {
        out.verdict = true;  // pick rho or -rho to make the bracket positive
    } else {
        out.verdict = (twostar > 3.0) && (out.quartic > 0.0);
    }
    return out;
}

}  // namespace conestab
