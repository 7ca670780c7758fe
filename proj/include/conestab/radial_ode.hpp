#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "conestab/detail/ode.hpp"
#include "conestab/errors.hpp"
#include "conestab/geometry.hpp"

namespace conestab {

/// Shooting oracle for the weighted radial eigenproblem
///   (r^{N-1} R')' + r^{N-1} (-lambda r^{-2} + mu k0^{2*-2} (1+r^2)^{-2}) R = 0
/// with R ~ r^beta at the origin and R = o(r^{2-N+eps}) at infinity.
/// Everything is integrated in the logarithmic variable t = ln r, where the
/// equation reads  R_tt + (N-2) R_t + (-lambda + w / (4 cosh^2 t)) R = 0
/// with w = mu k0^{2*-2}; the coefficients are then bounded and the two
/// admissible behaviors are plain exponentials e^{beta t}, e^{sigma t}.
struct RadialOdeOptions {
    double r0 = 1e-6;
    double tail_eps = 1e-14;      // potential tail cutoff for r_inf
    double rtol = 1e-12;
    double mu_bisect_rtol = 1e-9;
    double scan_step_w = 2.0;
    int max_scan_retries = 3;
};

/// Origin exponent: the nonnegative root of beta^2 + (N-2) beta - lambda = 0.
inline double origin_exponent(int dim, double lambda) {
    return 0.5 * (-(dim - 2.0) + std::sqrt((dim - 2.0) * (dim - 2.0) + 4.0 * lambda));
}

struct RadialShot {
    double mismatch = 0.0;   // scale-normalized Wronskian at r = 1
    double beta = 0.0;       // origin exponent
    double sigma = 0.0;      // decay exponent 2 - N - beta
    double r_inf = 0.0;
    int interior_zeros = 0;  // of the glued profile (meaningful near roots)

    /// Glued two-sided profile; arbitrary overall scale.
    double profile(double r) const {
        const double t = std::log(r);
        if (t <= 0.0) return out_.value(t);
        return junction_scale_ * in_.value(t);
    }

    detail::HermiteCurve out_;  // (R, R_t) on [ln r0, 0]
    detail::HermiteCurve in_;   // (R, R_t) on [0, ln r_inf]
    double junction_scale_ = 1.0;
};

namespace detail {

struct RadialProblem {
    int dim;
    double lambda;
    double w;  // mu * k0^{2*-2}
    double beta;
    double sigma;
    double t0;
    double t_inf;
};

inline RadialProblem radial_problem(int dim, double lambda, double mu,
                                    double k0, const RadialOdeOptions& opt) {
    RadialProblem p;
    p.dim = dim;
    p.lambda = lambda;
    p.w = mu * std::pow(k0, 4.0 / (dim - 2.0));
    p.beta = origin_exponent(dim, lambda);
    p.sigma = 2.0 - dim - p.beta;
    p.t0 = std::log(opt.r0);
    const double r_tail = std::pow(std::max(p.w, 1.0) / opt.tail_eps, 0.25);
    const double r_inf =
        std::max(50.0 * std::max(1.0, std::sqrt(std::max(mu, 0.0))), r_tail);
    p.t_inf = std::log(r_inf);
    return p;
}

struct RadialHalf {
    Vec2 end{0.0, 0.0};
    std::vector<OdeStep> record;
};

inline RadialHalf radial_half(const RadialProblem& p, bool outward, bool record,
                              double rtol) {
    auto rhs = [&](double t, const Vec2& y) {
        const double ch = std::cosh(t);
        const double pot = p.w / (4.0 * ch * ch);
        return Vec2{y[1], -(p.dim - 2.0) * y[1] - (pot - p.lambda) * y[0]};
    };
    OdeOptions oopt;
    oopt.rtol = rtol;
    oopt.atol = 1e-16;
    oopt.max_step = 0.25;
    oopt.rescale_threshold = 1e50;

    RadialHalf half;
    auto on_step = [&](double t, const Vec2& y, const Vec2& dy) {
        if (record) half.record.push_back({t, y, dy});
    };
    std::function<void(double)> on_rescale;
    if (record) {
        on_rescale = [&](double factor) {
            for (auto& s : half.record) {
                s.y[0] *= factor;
                s.y[1] *= factor;
                s.dy[0] *= factor;
                s.dy[1] *= factor;
            }
        };
    }

    if (outward) {
        // R ~ e^{beta t} (1 + b1 r^2), overall scale normalized at t0
        const double r0sq = std::exp(2.0 * p.t0);
        const double b1 = -p.w / (4.0 * p.beta + 2.0 * p.dim);
        const Vec2 y0{1.0 + b1 * r0sq, p.beta + (p.beta + 2.0) * b1 * r0sq};
        half.end = integrate_rk45(rhs, p.t0, 0.0, y0, oopt, on_step, on_rescale);
    } else {
        // R ~ e^{sigma t} (1 + c1 r^{-2})
        const double rinv2 = std::exp(-2.0 * p.t_inf);
        const double den = (p.sigma - 2.0) * (p.sigma + p.dim - 4.0) - p.lambda;
        const double c1 = -p.w / den;
        const Vec2 y0{1.0 + c1 * rinv2,
                      p.sigma + (p.sigma - 2.0) * c1 * rinv2};
        half.end = integrate_rk45(rhs, p.t_inf, 0.0, y0, oopt, on_step, on_rescale);
    }
    return half;
}

inline double normalized_wronskian(const Vec2& out, const Vec2& in) {
    const double w = out[0] * in[1] - out[1] * in[0];
    const double no = std::hypot(out[0], out[1]);
    const double ni = std::hypot(in[0], in[1]);
    return w / (no * ni);
}

inline int count_sign_changes(const std::vector<std::pair<double, double>>& pts) {
    int zeros = 0;
    double prev = 0.0;
    bool have = false;
    for (const auto& [t, v] : pts) {
        if (v == 0.0) continue;
        if (have && prev * v < 0.0) ++zeros;
        prev = v;
        have = true;
    }
    return zeros;
}

}  // namespace detail

/// One two-sided shot at a trial eigenvalue mu.  The mismatch vanishes
/// exactly at eigenvalues and is bounded away from zero between them.
inline RadialShot shoot_radial(int dim, double lambda, double mu, double k0,
                               const RadialOdeOptions& opt = {},
                               bool want_profile = true) {
    if (dim < 3) throw DimensionTooSmall("shoot_radial: dim must be >= 3");
    if (!(mu > 0.0)) throw Error("shoot_radial: mu must be positive");
    if (lambda < 0.0) throw Error("shoot_radial: lambda must be >= 0");

    const detail::RadialProblem p =
        detail::radial_problem(dim, lambda, mu, k0, opt);
    detail::RadialHalf out = detail::radial_half(p, true, want_profile, opt.rtol);
    detail::RadialHalf in = detail::radial_half(p, false, want_profile, opt.rtol);

    RadialShot shot;
    shot.beta = p.beta;
    shot.sigma = p.sigma;
    shot.r_inf = std::exp(p.t_inf);
    shot.mismatch = detail::normalized_wronskian(out.end, in.end);

    if (want_profile) {
        double scale;
        if (std::abs(in.end[0]) > 1e-8 * std::hypot(in.end[0], in.end[1])) {
            scale = out.end[0] / in.end[0];
        } else {
            scale = out.end[1] / in.end[1];
        }
        shot.junction_scale_ = scale;

        std::vector<std::pair<double, double>> merged;
        merged.reserve(out.record.size() + in.record.size());
        for (const auto& s : out.record) merged.emplace_back(s.t, s.y[0]);
        for (auto it = in.record.rbegin(); it != in.record.rend(); ++it)
            if (it->t > 1e-12) merged.emplace_back(it->t, scale * it->y[0]);
        shot.interior_zeros = detail::count_sign_changes(merged);

        shot.out_ = detail::HermiteCurve(std::move(out.record));
        shot.in_ = detail::HermiteCurve(std::move(in.record));
    }
    return shot;
}

/// First `count` eigenvalues mu of the radial problem at fixed lambda,
/// found by a sign scan of the mismatch plus bisection; the k-th
/// eigenfunction is verified to have k-1 interior zeros.
inline std::vector<double> find_radial_eigenvalues(int dim, double lambda,
                                                   int count, double k0,
                                                   const RadialOdeOptions& opt = {}) {
    if (count < 1) throw Error("find_radial_eigenvalues: count must be >= 1");
    const double k0pow = std::pow(k0, 4.0 / (dim - 2.0));
    const double w_cap = dim * (dim - 2.0) +
                         4.0 * (count + 2.0) * (count + dim + 2.0) + 100.0 +
                         4.0 * lambda;

    auto mismatch_at_w = [&](double w) {
        return shoot_radial(dim, lambda, w / k0pow, k0, opt, false).mismatch;
    };

    double step = opt.scan_step_w;
    for (int attempt = 0; attempt <= opt.max_scan_retries; ++attempt) {
        std::vector<double> roots_w;
        double wa = 0.5;
        double fa = mismatch_at_w(wa);
        bool bad_nodes = false;
        while (wa < w_cap && static_cast<int>(roots_w.size()) < count) {
            const double wb = wa + step;
            const double fb = mismatch_at_w(wb);
            if (fa == 0.0 || fa * fb < 0.0) {
                double lo = wa, hi = wb, flo = fa;
                while (hi - lo > opt.mu_bisect_rtol * hi) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = mismatch_at_w(mid);
                    if (flo * fm <= 0.0) {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots_w.push_back(0.5 * (lo + hi));
            }
            wa = wb;
            fa = fb;
        }
        if (static_cast<int>(roots_w.size()) < count) {
            throw NoConvergence(
                "find_radial_eigenvalues: scan exhausted the mu range");
        }
        // node-count audit; a mismatch means the scan stepped over a root
        for (int k = 0; k < count; ++k) {
            const RadialShot shot =
                shoot_radial(dim, lambda, roots_w[k] / k0pow, k0, opt, true);
            if (shot.interior_zeros != k) {
                bad_nodes = true;
                break;
            }
        }
        if (!bad_nodes) {
            std::vector<double> mus(count);
            for (int k = 0; k < count; ++k) mus[k] = roots_w[k] / k0pow;
            return mus;
        }
        step *= 0.5;
    }
    throw NoConvergence("find_radial_eigenvalues: node counts never consistent");
}

}  // namespace conestab
