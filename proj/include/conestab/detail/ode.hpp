#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "conestab/errors.hpp"

namespace conestab::detail {

using Vec2 = std::array<double, 2>;

struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0: choose automatically
    // For linear problems: rescale the state when it grows past this,
    // reporting the factor so recorded history can be kept consistent.
    double rescale_threshold = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;
};

/// Accepted-step record: position, state and state derivative (enough for
/// cubic Hermite dense output).
struct OdeStep {
    double t;
    Vec2 y;
    Vec2 dy;
};

/// Dormand-Prince 5(4) with PI-free elementary step control.  Integrates
/// y' = f(t, y) from t0 to t1 (either direction).  on_step is invoked at
/// t0 and after every accepted step; on_rescale (may be null) is invoked
/// with the multiplicative factor applied to the whole state.
template <class Rhs, class OnStep>
inline Vec2 integrate_rk45(Rhs&& f, double t0, double t1, Vec2 y,
                           const OdeOptions& opt, OnStep&& on_step,
                           const std::function<void(double)>& on_rescale = {}) {
    // Dormand-Prince tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    if (span == 0.0) return y;

    double t = t0;
    Vec2 k1 = f(t, y);
    on_step(t, y, k1);

    double h = opt.initial_step > 0.0 ? opt.initial_step
                                      : std::min(span / 100.0, opt.max_step);
    h = std::min(h, opt.max_step);

    auto step_state = [](const Vec2& base, double hh, const Vec2& s) {
        return Vec2{base[0] + hh * s[0], base[1] + hh * s[1]};
    };

    for (std::size_t n = 0; n < opt.max_steps; ++n) {
        if (std::abs(t - t1) <= 1e-300) break;
        h = std::min(h, std::abs(t1 - t));
        const double hd = dir * h;

        const Vec2 y2 = step_state(y, hd, Vec2{a21 * k1[0], a21 * k1[1]});
        const Vec2 k2 = f(t + c2 * hd, y2);
        const Vec2 y3 = step_state(
            y, hd, Vec2{a31 * k1[0] + a32 * k2[0], a31 * k1[1] + a32 * k2[1]});
        const Vec2 k3 = f(t + c3 * hd, y3);
        const Vec2 y4 =
            step_state(y, hd,
                       Vec2{a41 * k1[0] + a42 * k2[0] + a43 * k3[0],
                            a41 * k1[1] + a42 * k2[1] + a43 * k3[1]});
        const Vec2 k4 = f(t + c4 * hd, y4);
        const Vec2 y5 = step_state(
            y, hd,
            Vec2{a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0],
                 a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1]});
        const Vec2 k5 = f(t + c5 * hd, y5);
        const Vec2 y6 = step_state(
            y, hd,
            Vec2{a61 * k1[0] + a62 * k2[0] + a63 * k3[0] + a64 * k4[0] +
                     a65 * k5[0],
                 a61 * k1[1] + a62 * k2[1] + a63 * k3[1] + a64 * k4[1] +
                     a65 * k5[1]});
        const Vec2 k6 = f(t + hd, y6);
        const Vec2 ynew = step_state(
            y, hd,
            Vec2{b1 * k1[0] + b3 * k3[0] + b4 * k4[0] + b5 * k5[0] + b6 * k6[0],
                 b1 * k1[1] + b3 * k3[1] + b4 * k4[1] + b5 * k5[1] +
                     b6 * k6[1]});
        const Vec2 k7 = f(t + hd, ynew);

        const Vec2 errv{
            hd * (e1 * k1[0] + e3 * k3[0] + e4 * k4[0] + e5 * k5[0] +
                  e6 * k6[0] + e7 * k7[0]),
            hd * (e1 * k1[1] + e3 * k3[1] + e4 * k4[1] + e5 * k5[1] +
                  e6 * k6[1] + e7 * k7[1])};
        const double ymag = std::max(std::max(std::abs(y[0]), std::abs(y[1])),
                                     std::max(std::abs(ynew[0]), std::abs(ynew[1])));
        const double sc = opt.atol + opt.rtol * ymag;
        const double err =
            std::max(std::abs(errv[0]), std::abs(errv[1])) / sc;

        if (err <= 1.0) {
            t += hd;
            y = ynew;
            k1 = k7;  // FSAL
            if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
                throw Overflow("integrate_rk45: state became non-finite");
            const double mag = std::max(std::abs(y[0]), std::abs(y[1]));
            if (mag > opt.rescale_threshold) {
                const double factor = 1.0 / mag;
                y[0] *= factor;
                y[1] *= factor;
                k1[0] *= factor;
                k1[1] *= factor;
                if (on_rescale) on_rescale(factor);
            }
            on_step(t, y, k1);
        }
        const double safety = 0.9;
        double fac = err > 0.0 ? safety * std::pow(err, -0.2) : 5.0;
        fac = std::min(5.0, std::max(0.2, fac));
        h = std::min(h * fac, opt.max_step);
        if (h < 1e-14 * span)
            throw NoConvergence("integrate_rk45: step size underflow");
    }
    if (std::abs(t - t1) > 1e-10 * span)
        throw NoConvergence("integrate_rk45: step budget exhausted");
    return y;
}

/// Cubic Hermite interpolation over a monotone record of accepted steps.
class HermiteCurve {
public:
    explicit HermiteCurve(std::vector<OdeStep> steps = {})
        : steps_(std::move(steps)) {
        ascending_ = steps_.size() < 2 || steps_.back().t >= steps_.front().t;
    }

    bool empty() const { return steps_.size() < 2; }
    const std::vector<OdeStep>& record() const { return steps_; }

    double value(double t) const { return eval(t, false); }
    double deriv(double t) const { return eval(t, true); }

private:
    double eval(double t, bool want_deriv) const {
        if (steps_.empty()) throw Error("HermiteCurve: empty record");
        std::size_t lo = 0, hi = steps_.size() - 1;
        const double tt = ascending_ ? t : -t;
        auto key = [&](std::size_t i) {
            return ascending_ ? steps_[i].t : -steps_[i].t;
        };
        if (tt <= key(0)) hi = 1;
        else if (tt >= key(hi)) lo = hi - 1;
        else {
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                (key(mid) <= tt ? lo : hi) = mid;
            }
        }
        const OdeStep& p = steps_[lo];
        const OdeStep& q = steps_[hi];
        const double h = q.t - p.t;
        const double x = (t - p.t) / h;
        const double f0 = p.y[0], f1 = q.y[0];
        const double d0 = p.dy[0] * h, d1 = q.dy[0] * h;
        if (!want_deriv) {
            const double x2 = x * x, x3 = x2 * x;
            return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * d0 +
                   (-2 * x3 + 3 * x2) * f1 + (x3 - x2) * d1;
        }
        const double x2 = x * x;
        return ((6 * x2 - 6 * x) * f0 + (3 * x2 - 4 * x + 1) * d0 +
                (-6 * x2 + 6 * x) * f1 + (3 * x2 - 2 * x) * d1) /
               h;
    }

    std::vector<OdeStep> steps_;
    bool ascending_ = true;
};

}  // namespace conestab::detail
