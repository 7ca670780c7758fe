#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "conestab/detail/gauss.hpp"
#include "conestab/detail/ode.hpp"
#include "conestab/errors.hpp"
#include "conestab/geometry.hpp"

namespace conestab {

/// Neumann eigenpair of -Laplace_{S^{N-1}} on a geodesic cap, computed by
/// shooting in the colatitude variable.  The stored profile f satisfies
///   f'' + (N-2) cot(t) f' + (lambda - m(m+N-3)/sin^2 t) f = 0,
/// f ~ t^m at the axis, f'(theta0) = 0, and is normalized so that
/// int_0^theta0 f^2 sin^{N-2} t dt = 1 (i.e. the full eigenfunction
/// f(t) * Z_m has unit L^2(D) norm when Z_m is unit on S^{N-2}).
struct AngularEigen {
    double lambda = 0.0;
    int azimuthal_order = 0;
    int radial_index = 1;  // index k: the profile has k-1 interior zeros
    int dim = 3;
    double theta0 = 0.0;

    double profile(double theta) const { return curve_.value(theta); }
    double profile_deriv(double theta) const { return curve_.deriv(theta); }
    double profile_second_deriv(double theta) const {
        return dcurve_.deriv(theta);
    }

    detail::HermiteCurve curve_;   // (f, f')
    detail::HermiteCurve dcurve_;  // (f', f'')
};

struct CapSolverOptions {
    double eps0 = 1e-6;             // shooting start (regular singular point)
    double lambda_bisect_tol = 1e-10;  // absolute, per design
    double ode_rtol = 1e-12;
    double ode_rtol_counting = 1e-9;  // node counts are integers; cheaper
    double lambda_max = 1e9;
    std::size_t profile_subdiv = 512;  // max step theta0/subdiv for the final solve
};

namespace detail {

struct AngularShot {
    double f_end = 0.0;
    double df_end = 0.0;
    int zeros = 0;
    std::vector<OdeStep> record;
};

inline AngularShot angular_shoot(int dim, double theta0, int m, double lambda,
                                 const CapSolverOptions& opt, bool record,
                                 double max_step = 0.0) {
    const double cm = static_cast<double>(m) * (m + dim - 3);
    auto rhs = [&](double t, const Vec2& y) {
        const double s = std::sin(t);
        const double cot = std::cos(t) / s;
        return Vec2{y[1],
                    -(dim - 2) * cot * y[1] - (lambda - cm / (s * s)) * y[0]};
    };

    OdeOptions oopt;
    oopt.rtol = record ? opt.ode_rtol : opt.ode_rtol_counting;
    oopt.atol = 1e-14;
    const double wavelength_cap = 0.5 / std::sqrt(std::max(lambda, 1.0));
    oopt.max_step = std::min(theta0 / 32.0, wavelength_cap);
    if (max_step > 0.0) oopt.max_step = std::min(oopt.max_step, max_step);
    oopt.rescale_threshold = 1e50;

    AngularShot out;
    double prev_f = 0.0;
    bool have_prev = false;
    auto on_step = [&](double t, const Vec2& y, const Vec2& dy) {
        if (record) out.record.push_back({t, y, dy});
        if (have_prev && prev_f * y[0] < 0.0) ++out.zeros;
        if (y[0] != 0.0) {
            prev_f = y[0];
            have_prev = true;
        }
    };
    std::function<void(double)> on_rescale;
    if (record) {
        on_rescale = [&](double factor) {
            for (auto& s : out.record) {
                s.y[0] *= factor;
                s.y[1] *= factor;
                s.dy[0] *= factor;
                s.dy[1] *= factor;
            }
        };
    }

    const double f0 = std::pow(opt.eps0, m);
    const double df0 = (m == 0) ? 0.0 : m * std::pow(opt.eps0, m - 1);
    const Vec2 yend = integrate_rk45(rhs, opt.eps0, theta0, Vec2{f0, df0},
                                     oopt, on_step, on_rescale);
    out.f_end = yend[0];
    out.df_end = yend[1];
    return out;
}

// Smallest lambda at which the shooting solution acquires its j-th
// interior zero (a Dirichlet-type threshold).  Returns a tight bracket.
inline std::pair<double, double> zero_count_jump(int dim, double theta0, int m,
                                                 int j,
                                                 const CapSolverOptions& opt) {
    auto count = [&](double lam) {
        return angular_shoot(dim, theta0, m, lam, opt, false).zeros;
    };
    double lo = 0.0;
    double hi = std::max(4.0 * (dim - 1.0),
                         std::pow((j + 1) * pi / theta0, 2.0));
    while (count(hi) < j) {
        lo = hi;
        hi *= 2.0;
        if (hi > opt.lambda_max)
            throw NoConvergence(
                "cap_eigenvalue: no bracket below lambda_max; enlarge it");
    }
    while (hi - lo > std::max(1e-11, 1e-9 * hi)) {
        const double mid = 0.5 * (lo + hi);
        (count(mid) >= j ? hi : lo) = mid;
    }
    return {lo, hi};
}

}  // namespace detail

/// Eigenvalue rank `index` (1-based) of the cap Neumann problem for
/// azimuthal order m.  The index-k profile has k-1 interior zeros; for
/// m = 0 the k = 1 slot is the constant eigenfunction (lambda = 0), which
/// is excluded from the search.
inline AngularEigen cap_eigenvalue(int dim, double theta0, int m, int index,
                                   const CapSolverOptions& opt = {}) {
    if (dim < 3) throw DimensionTooSmall("cap_eigenvalue: dim must be >= 3");
    if (!(theta0 > 0.0) || !(theta0 <= 0.5 * pi))
        throw ApertureOutOfRange("cap_eigenvalue: theta0 must lie in (0, pi/2]");
    if (m < 0 || index < 1)
        throw Error("cap_eigenvalue: need m >= 0 and index >= 1");
    if (m == 0 && index == 1)
        throw NoConvergence(
            "cap_eigenvalue: m=0 index=1 is the constant eigenfunction "
            "(lambda = 0), excluded; the first nonconstant axisymmetric mode "
            "is index = 2");

    const int target = index - 1;  // interior zeros of the eigenfunction
    auto shoot = [&](double lam) {
        return detail::angular_shoot(dim, theta0, m, lam, opt, false);
    };

    double lo, hi;
    if (target >= 1) {
        lo = detail::zero_count_jump(dim, theta0, m, target, opt).second;
    } else {
        lo = std::max(1e-8, 1e-10 * (dim - 1.0));
    }
    hi = detail::zero_count_jump(dim, theta0, m, target + 1, opt).first;

    detail::AngularShot a = shoot(lo);
    detail::AngularShot b = shoot(hi);
    if (a.zeros != target || b.zeros != target || a.df_end * b.df_end > 0.0) {
        // Tight thresholds should make this unreachable; fall back to a scan.
        bool found = false;
        const int n = 128;
        double prev_lam = lo;
        double prev_g = a.df_end;
        for (int i = 1; i <= n; ++i) {
            const double lam = lo + (hi - lo) * i / n;
            const detail::AngularShot s = shoot(lam);
            if (s.zeros == target && prev_g * s.df_end < 0.0) {
                lo = prev_lam;
                hi = lam;
                found = true;
                break;
            }
            prev_lam = lam;
            prev_g = s.df_end;
        }
        if (!found)
            throw NoConvergence("cap_eigenvalue: Neumann bracket not found");
    }

    double glo = shoot(lo).df_end;
    while (hi - lo > opt.lambda_bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        const double gmid = shoot(mid).df_end;
        if (glo * gmid <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gmid;
        }
    }
    const double lambda = 0.5 * (lo + hi);

    // final pass on a fine mesh for interpolation-quality output
    CapSolverOptions fine = opt;
    detail::AngularShot sol = detail::angular_shoot(
        dim, theta0, m, lambda, fine, true,
        theta0 / static_cast<double>(opt.profile_subdiv));
    if (sol.zeros != target)
        throw NoConvergence("cap_eigenvalue: node count mismatch at solution");

    AngularEigen eig;
    eig.lambda = lambda;
    eig.azimuthal_order = m;
    eig.radial_index = index;
    eig.dim = dim;
    eig.theta0 = theta0;
    eig.curve_ = detail::HermiteCurve(sol.record);

    // normalize: int_0^theta0 f^2 sin^{N-2} = 1
    const detail::GaussRule rule =
        detail::gauss_legendre_on(512, opt.eps0, theta0);
    double nrm = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double th = rule.nodes[i];
        const double f = eig.curve_.value(th);
        nrm += rule.weights[i] * f * f * std::pow(std::sin(th), dim - 2);
    }
    const double scale = 1.0 / std::sqrt(nrm);
    std::vector<detail::OdeStep> scaled = sol.record;
    std::vector<detail::OdeStep> dsteps = sol.record;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        for (int c = 0; c < 2; ++c) {
            scaled[i].y[c] *= scale;
            scaled[i].dy[c] *= scale;
        }
        dsteps[i].y = {scaled[i].y[1], 0.0};
        dsteps[i].dy = {scaled[i].dy[1], 0.0};
        dsteps[i].t = scaled[i].t;
    }
    eig.curve_ = detail::HermiteCurve(std::move(scaled));
    eig.dcurve_ = detail::HermiteCurve(std::move(dsteps));
    return eig;
}

/// First nontrivial Neumann eigenvalue lambda_1(D).  For caps this is the
/// minimum of the first nonconstant axisymmetric mode (m=0, index 2) and
/// the first m=1 mode; higher m are dominated by the centrifugal term
/// m(m+N-3)/sin^2 and never attain the minimum (validated separately by
/// lambda1_scan).
inline double lambda1(const ConeDomain& cone, const CapSolverOptions& opt = {}) {
    if (auto spec = cone.abstract_spec()) return spec->lambda1;
    const double axi =
        cap_eigenvalue(cone.dim(), cone.cap_aperture(), 0, 2, opt).lambda;
    const double m1 =
        cap_eigenvalue(cone.dim(), cone.cap_aperture(), 1, 1, opt).lambda;
    return std::min(axi, m1);
}

/// Debug helper: search m <= max_m explicitly instead of trusting the
/// centrifugal-monotonicity argument.
inline double lambda1_scan(const ConeDomain& cone, int max_m,
                           const CapSolverOptions& opt = {}) {
    if (auto spec = cone.abstract_spec()) return spec->lambda1;
    double best =
        cap_eigenvalue(cone.dim(), cone.cap_aperture(), 0, 2, opt).lambda;
    for (int m = 1; m <= max_m; ++m) {
        best = std::min(
            best, cap_eigenvalue(cone.dim(), cone.cap_aperture(), m, 1, opt).lambda);
    }
    return best;
}

/// The AngularEigen carrying lambda1's minimizing mode (needed when the
/// eigenfunction itself enters an integral).
inline AngularEigen lambda1_eigen(const ConeDomain& cone,
                                  const CapSolverOptions& opt = {}) {
    if (!cone.is_cap())
        throw MissingAngularProfile(
            "lambda1_eigen: abstract cones carry no angular eigenfunction");
    AngularEigen axi = cap_eigenvalue(cone.dim(), cone.cap_aperture(), 0, 2, opt);
    AngularEigen m1 = cap_eigenvalue(cone.dim(), cone.cap_aperture(), 1, 1, opt);
    return (axi.lambda < m1.lambda) ? axi : m1;
}

}  // namespace conestab
