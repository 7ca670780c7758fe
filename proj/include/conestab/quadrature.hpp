#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "conestab/detail/gauss.hpp"
#include "conestab/errors.hpp"
#include "conestab/geometry.hpp"

namespace conestab {

/// A radial function together with its derivative(s).  Everything the
/// probes build has analytic derivatives, so missing entries are a caller
/// error, not something to work around numerically.
struct RadialProfileFn {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
};

struct SmoothRadialFn {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::function<double(double)> second_deriv;

    operator RadialProfileFn() const { return {value, deriv}; }
};

enum class MapKind { rational_map, double_exponential };

/// Nodes/weights for the half line: sum_i w_i g(r_i) ~ int_0^inf g(r) dr.
/// rational_map: r = t/(1-t) with Gauss-Legendre nodes in t (default; all
/// integrands here are smooth with algebraic decay, so this converges
/// geometrically).  double_exponential: exp-sinh transform, the fallback
/// for slowly decaying integrands.
struct RadialGrid {
    MapKind map_kind = MapKind::rational_map;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

inline RadialGrid make_radial_grid(std::size_t n = 256,
                                   MapKind kind = MapKind::rational_map) {
    if (n < 8) throw QuadratureFailure("make_radial_grid: grid too small");
    RadialGrid grid;
    grid.map_kind = kind;
    grid.nodes.reserve(n);
    grid.weights.reserve(n);
    if (kind == MapKind::rational_map) {
        const detail::GaussRule rule = detail::gauss_legendre_on(n, 0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rule.nodes[i];
            const double om = 1.0 - t;
            grid.nodes.push_back(t / om);
            grid.weights.push_back(rule.weights[i] / (om * om));
        }
    } else {
        // r = exp((pi/2) sinh(u)), trapezoid in u on a symmetric window.
        const double umax = 4.3;  // r spans ~[1e-127, 1e127]
        const double h = 2.0 * umax / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = -umax + h * static_cast<double>(i);
            const double r = std::exp(0.5 * pi * std::sinh(u));
            grid.nodes.push_back(r);
            grid.weights.push_back(h * 0.5 * pi * std::cosh(u) * r);
        }
    }
    return grid;
}

/// int_0^inf f(r) r^{N-1} dr on a fixed grid.  Deterministic for a fixed
/// grid; admissibility of f is the caller's contract.
template <class F>
inline double integrate_radial(F&& f, int dim, const RadialGrid& grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.nodes[i];
        const double fr = f(r);
        if (fr == 0.0) continue;
        sum += grid.weights[i] * fr * std::pow(r, dim - 1);
    }
    if (!std::isfinite(sum))
        throw QuadratureFailure("integrate_radial: non-finite sum");
    return sum;
}

/// Verification-mode variant: re-runs on a grid of twice the size and
/// demands agreement.
template <class F>
inline double integrate_radial_checked(F&& f, int dim, const RadialGrid& grid,
                                       double rtol = 1e-8) {
    const double coarse = integrate_radial(f, dim, grid);
    const RadialGrid fine = make_radial_grid(2 * grid.size(), grid.map_kind);
    const double refined = integrate_radial(f, dim, fine);
    const double scale = std::max({1e-300, std::abs(coarse), std::abs(refined)});
    if (std::abs(refined - coarse) > rtol * scale)
        throw NonConvergent("integrate_radial_checked: refinements disagree");
    return refined;
}

/// Integral over the cone of a separated function: angular_factor is the
/// precomputed angular integral (|D| for a radial function, 1 for a
/// normalized eigenfunction density).
template <class F>
inline double integrate_cone(F&& radial_part, const ConeDomain& cone,
                             double angular_factor, const RadialGrid& grid) {
    if (angular_factor == 0.0) return 0.0;
    return angular_factor * integrate_radial(radial_part, cone.dim(), grid);
}

/// Gradient inner product of two separated functions sharing the same
/// normalized angular eigenfunction Y_j:
///   int grad(f Y_j) . grad(g Y_j) = int f' g' r^{N-1} + lambda_j int f g r^{N-3}.
/// The formula is symmetric in (f, g) by construction.
inline double grad_inner(const RadialProfileFn& f, const RadialProfileFn& g,
                         int /*j*/, double lambda_j, const ConeDomain& cone,
                         const RadialGrid& grid) {
    const int dim = cone.dim();
    double sum = integrate_radial(
        [&](double r) { return f.deriv(r) * g.deriv(r); }, dim, grid);
    if (lambda_j != 0.0) {
        const double centrifugal = integrate_radial(
            [&](double r) {
                return f.value(r) * g.value(r) / (r * r);
            },
            dim, grid);
        if (!std::isfinite(centrifugal))
            throw NonConvergent("grad_inner: centrifugal term diverges");
        sum += lambda_j * centrifugal;
    }
    return sum;
}

/// Two-grid checked version; throws NonConvergent when the r^{N-3}
/// weighted term does not settle (inadmissible profile for that j).
inline double grad_inner_checked(const RadialProfileFn& f,
                                 const RadialProfileFn& g, int j,
                                 double lambda_j, const ConeDomain& cone,
                                 const RadialGrid& grid, double rtol = 1e-8) {
    const double coarse = grad_inner(f, g, j, lambda_j, cone, grid);
    const RadialGrid fine = make_radial_grid(2 * grid.size(), grid.map_kind);
    const double refined = grad_inner(f, g, j, lambda_j, cone, fine);
    const double scale = std::max({1e-300, std::abs(coarse), std::abs(refined)});
    if (std::abs(refined - coarse) > rtol * scale)
        throw NonConvergent("grad_inner_checked: refinements disagree");
    return refined;
}

}  // namespace conestab
