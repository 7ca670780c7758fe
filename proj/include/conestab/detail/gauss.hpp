#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace conestab::detail {

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1), ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on (-1,1).  Nodes by Newton iteration on
/// P_n with the Tricomi initial guess; converges to machine precision in
/// 3-4 sweeps for any n used here.
inline GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int sweep = 0; sweep < 64; ++sweep) {
            // evaluate P_n(x) and P_n'(x) by the three-term recurrence
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Same rule shifted to a general interval (a,b).
inline GaussRule gauss_legendre_on(std::size_t n, double a, double b) {
    GaussRule rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

}  // namespace conestab::detail
