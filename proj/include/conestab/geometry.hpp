#pragma once

#include <cmath>
#include <optional>
#include <variant>

#include "conestab/errors.hpp"

namespace conestab {

inline constexpr double pi = 3.14159265358979323846;

/// Critical Sobolev exponent 2N/(N-2).
inline double critical_exponent(int dim) { return 2.0 * dim / (dim - 2.0); }

/// Total measure of the unit n-sphere S^n in R^{n+1}.
/// |S^0| = 2 (two points), |S^1| = 2*pi, |S^2| = 4*pi, ...
inline double sphere_measure(int n) {
    return 2.0 * std::pow(pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

/// Measure of the geodesic cap of aperture theta0 on S^{N-1}:
/// |D| = |S^{N-2}| * int_0^{theta0} sin^{N-2}(t) dt.
inline double cap_measure(int dim, double theta0) {
    if (dim < 3) throw DimensionTooSmall("cap_measure: dim must be >= 3");
    if (!(theta0 > 0.0) || !(theta0 < 0.5 * pi + 1e-15))
        throw ApertureOutOfRange("cap_measure: theta0 must lie in (0, pi/2)");
    // Composite Gauss on [0, theta0]; the integrand is entire, 64 panels of
    // 8-point Gauss are far below 1e-14 relative already.
    static const double gx[4] = {0.1834346424956498, 0.5255324099163290,
                                 0.7966664774136267, 0.9602898564975363};
    static const double gw[4] = {0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    const int panels = 64;
    const double h = theta0 / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (int i = 0; i < 4; ++i) {
            sum += gw[i] * std::pow(std::sin(mid + 0.5 * h * gx[i]), dim - 2);
            sum += gw[i] * std::pow(std::sin(mid - 0.5 * h * gx[i]), dim - 2);
        }
    }
    return sphere_measure(dim - 2) * sum * 0.5 * h;
}

/// Abstract angular data for a cone whose cross-section is not a cap: the
/// only quantities any formula here needs are lambda1(D) and |D|.
struct AbstractSpec {
    double lambda1;
    double cap_measure;
};

/// The cone spanned by a domain D on the unit sphere.  Either a geodesic
/// cap (aperture theta0, strictly inside the hemisphere) or an abstract
/// (lambda1, |D|) pair.
class ConeDomain {
public:
    ConeDomain(int dim, double theta0) : dim_(dim), desc_(theta0) {
        if (dim < 3) throw DimensionTooSmall("ConeDomain: dim must be >= 3");
        if (!(theta0 > 0.0) || !(theta0 < 0.5 * pi))
            throw ApertureOutOfRange(
                "ConeDomain: cap aperture must lie strictly in (0, pi/2)");
    }

    ConeDomain(int dim, AbstractSpec spec) : dim_(dim), desc_(spec) {
        if (dim < 3) throw DimensionTooSmall("ConeDomain: dim must be >= 3");
        if (!(spec.lambda1 > 0.0))
            throw Error("ConeDomain: abstract lambda1 must be positive");
        if (!(spec.cap_measure > 0.0))
            throw Error("ConeDomain: abstract cap_measure must be positive");
    }

    int dim() const { return dim_; }
    bool is_cap() const { return std::holds_alternative<double>(desc_); }

    double cap_aperture() const {
        if (!is_cap()) throw Error("ConeDomain: no cap aperture (abstract cone)");
        return std::get<double>(desc_);
    }

    std::optional<AbstractSpec> abstract_spec() const {
        if (is_cap()) return std::nullopt;
        return std::get<AbstractSpec>(desc_);
    }

    /// |D|, the measure of the spherical cross-section.
    double measure() const {
        if (is_cap()) return conestab::cap_measure(dim_, std::get<double>(desc_));
        return std::get<AbstractSpec>(desc_).cap_measure;
    }

private:
    int dim_;
    std::variant<double, AbstractSpec> desc_;
};

inline ConeDomain make_cap_cone(int dim, double theta0) {
    return ConeDomain(dim, theta0);
}

inline ConeDomain make_abstract_cone(int dim, double lambda1, double measure) {
    return ConeDomain(dim, AbstractSpec{lambda1, measure});
}

/// The radial extremal U_s(r) = s * k0 * (1 + (s^{2/(N-2)} r)^2)^{-(N-2)/2}.
/// With k0 chosen by the normalizer, ||grad U_s||_2 = 1 on the cone for
/// every s.
struct Bubble {
    int dim;
    double k0;
    double scale = 1.0;

    Bubble(int dim_, double k0_, double scale_ = 1.0)
        : dim(dim_), k0(k0_), scale(scale_) {
        if (dim < 3) throw DimensionTooSmall("Bubble: dim must be >= 3");
        if (!(k0 > 0.0)) throw Error("Bubble: k0 must be positive");
        if (!(scale > 0.0)) throw Error("Bubble: scale must be positive");
    }

    // spatial dilation factor b = s^{2/(N-2)}
    double spatial_factor() const { return std::pow(scale, 2.0 / (dim - 2)); }

    double value(double r) const {
        const double b = spatial_factor();
        return scale * k0 * std::pow(1.0 + b * b * r * r, -0.5 * (dim - 2));
    }

    double deriv(double r) const {
        const double b = spatial_factor();
        const double q = 1.0 + b * b * r * r;
        return -scale * k0 * (dim - 2) * b * b * r * std::pow(q, -0.5 * dim);
    }

    double second_deriv(double r) const {
        const double b2 = spatial_factor() * spatial_factor();
        const double q = 1.0 + b2 * r * r;
        return -scale * k0 * (dim - 2) * b2 *
               (std::pow(q, -0.5 * dim) -
                dim * b2 * r * r * std::pow(q, -0.5 * dim - 1.0));
    }
};

}  // namespace conestab
