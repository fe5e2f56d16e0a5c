#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace gdapl {

/// The cubic T^3 + T^2 + T - 1/3 whose real root fixes every other constant.
inline constexpr double cubic_p(double t) noexcept {
    return ((t + 1.0) * t + 1.0) * t - 1.0 / 3.0;
}

inline constexpr double cubic_p_prime(double t) noexcept {
    return (3.0 * t + 2.0) * t + 1.0;
}

/// Scalar constants of the construction. Immutable once built.
///
/// The quadratic forms x^2 + a x y + b y^2 and b x^2 - a x y + y^2 share the
/// spectrum {lambda_min, lambda_max}. Radii derived from it:
///   r_phi_half : both forms <= 1/2 on the closed ball (field is linear there)
///   R_outer    : both forms >= 1 outside the ball (field is the cubic closed form)
/// r_core is filled in by the objective module's calibration; compute_params()
/// leaves it at zero.
struct ModelParams {
    double gamma = 0.0;
    double a = 0.0;
    double b = 0.0;
    double mu = 0.0;
    double kappa = 0.0;
    double alpha = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double r_phi_half = 0.0;
    double R_outer = 0.0;
    double r_core = 0.0;
    double R_domain = 2.0;
};

/// Real root of cubic_p from Cardano's closed form, without polishing.
inline double gamma_cardano() {
    const double s = 6.0 * std::numbers::sqrt2;
    return (std::cbrt(s + 8.0) - std::cbrt(s - 8.0) - 1.0) / 3.0;
}

inline ModelParams compute_params() {
    ModelParams p;
    double g = gamma_cardano();
    g -= cubic_p(g) / cubic_p_prime(g);  // one Newton step removes cbrt rounding
    p.gamma = g;
    p.a = g + 1.0;
    p.b = (g + 1.0) * g + 1.0;
    p.mu = std::sqrt(1.0 + g * g);
    p.kappa = (p.mu + 1.0) / (p.mu - 1.0);
    p.alpha = std::numbers::sqrt2 - 1.0;

    // eigenvalues of [[1, a/2], [a/2, b]]
    const double half_trace = 0.5 * (1.0 + p.b);
    const double disc = std::hypot(0.5 * (1.0 - p.b), 0.5 * p.a);
    p.lambda_max = half_trace + disc;
    // product form avoids cancellation in the smaller root
    p.lambda_min = (p.b - 0.25 * p.a * p.a) / p.lambda_max;

    p.r_phi_half = std::sqrt(0.5 / p.lambda_max);
    p.R_outer = std::sqrt(1.0 / p.lambda_min);
    return p;
}

/// g(x, y) = 3x^4 + 4x^3 y + 6x^2 y^2 - 4x y^3 + 3y^4, the quantity conserved by
/// the GDA flow wherever the field has its cubic closed form.
inline double quartic_invariant(double x, double y) noexcept {
    const double x2 = x * x, y2 = y * y;
    return 3.0 * x2 * x2 + 4.0 * x2 * x * y + 6.0 * x2 * y2 - 4.0 * x * y2 * y + 3.0 * y2 * y2;
}

/// |x + alpha y|^4 + |y - alpha x|^4, equal to 2 alpha^2 g(x, y).
inline double rotated_l4(double x, double y, const ModelParams& p) noexcept {
    const double u = x + p.alpha * y;
    const double w = y - p.alpha * x;
    return u * u * u * u + w * w * w * w;
}

struct LevelBounds {
    double rmin;
    double rmax;
};

/// Euclidean radius range of the closed curve {g = level}.
///
/// After the rotation (x, y) -> (x + alpha y, y - alpha x), which scales norms
/// by sqrt(1 + alpha^2), the curve is an L4 sphere u^4 + w^4 = 2 alpha^2 level,
/// whose squared Euclidean radius ranges over [sqrt(S), sqrt(2 S)].
inline LevelBounds quartic_level_bounds(double level, const ModelParams& p) {
    if (!(level > 0.0)) throw std::invalid_argument("quartic_level_bounds: level must be positive");
    const double s = 2.0 * p.alpha * p.alpha * level;
    const double scale = 1.0 + p.alpha * p.alpha;
    return {std::sqrt(std::sqrt(s) / scale), std::sqrt(std::sqrt(2.0 * s) / scale)};
}

}  // namespace gdapl
