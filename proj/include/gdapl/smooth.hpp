#pragma once

#include <cmath>
#include <stdexcept>

namespace gdapl {

/// Breakpoints of the transition function phi.
struct BlendSpec {
    static constexpr double plateau_end = 0.5;
    static constexpr double linear_start = 1.0;
    static_assert(plateau_end < linear_start);
};

namespace detail {

// s(u) = 1/u - 1/(1-u); rho(u) = 1 / (1 + e^{s(u)}). Evaluated through e^{-|s|}
// so neither tail overflows.
struct RhoParts {
    double rho;
    double rho_one_minus_rho;  // rho (1 - rho)
};

inline RhoParts rho_parts(double u) noexcept {
    if (u <= 0.0) return {0.0, 0.0};
    if (u >= 1.0) return {1.0, 0.0};
    const double s = 1.0 / u - 1.0 / (1.0 - u);
    const double e = std::exp(-std::abs(s));  // in (0, 1], underflows to 0 cleanly
    const double inv = 1.0 / (1.0 + e);
    const double r = s > 0.0 ? e * inv : inv;
    return {r, e * inv * inv};
}

}  // namespace detail

/// Smooth step e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}), extended by 0 below and 1 above.
inline double rho(double u) noexcept { return detail::rho_parts(u).rho; }

inline double rho_prime(double u) noexcept {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const auto parts = detail::rho_parts(u);
    const double v = 1.0 - u;
    return parts.rho_one_minus_rho * (1.0 / (u * u) + 1.0 / (v * v));
}

/// 1 on [0, 1/2], 2t on [1, inf), 1 + (2t - 1) rho(2t - 1) in between.
inline double phi(double t) {
    if (t < 0.0) throw std::domain_error("phi: negative argument");
    if (t <= BlendSpec::plateau_end) return 1.0;
    if (t >= BlendSpec::linear_start) return 2.0 * t;
    const double u = 2.0 * t - 1.0;
    return 1.0 + u * rho(u);
}

inline double phi_prime(double t) {
    if (t < 0.0) throw std::domain_error("phi_prime: negative argument");
    if (t <= BlendSpec::plateau_end) return 0.0;
    if (t >= BlendSpec::linear_start) return 2.0;
    const double u = 2.0 * t - 1.0;
    return 2.0 * rho(u) + 2.0 * u * rho_prime(u);
}

}  // namespace gdapl
