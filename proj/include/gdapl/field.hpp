#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gdapl/params.hpp"
#include "gdapl/smooth.hpp"

namespace gdapl {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point p, Point q) noexcept { return {p.x + q.x, p.y + q.y}; }
    friend constexpr Point operator-(Point p, Point q) noexcept { return {p.x - q.x, p.y - q.y}; }
    friend constexpr Point operator-(Point p) noexcept { return {-p.x, -p.y}; }
    friend constexpr Point operator*(double s, Point p) noexcept { return {s * p.x, s * p.y}; }
    friend constexpr bool operator==(Point, Point) = default;
};

inline constexpr double dot(Point p, Point q) noexcept { return p.x * q.x + p.y * q.y; }
inline constexpr double cross(Point p, Point q) noexcept { return p.x * q.y - p.y * q.x; }
inline double norm(Point p) noexcept { return std::hypot(p.x, p.y); }

/// Row-major 2x2 matrix.
struct Mat2 {
    double m11 = 0.0, m12 = 0.0;
    double m21 = 0.0, m22 = 0.0;

    constexpr double trace() const noexcept { return m11 + m22; }
    constexpr double det() const noexcept { return m11 * m22 - m12 * m21; }
    constexpr Mat2 transposed() const noexcept { return {m11, m21, m12, m22}; }
    constexpr Point operator*(Point p) const noexcept {
        return {m11 * p.x + m12 * p.y, m21 * p.x + m22 * p.y};
    }
};

/// (l1, l2) = (x - gamma y, y + gamma x); X is the union of the two axes.
struct DiagCoords {
    double l1;
    double l2;
};

/// (hu, hv) diagonalize the linear field w: hu' = mu hu, hv' = -mu hv.
struct HyperCoords {
    double hu;
    double hv;
};

enum class Quadrant { PP, PM, MP, MM, OnL1Axis, OnL2Axis, Origin };

/// XPlus is the line x = gamma y (l1 = 0), XMinus the line y = -gamma x (l2 = 0).
enum class XBranch { XPlus, XMinus };

inline std::string_view to_string(XBranch b) noexcept {
    return b == XBranch::XPlus ? "XPlus" : "XMinus";
}

inline std::string_view to_string(Quadrant q) noexcept {
    switch (q) {
        case Quadrant::PP: return "PP";
        case Quadrant::PM: return "PM";
        case Quadrant::MP: return "MP";
        case Quadrant::MM: return "MM";
        case Quadrant::OnL1Axis: return "OnL1Axis";
        case Quadrant::OnL2Axis: return "OnL2Axis";
        case Quadrant::Origin: return "Origin";
    }
    return "?";
}

// The two quadratic forms fed to phi.
inline double form_plus(Point p, const ModelParams& mp) noexcept {
    return p.x * p.x + mp.a * p.x * p.y + mp.b * p.y * p.y;
}
inline double form_minus(Point p, const ModelParams& mp) noexcept {
    return p.y * p.y - mp.a * p.x * p.y + mp.b * p.x * p.x;
}

/// Symmetric matrices of form_plus and form_minus.
inline Mat2 form_matrix_plus(const ModelParams& mp) noexcept {
    return {1.0, 0.5 * mp.a, 0.5 * mp.a, mp.b};
}
inline Mat2 form_matrix_minus(const ModelParams& mp) noexcept {
    return {mp.b, -0.5 * mp.a, -0.5 * mp.a, 1.0};
}

/// The vector field whose flow lines are the level lines of f.
inline Point field_v(Point p, const ModelParams& mp) {
    return {(mp.gamma * p.y - p.x) * phi(form_plus(p, mp)),
            (p.y + mp.gamma * p.x) * phi(form_minus(p, mp))};
}

/// Cubic closed form of field_v, valid where both forms are >= 1.
inline Point field_v_outside_closed_form_unchecked(Point p) noexcept {
    const double x = p.x, y = p.y;
    const double x2 = x * x, y2 = y * y;
    return {2.0 * (-x2 * x - x2 * y - x * y2 + y2 * y / 3.0),
            2.0 * (y2 * y - x * y2 + x2 * y + x2 * x / 3.0)};
}

inline Point field_v_outside_closed_form(Point p, const ModelParams& mp) {
    if (form_plus(p, mp) < 1.0 || form_minus(p, mp) < 1.0)
        throw std::domain_error("field_v_outside_closed_form: a quadratic form is below 1");
    return field_v_outside_closed_form_unchecked(p);
}

/// Linearization of field_v at the origin; equal to it while both forms are <= 1/2.
inline Point field_w(Point p, const ModelParams& mp) noexcept {
    return {mp.gamma * p.y - p.x, p.y + mp.gamma * p.x};
}

/// Analytic Jacobian of field_v.
inline Mat2 jacobian_v(Point p, const ModelParams& mp) {
    const double x = p.x, y = p.y;
    const double q1 = form_plus(p, mp), q2 = form_minus(p, mp);
    const double f1 = phi(q1), d1 = phi_prime(q1);
    const double f2 = phi(q2), d2 = phi_prime(q2);
    const double s1 = mp.gamma * y - x;
    const double s2 = y + mp.gamma * x;
    return {-f1 + s1 * d1 * (2.0 * x + mp.a * y),
            mp.gamma * f1 + s1 * d1 * (mp.a * x + 2.0 * mp.b * y),
            mp.gamma * f2 + s2 * d2 * (2.0 * mp.b * x - mp.a * y),
            f2 + s2 * d2 * (2.0 * y - mp.a * x)};
}

inline DiagCoords diag_coords(Point p, const ModelParams& mp) noexcept {
    return {p.x - mp.gamma * p.y, p.y + mp.gamma * p.x};
}

inline HyperCoords hyper_coords(Point p, const ModelParams& mp) noexcept {
    return {mp.gamma * p.x + (1.0 + mp.mu) * p.y, mp.gamma * p.x + (1.0 - mp.mu) * p.y};
}

inline constexpr double default_axis_tol = 1e-12;

/// Sign pattern of (l1, l2). Coordinates within tol (1 + |p|) of zero count as
/// lying on the corresponding axis.
inline Quadrant quadrant(Point p, const ModelParams& mp, double tol = default_axis_tol) noexcept {
    const auto [l1, l2] = diag_coords(p, mp);
    const double band = tol * (1.0 + norm(p));
    const bool on1 = std::abs(l1) <= band;
    const bool on2 = std::abs(l2) <= band;
    if (on1 && on2) return Quadrant::Origin;
    if (on1) return Quadrant::OnL1Axis;
    if (on2) return Quadrant::OnL2Axis;
    if (l1 > 0.0) return l2 > 0.0 ? Quadrant::PP : Quadrant::PM;
    return l2 > 0.0 ? Quadrant::MP : Quadrant::MM;
}

inline void require_on_branch(Point p, XBranch branch, const ModelParams& mp, double tol,
                              const char* who) {
    const auto [l1, l2] = diag_coords(p, mp);
    const double off = branch == XBranch::XPlus ? l1 : l2;
    if (std::abs(off) > tol * (1.0 + norm(p)))
        throw std::domain_error(std::string(who) + ": point is not on branch " +
                                std::string(to_string(branch)));
}

/// Prescribed value of f on X: (gamma^3 + gamma)/2 y^2 on XPlus,
/// -(gamma^3 + gamma)/2 x^2 on XMinus.
inline double x_value_of_f(Point p, XBranch branch, const ModelParams& mp,
                           double tol = 1e-9) {
    require_on_branch(p, branch, mp, tol, "x_value_of_f");
    const double c = 0.5 * (mp.gamma * mp.gamma * mp.gamma + mp.gamma);
    return branch == XBranch::XPlus ? c * p.y * p.y : -c * p.x * p.x;
}

}  // namespace gdapl
