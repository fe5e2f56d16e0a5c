#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "gdapl/field.hpp"
#include "gdapl/flow.hpp"
#include "gdapl/gda.hpp"
#include "gdapl/objective.hpp"
#include "gdapl/parallel.hpp"
#include "gdapl/params.hpp"

namespace gdapl {

// ---------------------------------------------------------------------------
// One-dimensional PL criterion

struct ScalarOracle {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
};

struct CriticalPoint {
    double x;
    double second_derivative;
};

struct PL1DReport {
    bool criterion_holds = true;
    std::vector<CriticalPoint> critical_points;
    double estimated_C = 0.0;
    double worst_ratio_location = std::numeric_limits<double>::quiet_NaN();
};

struct PLFloors {
    double numerator = 1e-12;
    double denominator = 1e-16;
};

/// Grid test of "f' = 0 implies f'' > 0", plus the grid estimate of the PL
/// constant max (f - min f) / f'^2.
inline PL1DReport pl_check_1d(const ScalarOracle& fn, double lo, double hi, int grid_n,
                              PLFloors floors = {}, double curvature_tol = 1e-10) {
    if (grid_n < 3) throw std::invalid_argument("pl_check_1d: grid_n must be >= 3");
    if (!(hi > lo)) throw std::invalid_argument("pl_check_1d: empty interval");
    std::vector<double> xs(grid_n), fs(grid_n), ds(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        xs[i] = lo + (hi - lo) * i / (grid_n - 1);
        fs[i] = fn.f(xs[i]);
        ds[i] = fn.df(xs[i]);
    }
    PL1DReport rep;
    auto add_critical = [&](double x) {
        rep.critical_points.push_back({x, fn.d2f(x)});
    };
    for (int i = 0; i < grid_n; ++i) {
        if (ds[i] == 0.0) {
            add_critical(xs[i]);
            continue;
        }
        if (i + 1 < grid_n && ds[i + 1] != 0.0 && std::signbit(ds[i]) != std::signbit(ds[i + 1])) {
            double a = xs[i], b = xs[i + 1], da = ds[i];
            for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                const double m = 0.5 * (a + b);
                const double dm = fn.df(m);
                if (dm == 0.0) {
                    a = b = m;
                    break;
                }
                if (std::signbit(dm) == std::signbit(da)) a = m;
                else b = m;
            }
            add_critical(0.5 * (a + b));
        }
    }
    for (const auto& c : rep.critical_points)
        if (!(c.second_derivative > curvature_tol)) rep.criterion_holds = false;

    const double fmin = *std::min_element(fs.begin(), fs.end());
    for (int i = 0; i < grid_n; ++i) {
        const double num = fs[i] - fmin;
        const double den = ds[i] * ds[i];
        double ratio;
        if (den < floors.denominator) {
            if (num < floors.numerator) continue;
            ratio = std::numeric_limits<double>::infinity();
        } else {
            ratio = num / den;
        }
        if (ratio > rep.estimated_C || std::isnan(rep.worst_ratio_location)) {
            rep.estimated_C = std::max(rep.estimated_C, ratio);
            rep.worst_ratio_location = xs[i];
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Two-sided PL on a grid

struct PLViolation {
    Point p;
    double ratio;
    char side;  // 'x': f - min_x f vs (df/dx)^2, 'y': max_y f - f vs (df/dy)^2
};

struct CurvatureSample {
    Point p;
    double second_derivative;
};

struct PLReport {
    int grid_n = 0;
    double half_width = 0.0;
    Point center;
    double C_x = 0.0;
    double C_y = 0.0;
    Point argmax_x, argmax_y;
    std::vector<PLViolation> violations;
    std::size_t excluded_x = 0;
    std::size_t excluded_y = 0;
    std::size_t failures = 0;
    /// Largest second difference of f across a row (column) minimum (maximum);
    /// grid extrema miss the continuous ones by at most about this amount.
    double row_min_modulus = 0.0;
    double col_max_modulus = 0.0;
    double min_grad_norm = std::numeric_limits<double>::infinity();  // over |p| >= grad_exclusion
    double grad_exclusion = 0.05;
    std::vector<CurvatureSample> dxx_on_XMinus;
    std::vector<CurvatureSample> dyy_on_XPlus;
    double min_dxx_on_XMinus = std::numeric_limits<double>::quiet_NaN();
    double max_dyy_on_XPlus = std::numeric_limits<double>::quiet_NaN();

    std::size_t excluded() const noexcept { return excluded_x + excluded_y; }
    double C() const noexcept { return std::max(C_x, C_y); }
    bool certified() const noexcept {
        return violations.empty() && std::isfinite(C_x) && std::isfinite(C_y);
    }
};

struct GridSample {
    double value = std::numeric_limits<double>::quiet_NaN();
    Point grad{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    bool ok = false;
};

/// Grid extrema are used in place of the continuous inf/sup. Points where both
/// sides of an inequality fall below the floors are excluded as 0/0.
template <class Fn>
PLReport two_sided_pl_on_grid(Fn&& value_and_grad, int grid_n, double half_width,
                              Point center = {}, PLFloors floors = {}) {
    if (grid_n < 2) throw std::invalid_argument("two_sided_pl_on_grid: grid_n must be >= 2");
    const std::size_t n = static_cast<std::size_t>(grid_n);
    std::vector<GridSample> samples(n * n);
    auto coord = [&](std::size_t i) { return -half_width + 2.0 * half_width * i / (n - 1); };
    auto at = [&](std::size_t ix, std::size_t iy) -> GridSample& { return samples[iy * n + ix]; };

    detail::parallel_for(n * n, [&](std::size_t k) {
        const Point p{center.x + coord(k % n), center.y + coord(k / n)};
        try {
            samples[k] = value_and_grad(p);
            samples[k].ok = std::isfinite(samples[k].value);
        } catch (const std::exception&) {
            samples[k].ok = false;
        }
    });

    PLReport rep;
    rep.grid_n = grid_n;
    rep.half_width = half_width;
    rep.center = center;
    for (const auto& s : samples)
        if (!s.ok) ++rep.failures;
    if (rep.failures * 100 > samples.size())
        throw std::runtime_error("two_sided_pl_on_grid: more than 1% of grid evaluations failed");

    for (std::size_t iy = 0; iy < n; ++iy)
        for (std::size_t ix = 0; ix < n; ++ix) {
            const auto& s = at(ix, iy);
            const Point p{center.x + coord(ix), center.y + coord(iy)};
            if (s.ok && norm(p) >= rep.grad_exclusion)
                rep.min_grad_norm = std::min(rep.min_grad_norm, norm(s.grad));
        }

    auto scan = [&](bool rows) {
        double& C = rows ? rep.C_x : rep.C_y;
        Point& arg = rows ? rep.argmax_x : rep.argmax_y;
        std::size_t& excl = rows ? rep.excluded_x : rep.excluded_y;
        double& modulus = rows ? rep.row_min_modulus : rep.col_max_modulus;
        for (std::size_t line = 0; line < n; ++line) {
            auto get = [&](std::size_t k) -> const GridSample& {
                return rows ? at(k, line) : at(line, k);
            };
            // rows: f(., y) is minimized; columns: f(x, .) is maximized
            const double sgn = rows ? 1.0 : -1.0;
            double best = std::numeric_limits<double>::infinity();
            std::size_t kbest = 0;
            for (std::size_t k = 0; k < n; ++k)
                if (get(k).ok && sgn * get(k).value < best) {
                    best = sgn * get(k).value;
                    kbest = k;
                }
            if (!std::isfinite(best)) continue;
            if (kbest > 0 && kbest + 1 < n && get(kbest - 1).ok && get(kbest + 1).ok)
                modulus = std::max(modulus, std::abs(get(kbest - 1).value - 2.0 * get(kbest).value +
                                                     get(kbest + 1).value));
            for (std::size_t k = 0; k < n; ++k) {
                const auto& s = get(k);
                if (!s.ok) continue;
                const double num = sgn * s.value - best;
                const double d = rows ? s.grad.x : s.grad.y;
                const double den = d * d;
                const Point p = rows ? Point{center.x + coord(k), center.y + coord(line)}
                                     : Point{center.x + coord(line), center.y + coord(k)};
                if (den < floors.denominator) {
                    if (num < floors.numerator) {
                        ++excl;
                        continue;
                    }
                    rep.violations.push_back({p, std::numeric_limits<double>::infinity(), rows ? 'x' : 'y'});
                    continue;
                }
                const double ratio = num / den;
                if (!std::isfinite(ratio)) {
                    rep.violations.push_back({p, ratio, rows ? 'x' : 'y'});
                    continue;
                }
                if (ratio > C) {
                    C = ratio;
                    arg = p;
                }
            }
        }
    };
    scan(true);
    scan(false);
    return rep;
}

/// Central second differences of f across X: d2f/dx2 on XMinus (expected > 0)
/// and d2f/dy2 on XPlus (expected < 0), at `per_branch` points of each line
/// inside the square, symmetric about the origin.
inline void curvature_checks_on_X(const Objective& obj, PLReport& rep, double half_width,
                                  int per_branch = 20, double h = 1e-4) {
    const auto& mp = obj.params();
    rep.dxx_on_XMinus.clear();
    rep.dyy_on_XPlus.clear();
    const int half = per_branch / 2;
    for (int k = 1; k <= half; ++k)
        for (int s : {-1, 1}) {
            const double t = s * half_width * k / half;
            // XMinus parametrized by x, XPlus by y; both stay inside the square since gamma < 1
            const Point pm{t, -mp.gamma * t};
            const double dxx =
                (obj.value({pm.x + h, pm.y}) - 2.0 * obj.value(pm) + obj.value({pm.x - h, pm.y})) / (h * h);
            rep.dxx_on_XMinus.push_back({pm, dxx});
            const Point pp{mp.gamma * t, t};
            const double dyy =
                (obj.value({pp.x, pp.y + h}) - 2.0 * obj.value(pp) + obj.value({pp.x, pp.y - h})) / (h * h);
            rep.dyy_on_XPlus.push_back({pp, dyy});
        }
    rep.min_dxx_on_XMinus = std::numeric_limits<double>::infinity();
    rep.max_dyy_on_XPlus = -std::numeric_limits<double>::infinity();
    for (const auto& c : rep.dxx_on_XMinus) rep.min_dxx_on_XMinus = std::min(rep.min_dxx_on_XMinus, c.second_derivative);
    for (const auto& c : rep.dyy_on_XPlus) rep.max_dyy_on_XPlus = std::max(rep.max_dyy_on_XPlus, c.second_derivative);
}

/// Two-sided PL certificate for f on the square of the given half-width, with
/// gradients from adjoint transport and the curvature checks on X.
inline PLReport two_sided_pl_grid(const Objective& obj, int grid_n, double half_width,
                                  PLFloors floors = {}, int curvature_points = 20) {
    if (!(half_width > 0.0 && half_width <= obj.params().R_domain))
        throw std::invalid_argument("two_sided_pl_grid: half_width must lie in (0, R_domain]");
    PLReport rep = two_sided_pl_on_grid(
        [&obj](Point p) {
            const auto vg = obj.evaluate(p);
            return GridSample{vg.value, vg.gradient.grad, true};
        },
        grid_n, half_width, {}, floors);
    if (curvature_points > 0) curvature_checks_on_X(obj, rep, half_width, curvature_points);
    return rep;
}

// ---------------------------------------------------------------------------
// Linear stability at the origin

struct SpectrumReport {
    Mat2 jacobian;
    std::complex<double> eig1, eig2;
    double max_real_part = 0.0;
    Mat2 symmetric_part;
};

inline std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m) {
    const double ht = 0.5 * m.trace();
    const std::complex<double> disc = std::sqrt(std::complex<double>(ht * ht - m.det(), 0.0));
    return {ht + disc, ht - disc};
}

/// Jacobian of the GDA field at the origin, built from the Hessian of the local
/// quadratic form: [[-fxx, -fxy], [fxy, fyy]] = [[-gamma, -1], [1, -gamma]].
inline SpectrumReport origin_spectrum(const ModelParams& mp) {
    const double fxx = mp.gamma, fxy = 1.0, fyy = -mp.gamma;
    SpectrumReport rep;
    rep.jacobian = {-fxx, -fxy, fxy, fyy};
    std::tie(rep.eig1, rep.eig2) = eigenvalues(rep.jacobian);
    rep.max_real_part = std::max(rep.eig1.real(), rep.eig2.real());
    const Mat2& j = rep.jacobian;
    rep.symmetric_part = {j.m11, 0.5 * (j.m12 + j.m21), 0.5 * (j.m12 + j.m21), j.m22};
    return rep;
}

// ---------------------------------------------------------------------------
// Identity suite

struct IdentityResult {
    std::string name;
    double max_rel_err = 0.0;
    double threshold = 0.0;
    int samples = 0;
    bool pass = false;
};

struct IdentityReport {
    std::vector<IdentityResult> identities;
    bool all_pass() const noexcept {
        return std::all_of(identities.begin(), identities.end(), [](const auto& r) { return r.pass; });
    }
};

inline constexpr double algebraic_threshold = 1e-10;
inline constexpr double ode_threshold = 1e-6;

/// Random point with both quadratic forms >= 1 (radius in [R_outer, 3]).
template <class Rng>
Point sample_outside(Rng& rng, const ModelParams& mp) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> rad(mp.R_outer, 3.0);
    const double th = ang(rng), r = rad(rng);
    return {r * std::cos(th), r * std::sin(th)};
}

inline IdentityReport identity_suite(const Objective& obj, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("identity_suite: n_samples must be >= 1");
    const auto& mp = obj.params();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    IdentityReport rep;
    auto finish = [&](std::string name, double err, double thr) {
        rep.identities.push_back({std::move(name), err, thr, n_samples, err <= thr});
    };

    {  // P(T) = (T - gamma)(T^2 + a T + b)
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double t = 3.0 * unit(rng);
            const double lhs = cubic_p(t);
            const double rhs = (t - mp.gamma) * (t * t + mp.a * t + mp.b);
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(t * t * t)));
        }
        finish("cubic_factorization", worst, algebraic_threshold);
    }
    {  // field_v equals the cubic closed form where both forms are >= 1
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const Point p = sample_outside(rng, mp);
            const Point cf = field_v_outside_closed_form(p, mp);
            worst = std::max(worst, norm(field_v(p, mp) - cf) / norm(cf));
        }
        finish("v_outside_closed_form", worst, algebraic_threshold);
    }
    {  // hu hv = 2 gamma q, scaled by |p|^2 since q changes sign
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const Point p{2.0 * unit(rng), 2.0 * unit(rng)};
            const auto [hu, hv] = hyper_coords(p, mp);
            const double rhs = 2.0 * mp.gamma * quad_saddle(p, mp);
            worst = std::max(worst, std::abs(hu * hv - rhs) / std::max(std::abs(rhs), dot(p, p)));
        }
        finish("hyper_product", worst, algebraic_threshold);
    }
    {  // |x + alpha y|^4 + |y - alpha x|^4 = 2 alpha^2 g
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const Point p{2.0 * unit(rng), 2.0 * unit(rng)};
            const double rhs = 2.0 * mp.alpha * mp.alpha * quartic_invariant(p);
            worst = std::max(worst, std::abs(rotated_l4(p.x, p.y, mp) - rhs) / rhs);
        }
        finish("rotated_l4", worst, algebraic_threshold);
    }
    {  // grad g = 6 (-v1, v2) where v has the cubic closed form
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const Point p = sample_outside(rng, mp);
            const double x = p.x, y = p.y;
            const Point gg{12 * x * x * x + 12 * x * x * y + 12 * x * y * y - 4 * y * y * y,
                           4 * x * x * x + 12 * x * x * y - 12 * x * y * y + 12 * y * y * y};
            const Point v = field_v(p, mp);
            worst = std::max(worst, norm(gg - Point{-6.0 * v.x, 6.0 * v.y}) / norm(gg));
        }
        finish("gradient_twist", worst, algebraic_threshold);
    }
    {  // hu hv is constant along the flow of w on [0, 2]
        double worst = 0.0;
        IntegratorConfig cfg = obj.config().ode;
        cfg.max_time = 2.0;
        cfg.escape_norm = std::numeric_limits<double>::infinity();
        auto w = [&mp](double, const State<2>& s) { return to_state(field_w(to_point(s), mp)); };
        for (int i = 0; i < n_samples; ++i) {
            const Point p0{0.5 * unit(rng), 0.5 * unit(rng)};
            const auto [u0, v0] = hyper_coords(p0, mp);
            const double c0 = u0 * v0;
            auto run = integrate<2>(w, to_state(p0), Direction::Forward,
                                    std::span<const EventFunction<2>>{}, cfg);
            for (const auto& s : run.trajectory.states()) {
                const auto [u, v] = hyper_coords(to_point(s), mp);
                worst = std::max(worst, std::abs(u * v - c0) / std::max(std::abs(c0), dot(p0, p0)));
            }
        }
        finish("hyper_product_along_w_flow", worst, ode_threshold);
    }
    {  // grad f is orthogonal to v
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            Point p;
            do {
                p = {mp.R_domain * unit(rng), mp.R_domain * unit(rng)};
            } while (norm(p) <= mp.r_core);
            const Point g = obj.grad_adjoint(p).grad;
            const Point v = field_v(p, mp);
            worst = std::max(worst, std::abs(dot(g, v)) / (norm(g) * norm(v)));
        }
        finish("grad_f_orthogonal_to_v", worst, ode_threshold);
    }
    return rep;
}

}  // namespace gdapl
