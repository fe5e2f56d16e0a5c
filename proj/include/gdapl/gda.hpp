#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdapl/field.hpp"
#include "gdapl/flow.hpp"
#include "gdapl/objective.hpp"
#include "gdapl/params.hpp"

namespace gdapl {

/// (-df/dx, df/dy). Inside the core ball this is the linear map (-gamma x - y, x - gamma y).
inline Point gda_field(const Objective& obj, Point p) {
    const Point g = obj.grad_adjoint(p).grad;
    return {-g.x, g.y};
}

inline double quartic_invariant(Point p) noexcept { return quartic_invariant(p.x, p.y); }

/// Tolerances of the outer GDA integration. Each field evaluation is itself an
/// ODE solve, so the objective should run at least as tight as this.
inline IntegratorConfig default_gda_config() {
    IntegratorConfig c;
    c.rel_tol = 1e-10;
    c.abs_tol = 1e-12;
    c.max_step = 0.05;
    c.max_time = 100.0;
    c.escape_norm = std::numeric_limits<double>::infinity();
    return c;
}

class GdaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Signed distance-like value of the section through the origin along `dir`.
inline double section_value(Point dir, Point p) noexcept { return cross(dir, p); }

}  // namespace detail

/// Poincare-section event for the line through the origin and z0, firing only on
/// crossings with the given orientation (+1: section value - to +). For an orbit
/// circling the origin the opposite ray is crossed with the other orientation.
inline EventFunction<2> section_return_event(Point z0, int orientation) {
    const Point d = (1.0 / norm(z0)) * z0;
    return {EventKind::Section,
            [d](const State<2>& s) { return detail::section_value(d, to_point(s)); },
            orientation, 0.0};
}

/// Orientation with which a planar run leaves the section through its start.
template <class F>
int section_orientation(F&& field, Point z0) {
    const Point d = (1.0 / norm(z0)) * z0;
    const double rate = cross(d, field(z0));
    if (rate == 0.0) throw GdaError("section_orientation: flow is tangent to the section at z0");
    return rate > 0.0 ? +1 : -1;
}

/// Integrates the GDA flow from z0. Leaving [-R_domain, R_domain]^2 is an error.
/// With stop_at_return the run ends at the first same-orientation return to the
/// ray through z0 (or at t_max).
inline Trajectory<2> simulate_gda(const Objective& obj, Point z0, double t_max,
                                  IntegratorConfig cfg = default_gda_config(),
                                  bool stop_at_return = false) {
    const double hw = obj.params().R_domain;
    if (std::abs(z0.x) > hw || std::abs(z0.y) > hw)
        throw std::invalid_argument("simulate_gda: z0 outside the working square");
    if (!(t_max > 0.0)) throw std::invalid_argument("simulate_gda: t_max must be positive");
    cfg.max_time = t_max;
    auto rhs = [&obj](double, const State<2>& s) { return to_state(gda_field(obj, to_point(s))); };
    if (norm(z0) == 0.0) {
        Trajectory<2> still(Direction::Forward, 0.0, to_state(z0));
        DenseSegment<2> seg{0.0, t_max, t_max, {}};
        seg.coeff[0] = to_state(z0);
        still.append(seg, to_state(z0));
        return still;
    }
    std::vector<EventFunction<2>> events{box_exit_event(hw)};
    if (stop_at_return)
        events.push_back(section_return_event(
            z0, section_orientation([&obj](Point p) { return gda_field(obj, p); }, z0)));
    auto run = integrate<2>(rhs, to_state(z0), Direction::Forward,
                            std::span<const EventFunction<2>>(events), cfg);
    if (run.stop.kind == EventKind::Escaped)
        throw GdaError("simulate_gda: orbit left the working square at t = " + format_g17(run.stop.t));
    return std::move(run.trajectory);
}

struct PeriodReport {
    Point z0;
    double g0 = 0.0;
    double max_g_drift_rel = 0.0;
    double period_T = 0.0;
    double return_distance = 0.0;
    Point return_point;
    std::string section;
};

/// Locates the first return to the ray from the origin through z0 with the
/// orientation of the departure, by bisection on the dense output.
inline PeriodReport detect_period(const Trajectory<2>& traj, Point z0, double event_tol = 1e-13) {
    if (norm(z0) == 0.0) throw std::invalid_argument("detect_period: z0 at the origin defines no section");
    const Point d = (1.0 / norm(z0)) * z0;
    PeriodReport rep;
    rep.z0 = z0;
    rep.g0 = quartic_invariant(z0);
    rep.section = "ray from the origin through z0";
    for (const auto& s : traj.states()) {
        const double g = quartic_invariant(to_point(s));
        rep.max_g_drift_rel = std::max(rep.max_g_drift_rel, std::abs(g - rep.g0) / rep.g0);
    }

    const auto& st = traj.states();
    const auto& ts = traj.times();
    auto sec = [&](const State<2>& s) { return detail::section_value(d, to_point(s)); };
    int orientation = 0;
    for (std::size_t k = 1; k < st.size() && orientation == 0; ++k) {
        const double v = sec(st[k]);
        if (v != 0.0) orientation = v > 0.0 ? +1 : -1;
    }
    for (std::size_t k = 1; orientation != 0 && k + 1 < st.size(); ++k) {
        const double a = sec(st[k]), b = sec(st[k + 1]);
        const bool crossed = (orientation > 0) ? (a < 0.0 && b >= 0.0) : (a > 0.0 && b <= 0.0);
        if (!crossed || dot(d, to_point(st[k + 1])) <= 0.0) continue;
        const auto& seg = traj.segments()[k];
        auto [te, ye] = detail::localize<2>(seg, sec, ts[k], a, ts[k + 1], st[k + 1], b, event_tol);
        rep.period_T = te;
        rep.return_point = to_point(ye);
        rep.return_distance = norm(rep.return_point - z0);
        return rep;
    }
    throw GdaError("detect_period: fewer than two section crossings within the trajectory");
}

struct ConvergenceReport {
    Point z0;
    std::vector<std::pair<double, double>> norms;  // (t, |z(t)|)
    double predicted_rate = 0.0;  // gamma
    double fit_rate = std::numeric_limits<double>::quiet_NaN();
    double final_norm = 0.0;
    bool degenerate = false;
};

/// GDA run from a point in the core ball, with a least-squares fit of log |z(t)|.
inline ConvergenceReport local_convergence_run(const Objective& obj, Point z0, double t_max,
                                               IntegratorConfig cfg = default_gda_config(),
                                               int samples = 200) {
    if (norm(z0) > obj.params().r_core)
        throw std::invalid_argument("local_convergence_run: z0 outside the core ball");
    ConvergenceReport rep;
    rep.z0 = z0;
    rep.predicted_rate = obj.params().gamma;
    const Trajectory<2> traj = simulate_gda(obj, z0, t_max, cfg);
    for (int i = 0; i <= samples; ++i) {
        const double t = t_max * i / samples;
        rep.norms.emplace_back(t, norm(to_point(traj.sample(t))));
    }
    rep.final_norm = norm(to_point(traj.back()));
    if (norm(z0) == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    double st = 0, sl = 0, stt = 0, stl = 0;
    const double n = static_cast<double>(rep.norms.size());
    for (auto [t, r] : rep.norms) {
        const double l = std::log(r);
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    rep.fit_rate = (n * stl - st * sl) / (n * stt - st * st);
    return rep;
}

/// Trajectory CSV with the conserved quartic and f: header `t,x,y,g,f`.
inline void write_gda_csv(std::ostream& os, const Trajectory<2>& traj, const Objective& obj) {
    os << "t,x,y,g,f\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Point p = to_point(traj.states()[k]);
        os << format_g17(traj.times()[k]) << ',' << format_g17(p.x) << ',' << format_g17(p.y) << ','
           << format_g17(quartic_invariant(p)) << ',' << format_g17(obj.value(p)) << '\n';
    }
}

}  // namespace gdapl
