#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gdapl/field.hpp"
#include "gdapl/flow.hpp"
#include "gdapl/params.hpp"

namespace gdapl {

/// gamma/2 x^2 + x y - gamma/2 y^2; f coincides with it on a ball around the origin.
inline double quad_saddle(Point p, const ModelParams& mp) noexcept {
    return 0.5 * mp.gamma * p.x * p.x + p.x * p.y - 0.5 * mp.gamma * p.y * p.y;
}

inline Point quad_saddle_grad(Point p, const ModelParams& mp) noexcept {
    return {mp.gamma * p.x + p.y, p.x - mp.gamma * p.y};
}

/// Exact gradient of f on X: ((gamma^2 + 1) y, 0) on XPlus, (0, (gamma^2 + 1) x) on XMinus.
inline Point grad_on_X(Point p, XBranch branch, const ModelParams& mp, double tol = 1e-9) {
    require_on_branch(p, branch, mp, tol, "grad_on_X");
    const double c = mp.gamma * mp.gamma + 1.0;
    return branch == XBranch::XPlus ? Point{c * p.y, 0.0} : Point{0.0, c * p.x};
}

inline IntegratorConfig default_flowline_config() {
    IntegratorConfig c;
    c.rel_tol = 1e-11;
    c.abs_tol = 1e-13;
    return c;
}

struct ObjectiveConfig {
    IntegratorConfig ode = default_flowline_config();
    /// Flow lines entering this ball stop and take the local quadratic value,
    /// also when the core early exit is disabled.
    double origin_stop_radius = 1e-6;
    double axis_tol = default_axis_tol;
};

struct EvalOptions {
    bool early_exit = true;  // use the calibrated core ball B(r_core)
};

namespace flowcase {
struct StaysAtOrigin {};
struct CrossesX {
    XBranch branch;
    Point point;
    double t;  // local integration time (>= 0) in `direction`
    Direction direction;
};
struct ConvergesToOriginForward {
    Point entry;
};
struct ConvergesToOriginBackward {
    Point entry;
};
}  // namespace flowcase

using FlowClassification = std::variant<flowcase::StaysAtOrigin, flowcase::CrossesX,
                                        flowcase::ConvergesToOriginForward,
                                        flowcase::ConvergesToOriginBackward>;

/// Raised when a flow line neither reaches X nor the origin ball. Carries the
/// offending run for inspection.
class ClassificationError : public std::runtime_error {
public:
    ClassificationError(const std::string& what, Trajectory<2> traj, StopEvent<2> stop)
        : std::runtime_error(what), trajectory(std::move(traj)), stop(stop) {}
    Trajectory<2> trajectory;
    StopEvent<2> stop;
};

struct FlowLine {
    FlowClassification classification;
    Trajectory<2> trajectory;  // single node for points already on X or at the origin
};

enum class GradMethod { Adjoint, FiniteDifference, ClosedForm };

inline std::string_view to_string(GradMethod m) noexcept {
    switch (m) {
        case GradMethod::Adjoint: return "adjoint";
        case GradMethod::FiniteDifference: return "finite-difference";
        case GradMethod::ClosedForm: return "closed-form";
    }
    return "?";
}

struct GradientResult {
    Point grad;
    GradMethod method;
    double estimated_error;
};

struct ValueAndGrad {
    double value;
    GradientResult gradient;
};

/// f, defined by transporting its prescribed values on X (or the quadratic
/// value near the origin) along the flow lines of field_v.
class Objective {
public:
    Objective(ModelParams params, ObjectiveConfig cfg = {}) : params_(params), cfg_(cfg) {
        cfg_.ode.validate();
        if (!(params_.r_core > 0.0 && params_.r_core <= params_.r_phi_half))
            throw std::invalid_argument("Objective: r_core must lie in (0, r_phi_half]");
    }

    /// Computes the constants and calibrates r_core.
    static Objective calibrated(ObjectiveConfig cfg = {});

    const ModelParams& params() const noexcept { return params_; }
    const ObjectiveConfig& config() const noexcept { return cfg_; }

    FlowLine trace(Point p, EvalOptions opt = {}) const {
        return trace_flowline(p, params_, cfg_, opt.early_exit ? params_.r_core : 0.0);
    }

    FlowClassification classify(Point p, EvalOptions opt = {}) const {
        return trace(p, opt).classification;
    }

    double value(Point p, EvalOptions opt = {}) const {
        if (opt.early_exit && norm(p) <= params_.r_core) return quad_saddle(p, params_);
        return value_from(trace(p, opt).classification, params_);
    }

    GradientResult grad_adjoint(Point p) const { return evaluate(p).gradient; }

    ValueAndGrad evaluate(Point p) const {
        if (norm(p) <= params_.r_core)
            return {quad_saddle(p, params_),
                    {quad_saddle_grad(p, params_), GradMethod::ClosedForm, 0.0}};
        const FlowLine line = trace(p);
        const double val = value_from(line.classification, params_);
        Point g = terminal_gradient(line.classification, params_);
        if (line.trajectory.size() > 1) g = transport(line.trajectory, g);
        const Point vp = field_v(p, params_);
        const double denom = norm(g) * norm(vp);
        const double defect = denom > 0.0 ? std::abs(dot(g, vp)) / denom : 0.0;
        return {val, {g, GradMethod::Adjoint, defect}};
    }

    /// Central differences of value(); estimated_error compares steps h and h/2.
    GradientResult grad_fd(Point p, double h) const {
        if (!(h > 0.0)) throw std::invalid_argument("grad_fd: h must be positive");
        auto central = [&](double step) {
            const double fx = (value({p.x + step, p.y}) - value({p.x - step, p.y})) / (2.0 * step);
            const double fy = (value({p.x, p.y + step}) - value({p.x, p.y - step})) / (2.0 * step);
            return Point{fx, fy};
        };
        const Point g1 = central(h);
        const Point g2 = central(0.5 * h);
        const double err = std::max(std::abs(g1.x - g2.x), std::abs(g1.y - g2.y));
        return {g1, GradMethod::FiniteDifference, err};
    }

    static double value_from(const FlowClassification& c, const ModelParams& mp) {
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, flowcase::StaysAtOrigin>) return 0.0;
                else if constexpr (std::is_same_v<K, flowcase::CrossesX>)
                    return x_value_of_f(k.point, k.branch, mp);
                else return quad_saddle(k.entry, mp);
            },
            c);
    }

    static Point terminal_gradient(const FlowClassification& c, const ModelParams& mp) {
        return std::visit(
            [&](const auto& k) -> Point {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, flowcase::StaysAtOrigin>) return {0.0, 0.0};
                else if constexpr (std::is_same_v<K, flowcase::CrossesX>)
                    return grad_on_X(k.point, k.branch, mp);
                else return quad_saddle_grad(k.entry, mp);
            },
            c);
    }

    /// Pulls a gradient known at the end of a flow-line run back to its start
    /// along the run's dense output: lambda' = -(DF)^T lambda with F = +-v.
    Point transport(const Trajectory<2>& traj, Point terminal) const {
        const double s = traj.direction() == Direction::Forward ? 1.0 : -1.0;
        State<2> lam = to_state(terminal);
        const auto& segs = traj.segments();
        IntegratorConfig acfg = cfg_.ode;
        for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
            const DenseSegment<2>& seg = *it;
            const double span = seg.t_end - seg.t0;
            if (!(span > 0.0)) continue;
            auto rhs = [&](double sigma, const State<2>& l) -> State<2> {
                const Point m = to_point(seg.eval(seg.t_end - sigma));
                const Mat2 jt = jacobian_v(m, params_).transposed();
                const Point r = jt * to_point(l);
                return {s * r.x, s * r.y};
            };
            lam = advance<2>(rhs, lam, 0.0, span, acfg, span);
        }
        return to_point(lam);
    }

    /// Classifies the flow line through p and returns the run that decided it.
    /// core_radius = 0 disables the early exit.
    static FlowLine trace_flowline(Point p, const ModelParams& mp, const ObjectiveConfig& cfg,
                                   double core_radius) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("classify: non-finite point");
        const Quadrant q = quadrant(p, mp, cfg.axis_tol);
        Trajectory<2> single(Direction::Forward, 0.0, to_state(p));
        switch (q) {
            case Quadrant::Origin: return {flowcase::StaysAtOrigin{}, std::move(single)};
            case Quadrant::OnL1Axis:
                return {flowcase::CrossesX{XBranch::XPlus, p, 0.0, Direction::Forward}, std::move(single)};
            case Quadrant::OnL2Axis:
                return {flowcase::CrossesX{XBranch::XMinus, p, 0.0, Direction::Forward}, std::move(single)};
            default: break;
        }
        // Crossings only lead out of PP/MM into PM/MP, so PP/MM points run
        // forward and PM/MP points backward.
        const Direction dir =
            (q == Quadrant::PP || q == Quadrant::MM) ? Direction::Forward : Direction::Backward;

        std::vector<EventFunction<2>> events{l1_crossing_event(mp), l2_crossing_event(mp)};
        if (core_radius > 0.0 && norm(p) > core_radius) events.push_back(ball_entry_event(core_radius));
        if (norm(p) > cfg.origin_stop_radius)
            events.push_back(
                ball_entry_event(cfg.origin_stop_radius, EventKind::ReachedOriginNeighborhood));

        auto field = [&mp](double, const State<2>& s) { return to_state(field_v(to_point(s), mp)); };
        auto run = integrate<2>(field, to_state(p), dir, std::span<const EventFunction<2>>(events), cfg.ode);
        const Point at = to_point(run.stop.state);
        switch (run.stop.kind) {
            case EventKind::L1Crossing:
                return {flowcase::CrossesX{XBranch::XPlus, at, run.stop.t, dir}, std::move(run.trajectory)};
            case EventKind::L2Crossing:
                return {flowcase::CrossesX{XBranch::XMinus, at, run.stop.t, dir}, std::move(run.trajectory)};
            case EventKind::EnteredBall:
            case EventKind::ReachedOriginNeighborhood:
                if (dir == Direction::Forward)
                    return {flowcase::ConvergesToOriginForward{at}, std::move(run.trajectory)};
                return {flowcase::ConvergesToOriginBackward{at}, std::move(run.trajectory)};
            default: break;
        }
        throw ClassificationError("classify: flow line through (" + format_g17(p.x) + ", " +
                                      format_g17(p.y) + ") ended with " +
                                      std::string(to_string(run.stop.kind)) +
                                      " before reaching X or the origin",
                                  std::move(run.trajectory), run.stop);
    }

private:
    ModelParams params_;
    ObjectiveConfig cfg_;
};

struct CoreCalibration {
    double passing_radius;
    double r_core;
    int halvings;
    double worst_rel_diff;  // at the passing radius
};

/// Largest radius r = (r_phi_half / 2) 2^-k at which the ODE route and the
/// quadratic closed form agree to `rel` on 64 points of the circle, relative to
/// the circle's scale r^2. r_core is half of it.
inline CoreCalibration calibrate_core_radius(const ModelParams& mp, const ObjectiveConfig& cfg,
                                             double rel = 1e-9, int samples = 64) {
    double r = 0.5 * mp.r_phi_half;
    for (int k = 0; k < 30; ++k, r *= 0.5) {
        double worst = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double th = 2.0 * std::numbers::pi * i / samples;
            const Point p{r * std::cos(th), r * std::sin(th)};
            const double ode = Objective::value_from(
                Objective::trace_flowline(p, mp, cfg, 0.0).classification, mp);
            worst = std::max(worst, std::abs(ode - quad_saddle(p, mp)) / (r * r));
        }
        if (worst <= rel) return {r, 0.5 * r, k, worst};
    }
    throw std::runtime_error("calibrate_core_radius: no passing radius found");
}

inline ModelParams with_calibrated_core(ModelParams mp, const ObjectiveConfig& cfg) {
    mp.r_core = calibrate_core_radius(mp, cfg).r_core;
    return mp;
}

inline Objective Objective::calibrated(ObjectiveConfig cfg) {
    return Objective(with_calibrated_core(compute_params(), cfg), cfg);
}

}  // namespace gdapl
