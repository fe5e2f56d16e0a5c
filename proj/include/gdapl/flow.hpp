#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gdapl/field.hpp"
#include "gdapl/format.hpp"

namespace gdapl {

template <std::size_t N>
using State = std::array<double, N>;

inline State<2> to_state(Point p) noexcept { return {p.x, p.y}; }
inline Point to_point(const State<2>& s) noexcept { return {s[0], s[1]}; }

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.25;
    double initial_step = 0.0;  // 0 selects a starting step from the field scale
    double max_time = 1e3;
    double escape_norm = 20.0;  // 10 R_domain
    double event_tol = 1e-12;
    std::size_t max_steps = 5'000'000;

    void validate() const {
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && event_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
        if (!(max_time > 0.0)) throw std::invalid_argument("IntegratorConfig: max_time must be positive");
        if (!(max_step > 0.0)) throw std::invalid_argument("IntegratorConfig: max_step must be positive");
        if (initial_step < 0.0) throw std::invalid_argument("IntegratorConfig: initial_step must be >= 0");
    }
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Direction { Forward, Backward };

inline std::string_view to_string(Direction d) noexcept {
    return d == Direction::Forward ? "forward" : "backward";
}

enum class EventKind {
    L1Crossing,
    L2Crossing,
    EnteredBall,
    Escaped,
    TimeExhausted,
    ReachedOriginNeighborhood,
    Section,
};

inline std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::L1Crossing: return "L1Crossing";
        case EventKind::L2Crossing: return "L2Crossing";
        case EventKind::EnteredBall: return "EnteredBall";
        case EventKind::Escaped: return "Escaped";
        case EventKind::TimeExhausted: return "TimeExhausted";
        case EventKind::ReachedOriginNeighborhood: return "ReachedOriginNeighborhood";
        case EventKind::Section: return "Section";
    }
    return "?";
}

/// A terminal event fires when `value` changes sign across an accepted step.
/// crossing = +1 only accepts negative -> positive, -1 only positive -> negative.
template <std::size_t N>
struct EventFunction {
    EventKind kind;
    std::function<double(const State<N>&)> value;
    int crossing = 0;
    double radius = 0.0;  // ball events only
};

template <std::size_t N>
struct StopEvent {
    EventKind kind = EventKind::TimeExhausted;
    double t = 0.0;
    State<N> state{};
    double radius = 0.0;
};

/// Continuous extension of one Dormand-Prince step, valid on [t0, t_end]; t_end
/// is below t0 + h when an event truncated the step.
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    double t_end = 0.0;
    std::array<State<N>, 5> coeff{};

    State<N> eval(double t) const noexcept {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        State<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = coeff[0][i] +
                     th * (coeff[1][i] + th1 * (coeff[2][i] + th * (coeff[3][i] + th1 * coeff[4][i])));
        return out;
    }
};

/// Accepted nodes of an integration run plus dense output between them.
/// Times are local and increasing from 0; a backward run stores the flow of the
/// negated field, so node k sits at original time -times()[k].
template <std::size_t N>
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(Direction dir, double t0, State<N> y0) : dir_(dir) {
        times_.push_back(t0);
        states_.push_back(y0);
    }

    Direction direction() const noexcept { return dir_; }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<State<N>>& states() const noexcept { return states_; }
    const std::vector<DenseSegment<N>>& segments() const noexcept { return segments_; }
    double t_begin() const noexcept { return times_.front(); }
    double t_end() const noexcept { return times_.back(); }
    const State<N>& front() const noexcept { return states_.front(); }
    const State<N>& back() const noexcept { return states_.back(); }
    std::size_t size() const noexcept { return times_.size(); }

    void append(const DenseSegment<N>& seg, const State<N>& y_end) {
        segments_.push_back(seg);
        times_.push_back(seg.t_end);
        states_.push_back(y_end);
    }

    /// Dense-output value; stored nodes are returned exactly.
    State<N> sample(double t) const {
        if (!(t >= t_begin() && t <= t_end()))
            throw std::out_of_range("Trajectory::sample: time outside the trajectory span");
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - times_.begin());
        if (t == times_[k - 1]) return states_[k - 1];
        if (k == times_.size()) return states_.back();
        return segments_[k - 1].eval(t);
    }

private:
    Direction dir_ = Direction::Forward;
    std::vector<double> times_;
    std::vector<State<N>> states_;
    std::vector<DenseSegment<N>> segments_;
};

template <std::size_t N>
struct IntegrationResult {
    Trajectory<N> trajectory;
    StopEvent<N> stop;
};

namespace detail {

template <std::size_t N>
inline double rms_norm(const State<N>& v) noexcept {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s / static_cast<double>(N));
}

template <std::size_t N>
inline double euclid(const State<N>& v) noexcept {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

template <std::size_t N>
inline bool all_finite(const State<N>& v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

// Dormand-Prince 5(4) tableau with Hairer's dense-output weights.
namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

template <std::size_t N>
struct TrialStep {
    State<N> y1;
    State<N> k7;  // derivative at the new point (first stage of the next step)
    double err;   // scaled error norm; <= 1 accepts
    DenseSegment<N> dense;
};

template <std::size_t N, class F>
State<N> eval_field(F& field, double t, const State<N>& y) {
    State<N> d = field(t, y);
    if (!all_finite(d)) throw IntegrationError("integrate: non-finite field value");
    return d;
}

template <std::size_t N, class F>
TrialStep<N> dp_step(F& field, double t, const State<N>& y, const State<N>& k1, double h,
                     const IntegratorConfig& cfg) {
    using namespace dp;
    auto comb = [&](auto... terms) {
        State<N> out = y;
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            ((acc += terms.first * (*terms.second)[i]), ...);
            out[i] += h * acc;
        }
        return out;
    };
    using P = std::pair<double, const State<N>*>;
    const State<N> k2 = eval_field<N>(field, t + c2 * h, comb(P{a21, &k1}));
    const State<N> k3 = eval_field<N>(field, t + c3 * h, comb(P{a31, &k1}, P{a32, &k2}));
    const State<N> k4 =
        eval_field<N>(field, t + c4 * h, comb(P{a41, &k1}, P{a42, &k2}, P{a43, &k3}));
    const State<N> k5 = eval_field<N>(field, t + c5 * h,
                                      comb(P{a51, &k1}, P{a52, &k2}, P{a53, &k3}, P{a54, &k4}));
    const State<N> k6 = eval_field<N>(
        field, t + h, comb(P{a61, &k1}, P{a62, &k2}, P{a63, &k3}, P{a64, &k4}, P{a65, &k5}));
    const State<N> y1 =
        comb(P{a71, &k1}, P{a73, &k3}, P{a74, &k4}, P{a75, &k5}, P{a76, &k6});
    const State<N> k7 = eval_field<N>(field, t + h, y1);

    TrialStep<N> out;
    out.y1 = y1;
    out.k7 = k7;
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
        s += (e / sc) * (e / sc);
    }
    out.err = std::sqrt(s / static_cast<double>(N));

    auto& d = out.dense;
    d.t0 = t;
    d.h = h;
    d.t_end = t + h;
    for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        d.coeff[0][i] = y[i];
        d.coeff[1][i] = ydiff;
        d.coeff[2][i] = bspl;
        d.coeff[3][i] = ydiff - h * k7[i] - bspl;
        d.coeff[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    return out;
}

template <std::size_t N>
double starting_step(const State<N>& y, const State<N>& dy, double span, const IntegratorConfig& cfg) {
    if (cfg.initial_step > 0.0) return std::min({cfg.initial_step, cfg.max_step, span});
    const double dn = rms_norm(dy);
    const double yn = rms_norm(y);
    double h = dn > 1e-300 ? 0.01 * (yn + cfg.abs_tol / cfg.rel_tol) / dn : 1e-3;
    h = std::clamp(h, 1e-10, cfg.max_step);
    return std::min(h, span);
}

inline double next_step_factor(double err) noexcept {
    if (err == 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

inline double min_step_at(double t) noexcept {
    return 1e-14 * std::max(1.0, std::abs(t));
}

// Bisection on the dense output. The returned point lies on the post-crossing
// side of the root (or exactly on it) and satisfies |g| <= tol unless the
// bracket collapses to adjacent doubles first.
template <std::size_t N, class G>
std::pair<double, State<N>> localize(const DenseSegment<N>& seg, const G& g, double t_lo, double g_lo,
                                     double t_hi, const State<N>& y_hi, double g_hi, double tol) {
    (void)g_lo;
    State<N> best = y_hi;
    double best_t = t_hi;
    if (std::abs(g_hi) <= tol) return {best_t, best};
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (!(mid > t_lo && mid < t_hi)) break;
        const State<N> ym = seg.eval(mid);
        const double gm = g(ym);
        if (gm == 0.0 || (std::signbit(gm) == std::signbit(g_hi))) {
            t_hi = mid;
            g_hi = gm;
            best = ym;
            best_t = mid;
            if (std::abs(gm) <= tol) break;
        } else {
            t_lo = mid;
        }
    }
    return {best_t, best};
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = field(t, y) from y0 at t = 0.
///
/// Backward runs integrate the negated field. The run stops at the first event
/// whose function changes sign within an accepted step, at an exit of the escape
/// ball, or at cfg.max_time. A step in which two events fire is halved until
/// only one does.
template <std::size_t N, class F>
IntegrationResult<N> integrate(F&& field, const State<N>& y0, Direction dir,
                               std::span<const EventFunction<N>> events,
                               const IntegratorConfig& cfg) {
    cfg.validate();
    if (!detail::all_finite(y0)) throw IntegrationError("integrate: non-finite initial state");

    const double sign = dir == Direction::Forward ? 1.0 : -1.0;
    auto rhs = [&](double t, const State<N>& y) {
        State<N> d = field(t, y);
        if (sign < 0.0)
            for (double& c : d) c = -c;
        return d;
    };

    std::vector<EventFunction<N>> evs(events.begin(), events.end());
    if (std::isfinite(cfg.escape_norm)) {
        const double r = cfg.escape_norm;
        evs.push_back({EventKind::Escaped,
                       [r](const State<N>& y) { return detail::euclid(y) - r; }, +1, r});
    }
    std::vector<double> g_prev(evs.size());
    for (std::size_t i = 0; i < evs.size(); ++i) g_prev[i] = evs[i].value(y0);

    IntegrationResult<N> out{Trajectory<N>(dir, 0.0, y0), {}};
    double t = 0.0;
    State<N> y = y0;
    State<N> k1 = detail::eval_field<N>(rhs, t, y);
    double h = detail::starting_step<N>(y, k1, cfg.max_time, cfg);
    std::vector<double> g_new(evs.size());

    for (std::size_t nstep = 0;; ++nstep) {
        if (nstep >= cfg.max_steps) throw IntegrationError("integrate: step budget exhausted");
        const double remaining = cfg.max_time - t;
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        if (h < detail::min_step_at(t)) throw IntegrationError("integrate: step size underflow");

        auto trial = detail::dp_step<N>(rhs, t, y, k1, h, cfg);
        if (!(trial.err <= 1.0) || !detail::all_finite(trial.y1)) {
            if (!std::isfinite(trial.err)) trial.err = 1e10;
            h *= std::min(1.0, detail::next_step_factor(trial.err));
            continue;
        }

        // which events change sign over the step
        std::size_t fired = 0, which = 0;
        for (std::size_t i = 0; i < evs.size(); ++i) {
            g_new[i] = evs[i].value(trial.y1);
            const double a = g_prev[i], b = g_new[i];
            bool crossed = (a != 0.0) && (b == 0.0 || std::signbit(a) != std::signbit(b));
            if (crossed && evs[i].crossing != 0) crossed = (evs[i].crossing > 0) == (a < 0.0);
            if (crossed) {
                ++fired;
                which = i;
            }
        }
        if (fired > 1 && 0.5 * h >= detail::min_step_at(t) * 1e3) {
            h *= 0.5;
            continue;
        }
        if (fired >= 1) {
            // ties at the resolution limit: take the earliest localized root
            double best_t = std::numeric_limits<double>::infinity();
            State<N> best_y{};
            for (std::size_t i = 0; i < evs.size(); ++i) {
                const double a = g_prev[i], b = g_new[i];
                bool crossed = (a != 0.0) && (b == 0.0 || std::signbit(a) != std::signbit(b));
                if (crossed && evs[i].crossing != 0) crossed = (evs[i].crossing > 0) == (a < 0.0);
                if (!crossed) continue;
                auto [te, ye] = detail::localize<N>(trial.dense, evs[i].value, t, a, t + h,
                                                    trial.y1, b, cfg.event_tol);
                if (te < best_t) {
                    best_t = te;
                    best_y = ye;
                    which = i;
                }
            }
            auto seg = trial.dense;
            seg.t_end = best_t;
            out.trajectory.append(seg, best_y);
            out.stop = {evs[which].kind, best_t, best_y, evs[which].radius};
            return out;
        }

        auto seg = trial.dense;
        t = last ? cfg.max_time : t + h;
        seg.t_end = t;
        y = trial.y1;
        k1 = trial.k7;
        out.trajectory.append(seg, y);
        g_prev = g_new;
        if (last) {
            out.stop = {EventKind::TimeExhausted, t, y, 0.0};
            return out;
        }
        h = std::min(h * detail::next_step_factor(trial.err), cfg.max_step);
    }
}

template <std::size_t N, class F>
IntegrationResult<N> integrate(F&& field, const State<N>& y0, Direction dir,
                               std::initializer_list<EventFunction<N>> events,
                               const IntegratorConfig& cfg) {
    std::vector<EventFunction<N>> v(events);
    return integrate<N>(std::forward<F>(field), y0, dir, std::span<const EventFunction<N>>(v), cfg);
}

/// Adaptive integration of y' = field(t, y) from t0 to t1 > t0 with no events
/// and no recording; returns y(t1).
template <std::size_t N, class F>
State<N> advance(F&& field, State<N> y, double t0, double t1, const IntegratorConfig& cfg,
                 double first_step = 0.0) {
    double t = t0;
    State<N> k1 = detail::eval_field<N>(field, t, y);
    const double span = t1 - t0;
    if (!(span > 0.0)) return y;
    double h = first_step > 0.0 ? std::min(first_step, span)
                                : detail::starting_step<N>(y, k1, span, cfg);
    for (std::size_t nstep = 0;; ++nstep) {
        if (nstep >= cfg.max_steps) throw IntegrationError("advance: step budget exhausted");
        bool last = false;
        if (h >= t1 - t) {
            h = t1 - t;
            last = true;
        }
        if (h < detail::min_step_at(t)) {
            if (last) return y;  // remaining span below resolution
            throw IntegrationError("advance: step size underflow");
        }
        auto trial = detail::dp_step<N>(field, t, y, k1, h, cfg);
        if (!(trial.err <= 1.0)) {
            if (!std::isfinite(trial.err)) trial.err = 1e10;
            h *= std::min(1.0, detail::next_step_factor(trial.err));
            continue;
        }
        y = trial.y1;
        k1 = trial.k7;
        if (last) return y;
        t += h;
        h = std::min(h * detail::next_step_factor(trial.err), cfg.max_step);
    }
}

// Event factories for planar runs.

inline EventFunction<2> l1_crossing_event(const ModelParams& mp) {
    const double g = mp.gamma;
    return {EventKind::L1Crossing, [g](const State<2>& s) { return s[0] - g * s[1]; }, 0, 0.0};
}

inline EventFunction<2> l2_crossing_event(const ModelParams& mp) {
    const double g = mp.gamma;
    return {EventKind::L2Crossing, [g](const State<2>& s) { return s[1] + g * s[0]; }, 0, 0.0};
}

inline EventFunction<2> ball_entry_event(double radius, EventKind kind = EventKind::EnteredBall) {
    return {kind, [radius](const State<2>& s) { return std::hypot(s[0], s[1]) - radius; }, -1,
            radius};
}

/// Leaving the square [-half_width, half_width]^2.
inline EventFunction<2> box_exit_event(double half_width) {
    return {EventKind::Escaped,
            [half_width](const State<2>& s) {
                return std::max(std::abs(s[0]), std::abs(s[1])) - half_width;
            },
            +1, half_width};
}

/// Trajectory CSV: header `t,x,y`, one row per stored node.
inline void write_trajectory_csv(std::ostream& os, const Trajectory<2>& traj) {
    os << "t,x,y\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& s = traj.states()[k];
        os << format_g17(traj.times()[k]) << ',' << format_g17(s[0]) << ',' << format_g17(s[1])
           << '\n';
    }
}

}  // namespace gdapl
