#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdapl/field.hpp"
#include "gdapl/flow.hpp"
#include "gdapl/format.hpp"
#include "gdapl/gda.hpp"
#include "gdapl/objective.hpp"

namespace gdapl {

enum class FormKind { Plus, Minus };

struct FigureSpec {
    double half_width = 2.0;
    int seeds_per_branch = 24;  // split evenly between the two half-lines
    double seed_min_distance = 0.04;
    std::array<double, 2> ellipse_levels{0.5, 1.0};
    Point orbit_start{1.6, 0.0};
    double orbit_t_max = 100.0;
    double log_speed_min = -2.0;  // color scale bounds on log10 |v|
    double log_speed_max = 1.5;
    double stop_radius = 0.02;
    double max_line_time = 50.0;
    int canvas_px = 800;
};

struct LevelLine {
    Point seed;
    XBranch branch;
    std::vector<Point> points;
    std::vector<double> speed;  // |v| per vertex
};

struct LevelLineSet {
    std::vector<LevelLine> lines;
    std::vector<std::string> errors;  // per-seed integration failures
};

/// Seeds on both half-lines of both X branches, geometrically spaced in distance
/// from the origin. Every nontrivial flow line meets X exactly once, so each seed
/// yields a distinct level line.
inline std::vector<std::pair<Point, XBranch>> level_line_seeds(const FigureSpec& spec,
                                                               const ModelParams& mp) {
    std::vector<std::pair<Point, XBranch>> seeds;
    const int per_half = spec.seeds_per_branch / 2;
    if (per_half <= 0) return seeds;
    const Point dir_plus = (1.0 / mp.mu) * Point{mp.gamma, 1.0};
    const Point dir_minus = (1.0 / mp.mu) * Point{1.0, -mp.gamma};
    const double dmax = 0.95 * spec.half_width * mp.mu;
    const double dmin = spec.seed_min_distance;
    for (XBranch b : {XBranch::XPlus, XBranch::XMinus})
        for (int s : {1, -1})
            for (int k = 0; k < per_half; ++k) {
                const double frac = per_half == 1 ? 0.0 : static_cast<double>(k) / (per_half - 1);
                const double d = dmin * std::pow(dmax / dmin, frac);
                const Point dir = b == XBranch::XPlus ? dir_plus : dir_minus;
                seeds.emplace_back((s * d) * dir, b);
            }
    return seeds;
}

namespace detail {

inline std::vector<Point> sample_run(const Trajectory<2>& traj, double max_chord) {
    std::vector<Point> pts{to_point(traj.front())};
    const auto& segs = traj.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Point a = to_point(traj.states()[i]);
        const Point b = to_point(traj.states()[i + 1]);
        const double span = segs[i].t_end - segs[i].t0;
        const int pieces = std::max(1, static_cast<int>(std::ceil(norm(b - a) / max_chord)));
        for (int j = 1; j < pieces; ++j)
            pts.push_back(to_point(segs[i].eval(segs[i].t0 + span * j / pieces)));
        pts.push_back(b);
    }
    return pts;
}

}  // namespace detail

/// Traces the flow line of v through each seed, forward and backward, until it
/// leaves the square, enters the stop ball, or runs out of time.
inline LevelLineSet trace_level_lines(const FigureSpec& spec, const ModelParams& mp,
                                      const IntegratorConfig& base) {
    LevelLineSet out;
    IntegratorConfig cfg = base;
    cfg.max_time = spec.max_line_time;
    cfg.escape_norm = std::numeric_limits<double>::infinity();
    cfg.rel_tol = std::max(cfg.rel_tol, 1e-9);
    const std::vector<EventFunction<2>> events{box_exit_event(spec.half_width),
                                               ball_entry_event(spec.stop_radius)};
    auto field = [&mp](double, const State<2>& s) { return to_state(field_v(to_point(s), mp)); };
    const double chord = 0.005 * spec.half_width;
    for (const auto& [seed, branch] : level_line_seeds(spec, mp)) {
        if (norm(seed) <= spec.stop_radius) continue;
        try {
            auto fwd = integrate<2>(field, to_state(seed), Direction::Forward, events, cfg);
            auto bwd = integrate<2>(field, to_state(seed), Direction::Backward, events, cfg);
            LevelLine line{seed, branch, {}, {}};
            auto back_pts = detail::sample_run(bwd.trajectory, chord);
            line.points.assign(back_pts.rbegin(), back_pts.rend());
            auto fwd_pts = detail::sample_run(fwd.trajectory, chord);
            line.points.insert(line.points.end(), fwd_pts.begin() + 1, fwd_pts.end());
            for (const Point& p : line.points) line.speed.push_back(norm(field_v(p, mp)));
            out.lines.push_back(std::move(line));
        } catch (const std::exception& e) {
            out.errors.push_back(std::string("seed (") + format_g17(seed.x) + ", " +
                                 format_g17(seed.y) + "): " + e.what());
        }
    }
    return out;
}

/// Closed polyline (first point repeated last) of {form = level}, traced along
/// the principal axes of the form matrix.
inline std::vector<Point> ellipse_points(FormKind form, double level, int n, const ModelParams& mp) {
    if (!(level > 0.0)) throw std::invalid_argument("ellipse_points: level must be positive");
    if (n < 3) throw std::invalid_argument("ellipse_points: need at least 3 points");
    const Mat2 m = form == FormKind::Plus ? form_matrix_plus(mp) : form_matrix_minus(mp);
    // symmetric 2x2 eigen-decomposition via the rotation angle
    const double theta = 0.5 * std::atan2(2.0 * m.m12, m.m11 - m.m22);
    const Point e1{std::cos(theta), std::sin(theta)};
    const Point e2{-std::sin(theta), std::cos(theta)};
    const double l1 = dot(e1, m * e1), l2 = dot(e2, m * e2);
    const double r1 = std::sqrt(level / l1), r2 = std::sqrt(level / l2);
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        pts.push_back((r1 * std::cos(t)) * e1 + (r2 * std::sin(t)) * e2);
    }
    pts.push_back(pts.front());
    return pts;
}

// Viridis anchors, dark blue-violet to yellow; luminance increases along the list.
inline constexpr std::array<std::array<int, 3>, 5> colormap_anchors{{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

/// Color index in [0, 255], non-decreasing in |v|.
inline int color_index(double speed, const FigureSpec& spec) {
    const double l = speed > 0.0 ? std::log10(speed) : spec.log_speed_min;
    const double t = std::clamp((l - spec.log_speed_min) / (spec.log_speed_max - spec.log_speed_min), 0.0, 1.0);
    return static_cast<int>(std::lround(255.0 * t));
}

inline std::array<int, 3> color_rgb(int index) {
    const double t = std::clamp(index, 0, 255) / 255.0 * (colormap_anchors.size() - 1);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), colormap_anchors.size() - 2);
    const double f = t - static_cast<double>(k);
    std::array<int, 3> c{};
    for (int i = 0; i < 3; ++i)
        c[i] = static_cast<int>(std::lround((1.0 - f) * colormap_anchors[k][i] + f * colormap_anchors[k + 1][i]));
    return c;
}

inline std::string color_hex(int index) {
    const auto c = color_rgb(index);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

struct FigureData {
    LevelLineSet levels;
    std::array<std::vector<Point>, 4> ellipses;  // plus 1/2, plus 1, minus 1/2, minus 1
    std::vector<Point> orbit;
};

inline FigureData build_figure(const FigureSpec& spec, const Objective& obj) {
    const auto& mp = obj.params();
    FigureData d;
    d.levels = trace_level_lines(spec, mp, obj.config().ode);
    int k = 0;
    for (FormKind f : {FormKind::Plus, FormKind::Minus})
        for (double lvl : spec.ellipse_levels) d.ellipses[k++] = ellipse_points(f, lvl, 256, mp);
    const auto orbit = simulate_gda(obj, spec.orbit_start, spec.orbit_t_max, default_gda_config(), true);
    d.orbit = detail::sample_run(orbit, 0.005 * spec.half_width);
    return d;
}

/// SVG text with one group per layer: axes, levels, X, ellipses, orbit.
inline std::string render_figure_svg(const FigureSpec& spec, const ModelParams& mp, const FigureData& d) {
    const double px = spec.canvas_px, margin = 20.0;
    const double scale = (px - 2.0 * margin) / (2.0 * spec.half_width);
    auto X = [&](double x) { return format_fixed(margin + (x + spec.half_width) * scale, 2); };
    auto Y = [&](double y) { return format_fixed(margin + (spec.half_width - y) * scale, 2); };
    auto pts_attr = [&](const std::vector<Point>& pts, std::size_t from, std::size_t to) {
        std::string s;
        for (std::size_t i = from; i < to; ++i) {
            if (i > from) s += ' ';
            s += X(pts[i].x) + ',' + Y(pts[i].y);
        }
        return s;
    };

    std::ostringstream os;
    const std::string size = format_fixed(px, 0);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
       << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    os << "<metadata>{\"half_width\":" << format_g17(spec.half_width)
       << ",\"seeds_per_branch\":" << spec.seeds_per_branch
       << ",\"ellipse_levels\":[" << format_g17(spec.ellipse_levels[0]) << ','
       << format_g17(spec.ellipse_levels[1]) << "],\"orbit_start\":[" << format_g17(spec.orbit_start.x)
       << ',' << format_g17(spec.orbit_start.y) << "],\"color\":\"log10|v| clipped to ["
       << format_g17(spec.log_speed_min) << ',' << format_g17(spec.log_speed_max)
       << "], viridis\",\"gamma\":" << format_g17(mp.gamma) << "}</metadata>\n";

    os << "<g id=\"axes\" fill=\"none\" stroke=\"black\" stroke-width=\"1\">\n";
    os << "<rect class=\"axes-box\" x=\"" << X(-spec.half_width) << "\" y=\"" << Y(spec.half_width)
       << "\" width=\"" << format_fixed(2.0 * spec.half_width * scale, 2) << "\" height=\""
       << format_fixed(2.0 * spec.half_width * scale, 2) << "\"/>\n</g>\n";

    os << "<g id=\"levels\" fill=\"none\" stroke-width=\"1.2\">\n";
    for (const auto& line : d.levels.lines) {
        os << "<g class=\"level-line\">\n";
        // one polyline per run of vertices sharing a color bin
        std::size_t start = 0;
        auto bin = [&](std::size_t i) {
            return color_index(0.5 * (line.speed[i] + line.speed[i + 1]), spec) / 8;
        };
        for (std::size_t i = 0; i + 1 < line.points.size(); ++i) {
            const bool end = i + 2 == line.points.size() || bin(i + 1) != bin(i);
            if (!end) continue;
            os << "<polyline stroke=\"" << color_hex(bin(i) * 8 + 4) << "\" points=\""
               << pts_attr(line.points, start, i + 2) << "\"/>\n";
            start = i + 1;
        }
        os << "</g>\n";
    }
    os << "</g>\n";

    os << "<g id=\"X\" stroke=\"orange\" stroke-width=\"2\">\n";
    const double hw = spec.half_width;
    os << "<line class=\"x-line\" x1=\"" << X(-mp.gamma * hw) << "\" y1=\"" << Y(-hw) << "\" x2=\""
       << X(mp.gamma * hw) << "\" y2=\"" << Y(hw) << "\"/>\n";
    os << "<line class=\"x-line\" x1=\"" << X(-hw) << "\" y1=\"" << Y(mp.gamma * hw) << "\" x2=\""
       << X(hw) << "\" y2=\"" << Y(-mp.gamma * hw) << "\"/>\n";
    os << "</g>\n";

    os << "<g id=\"ellipses\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"4 3\">\n";
    for (const auto& e : d.ellipses)
        os << "<polyline class=\"ellipse\" points=\"" << pts_attr(e, 0, e.size()) << "\"/>\n";
    os << "</g>\n";

    os << "<g id=\"orbit\" fill=\"none\">\n<path class=\"orbit\" stroke=\"red\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < d.orbit.size(); ++i)
        os << (i == 0 ? "M" : " L") << X(d.orbit[i].x) << ',' << Y(d.orbit[i].y);
    os << "\"/>\n</g>\n</svg>\n";
    return os.str();
}

inline void emit_figure_svg(const FigureSpec& spec, const Objective& obj, const std::string& out_path) {
    const std::string svg = render_figure_svg(spec, obj.params(), build_figure(spec, obj));
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_figure_svg: cannot open " + out_path);
    f << svg;
    if (!f) throw std::runtime_error("emit_figure_svg: write failed for " + out_path);
}

}  // namespace gdapl
