#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gdapl/figure.hpp"
#include "gdapl/format.hpp"
#include "gdapl/gda.hpp"
#include "gdapl/objective.hpp"
#include "gdapl/report.hpp"
#include "gdapl/verify.hpp"

namespace gdapl {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2 };

namespace detail {

inline void print_kv(std::ostream& out, const std::string& key, double v) {
    out << key << '=' << format_g17(v) << '\n';
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

// Level line through a point, both directions, as one time-ordered path.
inline std::vector<std::pair<double, Point>> level_line_through(Point p, const Objective& obj, double half_width) {
    const auto& mp = obj.params();
    IntegratorConfig cfg = obj.config().ode;
    cfg.max_time = 50.0;
    cfg.escape_norm = std::numeric_limits<double>::infinity();
    const std::vector<EventFunction<2>> events{box_exit_event(half_width), ball_entry_event(0.02)};
    auto field = [&mp](double, const State<2>& s) { return to_state(field_v(to_point(s), mp)); };
    std::vector<std::pair<double, Point>> path;
    if (norm(p) == 0.0) return {{0.0, p}};
    auto bwd = integrate<2>(field, to_state(p), Direction::Backward, events, cfg);
    auto fwd = integrate<2>(field, to_state(p), Direction::Forward, events, cfg);
    const auto& bt = bwd.trajectory;
    for (std::size_t k = bt.size(); k-- > 1;) path.emplace_back(-bt.times()[k], to_point(bt.states()[k]));
    const auto& ft = fwd.trajectory;
    for (std::size_t k = 0; k < ft.size(); ++k) path.emplace_back(ft.times()[k], to_point(ft.states()[k]));
    return path;
}

}  // namespace detail

/// Command-line entry point. Returns 0 when the command succeeded and every
/// check it ran passed, 1 on a failed check or runtime failure, 2 on a usage error.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    CLI::App app{"Two-sided PL counterexample: evaluate f, simulate GDA, certify PL"};
    app.require_subcommand(1);
    double rel_tol = 1e-11, abs_tol = 1e-13;
    std::string report_path;
    app.add_option("--rel-tol", rel_tol, "relative tolerance of flow-line integration")
        ->check(CLI::PositiveNumber);
    app.add_option("--abs-tol", abs_tol, "absolute tolerance of flow-line integration")
        ->check(CLI::PositiveNumber);
    app.add_option("--report", report_path, "write a JSON report to this path");

    auto* c_params = app.add_subcommand("params", "print the constants of the construction");

    double ex = 0, ey = 0;
    std::string eval_method = "ode";
    auto* c_eval = app.add_subcommand("eval", "evaluate f at a point");
    c_eval->add_option("--x", ex)->required();
    c_eval->add_option("--y", ey)->required();
    c_eval->add_option("--method", eval_method)->check(CLI::IsMember({"ode", "quad"}));

    double gx = 0, gy = 0, fd_h = 1e-5;
    std::string grad_method = "adjoint";
    auto* c_grad = app.add_subcommand("grad", "gradient of f at a point");
    c_grad->add_option("--x", gx)->required();
    c_grad->add_option("--y", gy)->required();
    c_grad->add_option("--method", grad_method)->check(CLI::IsMember({"adjoint", "fd"}));
    c_grad->add_option("--fd-step", fd_h, "finite-difference step")->check(CLI::PositiveNumber);

    double x0 = 0, y0 = 0, tmax = 0;
    std::string csv_path;
    auto* c_gda = app.add_subcommand("gda", "simulate the gradient descent-ascent flow");
    c_gda->add_option("--x0", x0)->required();
    c_gda->add_option("--y0", y0)->required();
    c_gda->add_option("--tmax", tmax)->required()->check(CLI::PositiveNumber);
    c_gda->add_option("--csv", csv_path, "trajectory CSV (t,x,y,g,f)");

    auto* c_verify = app.add_subcommand("verify", "run a verification");
    c_verify->require_subcommand(1);
    int grid_n = 161;
    double half_width = 2.0;
    auto* c_pl = c_verify->add_subcommand("pl", "two-sided PL certificate on a grid");
    c_pl->add_option("--grid", grid_n)->check(CLI::Range(2, 100000));
    c_pl->add_option("--half-width", half_width)->check(CLI::PositiveNumber);
    int samples = 1000;
    std::uint64_t seed = 7;
    auto* c_ids = c_verify->add_subcommand("identities", "algebraic and flow identities");
    c_ids->add_option("--samples", samples)->check(CLI::Range(1, 100000000));
    c_ids->add_option("--seed", seed);
    auto* c_spec = c_verify->add_subcommand("spectrum", "linear stability of GDA at the origin");

    std::string fig_out = "figure.svg";
    auto* c_fig = app.add_subcommand("figure", "level lines, X, ellipses and a GDA orbit as SVG");
    c_fig->add_option("--out", fig_out);

    double lx = 0, ly = 0;
    std::string line_csv;
    auto* c_line = app.add_subcommand("levelline", "trace the level line of f through a point");
    c_line->add_option("--x0", lx)->required();
    c_line->add_option("--y0", ly)->required();
    c_line->add_option("--csv", line_csv, "path CSV (t,x,y), backward part at negative t");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return exit_usage;
    }

    try {
        ObjectiveConfig ocfg;
        ocfg.ode.rel_tol = rel_tol;
        ocfg.ode.abs_tol = abs_tol;
        const Objective obj = Objective::calibrated(ocfg);
        const ModelParams& mp = obj.params();
        auto emit = [&](const std::string& cmd, const Json& payload, bool passed,
                        const Json& failed = Json::array()) {
            if (!report_path.empty()) write_json(make_envelope(cmd, mp, payload, passed, failed), report_path);
            return passed ? exit_ok : exit_check_failed;
        };

        if (*c_params) {
            const Json pj = to_json(mp);
            for (auto it = pj.begin(); it != pj.end(); ++it) detail::print_kv(out, it.key(), it.value().get<double>());
            return emit("params", {{"constants", pj}}, true);
        }
        if (*c_eval) {
            const Point p{ex, ey};
            const double v = eval_method == "quad" ? quad_saddle(p, mp) : obj.value(p);
            out << format_g17(v) << '\n';
            return emit("eval", {{"point", to_json(p)}, {"method", eval_method}, {"value", num(v)}}, true);
        }
        if (*c_grad) {
            const Point p{gx, gy};
            const GradientResult g = grad_method == "fd" ? obj.grad_fd(p, fd_h) : obj.grad_adjoint(p);
            out << format_g17(g.grad.x) << ' ' << format_g17(g.grad.y) << '\n';
            detail::print_kv(out, "estimated_error", g.estimated_error);
            return emit("grad", {{"point", to_json(p)}, {"method", std::string(to_string(g.method))},
                                 {"grad", to_json(g.grad)}, {"estimated_error", num(g.estimated_error)}},
                        true);
        }
        if (*c_gda) {
            const Point z0{x0, y0};
            const Trajectory<2> traj = simulate_gda(obj, z0, tmax);
            if (!csv_path.empty()) {
                auto f = detail::open_out(csv_path);
                write_gda_csv(f, traj, obj);
            }
            Json payload{{"z0", to_json(z0)}, {"t_max", tmax}, {"nodes", traj.size()},
                         {"final", to_json(to_point(traj.back()))}};
            detail::print_kv(out, "final_x", traj.back()[0]);
            detail::print_kv(out, "final_y", traj.back()[1]);
            if (norm(z0) > 0.0 && norm(z0) <= mp.r_core) {
                const auto rep = local_convergence_run(obj, z0, tmax);
                detail::print_kv(out, "fit_rate", rep.fit_rate);
                detail::print_kv(out, "final_norm", rep.final_norm);
                payload["convergence"] = to_json(rep);
            } else if (norm(z0) > 0.0) {
                try {
                    const auto rep = detect_period(traj, z0);
                    detail::print_kv(out, "period_T", rep.period_T);
                    detail::print_kv(out, "return_distance", rep.return_distance);
                    detail::print_kv(out, "max_g_drift_rel", rep.max_g_drift_rel);
                    payload["period"] = to_json(rep);
                } catch (const GdaError& e) {
                    out << "period=none (" << e.what() << ")\n";
                    payload["period"] = nullptr;
                }
            }
            return emit("gda", payload, true);
        }
        if (*c_verify) {
            if (*c_pl) {
                if (half_width > mp.R_domain) {
                    err << "--half-width must not exceed R_domain = " << format_g17(mp.R_domain) << '\n';
                    return exit_usage;
                }
                const PLReport rep = two_sided_pl_grid(obj, grid_n, half_width);
                Json failed = Json::array();
                if (!rep.violations.empty()) failed.push_back("violations");
                if (!std::isfinite(rep.C_x) || !std::isfinite(rep.C_y)) failed.push_back("finite_constants");
                if (!(rep.min_dxx_on_XMinus > 0.0)) failed.push_back("dxx_on_XMinus_positive");
                if (!(rep.max_dyy_on_XPlus < 0.0)) failed.push_back("dyy_on_XPlus_negative");
                if (!(rep.min_grad_norm > 0.0)) failed.push_back("gradient_nonvanishing");
                detail::print_kv(out, "C_x", rep.C_x);
                detail::print_kv(out, "C_y", rep.C_y);
                out << "violations=" << rep.violations.size() << '\n';
                out << "excluded=" << rep.excluded() << '\n';
                detail::print_kv(out, "min_dxx_on_XMinus", rep.min_dxx_on_XMinus);
                detail::print_kv(out, "max_dyy_on_XPlus", rep.max_dyy_on_XPlus);
                detail::print_kv(out, "min_grad_norm", rep.min_grad_norm);
                return emit("verify pl", to_json(rep), failed.empty(), failed);
            }
            if (*c_ids) {
                const IdentityReport rep = identity_suite(obj, samples, seed);
                Json failed = Json::array();
                for (const auto& i : rep.identities) {
                    out << i.name << " max_rel_err=" << format_g17(i.max_rel_err)
                        << (i.pass ? " pass" : " FAIL") << '\n';
                    if (!i.pass) failed.push_back(i.name);
                }
                return emit("verify identities", {{"samples", samples}, {"seed", seed}, {"identities", to_json(rep)}},
                            rep.all_pass(), failed);
            }
            if (*c_spec) {
                const SpectrumReport rep = origin_spectrum(mp);
                out << "eigenvalues=" << format_g17(rep.eig1.real()) << (rep.eig1.imag() < 0 ? "" : "+")
                    << format_g17(rep.eig1.imag()) << "i," << format_g17(rep.eig2.real())
                    << (rep.eig2.imag() < 0 ? "" : "+") << format_g17(rep.eig2.imag()) << "i\n";
                detail::print_kv(out, "max_real_part", rep.max_real_part);
                const bool ok = rep.max_real_part < 0.0;
                return emit("verify spectrum", {{"spectrum", to_json(rep)}}, ok,
                            ok ? Json::array() : Json::array({"max_real_part_negative"}));
            }
        }
        if (*c_fig) {
            FigureSpec spec;
            spec.half_width = mp.R_domain;
            const FigureData data = build_figure(spec, obj);
            auto f = detail::open_out(fig_out);
            f << render_figure_svg(spec, mp, data);
            out << "wrote " << fig_out << " (" << data.levels.lines.size() << " level lines)\n";
            Json errs = Json::array();
            for (const auto& e : data.levels.errors) errs.push_back(e);
            return emit("figure", {{"out", fig_out}, {"level_lines", data.levels.lines.size()}, {"seed_errors", errs}},
                        true);
        }
        if (*c_line) {
            const Point p{lx, ly};
            const auto path = detail::level_line_through(p, obj, mp.R_domain);
            if (!line_csv.empty()) {
                auto f = detail::open_out(line_csv);
                f << "t,x,y\n";
                for (const auto& [t, q] : path)
                    f << format_g17(t) << ',' << format_g17(q.x) << ',' << format_g17(q.y) << '\n';
            }
            const double v = obj.value(p);
            detail::print_kv(out, "f", v);
            out << "nodes=" << path.size() << '\n';
            return emit("levelline", {{"point", to_json(p)}, {"f", num(v)}, {"nodes", path.size()}}, true);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_check_failed;
    }
    err << app.help();
    return exit_usage;
}

}  // namespace gdapl
