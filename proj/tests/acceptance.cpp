#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gdapl/gdapl.hpp"

using namespace gdapl;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << detail << std::endl;
}

std::string g(double v) { return format_g17(v); }

Point random_in_annulus(std::mt19937_64& rng, double r0, double r1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = r0 + (r1 - r0) * u(rng), t = 2.0 * M_PI * u(rng);
    return {r * std::cos(t), r * std::sin(t)};
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "gdapl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream os, es;
    const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), os, es);
    if (out) *out = os.str() + es.str();
    return code;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

int main() {
    const Objective obj = Objective::calibrated();
    const ModelParams& mp = obj.params();
    std::cout << "r_core = " << g(mp.r_core) << '\n';

    {
        const double pg = std::abs(cubic_p(mp.gamma));
        const double b = std::abs(3.0 * mp.gamma * mp.b - 1.0);
        const bool ok = pg <= 1e-12 && b <= 1e-12 && std::abs(mp.gamma - 0.2531) <= 5e-5;
        report(1, "constants", ok, "gamma=" + g(mp.gamma) + " |P(gamma)|=" + g(pg) + " |3 gamma b - 1|=" + g(b));
    }
    {
        std::mt19937_64 rng(1);
        double worst = 0.0;
        for (int i = 0; i < 1000;) {
            const Point p = random_in_annulus(rng, mp.R_outer, 3.0);
            if (form_plus(p, mp) < 1.0 || form_minus(p, mp) < 1.0) continue;
            ++i;
            const Point c = field_v_outside_closed_form(p, mp);
            worst = std::max(worst, norm(field_v(p, mp) - c) / norm(c));
        }
        report(2, "field closed form", worst <= 1e-10, "max rel dev=" + g(worst));
    }
    {
        std::mt19937_64 rng(2);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const Point p = random_in_annulus(rng, 0.0, 1.5 * mp.r_core);
            worst = std::max(worst, std::abs(obj.value(p, {false}) - quad_saddle(p, mp)));
        }
        report(3, "local agreement", worst <= 1e-7, "max abs diff=" + g(worst));
    }
    {
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double s = -1.9 + 3.8 * (k + 0.5) / 20;
            const Point pp{mp.gamma * s, s}, pm{s, -mp.gamma * s};
            const double ep = x_value_of_f(pp, XBranch::XPlus, mp), em = x_value_of_f(pm, XBranch::XMinus, mp);
            worst = std::max(worst, std::abs(obj.value(pp) - ep) / std::abs(ep));
            worst = std::max(worst, std::abs(obj.value(pm) - em) / std::abs(em));
        }
        report(4, "boundary values on X", worst <= 1e-10, "max rel err=" + g(worst));
    }
    {
        std::mt19937_64 rng(5);
        double worst = 0.0, ortho = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Point p = random_in_annulus(rng, 0.5, 1.9);
            const auto ad = obj.grad_adjoint(p);
            const auto fd = obj.grad_fd(p, 1e-5);
            worst = std::max(worst, norm(ad.grad - fd.grad) / norm(fd.grad));
            ortho = std::max(ortho, ad.estimated_error);
        }
        report(5, "gradient cross-validation", worst <= 1e-4 && ortho <= 1e-8,
               "max rel err=" + g(worst) + " max orthogonality defect=" + g(ortho));
    }

    const std::string pl_json = (std::filesystem::temp_directory_path() / "gdapl_acceptance_pl.json").string();
    std::string pl_out;
    const int pl_code = run_cli({"--report", pl_json, "verify", "pl", "--grid", "161", "--half-width", "2"}, &pl_out);
    Json pl;
    try {
        std::ifstream f(pl_json);
        pl = Json::parse(f);
    } catch (const std::exception& e) {
        std::cout << "could not read PL report: " << e.what() << '\n' << pl_out;
    }
    {
        const double hw = 0.7 * mp.r_core;
        const auto patch = two_sided_pl_on_grid(
            [&obj](Point p) {
                const auto vg = obj.evaluate(p);
                return GridSample{vg.value, vg.gradient.grad, true};
            },
            41, hw);
        const double target = 1.0 / (2.0 * mp.gamma);
        const double rel = std::abs(patch.C_x - target) / target;
        bool ok = pl_code == 0 && pl.is_object() && pl["violations"].empty() && pl["C_x"].is_number() &&
                  pl["C_y"].is_number() && rel <= 0.02;
        std::string detail = "exit=" + std::to_string(pl_code);
        if (pl.is_object())
            detail += " violations=" + std::to_string(pl["violations"].size()) + " C_x=" + pl["C_x"].dump() +
                      " C_y=" + pl["C_y"].dump() + " excluded=" + pl["excluded"].dump();
        detail += " patch C_x=" + g(patch.C_x) + " (1/(2 gamma)=" + g(target) + ")";
        report(6, "two-sided PL certificate", ok, detail);
    }
    {
        bool ok = false;
        std::string detail = "no report";
        if (pl.is_object() && pl["min_dxx_on_XMinus"].is_number() && pl["max_dyy_on_XPlus"].is_number()) {
            const double dxx = pl["min_dxx_on_XMinus"].get<double>(), dyy = pl["max_dyy_on_XPlus"].get<double>();
            ok = dxx > 0.0 && dyy < 0.0;
            detail = "margin d2f/dx2 on XMinus >= " + g(dxx) + ", d2f/dy2 on XPlus <= " + g(dyy);
        }
        report(7, "second-derivative signs on X", ok, detail);
    }
    {
        const auto rep = local_convergence_run(obj, {0.1, 0.0}, 5.0);
        const double expect = 0.1 * std::exp(-5.0 * mp.gamma);
        const bool ok = std::abs(rep.final_norm - expect) <= 1e-5 && std::abs(rep.fit_rate + mp.gamma) <= 1e-4;
        report(8, "local convergence", ok,
               "|z(5)|=" + g(rep.final_norm) + " expected " + g(expect) + " fit rate=" + g(rep.fit_rate));
    }
    {
        bool ok = true;
        std::string detail;
        for (double x0 : {1.6, 1.55, 1.65}) {
            try {
                const auto traj = simulate_gda(obj, {x0, 0.0}, 25.0);
                const auto rep = detect_period(traj, {x0, 0.0});
                ok = ok && rep.max_g_drift_rel <= 1e-7 && rep.return_distance <= 1e-4;
                detail += "x0=" + g(x0) + " T=" + format_fixed(rep.period_T, 10) + " drift=" +
                          g(rep.max_g_drift_rel) + " return=" + g(rep.return_distance) + "; ";
            } catch (const std::exception& e) {
                ok = false;
                detail += "x0=" + g(x0) + " error: " + e.what() + "; ";
            }
        }
        report(9, "periodic orbits", ok, detail);
    }
    {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double x = u(rng), y = u(rng);
            const double rhs = 2.0 * mp.alpha * mp.alpha * quartic_invariant(x, y);
            worst = std::max(worst, std::abs(rotated_l4(x, y, mp) - rhs) / rhs);
        }
        const double lhs = rotated_l4(1.0, 0.0, mp), rhs = 2.0 * mp.alpha * mp.alpha * quartic_invariant(1.0, 0.0);
        const bool ok = worst <= 1e-12 && std::abs(lhs - 1.029437) <= 5e-7 && std::abs(rhs - 1.029437) <= 5e-7;
        report(10, "rotated L4 identity", ok, "max rel err=" + g(worst) + " at (1,0): " + g(lhs) + " vs " + g(rhs));
    }
    {
        const auto s = origin_spectrum(mp);
        const double e = std::max({std::abs(s.eig1.real() + mp.gamma), std::abs(s.eig2.real() + mp.gamma),
                                   std::abs(std::abs(s.eig1.imag()) - 1.0), std::abs(std::abs(s.eig2.imag()) - 1.0),
                                   std::abs(s.eig1.imag() + s.eig2.imag())});
        report(11, "origin spectrum", e <= 1e-12 && s.max_real_part < 0.0,
               "eigenvalue error=" + g(e) + " max real part=" + g(s.max_real_part));
    }
    {
        bool ok = false;
        std::string detail = "no report";
        if (pl.is_object() && pl["min_grad_norm"]["value"].is_number()) {
            const double m = pl["min_grad_norm"]["value"].get<double>();
            ok = m > 0.0;
            detail = "min |grad f| over |p| >= 0.05 = " + g(m);
        }
        report(12, "no critical point off the origin", ok, detail);
    }
    {
        const auto dir = std::filesystem::temp_directory_path();
        const std::string a = (dir / "gdapl_acceptance_a.svg").string(), b = (dir / "gdapl_acceptance_b.svg").string();
        const int ca = run_cli({"figure", "--out", a}), cb = run_cli({"figure", "--out", b});
        const std::string sa = slurp(a), sb = slurp(b);
        const std::size_t levels = count(sa, "class=\"level-line\"");
        const bool ok = ca == 0 && cb == 0 && !sa.empty() && sa == sb && levels == 48 &&
                        count(sa, "class=\"x-line\"") == 2 && count(sa, "class=\"ellipse\"") == 4 &&
                        count(sa, "class=\"orbit\"") == 1;
        report(13, "figure", ok,
               "bytes=" + std::to_string(sa.size()) + " identical=" + (sa == sb ? "yes" : "no") +
                   " level lines=" + std::to_string(levels));
        std::filesystem::remove(a);
        std::filesystem::remove(b);
    }
    std::filesystem::remove(pl_json);

    std::cout << (failures == 0 ? "all 13 criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
