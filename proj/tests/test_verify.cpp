#include <gtest/gtest.h>

#include <cmath>

#include "gdapl/verify.hpp"

using namespace gdapl;

namespace {

const Objective& objective() {
    static const Objective obj = Objective::calibrated();
    return obj;
}

}  // namespace

TEST(PL1D, ConvexQuadratic) {
    const ScalarOracle sq{[](double x) { return x * x; }, [](double x) { return 2 * x; },
                          [](double) { return 2.0; }};
    const auto r = pl_check_1d(sq, -1.0, 1.0, 201);
    EXPECT_TRUE(r.criterion_holds);
    ASSERT_EQ(r.critical_points.size(), 1u);
    EXPECT_NEAR(r.critical_points[0].x, 0.0, 1e-15);
    EXPECT_NEAR(r.estimated_C, 0.25, 1e-12);
}

TEST(PL1D, NonconvexPLFunction) {
    // x^2 + 3 sin^2 x is PL but not convex
    const ScalarOracle f{[](double x) { return x * x + 3 * std::sin(x) * std::sin(x); },
                         [](double x) { return 2 * x + 3 * std::sin(2 * x); },
                         [](double x) { return 2 + 6 * std::cos(2 * x); }};
    const auto r = pl_check_1d(f, -4.0, 4.0, 4001);
    EXPECT_TRUE(r.criterion_holds);
    EXPECT_EQ(r.critical_points.size(), 1u);
    EXPECT_GT(r.estimated_C, 0.0);
    EXPECT_TRUE(std::isfinite(r.estimated_C));
}

TEST(PL1D, DegenerateCriticalPointFails) {
    const ScalarOracle cube{[](double x) { return x * x * x; }, [](double x) { return 3 * x * x; },
                            [](double x) { return 6 * x; }};
    EXPECT_FALSE(pl_check_1d(cube, -1.0, 1.0, 201).criterion_holds);
    const ScalarOracle wave{[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                            [](double x) { return -std::sin(x); }};
    EXPECT_FALSE(pl_check_1d(wave, 0.0, 7.0, 701).criterion_holds);
    EXPECT_THROW(pl_check_1d(wave, 1.0, 0.0, 10), std::invalid_argument);
    EXPECT_THROW(pl_check_1d(wave, 0.0, 1.0, 2), std::invalid_argument);
}

TEST(PLGrid, SaddleQuadratic) {
    // f = x^2 - y^2: (f - min_x f) / fx^2 = 1/4 and likewise for y
    const auto r = two_sided_pl_on_grid(
        [](Point p) { return GridSample{p.x * p.x - p.y * p.y, {2 * p.x, -2 * p.y}, true}; }, 41, 1.0);
    EXPECT_TRUE(r.certified());
    EXPECT_NEAR(r.C_x, 0.25, 1e-12);
    EXPECT_NEAR(r.C_y, 0.25, 1e-12);
    EXPECT_EQ(r.excluded_x, 41u);  // the column x = 0
    EXPECT_EQ(r.excluded_y, 41u);
    EXPECT_EQ(r.failures, 0u);
}

TEST(PLGrid, FlatDirectionIsAViolation) {
    // f = y^3: f_y vanishes on y = 0 while max_y f - f = 1
    const auto r = two_sided_pl_on_grid(
        [](Point p) { return GridSample{p.y * p.y * p.y, {0.0, 3 * p.y * p.y}, true}; }, 21, 1.0);
    EXPECT_FALSE(r.certified());
    EXPECT_EQ(r.violations.size(), 21u);
    for (const auto& v : r.violations) {
        EXPECT_EQ(v.side, 'y');
        EXPECT_NEAR(v.p.y, 0.0, 1e-15);
    }
}

TEST(PLGrid, ObjectiveCoarse) {
    const auto r = two_sided_pl_grid(objective(), 21, 2.0, {}, 6);
    EXPECT_TRUE(r.certified());
    EXPECT_GT(r.C_x, 0.0);
    EXPECT_GT(r.C_y, 0.0);
    EXPECT_EQ(r.failures, 0u);
    EXPECT_GT(r.min_dxx_on_XMinus, 0.0);
    EXPECT_LT(r.max_dyy_on_XPlus, 0.0);
    EXPECT_EQ(r.dxx_on_XMinus.size(), 6u);
    EXPECT_THROW(two_sided_pl_grid(objective(), 21, 3.0), std::invalid_argument);
}

TEST(Spectrum, Origin) {
    const auto& mp = objective().params();
    const auto s = origin_spectrum(mp);
    EXPECT_NEAR(s.eig1.real(), -mp.gamma, 1e-15);
    EXPECT_NEAR(s.eig2.real(), -mp.gamma, 1e-15);
    EXPECT_NEAR(std::abs(s.eig1.imag()), 1.0, 1e-15);
    EXPECT_NEAR(s.max_real_part, -0.2530765865415995, 1e-15);
    EXPECT_EQ(s.symmetric_part.m12, 0.0);
    const auto [a, b] = eigenvalues(Mat2{2.0, 0.0, 0.0, -3.0});
    EXPECT_DOUBLE_EQ(std::max(a.real(), b.real()), 2.0);
    EXPECT_DOUBLE_EQ(std::min(a.real(), b.real()), -3.0);
}

TEST(Identities, SuitePasses) {
    const auto rep = identity_suite(objective(), 200, 7);
    EXPECT_EQ(rep.identities.size(), 7u);
    for (const auto& r : rep.identities) EXPECT_TRUE(r.pass) << r.name << ' ' << r.max_rel_err;
    EXPECT_TRUE(rep.all_pass());
    EXPECT_THROW(identity_suite(objective(), 0, 1), std::invalid_argument);
}

TEST(PL1D, ReferenceExamples) {
    const ScalarOracle quartic{[](double x) { return x * x * x * x; }, [](double x) { return 4 * x * x * x; },
                               [](double x) { return 12 * x * x; }};
    EXPECT_FALSE(pl_check_1d(quartic, -1.0, 1.0, 201).criterion_holds);
    const ScalarOracle line{[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    const auto r = pl_check_1d(line, 0.0, 1.0, 101);
    EXPECT_TRUE(r.criterion_holds);
    EXPECT_TRUE(r.critical_points.empty());
    EXPECT_NEAR(r.estimated_C, 1.0, 1e-9);
}

TEST(PL1D, RestrictionsOfObjective) {
    // x -> f(x, y0) has a single nondegenerate minimum, on XMinus
    const auto& obj = objective();
    const double g = obj.params().gamma;
    for (double y0 : {-1.0, -0.3, 0.4, 1.2}) {
        const ScalarOracle fn{
            [&](double x) { return obj.value({x, y0}); },
            [&](double x) { return obj.grad_adjoint({x, y0}).grad.x; },
            [&](double x) {
                const double h = 1e-4;
                return (obj.value({x + h, y0}) - 2 * obj.value({x, y0}) + obj.value({x - h, y0})) / (h * h);
            }};
        const auto r = pl_check_1d(fn, -5.0, 5.0, 201);
        EXPECT_TRUE(r.criterion_holds) << y0;
        ASSERT_EQ(r.critical_points.size(), 1u) << y0;
        EXPECT_NEAR(r.critical_points[0].x, -y0 / g, 1e-6) << y0;
    }
}

TEST(PLGrid, BilinearSelfTest) {
    const auto r = two_sided_pl_on_grid(
        [](Point p) { return GridSample{p.x * p.y, {p.y, p.x}, true}; }, 3, 1.0);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_EQ(r.excluded_x, 3u);
    EXPECT_EQ(r.excluded_y, 3u);
    EXPECT_DOUBLE_EQ(r.C_x, 2.0);
}

TEST(PLGrid, CorePatchConstant) {
    const auto& obj = objective();
    const double hw = 0.7 * obj.params().r_core;
    const auto r = two_sided_pl_on_grid(
        [&obj](Point p) {
            const auto vg = obj.evaluate(p);
            return GridSample{vg.value, vg.gradient.grad, true};
        },
        41, hw);
    EXPECT_NEAR(r.C_x, 1.9756865177957207, 0.02 * 1.9756865177957207);
    EXPECT_NEAR(r.C_y, 1.9756865177957207, 0.02 * 1.9756865177957207);
}

TEST(PLGrid, RefinementKeepsCertificate) {
    const auto coarse = two_sided_pl_grid(objective(), 41, 2.0, {}, 0);
    const auto fine = two_sided_pl_grid(objective(), 81, 2.0, {}, 0);
    ASSERT_TRUE(coarse.violations.empty());
    EXPECT_TRUE(fine.violations.empty());
}

TEST(Spectrum, MatchesFiniteDifferenceJacobian) {
    const auto& obj = objective();
    const auto s = origin_spectrum(obj.params());
    const double h = 1e-4;
    auto gda = [&](Point p) {
        const Point g = obj.grad_adjoint(p).grad;
        return Point{-g.x, g.y};
    };
    const Point dx = (1.0 / (2 * h)) * (gda({h, 0}) - gda({-h, 0}));
    const Point dy = (1.0 / (2 * h)) * (gda({0, h}) - gda({0, -h}));
    EXPECT_NEAR(s.jacobian.m11, dx.x, 1e-6);
    EXPECT_NEAR(s.jacobian.m21, dx.y, 1e-6);
    EXPECT_NEAR(s.jacobian.m12, dy.x, 1e-6);
    EXPECT_NEAR(s.jacobian.m22, dy.y, 1e-6);
    EXPECT_NEAR(s.symmetric_part.m11, -obj.params().gamma, 1e-15);
    EXPECT_NEAR(s.symmetric_part.m22, -obj.params().gamma, 1e-15);
}
