#include <gtest/gtest.h>

#include <regex>

#include "gdapl/figure.hpp"

using namespace gdapl;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST(Figure, SeedsLieOnX) {
    const auto mp = compute_params();
    FigureSpec spec;
    const auto seeds = level_line_seeds(spec, mp);
    EXPECT_EQ(seeds.size(), 48u);
    for (const auto& [p, b] : seeds) {
        const auto d = diag_coords(p, mp);
        EXPECT_NEAR(b == XBranch::XPlus ? d.l1 : d.l2, 0.0, 1e-14);
        EXPECT_LE(std::max(std::abs(p.x), std::abs(p.y)), spec.half_width);
        EXPECT_GE(norm(p), spec.seed_min_distance * (1 - 1e-12));
    }
}

TEST(Figure, EllipsesOnTheirLevel) {
    const auto mp = compute_params();
    for (double level : {0.5, 1.0}) {
        const auto plus = ellipse_points(FormKind::Plus, level, 64, mp);
        const auto minus = ellipse_points(FormKind::Minus, level, 64, mp);
        ASSERT_EQ(plus.size(), 65u);
        EXPECT_EQ(plus.front(), plus.back());
        for (std::size_t i = 0; i < plus.size(); ++i) {
            EXPECT_NEAR(form_plus(plus[i], mp), level, 1e-12);
            EXPECT_NEAR(form_minus(minus[i], mp), level, 1e-12);
            // the minus ellipse is the quarter turn of the plus ellipse
            EXPECT_NEAR(form_minus({plus[i].y, -plus[i].x}, mp), level, 1e-12);
        }
    }
    EXPECT_THROW(ellipse_points(FormKind::Plus, 0.0, 64, mp), std::invalid_argument);
    EXPECT_THROW(ellipse_points(FormKind::Plus, 1.0, 2, mp), std::invalid_argument);
}

TEST(Figure, ColormapMonotone) {
    FigureSpec spec;
    int prev = -1;
    for (double l = -3.0; l <= 2.0; l += 0.01) {
        const int c = color_index(std::pow(10.0, l), spec);
        EXPECT_GE(c, prev);
        prev = c;
    }
    EXPECT_EQ(color_index(0.0, spec), 0);
    EXPECT_EQ(color_index(1e3, spec), 255);
    EXPECT_EQ(color_hex(0), "#440154");
    EXPECT_EQ(color_hex(255), "#fde725");
    // luminance increases along the scale
    auto lum = [](int i) {
        const auto c = color_rgb(i);
        return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
    };
    for (int i = 1; i < 256; ++i) EXPECT_GE(lum(i), lum(i - 1) - 1.0);
}

TEST(Figure, SvgLayers) {
    const Objective obj = Objective::calibrated();
    FigureSpec spec;
    spec.seeds_per_branch = 4;
    const auto data = build_figure(spec, obj);
    EXPECT_TRUE(data.levels.errors.empty());
    EXPECT_EQ(data.levels.lines.size(), 8u);
    const std::string svg = render_figure_svg(spec, obj.params(), data);
    EXPECT_NE(svg.find("<svg xmlns"), std::string::npos);
    for (const char* id : {"axes", "levels", "X", "ellipses", "orbit"})
        EXPECT_NE(svg.find(std::string("id=\"") + id + "\""), std::string::npos) << id;
    EXPECT_EQ(count(svg, "class=\"level-line\""), 8u);
    EXPECT_EQ(count(svg, "class=\"x-line\""), 2u);
    EXPECT_EQ(count(svg, "class=\"ellipse\""), 4u);
    EXPECT_EQ(count(svg, "class=\"orbit\""), 1u);
    EXPECT_TRUE(std::regex_search(svg, std::regex("stroke=\"#[0-9a-f]{6}\"")));
}
