#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gdapl/smooth.hpp"

using namespace gdapl;

TEST(Rho, KnownValues) {
    EXPECT_DOUBLE_EQ(rho(0.5), 0.5);
    // 40-digit evaluation of e^{-4/3} / (e^{-4/3} + e^{-4})
    EXPECT_NEAR(rho(0.75), 0.9350308308713359, 1e-15);
    EXPECT_EQ(rho(1e-9), 0.0);
    EXPECT_EQ(rho(1.0 - 1e-9), 1.0);
    EXPECT_EQ(rho(-2.0), 0.0);
    EXPECT_EQ(rho(3.0), 1.0);
}

TEST(Rho, SymmetricAndIncreasing) {
    double prev = 0.0;
    for (int i = 1; i < 10000; ++i) {
        const double u = i / 10000.0;
        EXPECT_NEAR(rho(u) + rho(1.0 - u), 1.0, 1e-15);
        EXPECT_GE(rho(u), prev);
        prev = rho(u);
    }
}

TEST(Rho, DerivativeMatchesFiniteDifferences) {
    for (int i = 1; i < 200; ++i) {
        const double u = i / 200.0;
        const double h = 1e-6;
        const double fd = (rho(u + h) - rho(u - h)) / (2 * h);
        EXPECT_NEAR(rho_prime(u), fd, 1e-6 * (1.0 + std::abs(fd))) << u;
    }
}

TEST(Phi, BranchValues) {
    EXPECT_EQ(phi(0.3), 1.0);
    EXPECT_EQ(phi(0.0), 1.0);
    EXPECT_EQ(phi(2.0), 4.0);
    EXPECT_DOUBLE_EQ(phi(0.75), 1.25);
    EXPECT_THROW(phi(-1e-3), std::domain_error);
    EXPECT_THROW(phi_prime(-1.0), std::domain_error);
}

TEST(Phi, ContinuousAtJunctions) {
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        EXPECT_LE(std::abs(phi(0.5 + eps) - 1.0), 10 * eps) << eps;
        EXPECT_LE(std::abs(phi(1.0 - eps) - 2.0), 10 * eps) << eps;
    }
    EXPECT_NEAR(phi(0.5 + 1e-6), 1.0, 1e-15);
    EXPECT_NEAR(phi(1.0 - 1e-6), 2.0 - 2e-6, 1e-12);
}

TEST(Phi, Monotone) {
    double prev = phi(0.0);
    for (int i = 1; i <= 10000; ++i) {
        const double t = 3.0 * i / 10000.0;
        const double v = phi(t);
        ASSERT_GE(v, prev) << t;
        prev = v;
    }
}

TEST(Phi, FlatAtJoins) {
    // phi minus the adjacent branch vanishes faster than any power
    for (double eps : {2e-2, 1e-2, 5e-3, 1e-3}) {
        EXPECT_LE(std::abs(phi(0.5 + eps) - 1.0), std::pow(eps, 4)) << eps;
        EXPECT_LE(std::abs(phi_prime(0.5 + eps)), std::pow(eps, 3)) << eps;
        EXPECT_LE(std::abs(phi(1.0 - eps) - 2.0 * (1.0 - eps)), std::pow(eps, 4)) << eps;
        EXPECT_LE(std::abs(phi_prime(1.0 - eps) - 2.0), std::pow(eps, 3)) << eps;
    }
}

TEST(Phi, DerivativeMatchesFiniteDifferences) {
    EXPECT_EQ(phi_prime(0.2), 0.0);
    EXPECT_EQ(phi_prime(3.0), 2.0);
    const double h = 1e-6;
    EXPECT_NEAR(phi_prime(0.75), (phi(0.75 + h) - phi(0.75 - h)) / (2 * h), 1e-6);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    int n = 0;
    while (n < 1000) {
        const double t = u(rng);
        if (std::abs(t - 0.5) < 1e-3 || std::abs(t - 1.0) < 1e-3) continue;
        ++n;
        const double fd = (phi(t + h) - phi(t - h)) / (2 * h);
        EXPECT_NEAR(phi_prime(t), fd, 1e-6 * std::max(1.0, std::abs(fd))) << t;
    }
}
