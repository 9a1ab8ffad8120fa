#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nnw/quadrature.hpp"

using nnw::QuadratureStatus;

TEST(Quadrature, Polynomial) {
    const auto r = nnw::integrate([](double x) { return x * x; }, 0.0, 1.0);
    EXPECT_EQ(r.status, QuadratureStatus::converged);
    EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-12);
}

TEST(Quadrature, GaussianOverRealLine) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto r = nnw::integrate([](double x) { return std::exp(-x * x); }, -inf, inf);
    EXPECT_EQ(r.status, QuadratureStatus::converged);
    EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi), 1e-10);
}

TEST(Quadrature, HalfLines) {
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_NEAR(nnw::integrate([](double x) { return std::exp(-x); }, 0.0, inf).value, 1.0, 1e-10);
    EXPECT_NEAR(nnw::integrate([](double x) { return std::exp(x); }, -inf, 0.0).value, 1.0, 1e-10);
}

TEST(Quadrature, IntegrableEndpointSingularity) {
    // int_0^1 x^-0.75 dx = 4
    const auto r = nnw::integrate([](double x) { return std::pow(x, -0.75); }, 0.0, 1.0);
    EXPECT_EQ(r.status, QuadratureStatus::converged);
    EXPECT_NEAR(r.value, 4.0, 1e-7);
}

TEST(Quadrature, DivergenceIsReported) {
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(nnw::integrate([](double x) { return 1.0 / x; }, 0.0, 1.0).status, QuadratureStatus::diverged);
    EXPECT_EQ(nnw::integrate([](double x) { return std::pow(x, -1.25); }, 0.0, 1.0).status,
              QuadratureStatus::diverged);
    EXPECT_EQ(nnw::integrate([](double x) { return std::exp(0.1 * x * x); }, -inf, inf).status,
              QuadratureStatus::diverged);
}

TEST(Quadrature, ZeroIntegralIsNotDivergent) {
    const auto r = nnw::integrate([](double x) { return std::sin(x); }, -1.0, 1.0);
    EXPECT_EQ(r.status, QuadratureStatus::converged);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Quadrature, Pieces) {
    const std::vector<nnw::Interval> pieces{{0.0, 0.25}, {0.5, 1.0}};
    const auto r = nnw::integrate_pieces([](double) { return 2.0; }, pieces);
    EXPECT_NEAR(r.value, 1.5, 1e-12);
    EXPECT_EQ(r.status, QuadratureStatus::converged);
}

TEST(Quadrature, StatusNames) {
    EXPECT_EQ(nnw::to_string(QuadratureStatus::converged), "converged");
    EXPECT_EQ(nnw::to_string(QuadratureStatus::diverged), "diverged");
    EXPECT_EQ(nnw::to_string(QuadratureStatus::not_converged), "not_converged");
}

TEST(Quadrature, LogarithmicDivergenceAtEitherEnd) {
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(nnw::integrate([](double x) { return 1.0 / (1.0 - x); }, 0.0, 1.0).status, QuadratureStatus::diverged);
    EXPECT_EQ(nnw::integrate([](double x) { return 1.0 / x; }, 1.0, inf).status, QuadratureStatus::diverged);
    EXPECT_EQ(nnw::integrate([](double x) { return -1.0 / x; }, -inf, -1.0).status, QuadratureStatus::diverged);
}

TEST(Quadrature, StrongIntegrableSingularityConverges) {
    // int_0^1 x^-0.9 dx = 10; int_0^1 x^-0.95 dx = 20
    auto r = nnw::integrate([](double x) { return std::pow(x, -0.9); }, 0.0, 1.0);
    EXPECT_EQ(r.status, QuadratureStatus::converged);
    EXPECT_NEAR(r.value, 10.0, 1e-6);
    r = nnw::integrate([](double x) { return std::pow(x, -0.95); }, 0.0, 1.0);
    EXPECT_NE(r.status, QuadratureStatus::diverged);
    EXPECT_NEAR(r.value, 20.0, 1e-3);
}
