#include <doctest.h>

#include <cmath>
#include <random>

#include "cayley/criticality.hpp"
#include "cayley/recursion.hpp"

using namespace cayley;

namespace {

// Central differences of the kernel itself, independent of the closed forms.
double fd_first(double x, double theta, double step) {
    return (kernel_F(x + step, theta) - kernel_F(x - step, theta)) / (2.0 * step);
}

double fd_second(double x, double theta, double step) {
    return (kernel_F_prime(x + step, theta) - kernel_F_prime(x - step, theta)) / (2.0 * step);
}

}  // namespace

TEST_CASE("kernel values") {
    CHECK(kernel_F(0.0, 0.5) == 0.0);
    // arctanh(1/2) = ln(3)/2 = 0.54930614433405484569762...
    CHECK(kernel_F(ExtendedReal::plus_infinity(), 0.5) == doctest::Approx(0.5493061443340548).epsilon(1e-15));
    CHECK(kernel_F(ExtendedReal::minus_infinity(), 0.5) == doctest::Approx(-0.5493061443340548).epsilon(1e-15));
    // 40-digit evaluation of arctanh(0.8 tanh 1): 0.70776804563198601958...
    CHECK(kernel_F(1.0, 0.8) == doctest::Approx(0.7077680456319860).epsilon(1e-14));
    CHECK_THROWS_AS(kernel_F(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(kernel_F(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(kernel_F_prime(1.0, 1.2), DomainError);
}

TEST_CASE("kernel derivatives") {
    for (double theta : {0.1, 0.5, 0.9}) {
        CHECK(kernel_F_prime(0.0, theta) == doctest::Approx(theta).epsilon(1e-15));
        CHECK(kernel_F_second(0.0, theta) == 0.0);
    }
    // high-precision derivatives at (1, 0.8): F' = 0.53433245508997830366, F'' = -0.46597912549418255265
    CHECK(kernel_F_prime(1.0, 0.8) == doctest::Approx(0.5343324550899783).epsilon(1e-14));
    CHECK(kernel_F_second(1.0, 0.8) == doctest::Approx(-0.4659791254941826).epsilon(1e-14));
    CHECK(std::abs(kernel_F_prime(1.0, 0.8) - fd_first(1.0, 0.8, 1e-6)) < 1e-8);
    // far tails stay finite and non-negative
    CHECK(kernel_F_prime(400.0, 0.8) == 0.0);
    CHECK(kernel_F_prime(30.0, 0.8) > 0.0);
}

TEST_CASE("derivatives match central differences on a grid") {
    for (double theta : {0.3, 0.6, 0.9}) {
        for (int i = 0; i <= 200; ++i) {
            const double x = -5.0 + 0.05 * i;
            CAPTURE(x);
            CAPTURE(theta);
            REQUIRE(std::abs(kernel_F_prime(x, theta) - fd_first(x, theta, 1e-5)) < 1e-7);
            REQUIRE(std::abs(kernel_F_second(x, theta) - fd_second(x, theta, 1e-5)) < 1e-7);
        }
    }
}

TEST_CASE("kernel is odd, increasing and bounded") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xs(-20.0, 20.0);
    std::uniform_real_distribution<double> thetas(0.01, 0.99);
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = xs(rng);
        const double y = xs(rng);
        const double theta = thetas(rng);
        const double bound = std::atanh(theta);
        REQUIRE(kernel_F(-x, theta) == -kernel_F(x, theta));
        REQUIRE(std::abs(kernel_F(x, theta)) <= bound * (1.0 + 1e-15));
        if (x < y - 1e-9 && std::abs(y) < 15.0 && std::abs(x) < 15.0) REQUIRE(kernel_F(x, theta) < kernel_F(y, theta));
    }
    CHECK(std::abs(kernel_F(3.0, 0.7)) < std::atanh(0.7));
}

TEST_CASE("psi") {
    const ModelParams p = make_params_from_theta(2, 1.0, 0.8);
    CHECK(psi(0.0, 0.0, p) == 0.0);
    const double hc = critical_field(p);
    // -h_c + 2 arctanh(0.8) = 1.77917657307607363603...
    CHECK(psi(ExtendedReal::plus_infinity(), -hc, p) == doctest::Approx(1.7791765730760736).epsilon(1e-14));
    CHECK(psi(ExtendedReal::minus_infinity(), 0.2, p) == doctest::Approx(0.2 - 2.0 * std::atanh(0.8)).epsilon(1e-15));
    for (double h : {-1.0, 0.0, 0.7}) CHECK(psi(1.0, h, p) > psi(0.0, h, p));
}

TEST_CASE("mean-value bound for psi") {
    const ModelParams p = make_params(3, 1.0, 0.9);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> xs(-4.0, 4.0);
    for (int trial = 0; trial < 500; ++trial) {
        double x = xs(rng), y = xs(rng);
        if (x > y) std::swap(x, y);
        double sup = 0.0;
        for (int i = 0; i <= 400; ++i) sup = std::max(sup, psi_prime(x + (y - x) * i / 400.0, p));
        // psi' is unimodal so the sampled sup is within one grid step of the true sup
        const double slack = 1e-12 + 1e-3 * (y - x);
        REQUIRE(std::abs(psi(y, 0.1, p) - psi(x, 0.1, p)) <= sup * (y - x) + slack);
    }
}

TEST_CASE("iterate_backward") {
    const ModelParams p = make_params_from_theta(2, 1.0, 0.8);

    SUBCASE("fixed point seed gives a constant trace") {
        const FixedPointReport report = fixed_points(0.0, p);
        const double b = report.points.back().b;
        const IterationTrace trace = iterate_backward(FieldProfile::homogeneous(0.0), p, 60, 1, b);
        for (double v : trace.values) CHECK(v == doctest::Approx(b).epsilon(1e-13));
    }

    SUBCASE("infinite seed approaches the saddle from above") {
        const CriticalPair pair = critical_pair(p);
        const IterationTrace trace =
            iterate_backward(FieldProfile::homogeneous(-pair.h_c), p, 40, 1, ExtendedReal::plus_infinity());
        // 40 applications of psi at h = -h_c from +inf, run at 40 digits: 1.11989449289684570430...
        CHECK(trace.front() == doctest::Approx(1.1198944928968457).epsilon(1e-12));
        for (std::int64_t m = 1; m < 40; ++m) {
            REQUIRE(trace.at(m) < trace.at(m + 1));
            REQUIRE(trace.at(m) > pair.b_plus);
        }
        // the saddle node is approached algebraically: gap ~ 2 / (|psi''(b+)| m)
        const double gap = iterate_backward_value(FieldProfile::homogeneous(-pair.h_c), p, 1600, 1,
                                                  ExtendedReal::plus_infinity()) -
                           pair.b_plus;
        CHECK(gap == doctest::Approx(0.0013103464550826904).epsilon(1e-6));
    }

    SUBCASE("zero perturbation reproduces the critical homogeneous trace") {
        const double hc = critical_field(p);
        const auto a = iterate_backward(FieldProfile::homogeneous(-hc), p, 80, 3, 0.4);
        const auto b = iterate_backward(FieldProfile::critical_minus(EpsilonFamily::custom({0.0})), p, 80, 3, 0.4);
        CHECK(a.values == b.values);
    }

    SUBCASE("trace bookkeeping and residual") {
        const auto profile = FieldProfile::critical_minus(EpsilonFamily::power_law(2.0));
        const auto trace = iterate_backward(profile, p, 300, 5, ExtendedReal::minus_infinity());
        CHECK(trace.values.size() == 296);
        CHECK(trace.start_depth == 300);
        CHECK(trace.end_depth == 5);
        CHECK(recursion_residual(trace) <= kRecursionResidualTolerance);
        CHECK(iterate_backward_value(profile, p, 300, 5, ExtendedReal::minus_infinity()) == trace.front());
    }

    SUBCASE("depth errors") {
        CHECK_THROWS_AS(iterate_backward(FieldProfile::homogeneous(0.0), p, 3, 4, 0.0), DomainError);
        CHECK_THROWS_AS(iterate_backward(FieldProfile::homogeneous(0.0), p, 3, 0, 0.0), DomainError);
    }
}

TEST_CASE("seed monotonicity of backward traces") {
    const ModelParams p = make_params(2, 1.0, 1.4);
    const auto profile = FieldProfile::critical_minus(EpsilonFamily::power_law(1.25));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> seeds(-6.0, 6.0);
    for (int trial = 0; trial < 50; ++trial) {
        double a = seeds(rng), b = seeds(rng);
        if (a > b) std::swap(a, b);
        const auto lo = iterate_backward(profile, p, 200, 1, a);
        const auto hi = iterate_backward(profile, p, 200, 1, b);
        for (std::size_t i = 0; i < lo.values.size(); ++i) REQUIRE(lo.values[i] <= hi.values[i]);
        REQUIRE(recursion_residual(lo) <= kRecursionResidualTolerance);
    }
}
