#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hjfd/hamiltonian.hpp"

namespace {

using hjfd::Hamiltonian;

TEST(Hamiltonian, BasicEvaluators) {
    const Hamiltonian q = Hamiltonian::quadratic();
    EXPECT_DOUBLE_EQ(q(3.0), 4.5);
    EXPECT_DOUBLE_EQ(q.derivative(3.0), 3.0);
    EXPECT_DOUBLE_EQ(q.second_derivative(-1.0), 1.0);

    const Hamiltonian p4 = Hamiltonian::power_even(4);
    EXPECT_DOUBLE_EQ(p4(2.0), 4.0);
    EXPECT_DOUBLE_EQ(p4.derivative(2.0), 8.0);
    EXPECT_DOUBLE_EQ(p4.second_derivative(2.0), 12.0);

    EXPECT_THROW(Hamiltonian::power_even(3), std::invalid_argument);
    EXPECT_THROW(Hamiltonian::power_even(0), std::invalid_argument);
}

TEST(Hamiltonian, TabulatedSecondDerivativeIsOptional) {
    const Hamiltonian h = Hamiltonian::tabulated([](double p) { return 0.5 * p * p; },
                                                 [](double p) { return p; });
    EXPECT_FALSE(h.has_second_derivative());
    EXPECT_THROW(h.second_derivative(0.0), hjfd::UnsupportedOperation);
}

TEST(GammaBound, QuadraticClosedForm) {
    EXPECT_NEAR(hjfd::gamma_bound(Hamiltonian::quadratic(), 2.0), 1.01, 1e-12);
}

TEST(GammaBound, QuarticClosedForm) {
    EXPECT_NEAR(hjfd::gamma_bound(Hamiltonian::power_even(4), 1.0), 0.505, 1e-12);
}

// Dense-grid oracle: brute-force max of |H'| over 10^6 samples.
TEST(GammaBound, TabulatedAgainstBruteForce) {
    const Hamiltonian h = Hamiltonian::tabulated(
        [](double p) { return 0.5 * p * p + 0.2 * std::cos(3.0 * p); },
        [](double p) { return p - 0.6 * std::sin(3.0 * p); });
    const double radius = 2.5;
    double brute = 0.0;
    constexpr int samples = 1000001;
    for (int i = 0; i < samples; ++i) {
        const double p = -radius + 2.0 * radius * i / (samples - 1);
        brute = std::max(brute, std::abs(h.derivative(p)));
    }
    const double gamma = hjfd::gamma_bound(h, radius);
    EXPECT_NEAR(gamma, 0.5 * brute * 1.01, 0.01 * gamma);
}

TEST(Legendre, QuadraticClosedForm) {
    EXPECT_DOUBLE_EQ(hjfd::legendre(Hamiltonian::quadratic(), 3.0, -10.0, 10.0), 4.5);
}

// Brute-force oracle over a dense p grid; the quartic dual is (3/4)|q|^{4/3}.
TEST(Legendre, QuarticAgainstBruteForce) {
    const Hamiltonian h = Hamiltonian::power_even(4);
    const double q = 1.0;
    double brute = -1e300;
    constexpr int samples = 2000001;
    for (int i = 0; i < samples; ++i) {
        const double p = -3.0 + 6.0 * i / (samples - 1);
        brute = std::max(brute, p * q - h(p));
    }
    EXPECT_NEAR(brute, 0.75, 1e-10);
    EXPECT_NEAR(hjfd::legendre(h, q, -3.0, 3.0), 0.75, 1e-10);
}

TEST(Legendre, YoungCaseAtZeroSlope) {
    const Hamiltonian h = Hamiltonian::power_even(4);
    // q = H'(0) = 0: L(0) = -H(0) = 0 for both shipped closed-form kinds.
    EXPECT_GE(hjfd::legendre(h, 0.0, -2.0, 2.0), -h(0.0) - 1e-12);
    EXPECT_NEAR(hjfd::legendre(Hamiltonian::quadratic(), 0.0, -2.0, 2.0), 0.0, 1e-15);
}

TEST(Legendre, EndpointAttainedRejected) {
    // For H = p^2/2 and q = 3 the maximizer p = q sits outside [-1, 1].
    EXPECT_THROW(hjfd::legendre(Hamiltonian::quadratic(), 3.0, -1.0, 1.0), hjfd::RangeTooSmall);
    EXPECT_THROW(hjfd::legendre(Hamiltonian::power_even(4), 9.0, -1.0, 1.0), hjfd::RangeTooSmall);
}

TEST(Legendre, DualityGapClosesAtGradient) {
    const Hamiltonian h = Hamiltonian::power_even(4);
    for (double p : {-1.5, -0.5, 0.25, 1.0, 2.0}) {
        const double q = h.derivative(p);
        const double L = hjfd::legendre(h, q, -8.0, 8.0);
        EXPECT_GE(h(p) + L - p * q, -1e-10); // Young's inequality
        EXPECT_NEAR(h(p) + L, p * q, 1e-8);  // equality at q = H'(p)
    }
}

TEST(ConvexityValidator, FlagsConcaveBump) {
    const Hamiltonian convex = Hamiltonian::quadratic();
    EXPECT_LE(hjfd::hamiltonian_convexity_violation(convex, -3.0, 3.0, 65), 1e-12);
    const Hamiltonian wavy = Hamiltonian::tabulated(
        [](double p) { return 0.5 * p * p - std::cos(3.0 * p); },
        [](double p) { return p + 3.0 * std::sin(3.0 * p); });
    EXPECT_GT(hjfd::hamiltonian_convexity_violation(wavy, -3.0, 3.0, 65), 0.1);
}

TEST(CoercivityMargin, PositiveOutsideSublevelSet) {
    EXPECT_GT(hjfd::coercivity_margin(Hamiltonian::quadratic(), 1.0), 0.0);
    EXPECT_GT(hjfd::coercivity_margin(Hamiltonian::power_even(6), 2.0), 0.0);
}

// a b >= -a/(2 sqrt(h)) - (sqrt(h)/2) a b^2 for a >= 0: the gap is a perfect
// square, so random samples can only fail by rounding.
TEST(YoungBound, RandomSamples) {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> pos(0.0, 10.0);
    std::uniform_real_distribution<double> any(-10.0, 10.0);
    std::uniform_real_distribution<double> hs(1e-4, 1.0);
    for (int rep = 0; rep < 2000; ++rep) {
        const double a = pos(rng), b = any(rng), h = hs(rng);
        const double bound = hjfd::young_product_lower_bound(a, b, h);
        EXPECT_GE(a * b - bound, -1e-12 * (1.0 + std::abs(a * b)));
    }
}

} // namespace
