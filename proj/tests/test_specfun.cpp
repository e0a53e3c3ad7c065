#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "pcfm/errors.hpp"
#include "pcfm/specfun.hpp"

using namespace pcfm;

TEST(SinIntegral, KnownValues) {
    EXPECT_EQ(specfun::sin_integral(0.0), 0.0);
    EXPECT_NEAR(specfun::sin_integral(1.0), 0.946083070367183, 1e-14);
    EXPECT_NEAR(specfun::sin_integral(10.0), 1.658347594218874, 1e-14);
}

TEST(SinIntegral, MatchesGslAndQuadrature) {
    for (double x : {1e-6, 0.3, 2.0, 3.99, 4.0, 4.01, 7.5, 25.0, 133.0, 999.0, 1e4}) {
        const double v = specfun::sin_integral(x);
        EXPECT_NEAR(v, oracle_ref::si_gsl(x), 1e-12 * std::abs(v)) << x;
        if (x <= 200.0) EXPECT_NEAR(v, oracle_ref::si_quad(x), 1e-12 * std::abs(v)) << x;
    }
}

TEST(SinIntegral, OddAndAsymptote) {
    for (double x : {0.1, 1.0, 4.0, 17.0, 500.0, 9000.0})
        EXPECT_EQ(specfun::sin_integral(-x), -specfun::sin_integral(x));
    for (double x = 10.0; x < 1e4; x *= 1.37)
        EXPECT_LE(std::abs(specfun::sin_integral(x) - M_PI / 2), 2.0 / x);
}

TEST(SinIntegral, RejectsNonFinite) {
    EXPECT_THROW(specfun::sin_integral(std::numeric_limits<double>::quiet_NaN()), DomainError);
    EXPECT_THROW(specfun::sin_integral(INFINITY), DomainError);
}

TEST(Hyp2f3, SeriesOracle) {
    EXPECT_EQ(specfun::hyp2f3_half(0.0), 1.0);
    for (double x : {0.25, 1.0, 2.5, 5.0}) {
        const double ref = static_cast<double>(oracle_ref::hyp2f3_series(x));
        EXPECT_NEAR(specfun::hyp2f3_half(x), ref, 1e-13 * std::abs(ref)) << x;
    }
}

// H(x) = (1/x) int_0^x Si(t)/t dt; the integral is done here by Gauss-Kronrod
// on GSL's Si, which reaches past the range where the plain series is usable.
TEST(Hyp2f3, IntegralRepresentation) {
    using boost::math::quadrature::gauss_kronrod;
    for (double x : {8.0, 12.0, 30.0, 120.0, 480.0}) {
        auto f = [](double t) { return t == 0.0 ? 1.0 : oracle_ref::si_gsl(t) / t; };
        const int panels = 4 + static_cast<int>(x);
        double s = 0.0;
        for (int i = 0; i < panels; ++i)
            s += gauss_kronrod<double, 31>::integrate(f, x * i / panels, x * (i + 1) / panels, 5,
                                                      1e-15);
        const double ref = s / x;
        EXPECT_NEAR(specfun::hyp2f3_half(x), ref, 1e-10 * std::abs(ref)) << x;
    }
}

TEST(Hyp2f3, Even) {
    for (double x : {0.5, 3.0, 20.0})
        EXPECT_EQ(specfun::hyp2f3_half(-x), specfun::hyp2f3_half(x));
}

TEST(Hyp2f3, TermCapRaises) {
    specfun::EvalTolerance tol;
    tol.max_terms = 3;
    EXPECT_THROW(specfun::hyp2f3_half(6.0, tol), EvaluationError);
}

TEST(PolyPhaseIntegral, Elementary) {
    const std::vector<double> one{1.0};
    const auto v0 = specfun::poly_phase_integral(one, 100.0, 0.0);
    EXPECT_DOUBLE_EQ(v0.real(), 100.0);
    EXPECT_EQ(v0.imag(), 0.0);
    for (double th : {0.01, 0.7, -3.0}) {
        const std::complex<double> j(0.0, 1.0);
        const auto ref = (std::exp(j * th * 100.0) - 1.0) / (j * th);
        EXPECT_NEAR(std::abs(specfun::poly_phase_integral(one, 100.0, th) - ref), 0.0,
                    1e-13 * std::abs(ref));
    }
}

TEST(PolyPhaseIntegral, MatchesQuadrature) {
    const std::vector<double> c{0.3, -0.01, 2e-4};
    const auto v = specfun::poly_phase_integral(c, 60.0, 0.7);
    const auto ref = oracle_ref::phase_integral_quad(c, 60.0, 0.7);
    EXPECT_LE(std::abs(v - ref), 1e-12 * std::abs(ref));

    // degree 9 on 100 km, across the small/large phase regimes
    std::vector<double> c9(10);
    for (int n = 0; n < 10; ++n) c9[n] = std::pow(-1.0, n) * 0.7 / std::pow(100.0, n) / (n + 1);
    for (double th : {1e-7, 1e-5, 1e-3, 0.05, 0.9, 12.0}) {
        const auto a = specfun::poly_phase_integral(c9, 100.0, th);
        const auto b = oracle_ref::phase_integral_quad(c9, 100.0, th);
        EXPECT_LE(std::abs(a - b), 1e-11 * std::max(std::abs(b), 1e-3)) << th;
    }
}

TEST(PolyPhaseIntegral, ContinuousAtZero) {
    const std::vector<double> c{1.0, -0.02, 3e-4, -1e-6};
    const auto at0 = specfun::poly_phase_integral(c, 80.0, 0.0);
    const auto near0 = specfun::poly_phase_integral(c, 80.0, 1e-12);
    EXPECT_LE(std::abs(near0 - at0), 1e-9 * std::abs(at0));
}

TEST(PolyPhaseIntegral, Linear) {
    const std::vector<double> p{1.0, -0.01, 5e-5}, q{0.2, 0.003, -1e-5, 4e-8};
    const double a = 1.7, b = -0.4;
    std::vector<double> s(4, 0.0);
    for (std::size_t i = 0; i < 4; ++i)
        s[i] = (i < p.size() ? a * p[i] : 0.0) + b * q[i];
    for (double th : {0.0, 0.02, 1.3}) {
        const auto lhs = specfun::poly_phase_integral(s, 100.0, th);
        const auto rhs = a * specfun::poly_phase_integral(p, 100.0, th) +
                         b * specfun::poly_phase_integral(q, 100.0, th);
        EXPECT_LE(std::abs(lhs - rhs), 1e-13 * std::abs(lhs));
    }
}

TEST(MonomialMoments, FirstMoments) {
    std::vector<std::complex<double>> m(3);
    specfun::monomial_phase_moments(0.0, m);
    EXPECT_DOUBLE_EQ(m[0].real(), 1.0);
    EXPECT_DOUBLE_EQ(m[1].real(), 0.5);
    EXPECT_DOUBLE_EQ(m[2].real(), 1.0 / 3.0);
    specfun::monomial_phase_moments(2.0, m);
    const std::complex<double> j(0.0, 1.0);
    const auto ref0 = (std::exp(2.0 * j) - 1.0) / (2.0 * j);
    EXPECT_NEAR(std::abs(m[0] - ref0), 0.0, 1e-15);
}
