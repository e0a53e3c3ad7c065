#include "pcfm/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pcfm/errors.hpp"
#include "pcfm/quadrature.hpp"

namespace pcfm::specfun {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double si_series(double x) {
    // sum_k (-1)^k x^{2k+1} / ((2k+1) (2k+1)!)
    const double x2 = x * x;
    double term = x;  // x^{2k+1}/(2k+1)!
    double sum = x;
    for (int k = 1; k < 60; ++k) {
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        const double add = term / (2.0 * k + 1.0);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// Modified Lentz evaluation of the continued fraction for e^{ix} E1(ix).
double si_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    cd b(1.0, x);
    cd c(1.0 / tiny, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    for (int i = 2; i < 10000; ++i) {
        const double a = -static_cast<double>((i - 1) * (i - 1));
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
    }
    const cd e1 = h * cd(std::cos(x), -std::sin(x));
    return kPi / 2.0 + e1.imag();
}

}  // namespace

double sin_integral(double x) {
    if (!std::isfinite(x)) throw DomainError("sin_integral: non-finite argument");
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    const double v = ax <= 4.0 ? si_series(ax) : si_continued_fraction(ax);
    return x < 0 ? -v : v;
}

namespace {

constexpr double kSeriesLimit = 12.0;

// Returns integral_0^x Si(t)/t dt via the alternating series, Neumaier-compensated.
double si_over_t_integral_series(double x, const EvalTolerance& tol, double& last_term,
                                 std::size_t& terms) {
    const double x2 = x * x;
    double pow_fact = x;  // x^{2k+1}/(2k+1)!
    double sum = x;
    double comp = 0.0;
    last_term = x;
    terms = 1;
    for (std::size_t k = 1; k < tol.max_terms; ++k) {
        const double kk = static_cast<double>(k);
        pow_fact *= -x2 / ((2.0 * kk) * (2.0 * kk + 1.0));
        const double add = pow_fact / ((2.0 * kk + 1.0) * (2.0 * kk + 1.0));
        const double t = sum + add;
        comp += std::abs(sum) >= std::abs(add) ? (sum - t) + add : (add - t) + sum;
        sum = t;
        last_term = add;
        terms = k + 1;
        if (std::abs(add) <= tol.rel_tol * 0.1 * std::abs(sum + comp)) return sum + comp;
    }
    last_term = pow_fact;
    return sum + comp;
}

}  // namespace

double hyp2f3_half(double x, const EvalTolerance& tol) {
    if (!std::isfinite(x)) throw DomainError("hyp2f3_half: non-finite argument");
    const double ax = std::abs(x);
    if (ax == 0.0) return 1.0;

    const double head_end = std::min(ax, kSeriesLimit);
    double last = 0.0;
    std::size_t terms = 0;
    double integral = si_over_t_integral_series(head_end, tol, last, terms);
    if (std::abs(last) > tol.rel_tol * 0.1 * std::abs(integral)) {
        throw EvaluationError("hyp2f3_half: series did not converge within max_terms",
                              integral / head_end, std::abs(last), terms);
    }
    if (ax > kSeriesLimit) {
        // Si(t)/t is smooth and slowly varying; panels no wider than pi keep a
        // 20-point rule at machine precision.
        const auto panels = static_cast<std::size_t>(std::ceil((ax - kSeriesLimit) / kPi));
        integral += quad::gauss_legendre_composite(
            [](double t) { return sin_integral(t) / t; }, kSeriesLimit, ax, panels);
    }
    return integral / ax;
}

void monomial_phase_moments(double phi, std::span<std::complex<double>> out) {
    const std::size_t count = out.size();
    if (count == 0) return;
    const std::size_t top = count - 1;
    const double aphi = std::abs(phi);

    if (aphi < 1e-4) {
        // I_n = sum_k (j phi)^k / (k! (n+k+1)); converges in a handful of terms.
        for (std::size_t n = 0; n <= top; ++n) {
            cd sum = 0.0;
            cd pw = 1.0;
            for (int k = 0; k < 8; ++k) {
                sum += pw / static_cast<double>(n + k + 1);
                pw *= cd(0.0, phi) / static_cast<double>(k + 1);
            }
            out[n] = sum;
        }
        return;
    }

    const cd eph(std::cos(phi), std::sin(phi));
    const cd jphi(0.0, phi);
    if (aphi >= static_cast<double>(top)) {
        // Upward recurrence: error growth factor n/|phi| <= 1.
        out[0] = (eph - 1.0) / jphi;
        for (std::size_t n = 1; n <= top; ++n)
            out[n] = (eph - static_cast<double>(n) * out[n - 1]) / jphi;
        return;
    }

    // Downward recurrence I_{n-1} = (e^{j phi} - j phi I_n) / n, started well
    // above `top` where I_n ~ e^{j phi} / (n + 1 - j phi).
    const std::size_t start = top + 60 + static_cast<std::size_t>(2.0 * aphi);
    cd cur = eph / cd(static_cast<double>(start + 1), -phi);
    for (std::size_t n = start; n > 0; --n) {
        cur = (eph - jphi * cur) / static_cast<double>(n);
        if (n - 1 <= top) out[n - 1] = cur;
    }
}

std::complex<double> poly_phase_integral(std::span<const double> coeffs, double length,
                                         double theta) {
    if (!std::isfinite(length) || !std::isfinite(theta))
        throw DomainError("poly_phase_integral: non-finite input");
    if (!(length > 0.0)) throw DomainError("poly_phase_integral: length must be positive");
    if (coeffs.empty()) return {0.0, 0.0};

    std::array<cd, 32> small{};
    std::vector<cd> large;
    std::span<cd> moments;
    if (coeffs.size() <= small.size()) {
        moments = std::span<cd>(small.data(), coeffs.size());
    } else {
        large.resize(coeffs.size());
        moments = large;
    }
    monomial_phase_moments(theta * length, moments);

    cd acc = 0.0;
    double lpow = length;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        acc += coeffs[n] * lpow * moments[n];
        lpow *= length;
    }
    return acc;
}

}  // namespace pcfm::specfun
