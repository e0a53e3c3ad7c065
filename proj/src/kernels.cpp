#include "pcfm/kernels.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pcfm/errors.hpp"
#include "pcfm/specfun.hpp"

namespace pcfm::kernels {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLightSpeed = 299792458.0;  // m/s
}  // namespace

double beta2_eff(double beta2, double beta3, double beta4, double fc, double f_m, double f_k) {
    const double dm = f_m - fc;
    const double dk = f_k - fc;
    return beta2 + kPi * beta3 * (f_m + f_k - 2.0 * fc) +
           (2.0 / 3.0) * kPi * kPi * beta4 * (dm * dm + dm * dk + dk * dk);
}

double gamma_island(double f_cut_thz, double aeff_cut, double aeff_m, double aeff_k,
                    double aeff_n, double n2) {
    const double mean_area_m2 = 0.25 * (aeff_cut + aeff_m + aeff_k + aeff_n) * 1e-12;
    const double per_w_per_m = 2.0 * kPi * f_cut_thz * 1e12 / kLightSpeed * n2 / mean_area_m2;
    return per_w_per_m * 1e3;
}

double k_xci_closed(std::span<const double> coeffs, const IslandGeometry& g) {
    const double half = 0.5 * g.b_interferer;
    if (!(std::abs(g.f_offset) > half))
        throw DomainError("k_xci_closed: interferer band straddles the CUT (not an XCI island)");
    if (g.beta2_eff == 0.0)
        throw DomainError("k_xci_closed: beta2_eff = 0, stretched XCI island diverges");
    const double log_term = std::abs(std::log((g.f_offset + half) / (g.f_offset - half)));
    // sum_{n,k} p_n p_k L^{n+k} / (n+k+1) = (1/L) int_0^L p^2 dz
    const double L = g.length_km;
    double acc = 0.0;
    double ln = 1.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n, ln *= L) {
        double lk = 1.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k, lk *= L)
            acc += coeffs[n] * coeffs[k] * ln * lk / static_cast<double>(n + k + 1);
    }
    return L / (2.0 * kPi * std::abs(g.beta2_eff)) * log_term * acc;
}

double k_sci_closed(std::span<const double> coeffs, double B, double L, double b2) {
    if (coeffs.size() > 4)
        throw UnsupportedDegreeError("k_sci_closed: degree > 3 has no closed form here; use k_sci_generic");
    if (!std::isfinite(B) || !std::isfinite(L) || !std::isfinite(b2))
        throw DomainError("k_sci_closed: non-finite input");
    const double y = kPi * kPi * b2 * B * B;
    const double x = y * L;
    if (std::abs(x) < kSciSeriesMaxX) return k_sci_series(coeffs, B, L, b2);

    std::array<double, 4> p{};
    for (std::size_t n = 0; n < coeffs.size(); ++n) p[n] = coeffs[n];
    const auto [p0, p1, p2, p3] = p;
    const double S = std::sin(x), C = std::cos(x);
    const double SI = specfun::sin_integral(x);
    const double H = specfun::hyp2f3_half(x);
    const double L2 = L * L, L3 = L2 * L, L4 = L3 * L, L5 = L4 * L, L6 = L5 * L;
    const double y2 = y * y, y3 = y2 * y, y4 = y3 * y, y5 = y4 * y, y6 = y5 * y, y7 = y6 * y,
                 y8 = y7 * y;
    const double B2 = B * B;

    if (coeffs.size() <= 1) {
        return B2 * (2.0 * L2 * p0 * p0 * H + 2.0 * p0 * p0 * (1.0 - C) / y2 -
                     2.0 * L * p0 * p0 * SI / y);
    }
    if (coeffs.size() == 2) {
        const double q = 9 * p0 * p0 + 9 * L * p0 * p1 + 4 * L2 * p1 * p1;
        const double bracket =
            2 * p1 * p1 + 9 * y2 * (2 * p0 * p0 + 2 * L * p0 * p1 + L2 * p1 * p1) -
            2 * (p1 * p1 + y2 * q) * C +
            6 * y4 * L2 * (3 * p0 * p0 + 3 * L * p0 * p1 + L2 * p1 * p1) * H -
            2 * y * L * p1 * p1 * S - 2 * y3 * L * q * SI;
        return B2 / (9 * y4) * bracket;
    }
    if (coeffs.size() == 3) {
        const double r = 900 * p0 * p0 + 900 * L * p0 * p1 + 400 * L2 * p1 * p1 +
                         650 * L2 * p0 * p2 + 675 * L3 * p1 * p2 + 306 * L4 * p2 * p2;
        const double bracket =
            144 * p2 * p2 + 100 * y2 * (p1 * p1 - 4 * p0 * p2) +
            450 * y4 *
                (2 * p0 * p0 + 2 * L * p0 * p1 + L2 * p1 * p1 + 2 * L2 * p0 * p2 +
                 2 * L3 * p1 * p2 + L4 * p2 * p2) +
            (-144 * p2 * p2 - 4 * y2 * (25 * p1 * p1 - 100 * p0 * p2 - 18 * L2 * p2 * p2) -
             y4 * r) *
                C +
            30 * y6 * L2 *
                (30 * p0 * p0 + 30 * L * p0 * p1 + 10 * L2 * (p1 * p1 + 2 * p0 * p2) +
                 15 * L3 * p1 * p2 + 6 * L4 * p2 * p2) *
                H +
            y * L *
                (-144 * p2 * p2 -
                 y2 * (100 * p1 * p1 + 50 * p0 * p2 + 225 * L * p1 * p2 + 126 * L2 * p2 * p2)) *
                S -
            y5 * L * r * SI;
        return B2 / (450 * y6) * bracket;
    }
    const double q = 44100 * p0 * p0 + 44100 * L * p0 * p1 + 19600 * L2 * p1 * p1 +
                     31850 * L2 * p0 * p2 + 33075 * L3 * p1 * p2 + 14994 * L4 * p2 * p2 +
                     25725 * L3 * p0 * p3 + 28518 * L4 * p1 * p3 + 26950 * L5 * p2 * p3 +
                     12450 * L6 * p3 * p3;
    const double bracket =
        32400 * p3 * p3 + 7056 * y2 * (p2 * p2 - 3 * p1 * p3) +
        2450 * y4 *
            (2 * p1 * p1 - 8 * p0 * p2 - 12 * L * p0 * p3 - 6 * L2 * p1 * p3 -
             4 * L3 * p2 * p3 - 3 * L4 * p3 * p3) +
        22050 * y6 *
            (2 * p0 * p0 + 2 * L * p0 * p1 + L2 * p1 * p1 + 2 * L2 * p0 * p2 +
             2 * L3 * p1 * p2 + L4 * p2 * p2 + 2 * L3 * p0 * p3 + 2 * L4 * p1 * p3 +
             2 * L5 * p2 * p3 + L6 * p3 * p3) +
        (-32400 * p3 * p3 + 72 * y2 * (-98 * p2 * p2 + 294 * p1 * p3 + 225 * L2 * p3 * p3) +
         4 * y4 *
             (-1225 * p1 * p1 + 4900 * p0 * p2 + 882 * L2 * p2 * p2 + 7350 * L * p0 * p3 +
              1029 * L2 * p1 * p3 + 2450 * L3 * p2 * p3 + 1500 * L4 * p3 * p3) -
         y6 * q) *
            C +
        210 * y8 * L2 *
            (210 * p0 * p0 + 210 * L * p0 * p1 + 70 * L2 * p1 * p1 + 140 * L2 * p0 * p2 +
             105 * L3 * p1 * p2 + 42 * L4 * p2 * p2 + 105 * L3 * p0 * p3 + 84 * L4 * p1 * p3 +
             70 * L5 * p2 * p3 + 30 * L6 * p3 * p3) *
            H +
        y * L *
            (-32400 * p3 * p3 + 72 * y2 * (-98 * p2 * p2 + 294 * p1 * p3 + 75 * L2 * p3 * p3) -
             y4 * (4900 * p1 * p1 + 2450 * p0 * p2 + 11025 * L * p1 * p2 + 6174 * L2 * p2 * p2 +
                   3675 * L * p0 * p3 + 10878 * L2 * p1 * p3 + 12250 * L3 * p2 * p3 +
                   6150 * L4 * p3 * p3)) *
            S -
        y7 * L * q * SI;
    return B2 / (22050 * y8) * bracket;
}

double k_sci_series(std::span<const double> coeffs, double B, double L, double b2) {
    // |I(theta)|^2 = sum_k (-1)^k theta^{2k}/(2k)! * M_2k with
    // M_2k = int int p(z) p(z') (z - z')^{2k}, and the square domain gives
    // int int (f1 f2)^{2k} = (B^{2k+1} / (4^k (2k+1)))^2.
    const std::size_t n = coeffs.size();
    std::vector<double> q(n);
    double lp = 1.0;
    for (std::size_t i = 0; i < n; ++i, lp *= L) q[i] = coeffs[i] * lp;
    const double x = kPi * kPi * b2 * B * B * L;
    const double x2 = x * x;

    double total = 0.0;
    double xpow = 1.0;   // x^{2k} / (2k)!
    for (int k = 0; k < 60; ++k) {
        if (k > 0) xpow *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
        // mu(a, b, k) = sum_j C(2k, j) (-1)^j / ((a + 2k - j + 1)(b + j + 1))
        double moment = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                double mu = 0.0;
                double binom = 1.0;
                for (int j = 0; j <= 2 * k; ++j) {
                    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
                    mu += sgn * binom /
                          ((static_cast<double>(a) + 2.0 * k - j + 1.0) *
                           (static_cast<double>(b) + j + 1.0));
                    binom = binom * (2.0 * k - j) / (j + 1.0);
                }
                moment += q[a] * q[b] * mu;
            }
        }
        const double term = xpow * moment / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
        total += term;
        if (k > 2 && std::abs(term) < 1e-18 * std::abs(total)) break;
    }
    return B * B * L * L * total;
}

double k_sci_generic(std::span<const double> coeffs, double B, double L, double b2,
                     const GenericOptions& options) {
    if (!std::isfinite(B) || !std::isfinite(L) || !std::isfinite(b2))
        throw DomainError("k_sci_generic: non-finite input");
    const double a = 0.25 * B * B;
    const double theta_scale = 4.0 * kPi * kPi * b2 * a;
    // K = 4 int_0^a ln(a/u) F(u) du, u = a s^2:  = -16 a int_0^1 s ln(s) F(a s^2) ds
    auto integrand = [&](double s) {
        if (s <= 0.0) return 0.0;
        const auto v = specfun::poly_phase_integral(coeffs, L, theta_scale * s * s);
        return -16.0 * a * s * std::log(s) * std::norm(v);
    };
    // F oscillates in u with period ~ 2 pi / (4 pi^2 |b2| L); resolve roughly
    // one oscillation per initial panel.
    const double oscillations = std::abs(theta_scale) * L / (2.0 * kPi);
    quad::AdaptiveOptions opt;
    opt.rel_tol = options.rel_tol;
    opt.max_evaluations = options.max_evaluations;
    opt.initial_panels = 4 + static_cast<std::size_t>(2.0 * std::sqrt(oscillations) + oscillations);
    const auto r = quad::integrate_adaptive(integrand, 0.0, 1.0, opt);
    if (!r.converged)
        throw EvaluationError("k_sci_generic: quadrature did not converge", r.value, r.error,
                              r.evaluations);
    return r.value;
}

double k_sci(std::span<const double> coeffs, double B, double L, double b2) {
    const double x = kPi * kPi * b2 * B * B * L;
    if (coeffs.size() <= 4 && std::abs(x) <= kSciClosedMaxX) return k_sci_closed(coeffs, B, L, b2);
    if (std::abs(x) < kSciSeriesMaxX) return k_sci_series(coeffs, B, L, b2);
    return k_sci_generic(coeffs, B, L, b2);
}

bool stretch_guideline_met(double beta2_eff, double b_cut) {
    return std::abs(beta2_eff) * b_cut * b_cut > 0.01;
}

}  // namespace pcfm::kernels
