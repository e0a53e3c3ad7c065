#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace pcfm::specfun {

struct EvalTolerance {
    double rel_tol = 1e-15;
    std::size_t max_terms = 400;
};

/// Si(x) = integral of sin(t)/t over [0, x].
/// Series for |x| <= 4, continued fraction for E1(ix) beyond.
double sin_integral(double x);

/// 2F3({1/2,1/2}; {3/2,3/2,3/2}; -x^2/4).
///
/// The series collapses to sum_k (-1)^k x^{2k} / ((2k+1)^2 (2k+1)!), i.e.
/// H(x) = (1/x) * integral_0^x Si(t)/t dt. The alternating series is summed
/// directly while its largest term stays harmless (|x| <= 12); past that the
/// remaining part of the Si(t)/t integral is taken by composite Gauss-Legendre.
/// Throws EvaluationError if the series needs more than tol.max_terms terms.
double hyp2f3_half(double x, const EvalTolerance& tol = {});

/// integral_0^1 s^n e^{j phi s} ds for n = 0..out.size()-1.
void monomial_phase_moments(double phi, std::span<std::complex<double>> out);

/// Exact value of integral_0^L sum_n coeffs[n] z^n e^{j theta z} dz.
std::complex<double> poly_phase_integral(std::span<const double> coeffs, double length,
                                         double theta);

}  // namespace pcfm::specfun
