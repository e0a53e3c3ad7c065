#pragma once

#include <cstddef>
#include <span>

#include "pcfm/quadrature.hpp"

namespace pcfm::kernels {

/// Geometry of one XCI island in kernel units (THz, km, ps^2/km).
struct IslandGeometry {
    double f_offset = 0.0;      // f_interferer - f_cut
    double b_interferer = 0.0;  // interferer bandwidth
    double b_cut = 0.0;
    double length_km = 0.0;
    double beta2_eff = 0.0;
};

/// Island-local dispersion: beta2 corrected by beta3 and beta4 around fc.
double beta2_eff(double beta2, double beta3, double beta4, double fc, double f_m, double f_k);

/// Nonlinear coefficient in 1/(W km) from the mean of the four effective areas (um^2).
double gamma_island(double f_cut_thz, double aeff_cut, double aeff_m, double aeff_k,
                    double aeff_n, double n2);

/// Stretched-island XCI kernel in THz^2 km^2. Exact for any polynomial degree.
/// Throws DomainError for straddling islands and for beta2_eff == 0.
double k_xci_closed(std::span<const double> coeffs, const IslandGeometry& geom);

/// Above this |x| = pi^2 |b2| B^2 L the SCI kernel is taken from the
/// generic path instead of the closed forms.
inline constexpr double kSciClosedMaxX = 500.0;
/// Below this |x| the closed forms are replaced by their power series in x.
inline constexpr double kSciSeriesMaxX = 2.0;

/// SCI kernel from the exact closed forms, degree <= 3.
/// Throws UnsupportedDegreeError for higher degrees.
double k_sci_closed(std::span<const double> coeffs, double bandwidth, double length,
                    double beta2_eff);

/// Power series of the SCI kernel in x; any degree, accurate for small |x|.
double k_sci_series(std::span<const double> coeffs, double bandwidth, double length,
                    double beta2_eff);

struct GenericOptions {
    double rel_tol = 1e-11;
    std::size_t max_evaluations = 4'000'000;
};

/// SCI kernel for any degree: the square-domain double integral of a function
/// of f1*f2 reduced to 4 * int_0^{B^2/4} ln(B^2/(4u)) |I(4 pi^2 b2 u)|^2 du,
/// with the logarithmic endpoint removed by u = (B^2/4) s^2.
/// Throws EvaluationError if the quadrature does not converge.
double k_sci_generic(std::span<const double> coeffs, double bandwidth, double length,
                     double beta2_eff, const GenericOptions& options = {});

/// Dispatch: closed form for degree <= 3 inside the working range, generic otherwise.
double k_sci(std::span<const double> coeffs, double bandwidth, double length, double beta2_eff);

/// Stretching guideline |b2| * B_cut^2 > 0.01 (ps^2 THz^2 / km).
bool stretch_guideline_met(double beta2_eff, double b_cut);

}  // namespace pcfm::kernels
