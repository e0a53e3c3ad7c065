#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcfm/spp_solver.hpp"

namespace pcfm {

/// p(z) = sum_n coeffs[n] z^n with z in km; coeffs[n] has units km^-n.
struct PolyProfile {
    std::vector<double> coeffs;
    double rms_residual = 0.0;

    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

struct FitOptions {
    /// Force p(0) = 1 exactly instead of a free constant term.
    bool constrain_origin = false;
};

/// Least-squares polynomial of the given degree through (z, p) samples.
/// Solved by column-pivoted QR on shifted Legendre polynomials of u = z / z_max,
/// then converted to monomials in z.
/// Throws ConditioningError on repeated abscissae or too few samples.
PolyProfile fit_polynomial(std::span<const double> z, std::span<const double> p,
                           std::size_t degree, const FitOptions& options = {});

double eval_poly(std::span<const double> coeffs, double z);
inline double eval_poly(const PolyProfile& profile, double z) {
    return eval_poly(profile.coeffs, z);
}

/// Fits every channel of a span. The parallel and serial variants return
/// identical results.
std::vector<PolyProfile> fit_spp(const SppGrid& spp, std::size_t degree,
                                 const FitOptions& options = {});
std::vector<PolyProfile> fit_spp_serial(const SppGrid& spp, std::size_t degree,
                                        const FitOptions& options = {});

}  // namespace pcfm
