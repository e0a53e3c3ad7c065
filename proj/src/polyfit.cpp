#include "pcfm/polyfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "pcfm/errors.hpp"

namespace pcfm {

PolyProfile fit_polynomial(std::span<const double> z, std::span<const double> p,
                           std::size_t degree, const FitOptions& options) {
    if (z.size() != p.size()) throw ConditioningError("fit: z and p sizes differ");
    const std::size_t m = z.size();
    const std::size_t free_terms = options.constrain_origin ? degree : degree + 1;
    if (m < degree + 1) throw ConditioningError("fit: fewer samples than coefficients");
    for (std::size_t k = 1; k < m; ++k)
        if (!(z[k] > z[k - 1]))
            throw ConditioningError("fit: abscissae must be strictly increasing");
    const double scale = std::max(std::abs(z.front()), std::abs(z.back()));
    if (!(scale > 0.0)) throw ConditioningError("fit: degenerate abscissae");

    // Basis: shifted Legendre Q_c(u) = P_c(2u - 1), times u when p(0) is pinned.
    // Each Q_c is also kept as monomial coefficients in u for the way back.
    const std::size_t first = options.constrain_origin ? 1 : 0;
    std::vector<std::vector<double>> q(std::max<std::size_t>(free_terms, 1));
    q[0] = {1.0};
    if (free_terms > 1) q[1] = {-1.0, 2.0};
    for (std::size_t c = 1; c + 1 < free_terms; ++c) {
        const double a1 = (2.0 * c + 1.0) / (c + 1.0), a0 = c / (c + 1.0);
        std::vector<double> next(c + 2, 0.0);
        for (std::size_t i = 0; i <= c; ++i) {
            next[i] -= a1 * q[c][i];
            next[i + 1] += 2.0 * a1 * q[c][i];
        }
        for (std::size_t i = 0; i < c; ++i) next[i] -= a0 * q[c - 1][i];
        q[c + 1] = std::move(next);
    }

    PolyProfile out;
    out.coeffs.assign(degree + 1, 0.0);
    if (free_terms > 0) {
        Eigen::MatrixXd a(m, free_terms);
        Eigen::VectorXd rhs(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double u = z[k] / scale, t = 2.0 * u - 1.0;
            const double lead = options.constrain_origin ? u : 1.0;
            double p0 = 1.0, p1 = t;
            for (std::size_t c = 0; c < free_terms; ++c) {
                const double pc = c == 0 ? p0 : p1;
                a(k, c) = lead * pc;
                if (c >= 1) {
                    const double p2 = ((2.0 * c + 1.0) * t * p1 - c * p0) / (c + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
            }
            rhs(k) = options.constrain_origin ? p[k] - 1.0 : p[k];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < static_cast<Eigen::Index>(free_terms))
            throw ConditioningError("fit: rank-deficient design matrix");
        const Eigen::VectorXd sol = qr.solve(rhs);
        std::vector<double> ucoef(degree + 1, 0.0);
        for (std::size_t c = 0; c < free_terms; ++c)
            for (std::size_t i = 0; i < q[c].size(); ++i)
                ucoef[i + first] += sol(static_cast<Eigen::Index>(c)) * q[c][i];
        double lpow = 1.0;
        for (std::size_t n = 0; n <= degree; ++n) {
            out.coeffs[n] = ucoef[n] * lpow;
            lpow /= scale;
        }
    }
    if (options.constrain_origin) out.coeffs[0] = 1.0;

    double ss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = eval_poly(out.coeffs, z[k]) - p[k];
        ss += r * r;
    }
    out.rms_residual = std::sqrt(ss / static_cast<double>(m));
    return out;
}

double eval_poly(std::span<const double> coeffs, double z) {
    double acc = 0.0;
    for (std::size_t n = coeffs.size(); n-- > 0;) acc = std::fma(acc, z, coeffs[n]);
    return acc;
}

std::vector<PolyProfile> fit_spp(const SppGrid& spp, std::size_t degree,
                                 const FitOptions& options) {
    std::vector<PolyProfile> out(spp.channel_count());
    const auto n = static_cast<long>(spp.channel_count());
    bool failed = false;
    std::string message;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = fit_polynomial(spp.z, spp.profiles[i], degree, options);
        } catch (const ConditioningError& e) {
#pragma omp critical
            {
                failed = true;
                message = e.what();
            }
        }
    }
    if (failed) throw ConditioningError(message);
    return out;
}

std::vector<PolyProfile> fit_spp_serial(const SppGrid& spp, std::size_t degree,
                                        const FitOptions& options) {
    std::vector<PolyProfile> out;
    out.reserve(spp.channel_count());
    for (const auto& prof : spp.profiles)
        out.push_back(fit_polynomial(spp.z, prof, degree, options));
    return out;
}

}  // namespace pcfm
