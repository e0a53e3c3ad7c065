#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pcfm/kernels.hpp"
#include "pcfm/polyfit.hpp"
#include "pcfm/quadrature.hpp"
#include "pcfm/spp_solver.hpp"
#include "pcfm/types.hpp"

namespace pcfm::oracle {

/// Power-profile factor of the z-integral, either a polynomial or a sampled
/// profile taken piecewise linear between nodes (jumps allowed at nodes).
class InnerProfile {
public:
    static InnerProfile polynomial(std::vector<double> coeffs, double length);
    /// right[i] is the value just after node i, left[i] just before it
    /// (left[0] is ignored). Equal vectors mean a continuous profile.
    static InnerProfile sampled(std::vector<double> z, std::vector<double> right,
                                std::vector<double> left);
    /// Channel `ch` of a span grid, left limits at lumped events included.
    static InnerProfile from_grid(const SppGrid& spp, std::size_t ch);

    /// integral_0^L p(z) e^{j theta z} dz
    std::complex<double> phase_integral(double theta) const;
    double length() const { return length_; }
    bool is_polynomial() const { return !coeffs_.empty(); }

    /// Leading large-theta behaviour I ~ (1/(j theta)) sum_r c_r e^{j theta z_r}:
    /// pairs (z_r, c_r) from the end points and interior jumps.
    std::vector<std::pair<double, double>> edge_terms() const;

private:
    double length_ = 0.0;
    std::vector<double> coeffs_;
    // sampled form: runs of equal-width cells, each cell with its start
    // value a and slope-difference d = (end value - a)
    struct Run {
        double z0 = 0.0, h = 0.0;
        std::size_t first = 0, count = 0;
    };
    std::vector<Run> runs_;
    std::vector<double> a_, d_;
    double first_value_ = 0.0, last_value_ = 0.0;
    std::vector<std::pair<double, double>> jumps_;
};

/// One integration region in (f1', f2') = (f1 - f_cut, f2 - f_cut).
/// The optional third constraint f1' + f2' in [s_lo, s_hi] cuts the rectangle
/// down to the exact three-band support.
struct IslandBox {
    double f1_lo = 0.0, f1_hi = 0.0;
    double f2_lo = 0.0, f2_hi = 0.0;
    bool has_sum_band = false;
    double s_lo = 0.0, s_hi = 0.0;
    /// f2' extended to the whole real line (f2 bounds ignored).
    bool stretched = false;
};

struct OracleOptions {
    double rel_tol = 1e-7;
    std::size_t max_evaluations = 200'000'000;
};

/// int int_box |int_0^L p e^{j 4 pi^2 b2 f1' f2' z} dz|^2 df1' df2' by nested
/// adaptive Gauss-Kronrod; stretched boxes integrate the f2' line over theta
/// numerically with an analytic tail.
quad::QuadResult core_integral_box(const InnerProfile& profile, double beta2_eff,
                                   const IslandBox& box, const OracleOptions& options = {});

enum class Domain { rectangle, lozenge, stretched };

/// SCI geometry when f_offset == 0, otherwise the horizontal XCI island of the
/// interferer. Throws EvaluationError when the tolerance is not reached.
double core_integral_numeric(const InnerProfile& profile, const kernels::IslandGeometry& geom,
                             Domain domain, const OracleOptions& options = {});

/// int_R |I(theta)|^2 d theta, by Parseval equal to 2 pi int_0^L p^2 dz.
double theta_line_integral(const InnerProfile& profile);

struct ReferenceOptions {
    bool include_mci = true;
    /// Exact three-band support; otherwise rectangles inscribing each island.
    bool lozenge_domains = true;
    /// Rectangle mode only: XCI islands stretched along the CUT axis.
    bool stretch_xci = false;
    double rel_tol = 1e-7;
    /// Shared budget of inner-integrand evaluations over all islands.
    std::size_t max_evaluations = 2'000'000'000;
    /// End-of-span lumped gain per channel in dB; empty = transparent span.
    std::vector<double> lumped_gain_db;
    /// Use these per-channel polynomials for the z-integral instead of the grid.
    const std::vector<PolyProfile>* polynomials = nullptr;
    /// Compute only these CUTs (empty = all channels).
    std::vector<std::size_t> cuts;
};

struct ReferenceResult {
    std::vector<double> g_nli;  // mW/THz at each channel center, end of span
    std::vector<std::size_t> island_count;
    std::vector<std::size_t> mci_count;
    double max_rel_error = 0.0;
    std::size_t evaluations = 0;
};

/// Triple-sum GN reference over all islands of each CUT.
ReferenceResult full_gn_reference(const ChannelPlan& plan, const FiberSpec& fiber,
                                  const SppGrid& spp, const ReferenceOptions& options = {});
ReferenceResult full_gn_reference_serial(const ChannelPlan& plan, const FiberSpec& fiber,
                                         const SppGrid& spp,
                                         const ReferenceOptions& options = {});

}  // namespace pcfm::oracle
