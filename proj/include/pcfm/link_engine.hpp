#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcfm/polyfit.hpp"
#include "pcfm/spp_solver.hpp"
#include "pcfm/types.hpp"

namespace pcfm {

enum class IslandKind { sci, xci, mci };

struct Island {
    std::size_t m = 0, k = 0, n = 0;
    IslandKind kind = IslandKind::sci;
};

/// Frequency tolerance for f_m + f_k - f_n = f_cut.
inline constexpr double kIslandFreqTol = 1e-9;

/// Every triple (m, k, n) with f_m + f_k - f_n = f_cut, classified.
std::vector<Island> enumerate_islands(const ChannelPlan& plan, std::size_t cut,
                                      bool include_mci);

/// 16/27 * p_cut(L) * Gamma * G_cut^3 * gamma^2 * K, a plain product in the caller's units.
double g_sci(double gamma_lumped, double p_cut_end, double g_cut, double gamma_sci,
             double k_sci);
/// 32/27 * p_cut(L) * Gamma * G_cut * G_n^2 * gamma^2 * K (both XCI islands of channel n).
double g_xci_single(double gamma_lumped, double p_cut_end, double g_cut, double g_n,
                    double gamma_xci, double k_xci);

struct SpanNli {
    double g_nli = 0.0;  // mW/THz at f_cut, end of span
    double g_sci = 0.0;
    double g_xci = 0.0;
    std::size_t xci_islands = 0;
    std::size_t mci_ignored = 0;
    std::vector<std::string> warnings;
};

/// PCFM NLI PSD of one CUT for one span. `lumped_gain_db` holds the
/// end-of-span gain per channel; empty means each channel is restored to its
/// launch power (Gamma = 1 / p(L)).
SpanNli span_nli(const ChannelPlan& plan, const FiberSpec& fiber, const SppGrid& spp,
                 std::span<const PolyProfile> profiles, std::size_t cut,
                 std::span<const double> lumped_gain_db = {});

/// All channels as CUT; parallel over CUTs, same result as the serial variant.
std::vector<SpanNli> span_nli_all(const ChannelPlan& plan, const FiberSpec& fiber,
                                  const SppGrid& spp, std::span<const PolyProfile> profiles,
                                  std::span<const double> lumped_gain_db = {});
std::vector<SpanNli> span_nli_all_serial(const ChannelPlan& plan, const FiberSpec& fiber,
                                         const SppGrid& spp,
                                         std::span<const PolyProfile> profiles,
                                         std::span<const double> lumped_gain_db = {});

/// sum_s G_s * prod_{l > s} T_l
double accumulate_link(std::span<const double> span_psd, std::span<const double> transfer);

struct NliReport {
    struct Row {
        double f_cut_thz = 0.0;
        double g_nli = 0.0;  // mW/THz
        double p_nli = 0.0;  // mW
        double p_ch = 0.0;   // mW
        double gsnr_nli_db = 0.0;
        std::vector<std::string> warnings;
    };
    std::vector<Row> rows;
    std::size_t mci_ignored = 0;
};

/// P_NLI = correction * g * B_cut; GSNR_NLI = 10 log10(P_ch / P_NLI).
/// Empty `correction` means 1 for every channel.
NliReport gsnr_nli(const ChannelPlan& plan, std::span<const double> g_end,
                   std::span<const double> channel_power_mw,
                   std::span<const double> correction = {});

/// GSNR_a - GSNR_b per channel, dB.
std::vector<double> delta_gsnr(const NliReport& a, const NliReport& b);

/// One span of a link: fiber, launch plan, pumps and end-of-span gain.
struct LinkSpan {
    FiberSpec fiber;
    ChannelPlan plan;
    std::vector<RamanPump> pumps;
    std::vector<double> lumped_gain_db;  // per channel; empty = transparent
};

struct SpanSolution {
    SppGrid spp;
    std::vector<PolyProfile> profiles;
    std::vector<SpanNli> nli;
    std::vector<double> transfer;  // Gamma * p(L) per channel
};

/// SPP for one span: attenuation-only when there is no Raman gain and no
/// pump, coupled Raman equations otherwise.
SppGrid solve_span_spp(const LinkSpan& span, std::size_t grid_points);

struct LinkOptions {
    std::size_t degree = 9;
    std::size_t grid_points = 1001;
    FitOptions fit;
    std::vector<double> correction;
};

struct LinkResult {
    std::vector<SpanSolution> spans;
    NliReport report;
};

/// Full PCFM pipeline: SPP, fit, per-span NLI, incoherent accumulation, GSNR.
/// Precomputed grids (one per span) skip the SPP solve.
LinkResult evaluate_link(std::span<const LinkSpan> spans, const LinkOptions& options,
                         const std::vector<SppGrid>* precomputed = nullptr);

}  // namespace pcfm
