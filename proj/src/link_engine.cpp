#include "pcfm/link_engine.hpp"

#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "pcfm/errors.hpp"
#include "pcfm/kernels.hpp"

namespace pcfm {

std::vector<Island> enumerate_islands(const ChannelPlan& plan, std::size_t cut,
                                      bool include_mci) {
    if (cut >= plan.size()) throw DomainError("enumerate_islands: CUT index out of range");
    const auto& ch = plan.channels;
    const double fc = ch[cut].center_thz;
    std::vector<Island> out;
    for (std::size_t m = 0; m < ch.size(); ++m) {
        for (std::size_t k = 0; k < ch.size(); ++k) {
            for (std::size_t n = 0; n < ch.size(); ++n) {
                if (std::abs(ch[m].center_thz + ch[k].center_thz - ch[n].center_thz - fc) >
                    kIslandFreqTol)
                    continue;
                IslandKind kind = IslandKind::mci;
                if (m == cut && k == cut && n == cut)
                    kind = IslandKind::sci;
                else if ((k == cut && m == n) || (m == cut && k == n))
                    kind = IslandKind::xci;
                if (kind == IslandKind::mci && !include_mci) continue;
                out.push_back({m, k, n, kind});
            }
        }
    }
    return out;
}

double g_sci(double gamma_lumped, double p_cut_end, double g_cut, double gamma_sci,
             double k_sci) {
    return 16.0 / 27.0 * p_cut_end * gamma_lumped * g_cut * g_cut * g_cut * gamma_sci *
           gamma_sci * k_sci;
}

double g_xci_single(double gamma_lumped, double p_cut_end, double g_cut, double g_n,
                    double gamma_xci, double k_xci) {
    return 32.0 / 27.0 * p_cut_end * gamma_lumped * g_cut * g_n * g_n * gamma_xci * gamma_xci *
           k_xci;
}

namespace {

std::string island_tag(std::size_t m, std::size_t k, std::size_t n) {
    return fmt::format("island ({},{},{})", m, k, n);
}

template <class F>
double annotated(const std::string& tag, F&& f) {
    try {
        return f();
    } catch (const EvaluationError& e) {
        throw EvaluationError(tag + ": " + e.what(), e.estimate(), e.error_bound(), e.work());
    } catch (const DomainError& e) {
        throw DomainError(tag + ": " + e.what());
    }
}

}  // namespace

SpanNli span_nli(const ChannelPlan& plan, const FiberSpec& fiber, const SppGrid& spp,
                 std::span<const PolyProfile> profiles, std::size_t cut,
                 std::span<const double> lumped_gain_db) {
    const std::size_t N = plan.size();
    if (cut >= N) throw DomainError("span_nli: CUT index out of range");
    if (profiles.size() != N) throw DomainError("span_nli: one profile per channel required");
    if (spp.channel_count() != N) throw DomainError("span_nli: SPP grid does not match the plan");
    if (!lumped_gain_db.empty() && lumped_gain_db.size() != N)
        throw DomainError("span_nli: lumped gain list does not match the plan");

    const auto& C = plan.channels[cut];
    const double L = spp.length();
    const double a_cut = fiber.aeff_um2(C.center_thz);
    const double p_end = spp.at_end(cut);
    const double lumped = lumped_gain_db.empty() ? 1.0 / p_end : db_to_linear(lumped_gain_db[cut]);
    // PSDs in W/THz with gamma in 1/(W km) keep the product in W/THz
    auto psd_w = [](const Channel& c) { return c.power_mw * 1e-3 / c.bandwidth_thz; };
    const double g_cut = psd_w(C);

    SpanNli out;
    auto check = [&](double b2, std::size_t m, std::size_t k, std::size_t n) {
        if (!kernels::stretch_guideline_met(b2, C.bandwidth_thz))
            out.warnings.push_back(fmt::format("{}: |beta2_eff| B_cut^2 = {:.4g} <= 0.01",
                                               island_tag(m, k, n),
                                               std::abs(b2) * C.bandwidth_thz * C.bandwidth_thz));
    };

    {
        const double b2 = kernels::beta2_eff(fiber.beta2, fiber.beta3, fiber.beta4, fiber.fc_thz,
                                             C.center_thz, C.center_thz);
        const double gamma = kernels::gamma_island(C.center_thz, a_cut, a_cut, a_cut, a_cut,
                                                   fiber.n2);
        const double k = annotated(island_tag(cut, cut, cut), [&] {
            return kernels::k_sci(profiles[cut].coeffs, C.bandwidth_thz, L, b2);
        });
        check(b2, cut, cut, cut);
        out.g_sci = g_sci(lumped, p_end, g_cut, gamma, k);
    }
    for (std::size_t n = 0; n < N; ++n) {
        if (n == cut) continue;
        const auto& I = plan.channels[n];
        const double b2 = kernels::beta2_eff(fiber.beta2, fiber.beta3, fiber.beta4, fiber.fc_thz,
                                             I.center_thz, C.center_thz);
        const double a_n = fiber.aeff_um2(I.center_thz);
        const double gamma = kernels::gamma_island(C.center_thz, a_cut, a_n, a_cut, a_n, fiber.n2);
        const kernels::IslandGeometry geom{I.center_thz - C.center_thz, I.bandwidth_thz,
                                           C.bandwidth_thz, L, b2};
        const double k = annotated(island_tag(n, cut, n), [&] {
            return kernels::k_xci_closed(profiles[n].coeffs, geom);
        });
        check(b2, n, cut, n);
        out.g_xci += g_xci_single(lumped, p_end, g_cut, psd_w(I), gamma, k);
        out.xci_islands += 2;
    }
    const auto all = enumerate_islands(plan, cut, true);
    out.mci_ignored = all.size() - 1 - out.xci_islands;
    out.g_sci *= 1e3;
    out.g_xci *= 1e3;
    out.g_nli = out.g_sci + out.g_xci;
    return out;
}

namespace {
std::vector<SpanNli> all_cuts(const ChannelPlan& plan, const FiberSpec& fiber, const SppGrid& spp,
                              std::span<const PolyProfile> profiles,
                              std::span<const double> lumped_gain_db, bool parallel) {
    const long N = static_cast<long>(plan.size());
    std::vector<SpanNli> out(plan.size());
    std::vector<std::exception_ptr> errors(plan.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (long i = 0; i < N; ++i) {
        try {
            out[i] = span_nli(plan, fiber, spp, profiles, static_cast<std::size_t>(i),
                              lumped_gain_db);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}
}  // namespace

std::vector<SpanNli> span_nli_all(const ChannelPlan& plan, const FiberSpec& fiber,
                                  const SppGrid& spp, std::span<const PolyProfile> profiles,
                                  std::span<const double> lumped_gain_db) {
    return all_cuts(plan, fiber, spp, profiles, lumped_gain_db, true);
}

std::vector<SpanNli> span_nli_all_serial(const ChannelPlan& plan, const FiberSpec& fiber,
                                         const SppGrid& spp,
                                         std::span<const PolyProfile> profiles,
                                         std::span<const double> lumped_gain_db) {
    return all_cuts(plan, fiber, spp, profiles, lumped_gain_db, false);
}

double accumulate_link(std::span<const double> span_psd, std::span<const double> transfer) {
    if (span_psd.size() != transfer.size())
        throw DomainError("accumulate_link: PSD and transfer lists differ in length");
    double total = 0.0;
    double downstream = 1.0;  // empty product for the last span
    for (std::size_t i = span_psd.size(); i-- > 0;) {
        total += span_psd[i] * downstream;
        downstream *= transfer[i];
    }
    return total;
}

NliReport gsnr_nli(const ChannelPlan& plan, std::span<const double> g_end,
                   std::span<const double> channel_power_mw, std::span<const double> correction) {
    const std::size_t N = plan.size();
    if (g_end.size() != N || channel_power_mw.size() != N)
        throw DomainError("gsnr_nli: per-channel lists do not match the plan");
    if (!correction.empty() && correction.size() != N)
        throw DomainError("gsnr_nli: correction list does not match the plan");
    NliReport rep;
    rep.rows.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        auto& r = rep.rows[i];
        const auto& c = plan.channels[i];
        if (!(channel_power_mw[i] > 0.0))
            throw DomainError(fmt::format("gsnr_nli: channel {} has non-positive power", i));
        const double rho = correction.empty() ? 1.0 : correction[i];
        r.f_cut_thz = c.center_thz;
        r.g_nli = g_end[i];
        r.p_nli = rho * g_end[i] * c.bandwidth_thz;
        r.p_ch = channel_power_mw[i];
        r.gsnr_nli_db = 10.0 * std::log10(r.p_ch / r.p_nli);
    }
    return rep;
}

std::vector<double> delta_gsnr(const NliReport& a, const NliReport& b) {
    if (a.rows.size() != b.rows.size()) throw DomainError("delta_gsnr: report sizes differ");
    std::vector<double> d(a.rows.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = a.rows[i].gsnr_nli_db - b.rows[i].gsnr_nli_db;
    return d;
}

SppGrid solve_span_spp(const LinkSpan& span, std::size_t grid_points) {
    if (span.pumps.empty() && span.fiber.raman.is_zero())
        return attenuation_only_spp(span.fiber, span.plan, grid_points);
    return solve_raman(span.fiber, span.plan, span.pumps, std::max<std::size_t>(grid_points, 51));
}

LinkResult evaluate_link(std::span<const LinkSpan> spans, const LinkOptions& options,
                         const std::vector<SppGrid>* precomputed) {
    if (spans.empty()) throw DomainError("evaluate_link: no spans");
    const std::size_t N = spans.front().plan.size();
    for (const auto& s : spans)
        if (s.plan.size() != N)
            throw DomainError("evaluate_link: every span must carry the same channel count");
    if (precomputed && precomputed->size() != spans.size())
        throw DomainError("evaluate_link: one precomputed SPP grid per span required");

    LinkResult res;
    for (std::size_t si = 0; si < spans.size(); ++si) {
        const auto& s = spans[si];
        s.fiber.validate();
        s.plan.validate();
        SpanSolution sol;
        sol.spp = precomputed ? (*precomputed)[si] : solve_span_spp(s, options.grid_points);
        sol.profiles = fit_spp(sol.spp, options.degree, options.fit);
        sol.nli = span_nli_all(s.plan, s.fiber, sol.spp, sol.profiles, s.lumped_gain_db);
        sol.transfer.resize(N);
        for (std::size_t ch = 0; ch < N; ++ch)  // transparent: Gamma p(L) = 1 by definition
            sol.transfer[ch] = s.lumped_gain_db.empty()
                                   ? 1.0
                                   : transfer_factor(sol.spp, ch, s.lumped_gain_db[ch]);
        res.spans.push_back(std::move(sol));
    }

    std::vector<double> g_end(N), p_end(N);
    std::vector<double> psd(spans.size()), tr(spans.size());
    for (std::size_t ch = 0; ch < N; ++ch) {
        double through = 1.0;
        for (std::size_t s = 0; s < spans.size(); ++s) {
            psd[s] = res.spans[s].nli[ch].g_nli;
            tr[s] = res.spans[s].transfer[ch];
            through *= tr[s];
        }
        g_end[ch] = accumulate_link(psd, tr);
        p_end[ch] = spans.front().plan.channels[ch].power_mw * through;
    }
    res.report = gsnr_nli(spans.front().plan, g_end, p_end, options.correction);
    for (std::size_t ch = 0; ch < N; ++ch) {
        for (const auto& s : res.spans)
            for (const auto& w : s.nli[ch].warnings) res.report.rows[ch].warnings.push_back(w);
        res.report.mci_ignored += res.spans.front().nli[ch].mci_ignored;
    }
    return res;
}

}  // namespace pcfm
