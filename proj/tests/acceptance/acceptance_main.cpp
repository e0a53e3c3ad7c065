// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Tolerances below are fixed; do not loosen them to make a run pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../oracles.hpp"
#include "pcfm/cli_io.hpp"
#include "pcfm/gn_oracle.hpp"
#include "pcfm/kernels.hpp"
#include "pcfm/link_engine.hpp"

using namespace pcfm;

namespace {

constexpr double kXciTol = 1e-6;
constexpr double kXciSeconds = 60.0;
constexpr double kSciGenericTol = 1e-6;
constexpr double kSci2dTol = 1e-4;
constexpr double kSmallXTol = 1e-6;
constexpr double kAttOnlyTol = 1e-8;
constexpr double kFluxTol = 1e-6;
constexpr double kBoundaryTol = 1e-6;
constexpr double kGridTol = 1e-6;
constexpr double kNpStableDb = 0.15;
constexpr double kBiasMeanLo = -1.0, kBiasMeanHi = -0.1, kBiasStd = 0.3;
constexpr double kBiasSeconds = 600.0;
constexpr double kLumpedDb = 0.3;
constexpr double kScalingTol = 1e-9;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. k_xci_closed against the numeric Parseval reduction on 200 random cases.
Outcome xci_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20250101);
    const double b2s[] = {2.0, -2.0, 21.3, -21.3};
    const double Ls[] = {60.0, 100.0};
    const double B = 0.028 * 1.1, spacing = 0.05;  // desk comb
    std::uniform_int_distribution<int> pick_k(1, 6), pick_sign(0, 1);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t deg = static_cast<std::size_t>(i % 10);
        const double L = Ls[(i / 10) % 2];
        const double b2 = b2s[(i / 20) % 4];
        const double off = (pick_sign(rng) ? 1 : -1) * spacing * pick_k(rng);
        const auto c = oracle_ref::random_positive_poly(rng, deg, L);
        const double k = kernels::k_xci_closed(c, {off, B, B, L, b2});
        const double ref = oracle_ref::k_xci_parseval(c, L, off, B, b2);
        worst = std::max(worst, rel(k, ref));
    }
    const double t = seconds_since(t0);
    return {worst <= kXciTol && t <= kXciSeconds,
            fmt::format("200 cases, max rel err {:.2e} (tol {:.0e}), {:.1f} s (limit {:.0f} s)",
                        worst, kXciTol, t, kXciSeconds)};
}

// 2. SCI closed forms against the generic path and the 2D oracle, plus the small-x guard.
Outcome sci_exactness() {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> ub(2.0, 21.3), uB(0.0308, 0.11);
    oracle::OracleOptions o2d;
    o2d.rel_tol = 1e-6;
    double worst_g = 0.0, worst_2d = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t deg = static_cast<std::size_t>(i % 4);
        const double L = i % 2 ? 60.0 : 100.0;
        const double b2 = (i % 3 ? -1.0 : 1.0) * ub(rng), B = uB(rng);
        const auto c = oracle_ref::random_positive_poly(rng, deg, L);
        const double k = kernels::k_sci_closed(c, B, L, b2);
        worst_g = std::max(worst_g, rel(k, kernels::k_sci_generic(c, B, L, b2)));
        const auto prof = oracle::InnerProfile::polynomial(c, L);
        const double box =
            oracle::core_integral_numeric(prof, {0.0, B, B, L, b2}, oracle::Domain::rectangle, o2d);
        worst_2d = std::max(worst_2d, rel(k, box));
    }
    oracle::OracleOptions fine;
    fine.rel_tol = 1e-10;
    double worst_small = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double x = std::pow(10.0, -8.0 + 6.0 * i / 39.0);
        const std::size_t deg = static_cast<std::size_t>(i % 4);
        const double B = 0.05, L = 100.0;
        const double b2 = (i % 2 ? -1.0 : 1.0) * x / (M_PI * M_PI * B * B * L);
        const auto c = oracle_ref::random_positive_poly(rng, deg, L);
        const double k = kernels::k_sci_closed(c, B, L, b2);
        const auto prof = oracle::InnerProfile::polynomial(c, L);
        const double box =
            oracle::core_integral_numeric(prof, {0.0, B, B, L, b2}, oracle::Domain::rectangle, fine);
        worst_small = std::max({worst_small, rel(k, box), rel(k, kernels::k_sci_generic(c, B, L, b2))});
    }
    return {worst_g <= kSciGenericTol && worst_2d <= kSci2dTol && worst_small <= kSmallXTol,
            fmt::format("vs generic {:.2e} (tol {:.0e}), vs 2D {:.2e} (tol {:.0e}), "
                        "x in [1e-8,1e-2] {:.2e} (tol {:.0e})",
                        worst_g, kSciGenericTol, worst_2d, kSci2dTol, worst_small, kSmallXTol)};
}

// 3. SPP solver sanity.
Outcome spp_sanity() {
    // attenuation only: desk fiber with its frequency-dependent loss and an event
    auto desk = io::load_named_scenario("desk_7ch").spans[0];
    desk.fiber.lumped_events.push_back({37.0, 0.8, LumpedTarget::both});
    const auto a = attenuation_only_spp(desk.fiber, desk.plan, 1001);
    const auto r = solve_raman(desk.fiber, desk.plan, {}, 1001);
    double att = 0.0;
    for (std::size_t c = 0; c < desk.plan.size(); ++c) att = std::max(att, rel(r.at_end(c), a.at_end(c)));

    // photon flux, lossless, two channels 10 THz apart
    FiberSpec lossless = desk.fiber;
    lossless.lumped_events.clear();
    lossless.alpha_db_per_km = Table1D::constant(0.0);
    lossless.raman = io::load_named_scenario("desk_9ch_raman").spans[0].fiber.raman;
    ChannelPlan two;
    two.channels = {{186.0, 0.1, 60.0}, {196.0, 0.1, 60.0}};
    const auto pf = solve_raman(lossless, two, {}, 1001);
    const double f0 = 186.0, f1 = 196.0;
    const double flux0 = 60.0 / f0 + 60.0 / f1;
    double drift = 0.0;
    for (std::size_t k = 0; k < pf.z.size(); ++k)
        drift = std::max(drift, std::abs((60.0 * pf.profiles[0][k] / f0 +
                                          60.0 * pf.profiles[1][k] / f1) / flux0 - 1.0));
    auto g = [&](double lo, double hi) { return lossless.raman.coupling(lo, hi) * 1e-3; };
    const auto fine = oracle_ref::raman_forward_rk4({f0, f1}, {60.0, 60.0}, g, 100.0, 10000);
    const double ref_err = std::max(rel(60.0 * pf.at_end(0), fine[0]), rel(60.0 * pf.at_end(1), fine[1]));

    // backward pumps: boundary residual and grid doubling
    double boundary = 0.0, grid = 0.0;
    for (const char* name : {"desk_9ch_raman", "paper_cls_100km"}) {
        const auto span = io::load_named_scenario(name).spans[0];
        const auto s1 = solve_raman(span.fiber, span.plan, span.pumps, 1001);
        const auto s2 = solve_raman(span.fiber, span.plan, span.pumps, 2001);
        boundary = std::max(boundary, s1.boundary_residual);
        for (std::size_t p = 0; p < span.pumps.size(); ++p)
            boundary = std::max(boundary, rel(s1.pump_profiles[p].back(), span.pumps[p].power_mw));
        for (std::size_t c = 0; c < span.plan.size(); ++c)
            grid = std::max(grid, rel(s2.at_end(c), s1.at_end(c)));
    }
    const bool ok = att <= kAttOnlyTol && drift <= kFluxTol && ref_err <= kFluxTol &&
                    boundary <= kBoundaryTol && grid <= kGridTol;
    return {ok, fmt::format("attenuation-only {:.1e} (tol {:.0e}), flux drift {:.1e} / fine-step "
                            "{:.1e} (tol {:.0e}), pump boundary {:.1e} (tol {:.0e}), grid doubling "
                            "{:.1e} (tol {:.0e})",
                            att, kAttOnlyTol, drift, ref_err, kFluxTol, boundary, kBoundaryTol, grid,
                            kGridTol)};
}

// 4. Fit degree 5 against 9 on the Raman-pumped 9-channel desk span.
Outcome np_stabilization() {
    const auto cfg = io::load_named_scenario("desk_9ch_raman");
    std::vector<SppGrid> spps;
    for (const auto& s : cfg.spans) spps.push_back(solve_span_spp(s, cfg.grid_points));
    LinkOptions o5, o9;
    o5.degree = 5;
    o9.degree = 9;
    o5.grid_points = o9.grid_points = cfg.grid_points;
    const auto r5 = evaluate_link(cfg.spans, o5, &spps);
    const auto r9 = evaluate_link(cfg.spans, o9, &spps);
    double worst = 0.0;
    for (double d : delta_gsnr(r5.report, r9.report)) worst = std::max(worst, std::abs(d));
    return {worst <= kNpStableDb,
            fmt::format("{} channels, max |GSNR(Np=5) - GSNR(Np=9)| = {:.4f} dB (limit {:.2f} dB)",
                        r9.report.rows.size(), worst, kNpStableDb)};
}

// 5. PCFM against the lozenge, MCI-inclusive GN oracle on the 7-channel desk comb.
Outcome rectangle_bias() {
    const auto t0 = std::chrono::steady_clock::now();
    auto cfg = io::load_named_scenario("desk_7ch");
    cfg.oracle.include_mci = true;
    cfg.oracle.lozenge_domains = true;
    cfg.oracle.stretch_xci = false;
    cfg.oracle.use_polynomials = false;
    LinkOptions o;
    o.degree = cfg.fit_degree;
    o.grid_points = cfg.grid_points;
    const auto pc = evaluate_link(cfg.spans, o);
    const auto ref = io::oracle_link_report(cfg, pc);
    const auto d = delta_gsnr(pc.report, ref);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / d.size());
    const bool all_neg = std::all_of(d.begin(), d.end(), [](double v) { return v < 0.0; });
    const double t = seconds_since(t0);
    const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
    return {all_neg && mean >= kBiasMeanLo && mean <= kBiasMeanHi && sd <= kBiasStd &&
                t <= kBiasSeconds,
            fmt::format("{} channels, dGSNR in [{:.3f}, {:.3f}] dB, mean {:.3f} dB (band [{}, {}]), "
                        "std {:.3f} dB (limit {}), {:.0f} s (limit {:.0f} s)",
                        d.size(), *mn, *mx, mean, kBiasMeanLo, kBiasMeanHi, sd, kBiasStd, t,
                        kBiasSeconds)};
}

// 6. Lumped losses: PCFM(Np=9) against the rectangle oracle fed the sampled SPP.
Outcome lumped_robustness() {
    double worst = 0.0;
    std::string per;
    for (const char* name : {"desk_7ch_lumped_1db", "desk_7ch_lumped_2db"}) {
        auto cfg = io::load_named_scenario(name);
        cfg.oracle.lozenge_domains = false;
        cfg.oracle.include_mci = false;
        cfg.oracle.stretch_xci = false;
        cfg.oracle.use_polynomials = false;
        LinkOptions o;
        o.degree = 9;
        o.grid_points = cfg.grid_points;
        const auto pc = evaluate_link(cfg.spans, o);
        const auto ref = io::oracle_link_report(cfg, pc);
        double w = 0.0;
        for (double v : delta_gsnr(pc.report, ref)) w = std::max(w, std::abs(v));
        per += fmt::format("{}{} {:.3f} dB", per.empty() ? "" : ", ", name, w);
        worst = std::max(worst, w);
    }
    return {worst <= kLumpedDb, fmt::format("max |dGSNR|: {} (limit {} dB)", per, kLumpedDb)};
}

// 7. Island census against brute force for N = 1..9.
Outcome island_census() {
    std::size_t checked = 0, bad = 0;
    for (std::size_t n = 1; n <= 9; ++n) {
        for (double spacing : {0.05, 0.075, 0.11875}) {
            const auto plan = oracle_ref::uniform_comb(n, 193.0, spacing, 0.03, 1.0);
            for (std::size_t cut = 0; cut < n; ++cut) {
                const auto is = enumerate_islands(plan, cut, true);
                const auto ref = oracle_ref::brute_census(plan, cut);
                std::size_t s = 0, x = 0, m = 0;
                for (const auto& i : is)
                    (i.kind == IslandKind::sci ? s : i.kind == IslandKind::xci ? x : m)++;
                ++checked;
                if (s != ref.sci || x != ref.xci || m != ref.mci || x != 2 * (n - 1) || s != 1)
                    ++bad;
            }
        }
    }
    const auto plan3 = oracle_ref::uniform_comb(3, 193.0, 0.05, 0.03, 1.0, 1);
    const auto c3 = oracle_ref::brute_census(plan3, 1);
    const bool three = enumerate_islands(plan3, 1, true).size() == 7 && c3.sci == 1 &&
                       c3.xci == 4 && c3.mci == 2;
    return {bad == 0 && three, fmt::format("{} (comb, CUT) pairs, {} mismatches; N=3 centre "
                                           "1 SCI + {} XCI + {} MCI",
                                           checked, bad, c3.xci, c3.mci)};
}

// 8. Incoherent accumulation and the P^3 law.
Outcome accumulation() {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    bool exact = true;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> g(1 + t % 12);
        for (double& v : g) v = u(rng);
        const std::vector<double> ones(g.size(), 1.0);
        double plain = 0.0;
        for (std::size_t i = g.size(); i-- > 0;) plain += g[i];
        exact = exact && accumulate_link(g, ones) == plain;
    }
    const auto cfg = io::load_named_scenario("desk_7ch");
    LinkOptions o;
    const std::vector<LinkSpan> one{cfg.spans[0]};
    const std::vector<LinkSpan> four(4, cfg.spans[0]);
    const auto r1 = evaluate_link(one, o);
    const auto r4 = evaluate_link(four, o);
    double link = 0.0;
    for (std::size_t c = 0; c < r1.report.rows.size(); ++c) {
        const double g = r1.report.rows[c].g_nli;
        link = std::max(link, rel(r4.report.rows[c].g_nli, ((g + g) + g) + g));
    }
    exact = exact && link == 0.0;

    double scaling = 0.0;
    for (double c : {0.5, 2.0, 3.7}) {
        auto span = cfg.spans[0];
        for (auto& ch : span.plan.channels) ch.power_mw *= c;
        const std::vector<LinkSpan> sc{span, span};
        const std::vector<LinkSpan> base{cfg.spans[0], cfg.spans[0]};
        const auto rb = evaluate_link(base, o);
        const auto rs = evaluate_link(sc, o);
        for (std::size_t i = 0; i < rb.report.rows.size(); ++i) {
            scaling = std::max(scaling, rel(rs.report.rows[i].g_nli, c * c * c * rb.report.rows[i].g_nli));
            const double dgsnr = rb.report.rows[i].gsnr_nli_db - rs.report.rows[i].gsnr_nli_db;
            scaling = std::max(scaling, std::abs(std::pow(10.0, dgsnr / 10.0) / (c * c) - 1.0));
        }
    }
    return {exact && scaling <= kScalingTol,
            fmt::format("transparent sums {}, 4-span link rel diff {:.1e}; P^3 law max rel err "
                        "{:.1e} (tol {:.0e})",
                        exact ? "exact" : "NOT exact", link, scaling, kScalingTol)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {"1 closed-form XCI exactness", xci_exactness},
        {"2 closed-form SCI exactness", sci_exactness},
        {"3 SPP solver sanity", spp_sanity},
        {"4 fit-degree stabilization", np_stabilization},
        {"5 rectangle/stretch bias", rectangle_bias},
        {"6 lumped-loss robustness", lumped_robustness},
        {"7 island census", island_census},
        {"8 accumulation contract", accumulation},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
