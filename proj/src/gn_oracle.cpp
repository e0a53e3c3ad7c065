#include "pcfm/gn_oracle.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "pcfm/errors.hpp"
#include "pcfm/specfun.hpp"

namespace pcfm::oracle {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::array<std::complex<double>, 2> cell_moments(double phi) {
    std::array<std::complex<double>, 2> m;
    specfun::monomial_phase_moments(phi, m);
    return m;
}
}  // namespace

InnerProfile InnerProfile::polynomial(std::vector<double> coeffs, double length) {
    if (!(length > 0.0)) throw DomainError("InnerProfile: length must be positive");
    if (coeffs.empty()) coeffs.push_back(0.0);
    InnerProfile p;
    p.length_ = length;
    p.coeffs_ = std::move(coeffs);
    return p;
}

InnerProfile InnerProfile::sampled(std::vector<double> z, std::vector<double> right,
                                   std::vector<double> left) {
    const std::size_t m = z.size();
    if (m < 2 || right.size() != m || left.size() != m)
        throw DomainError("InnerProfile: need >= 2 nodes and matching value vectors");
    if (z.front() != 0.0) throw DomainError("InnerProfile: grid must start at z = 0");
    InnerProfile p;
    p.length_ = z.back();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double h = z[i + 1] - z[i];
        if (!(h > 0.0)) throw DomainError("InnerProfile: z must be strictly increasing");
        if (p.runs_.empty() || std::abs(h - p.runs_.back().h) > 1e-12 * h)
            p.runs_.push_back({z[i], h, i, 0});
        ++p.runs_.back().count;
        p.a_.push_back(right[i]);
        p.d_.push_back(left[i + 1] - right[i]);
    }
    for (std::size_t i = 1; i + 1 < m; ++i)
        if (right[i] != left[i]) p.jumps_.emplace_back(z[i], right[i] - left[i]);
    p.first_value_ = right.front();
    p.last_value_ = left.back();
    return p;
}

InnerProfile InnerProfile::from_grid(const SppGrid& spp, std::size_t ch) {
    std::vector<double> left(spp.z.size());
    for (std::size_t i = 0; i < left.size(); ++i) left[i] = spp.left_value(ch, i);
    return sampled(spp.z, spp.profiles[ch], std::move(left));
}

std::complex<double> InnerProfile::phase_integral(double theta) const {
    if (!coeffs_.empty()) return specfun::poly_phase_integral(coeffs_, length_, theta);

    // Within a run cell i starts at z0 + i h, so the run is
    // h e^{j theta z0} (I0 sum a_i w^i + I1 sum d_i w^i) with w = e^{j theta h}.
    std::complex<double> acc = 0.0;
    for (const auto& run : runs_) {
        const auto mom = cell_moments(theta * run.h);
        const std::complex<double> w = std::polar(1.0, theta * run.h);
        const double wr = w.real(), wi = w.imag();
        double ar = 0.0, ai = 0.0, dr = 0.0, di = 0.0;
        for (std::size_t i = run.first + run.count; i-- > run.first;) {
            const double nar = ar * wr - ai * wi + a_[i];
            ai = ar * wi + ai * wr;
            ar = nar;
            const double ndr = dr * wr - di * wi + d_[i];
            di = dr * wi + di * wr;
            dr = ndr;
        }
        acc += run.h * std::polar(1.0, theta * run.z0) *
               (mom[0] * std::complex<double>(ar, ai) + mom[1] * std::complex<double>(dr, di));
    }
    return acc;
}

std::vector<std::pair<double, double>> InnerProfile::edge_terms() const {
    std::vector<std::pair<double, double>> out;
    if (!coeffs_.empty()) {
        double end = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) end = end * length_ + *it;
        out.emplace_back(0.0, -coeffs_.front());
        out.emplace_back(length_, end);
        return out;
    }
    out.emplace_back(0.0, -first_value_);
    for (const auto& [z, d] : jumps_) out.emplace_back(z, -d);
    out.emplace_back(length_, last_value_);
    return out;
}

double theta_line_integral(const InnerProfile& profile) {
    const double L = profile.length();
    const std::size_t periods = profile.is_polynomial() ? 2000 : 4000;
    const double X = static_cast<double>(periods) * kTwoPi / L;
    const double body = quad::gauss_legendre_composite(
        [&](double t) { return std::norm(profile.phase_integral(t)); }, 0.0, X, periods);

    // int_X^inf |sum_r c_r e^{j t z_r}|^2 / t^2 dt
    const auto edges = profile.edge_terms();
    double tail = 0.0;
    for (const auto& [zr, cr] : edges) {
        for (const auto& [zs, cs] : edges) {
            const double a = std::abs(zr - zs);
            const double t = a == 0.0 ? 1.0 / X
                                      : std::cos(a * X) / X -
                                            a * (0.5 * kPi - specfun::sin_integral(a * X));
            tail += cr * cs * t;
        }
    }
    return 2.0 * (body + tail);
}

quad::QuadResult core_integral_box(const InnerProfile& profile, double beta2_eff,
                                   const IslandBox& box, const OracleOptions& options) {
    const double c = 4.0 * kPi * kPi * beta2_eff;
    const double L = profile.length();
    quad::QuadResult out;

    if (box.stretched) {
        if (beta2_eff == 0.0) throw DomainError("stretched island with beta2_eff = 0 diverges");
        if (box.f1_lo < 0.0 && box.f1_hi > 0.0)
            throw DomainError("stretched island may not straddle f1' = 0");
        const double line = theta_line_integral(profile) / std::abs(c);
        quad::AdaptiveOptions opt;
        opt.rel_tol = options.rel_tol * 1e-3;
        opt.initial_panels = 8;
        auto r = quad::integrate_adaptive([](double f) { return 1.0 / std::abs(f); }, box.f1_lo,
                                          box.f1_hi, opt);
        out.value = line * r.value;
        out.error = line * r.error;
        out.evaluations = r.evaluations;
        out.converged = r.converged;
        return out;
    }

    double lo1 = box.f1_lo, hi1 = box.f1_hi;
    if (box.has_sum_band) {
        lo1 = std::max(lo1, box.s_lo - box.f2_hi);
        hi1 = std::min(hi1, box.s_hi - box.f2_lo);
    }
    if (!(hi1 > lo1)) {
        out.converged = true;
        return out;
    }
    std::vector<double> breaks{lo1, hi1};
    auto add_break = [&](std::vector<double>& b, double v, double lo, double hi) {
        if (v > lo && v < hi) b.push_back(v);
    };
    add_break(breaks, 0.0, lo1, hi1);
    if (box.has_sum_band) {
        add_break(breaks, box.s_lo - box.f2_lo, lo1, hi1);
        add_break(breaks, box.s_hi - box.f2_hi, lo1, hi1);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::size_t inner_evals = 0;
    double inner_rel = 0.0;
    bool inner_ok = true;
    quad::AdaptiveOptions inner_opt;
    inner_opt.rel_tol = std::max(options.rel_tol * 1e-2, 1e-13);
    inner_opt.max_evaluations = 400'000;

    auto outer = [&](double f1) {
        double lo2 = box.f2_lo, hi2 = box.f2_hi;
        if (box.has_sum_band) {
            lo2 = std::max(lo2, box.s_lo - f1);
            hi2 = std::min(hi2, box.s_hi - f1);
        }
        if (!(hi2 > lo2)) return 0.0;
        std::array<double, 3> br{lo2, 0.0, hi2};
        std::span<const double> sb(br);
        if (!(lo2 < 0.0 && hi2 > 0.0)) {
            br[1] = hi2;
            sb = std::span<const double>(br.data(), 2);
        }
        // about one initial panel per two oscillations of the z-integral
        const double osc = std::abs(c * f1) * L * (hi2 - lo2) / kTwoPi;
        auto opt = inner_opt;
        opt.initial_panels = 1 + static_cast<std::size_t>(std::min(osc / 2.0, 2000.0));
        auto r = quad::integrate_adaptive(
            [&](double f2) { return std::norm(profile.phase_integral(c * f1 * f2)); }, sb, opt);
        inner_evals += r.evaluations;
        if (!r.converged) inner_ok = false;
        if (r.value != 0.0) inner_rel = std::max(inner_rel, r.error / std::abs(r.value));
        return r.value;
    };
    quad::AdaptiveOptions outer_opt;
    outer_opt.rel_tol = options.rel_tol;
    outer_opt.initial_panels = 4;
    outer_opt.max_evaluations = 20'000;
    auto r = quad::integrate_adaptive(outer, breaks, outer_opt);
    out.value = r.value;
    out.error = r.error + inner_rel * std::abs(r.value);
    out.evaluations = inner_evals;
    out.converged = r.converged && inner_ok;
    if (inner_evals > options.max_evaluations) out.converged = false;
    return out;
}

double core_integral_numeric(const InnerProfile& profile, const kernels::IslandGeometry& g,
                             Domain domain, const OracleOptions& options) {
    IslandBox box;
    const double hc = 0.5 * g.b_cut;
    box.f2_lo = -hc;
    box.f2_hi = hc;
    if (g.f_offset == 0.0) {
        if (domain == Domain::stretched)
            throw DomainError("core_integral_numeric: the SCI island cannot be stretched");
        box.f1_lo = -hc;
        box.f1_hi = hc;
        box.s_lo = -hc;
        box.s_hi = hc;
    } else {
        const double hi = 0.5 * g.b_interferer;
        box.f1_lo = g.f_offset - hi;
        box.f1_hi = g.f_offset + hi;
        box.s_lo = box.f1_lo;
        box.s_hi = box.f1_hi;
    }
    box.has_sum_band = domain == Domain::lozenge;
    box.stretched = domain == Domain::stretched;
    const auto r = core_integral_box(profile, g.beta2_eff, box, options);
    if (!r.converged || r.error > options.rel_tol * std::abs(r.value) * 10.0)
        throw EvaluationError("core_integral_numeric: tolerance not reached", r.value, r.error,
                              r.evaluations);
    return r.value;
}

namespace {

enum class Kind { sci, xci, mci };

struct Task {
    std::size_t cut, m, k, n;
    double weight;  // 2 when the mirrored triple (k, m, n) is folded in
    Kind kind;
};

std::vector<Task> build_tasks(const ChannelPlan& plan, const ReferenceOptions& opt) {
    const std::size_t N = plan.size();
    std::vector<std::size_t> cuts = opt.cuts;
    if (cuts.empty())
        for (std::size_t i = 0; i < N; ++i) cuts.push_back(i);
    std::vector<Task> tasks;
    for (std::size_t cut : cuts) {
        if (cut >= N) throw DomainError("full_gn_reference: CUT index out of range");
        const auto& C = plan.channels[cut];
        for (std::size_t m = 0; m < N; ++m) {
            for (std::size_t k = 0; k < N; ++k) {
                // (m,k,n) and (k,m,n) give the same integral; keep one
                double weight = 1.0;
                if (m != k) {
                    if (m == cut) continue;
                    if (k != cut && m > k) continue;
                    weight = 2.0;
                }
                for (std::size_t n = 0; n < N; ++n) {
                    const auto& M = plan.channels[m];
                    const auto& K = plan.channels[k];
                    const auto& Nn = plan.channels[n];
                    if (opt.lozenge_domains) {
                        const double a1 = M.center_thz - 0.5 * M.bandwidth_thz - C.center_thz;
                        const double b1 = a1 + M.bandwidth_thz;
                        const double a2 = K.center_thz - 0.5 * K.bandwidth_thz - C.center_thz;
                        const double b2 = a2 + K.bandwidth_thz;
                        const double as = Nn.center_thz - 0.5 * Nn.bandwidth_thz - C.center_thz;
                        const double bs = as + Nn.bandwidth_thz;
                        const double lo = std::max(a1, as - b2);
                        const double hi = std::min(b1, bs - a2);
                        if (!(hi - lo > 1e-12)) continue;
                    } else if (std::abs(M.center_thz + K.center_thz - Nn.center_thz -
                                        C.center_thz) > 1e-9) {
                        continue;
                    }
                    Kind kind = Kind::mci;
                    if (m == cut && k == cut && n == cut)
                        kind = Kind::sci;
                    else if ((k == cut && m == n) || (m == cut && k == n))
                        kind = Kind::xci;
                    if (kind == Kind::mci && !opt.include_mci) continue;
                    tasks.push_back({cut, m, k, n, weight, kind});
                }
            }
        }
    }
    return tasks;
}

InnerProfile task_profile(const Task& t, const SppGrid& spp, const ReferenceOptions& opt,
                          double length) {
    // p_x = sqrt(p_m p_k p_n / p_cut)
    std::size_t single = spp.channel_count();
    if (t.m == t.n && t.k == t.cut) single = t.m;
    else if (t.k == t.n && t.m == t.cut) single = t.k;
    if (opt.polynomials) {
        const auto& polys = *opt.polynomials;
        if (single < polys.size()) return InnerProfile::polynomial(polys[single].coeffs, length);
        std::vector<double> v(spp.z.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double z = spp.z[i];
            const double prod = eval_poly(polys[t.m], z) * eval_poly(polys[t.k], z) *
                                eval_poly(polys[t.n], z) / eval_poly(polys[t.cut], z);
            v[i] = std::sqrt(std::max(prod, 0.0));
        }
        return InnerProfile::sampled(spp.z, v, v);
    }
    if (single < spp.channel_count()) return InnerProfile::from_grid(spp, single);
    std::vector<double> right(spp.z.size()), left(spp.z.size());
    for (std::size_t i = 0; i < right.size(); ++i) {
        const auto& P = spp.profiles;
        right[i] = std::sqrt(P[t.m][i] * P[t.k][i] * P[t.n][i] / P[t.cut][i]);
        left[i] = std::sqrt(spp.left_value(t.m, i) * spp.left_value(t.k, i) *
                            spp.left_value(t.n, i) / spp.left_value(t.cut, i));
    }
    return InnerProfile::sampled(spp.z, std::move(right), std::move(left));
}

struct TaskOutput {
    double value = 0.0;  // W/THz before the span transfer factor
    double rel_error = 0.0;
    std::size_t evaluations = 0;
    bool done = false;
    std::exception_ptr error;
};

TaskOutput run_task(const Task& t, const ChannelPlan& plan, const FiberSpec& fiber,
                    const SppGrid& spp, const ReferenceOptions& opt) {
    const auto& C = plan.channels[t.cut];
    const auto& M = plan.channels[t.m];
    const auto& K = plan.channels[t.k];
    const auto& Nn = plan.channels[t.n];
    IslandBox box;
    box.f1_lo = M.center_thz - 0.5 * M.bandwidth_thz - C.center_thz;
    box.f1_hi = box.f1_lo + M.bandwidth_thz;
    box.f2_lo = K.center_thz - 0.5 * K.bandwidth_thz - C.center_thz;
    box.f2_hi = box.f2_lo + K.bandwidth_thz;
    box.has_sum_band = opt.lozenge_domains;
    box.s_lo = Nn.center_thz - 0.5 * Nn.bandwidth_thz - C.center_thz;
    box.s_hi = box.s_lo + Nn.bandwidth_thz;
    box.stretched = !opt.lozenge_domains && opt.stretch_xci && t.kind == Kind::xci;

    const double b2 = kernels::beta2_eff(fiber.beta2, fiber.beta3, fiber.beta4, fiber.fc_thz,
                                         M.center_thz, K.center_thz);
    const double gamma = kernels::gamma_island(
        C.center_thz, fiber.aeff_um2(C.center_thz), fiber.aeff_um2(M.center_thz),
        fiber.aeff_um2(K.center_thz), fiber.aeff_um2(Nn.center_thz), fiber.n2);
    const auto profile = task_profile(t, spp, opt, spp.length());
    OracleOptions oo;
    oo.rel_tol = opt.rel_tol;
    const auto r = core_integral_box(profile, b2, box, oo);

    const double gm = M.power_mw * 1e-3 / M.bandwidth_thz;
    const double gk = K.power_mw * 1e-3 / K.bandwidth_thz;
    const double gn = Nn.power_mw * 1e-3 / Nn.bandwidth_thz;
    TaskOutput out;
    out.value = t.weight * 16.0 / 27.0 * gamma * gamma * gm * gk * gn * r.value;
    out.rel_error = r.value != 0.0 ? r.error / std::abs(r.value) : 0.0;
    if (!r.converged) out.rel_error = std::max(out.rel_error, opt.rel_tol * 10.0);
    out.evaluations = r.evaluations;
    out.done = true;
    return out;
}

ReferenceResult run_reference(const ChannelPlan& plan, const FiberSpec& fiber,
                              const SppGrid& spp, const ReferenceOptions& opt, bool parallel) {
    plan.validate();
    if (spp.channel_count() != plan.size())
        throw DomainError("full_gn_reference: SPP grid does not match the channel plan");
    if (opt.polynomials && opt.polynomials->size() != plan.size())
        throw DomainError("full_gn_reference: polynomial count does not match the channel plan");
    if (!opt.lumped_gain_db.empty() && opt.lumped_gain_db.size() != plan.size())
        throw DomainError("full_gn_reference: lumped gain list does not match the channel plan");

    const auto tasks = build_tasks(plan, opt);
    std::vector<TaskOutput> outs(tasks.size());
    std::atomic<std::size_t> used{0};
    const long count = static_cast<long>(tasks.size());

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (long i = 0; i < count; ++i) {
        if (used.load(std::memory_order_relaxed) >= opt.max_evaluations) continue;
        try {
            outs[i] = run_task(tasks[i], plan, fiber, spp, opt);
            used.fetch_add(outs[i].evaluations, std::memory_order_relaxed);
        } catch (...) {
            outs[i].error = std::current_exception();
        }
    }

    for (const auto& o : outs)
        if (o.error) std::rethrow_exception(o.error);

    auto name = [](const Task& t) {
        return fmt::format("cut {} island ({},{},{})", t.cut, t.m, t.k, t.n);
    };
    if (std::any_of(outs.begin(), outs.end(), [](const auto& o) { return !o.done; })) {
        std::vector<std::string> completed;
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (outs[i].done) completed.push_back(name(tasks[i]));
        throw BudgetExceeded("full_gn_reference: evaluation budget exhausted", completed);
    }

    ReferenceResult res;
    const std::size_t N = plan.size();
    res.g_nli.assign(N, 0.0);
    res.island_count.assign(N, 0);
    res.mci_count.assign(N, 0);
    std::vector<double> acc(N, 0.0);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        acc[t.cut] += outs[i].value;
        const std::size_t islands = t.weight > 1.0 ? 2 : 1;
        res.island_count[t.cut] += islands;
        if (t.kind == Kind::mci) res.mci_count[t.cut] += islands;
        res.max_rel_error = std::max(res.max_rel_error, outs[i].rel_error);
        res.evaluations += outs[i].evaluations;
    }
    for (std::size_t ch = 0; ch < N; ++ch) {
        const double p_end = spp.at_end(ch);
        const double gain_db =
            opt.lumped_gain_db.empty() ? -10.0 * std::log10(p_end) : opt.lumped_gain_db[ch];
        res.g_nli[ch] = acc[ch] * transfer_factor(spp, ch, gain_db) * 1e3;
    }
    return res;
}

}  // namespace

ReferenceResult full_gn_reference(const ChannelPlan& plan, const FiberSpec& fiber,
                                  const SppGrid& spp, const ReferenceOptions& options) {
    return run_reference(plan, fiber, spp, options, true);
}

ReferenceResult full_gn_reference_serial(const ChannelPlan& plan, const FiberSpec& fiber,
                                         const SppGrid& spp, const ReferenceOptions& options) {
    return run_reference(plan, fiber, spp, options, false);
}

}  // namespace pcfm::oracle
