#include "pcfm/spp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcfm/errors.hpp"

namespace pcfm {

double SppGrid::left_value(std::size_t channel, std::size_t node) const {
    for (std::size_t e = 0; e < event_nodes.size(); ++e)
        if (event_nodes[e] == node) return left_limits[channel][e];
    return profiles[channel][node];
}

std::vector<double> make_span_grid(const FiberSpec& fiber, std::size_t grid_points) {
    if (grid_points < 2) throw DomainError("span grid needs at least 2 points");
    const double length = fiber.length_km;
    std::vector<double> z(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k)
        z[k] = length * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    z.back() = length;
    const double snap = 1e-9 * length;
    for (const auto& e : fiber.lumped_events) {
        const auto it = std::lower_bound(z.begin(), z.end(), e.position_km);
        if (it != z.end() && std::abs(*it - e.position_km) <= snap) {
            *it = e.position_km;
        } else if (it != z.begin() && std::abs(*(it - 1) - e.position_km) <= snap) {
            *(it - 1) = e.position_km;
        } else {
            z.insert(it, e.position_km);
        }
    }
    return z;
}

namespace {

bool applies_to_signal(LumpedTarget t) { return t != LumpedTarget::pumps; }
bool applies_to_pump(LumpedTarget t) { return t != LumpedTarget::signals; }

// Per-node event attenuation factors for signal and pump waves.
struct EventMap {
    std::vector<double> signal_factor;  // product of 10^{-loss/10} at node, 1 elsewhere
    std::vector<double> pump_factor;
    std::vector<std::size_t> nodes;     // node of each fiber event, in fiber order
};

EventMap map_events(const FiberSpec& fiber, const std::vector<double>& z) {
    EventMap m{std::vector<double>(z.size(), 1.0), std::vector<double>(z.size(), 1.0), {}};
    for (const auto& e : fiber.lumped_events) {
        const auto it = std::lower_bound(z.begin(), z.end(), e.position_km - 1e-9 * z.back());
        const auto node = static_cast<std::size_t>(it - z.begin());
        const double att = std::pow(10.0, -e.loss_db / 10.0);
        if (applies_to_signal(e.applies_to)) m.signal_factor[node] *= att;
        if (applies_to_pump(e.applies_to)) m.pump_factor[node] *= att;
        m.nodes.push_back(node);
    }
    return m;
}

// Cell-wise storage: value at the right limit of the cell start, at the
// midpoint and at the left limit of the cell end.
struct CellTrack {
    std::vector<double> lo, mid, hi;
    explicit CellTrack(std::size_t cells = 0) : lo(cells), mid(cells), hi(cells) {}
};

class RamanSystem {
public:
    RamanSystem(const FiberSpec& fiber, const ChannelPlan& plan, std::span<const RamanPump> pumps,
                std::vector<double> z)
        : z_(std::move(z)), events_(map_events(fiber, z_)) {
        for (const auto& c : plan.channels) {
            freq_.push_back(c.center_thz);
            // Zero-power channels still need a profile; a negligible seed keeps
            // them out of the coupling.
            launch_.push_back(c.power_mw > 0.0 ? c.power_mw : 1e-30);
            backward_.push_back(false);
            is_pump_.push_back(false);
        }
        for (const auto& p : pumps) {
            freq_.push_back(p.frequency_thz);
            launch_.push_back(p.power_mw);
            backward_.push_back(p.direction == PumpDirection::backward);
            is_pump_.push_back(true);
        }
        const std::size_t n = freq_.size();
        alpha_.resize(n);
        for (std::size_t i = 0; i < n; ++i) alpha_[i] = fiber.alpha_per_km(freq_[i]);

        // coupling_[i][j] in 1/(mW km): gain from higher-frequency donors,
        // photon-scaled depletion towards lower-frequency receivers.
        coupling_.assign(n, std::vector<double>(n, 0.0));
        any_coupling_ = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || freq_[i] == freq_[j]) continue;
                double c = 0.0;
                if (freq_[j] > freq_[i]) {
                    c = fiber.raman.coupling(freq_[i], freq_[j]) * 1e-3;
                } else {
                    c = -(freq_[i] / freq_[j]) * fiber.raman.coupling(freq_[j], freq_[i]) * 1e-3;
                }
                coupling_[i][j] = c;
                any_coupling_ = any_coupling_ || c != 0.0;
            }
        }
        for (std::size_t i = 0; i < n; ++i) (backward_[i] ? back_ : fwd_).push_back(i);
        tracks_.assign(n, CellTrack(z_.size() - 1));
    }

    std::size_t waves() const { return freq_.size(); }
    const std::vector<std::size_t>& forward_waves() const { return fwd_; }
    const std::vector<std::size_t>& backward_waves() const { return back_; }
    const std::vector<double>& z() const { return z_; }
    const EventMap& events() const { return events_; }
    std::vector<CellTrack>& tracks() { return tracks_; }
    double launch(std::size_t i) const { return launch_[i]; }
    bool is_pump(std::size_t i) const { return is_pump_[i]; }

    double event_factor(std::size_t wave, std::size_t node) const {
        return is_pump_[wave] ? events_.pump_factor[node] : events_.signal_factor[node];
    }

    /// dP_i/dz for every wave in `swept`, given the full state vector.
    void rhs(const std::vector<std::size_t>& swept, const std::vector<double>& state,
             std::vector<double>& out) const {
        for (std::size_t a = 0; a < swept.size(); ++a) {
            const std::size_t i = swept[a];
            double rate = -alpha_[i];
            if (any_coupling_) {
                const auto& row = coupling_[i];
                for (std::size_t j = 0; j < state.size(); ++j) rate += row[j] * state[j];
            }
            const double d = rate * state[i];
            out[a] = backward_[i] ? -d : d;
        }
    }

    /// Integrates the waves in `swept` across every cell in their propagation
    /// direction, holding all other waves at their stored cell values.
    void sweep(const std::vector<std::size_t>& swept, bool backward,
               const std::vector<double>& boundary) {
        const std::size_t cells = z_.size() - 1;
        const std::size_t n = waves();
        const std::size_t m = swept.size();
        std::vector<double> stage(n), y(m), k1(m), k2(m), k3(m), k4(m), d0(m),
            d1(m), y0(m);
        for (std::size_t a = 0; a < m; ++a) y[a] = boundary[a];

        auto load_held = [&](std::size_t cell, int where, std::vector<double>& s) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto& t = tracks_[j];
                s[j] = where == 0 ? t.lo[cell] : where == 1 ? t.mid[cell] : t.hi[cell];
            }
        };
        auto put = [&](std::vector<double>& s, const std::vector<double>& v) {
            for (std::size_t a = 0; a < m; ++a) s[swept[a]] = v[a];
        };

        for (std::size_t step = 0; step < cells; ++step) {
            const std::size_t cell = backward ? cells - 1 - step : step;
            const double h = z_[cell + 1] - z_[cell];
            const double dir = backward ? -1.0 : 1.0;
            // Event jump entering the cell.
            if (!backward && cell > 0) {
                for (std::size_t a = 0; a < m; ++a) y[a] *= event_factor(swept[a], cell);
            }
            if (backward && cell + 1 < cells) {
                for (std::size_t a = 0; a < m; ++a) y[a] *= event_factor(swept[a], cell + 1);
            }
            const int start = backward ? 2 : 0;
            const int end = backward ? 0 : 2;
            y0 = y;

            load_held(cell, start, stage);
            put(stage, y);
            rhs(swept, stage, k1);
            d0 = k1;

            load_held(cell, 1, stage);
            for (std::size_t a = 0; a < m; ++a) stage[swept[a]] = y[a] + 0.5 * dir * h * k1[a];
            rhs(swept, stage, k2);
            for (std::size_t a = 0; a < m; ++a) stage[swept[a]] = y[a] + 0.5 * dir * h * k2[a];
            rhs(swept, stage, k3);

            load_held(cell, end, stage);
            for (std::size_t a = 0; a < m; ++a) stage[swept[a]] = y[a] + dir * h * k3[a];
            rhs(swept, stage, k4);
            for (std::size_t a = 0; a < m; ++a)
                y[a] += dir * h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);

            load_held(cell, end, stage);
            put(stage, y);
            rhs(swept, stage, d1);

            for (std::size_t a = 0; a < m; ++a) {
                if (!(y[a] > 0.0) || !std::isfinite(y[a])) {
                    throw SolverError("Raman solve: negative or non-finite power at z = " +
                                          std::to_string(z_[backward ? cell : cell + 1]) +
                                          " km (step-size failure)",
                                      y[a]);
                }
                auto& t = tracks_[swept[a]];
                const double at_lo = backward ? y[a] : y0[a];
                const double at_hi = backward ? y0[a] : y[a];
                const double der_lo = backward ? d1[a] : d0[a];
                const double der_hi = backward ? d0[a] : d1[a];
                t.lo[cell] = at_lo;
                t.hi[cell] = at_hi;
                t.mid[cell] = 0.5 * (at_lo + at_hi) + h * (der_lo - der_hi) / 8.0;
            }
        }
    }

    /// Forward initial-value integration of all waves from their z = 0 values.
    /// Returns values at z = L.
    std::vector<double> integrate_ivp(const std::vector<double>& at_zero) const {
        const std::size_t n = waves();
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        std::vector<double> y = at_zero, s(n), k1(n), k2(n), k3(n), k4(n);
        for (std::size_t cell = 0; cell + 1 < z_.size(); ++cell) {
            if (cell > 0) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double f = event_factor(i, cell);
                    y[i] = backward_[i] ? y[i] / f : y[i] * f;
                }
            }
            const double h = z_[cell + 1] - z_[cell];
            rhs(all, y, k1);
            for (std::size_t i = 0; i < n; ++i) s[i] = y[i] + 0.5 * h * k1[i];
            rhs(all, s, k2);
            for (std::size_t i = 0; i < n; ++i) s[i] = y[i] + 0.5 * h * k2[i];
            rhs(all, s, k3);
            for (std::size_t i = 0; i < n; ++i) s[i] = y[i] + h * k3[i];
            rhs(all, s, k4);
            for (std::size_t i = 0; i < n; ++i)
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        return y;
    }

private:
    std::vector<double> z_;
    EventMap events_;
    std::vector<double> freq_, launch_, alpha_;
    std::vector<bool> backward_, is_pump_;
    std::vector<std::vector<double>> coupling_;
    bool any_coupling_ = false;
    std::vector<std::size_t> fwd_, back_;
    std::vector<CellTrack> tracks_;
};

SppGrid collect(RamanSystem& sys, const ChannelPlan& plan, std::size_t pump_count) {
    SppGrid g;
    g.z = sys.z();
    const std::size_t nodes = g.z.size();
    const std::size_t cells = nodes - 1;
    auto node_value = [&](const CellTrack& t, std::size_t k) {
        return k < cells ? t.lo[k] : t.hi[cells - 1];
    };
    g.event_nodes = sys.events().nodes;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& t = sys.tracks()[i];
        const double p0 = sys.launch(i);
        std::vector<double> prof(nodes);
        for (std::size_t k = 0; k < nodes; ++k) prof[k] = node_value(t, k) / p0;
        prof[0] = 1.0;
        g.profiles.push_back(std::move(prof));
        std::vector<double> left;
        for (auto node : g.event_nodes) left.push_back(t.hi[node - 1] / p0);
        g.left_limits.push_back(std::move(left));
    }
    for (std::size_t p = 0; p < pump_count; ++p) {
        const auto& t = sys.tracks()[plan.size() + p];
        std::vector<double> prof(nodes);
        for (std::size_t k = 0; k < nodes; ++k) prof[k] = node_value(t, k);
        g.pump_profiles.push_back(std::move(prof));
    }
    return g;
}

}  // namespace

SppGrid attenuation_only_spp(const FiberSpec& fiber, const ChannelPlan& plan,
                             std::size_t grid_points) {
    fiber.validate();
    SppGrid g;
    g.z = make_span_grid(fiber, grid_points);
    const auto ev = map_events(fiber, g.z);
    g.event_nodes = ev.nodes;
    for (const auto& ch : plan.channels) {
        const double alpha_db = fiber.alpha_db_per_km(ch.center_thz);
        std::vector<double> prof(g.z.size());
        double jumps = 1.0;
        std::vector<double> left;
        for (std::size_t k = 0; k < g.z.size(); ++k) {
            const double smooth = std::pow(10.0, -alpha_db * g.z[k] / 10.0);
            jumps *= ev.signal_factor[k];
            prof[k] = smooth * jumps;
        }
        for (auto node : g.event_nodes)
            left.push_back(prof[node] / ev.signal_factor[node]);
        g.profiles.push_back(std::move(prof));
        g.left_limits.push_back(std::move(left));
    }
    return g;
}

SppGrid solve_raman(const FiberSpec& fiber, const ChannelPlan& plan,
                    std::span<const RamanPump> pumps, std::size_t grid_points,
                    const specfun::EvalTolerance& /*tol*/, const RamanSolveOptions& options) {
    fiber.validate();
    plan.validate();
    if (grid_points < 51) throw DomainError("solve_raman: grid_points must be >= 51");
    double total = 0.0;
    for (const auto& c : plan.channels) total += c.power_mw;
    for (const auto& p : pumps) {
        if (!(p.power_mw >= 0.0)) throw DomainError("solve_raman: pump power must be >= 0");
        total += p.power_mw;
    }
    if (!std::isfinite(total)) throw DomainError("solve_raman: total launch power not finite");

    RamanSystem sys(fiber, plan, pumps, make_span_grid(fiber, grid_points));
    const auto& fwd = sys.forward_waves();
    const auto& back = sys.backward_waves();
    auto& tracks = sys.tracks();
    const std::size_t cells = sys.z().size() - 1;

    std::vector<double> fwd_bc, back_bc;
    for (auto i : fwd) fwd_bc.push_back(sys.launch(i));
    for (auto i : back) back_bc.push_back(sys.launch(i));

    // Zero-power backward pumps carry nothing; give them a seed like channels.
    for (auto& v : back_bc)
        if (!(v > 0.0)) v = 1e-30;

    SppGrid result;
    if (back.empty()) {
        sys.sweep(fwd, false, fwd_bc);
        result = collect(sys, plan, pumps.size());
        result.iterations = 1;
        return result;
    }

    // Initial guess: forward waves absent, backward waves self-consistent.
    for (auto i : fwd) {
        auto& t = tracks[i];
        std::fill(t.lo.begin(), t.lo.end(), 0.0);
        std::fill(t.mid.begin(), t.mid.end(), 0.0);
        std::fill(t.hi.begin(), t.hi.end(), 0.0);
    }
    sys.sweep(back, true, back_bc);

    std::vector<CellTrack> previous(back.size());
    double residual = 0.0;
    int iter = 0;
    bool converged = false;
    while (iter < options.max_iterations) {
        ++iter;
        sys.sweep(fwd, false, fwd_bc);
        for (std::size_t b = 0; b < back.size(); ++b) previous[b] = tracks[back[b]];
        sys.sweep(back, true, back_bc);
        residual = 0.0;
        for (std::size_t b = 0; b < back.size(); ++b) {
            auto& t = tracks[back[b]];
            const auto& old = previous[b];
            for (std::size_t c = 0; c < cells; ++c) {
                residual = std::max(residual, std::abs(t.lo[c] - old.lo[c]) / old.lo[c]);
                residual = std::max(residual, std::abs(t.hi[c] - old.hi[c]) / old.hi[c]);
                const double w = options.damping;
                t.lo[c] = w * old.lo[c] + (1.0 - w) * t.lo[c];
                t.mid[c] = w * old.mid[c] + (1.0 - w) * t.mid[c];
                t.hi[c] = w * old.hi[c] + (1.0 - w) * t.hi[c];
            }
        }
        if (residual < options.boundary_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw SolverError("Raman solve: backward-pump iteration did not converge in " +
                              std::to_string(options.max_iterations) + " iterations",
                          residual);
    }
    // Final sweeps so both directions see the converged partner profiles.
    sys.sweep(fwd, false, fwd_bc);
    sys.sweep(back, true, back_bc);
    sys.sweep(fwd, false, fwd_bc);

    result = collect(sys, plan, pumps.size());
    result.iterations = iter;

    std::vector<double> at_zero(sys.waves());
    for (std::size_t i = 0; i < sys.waves(); ++i) at_zero[i] = tracks[i].lo[0];
    const auto at_end = sys.integrate_ivp(at_zero);
    double bres = 0.0;
    for (std::size_t b = 0; b < back.size(); ++b) {
        if (sys.launch(back[b]) > 0.0)
            bres = std::max(bres, std::abs(at_end[back[b]] - back_bc[b]) / back_bc[b]);
    }
    result.boundary_residual = bres;
    return result;
}

double transfer_factor(const SppGrid& spp, std::size_t channel, double lumped_gain_db) {
    return db_to_linear(lumped_gain_db) * spp.at_end(channel);
}

}  // namespace pcfm
