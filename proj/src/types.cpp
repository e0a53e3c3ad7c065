#include "pcfm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcfm/errors.hpp"

namespace pcfm {

Table1D::Table1D(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    std::sort(points_.begin(), points_.end());
}

double Table1D::operator()(double x) const {
    if (points_.empty()) throw DomainError("Table1D: empty table");
    if (x <= points_.front().first) return points_.front().second;
    if (x >= points_.back().first) return points_.back().second;
    const auto hi = std::upper_bound(points_.begin(), points_.end(), x,
                                     [](double v, const auto& p) { return v < p.first; });
    const auto lo = hi - 1;
    const double t = (x - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

bool RamanGainCurve::is_zero() const {
    return std::all_of(table.begin(), table.end(),
                       [](const auto& p) { return p.second == 0.0; });
}

double RamanGainCurve::coupling(double f_lo, double f_hi) const {
    const double offset = f_hi - f_lo;
    if (table.empty() || offset < table.front().first || offset > table.back().first)
        return 0.0;
    const double g = Table1D(table)(offset);
    return g * (f_hi / ref_pump_thz);
}

double FiberSpec::alpha_per_km(double f_thz) const {
    return alpha_db_per_km(f_thz) * std::numbers::ln10 / 10.0;
}

void FiberSpec::validate() const {
    if (!(length_km > 0.0)) throw DomainError("fiber: length_km must be positive");
    if (alpha_db_per_km.empty()) throw DomainError("fiber: attenuation table is empty");
    for (const auto& [f, a] : alpha_db_per_km.points())
        if (!(a >= 0.0)) throw DomainError("fiber: attenuation must be non-negative");
    if (aeff_um2.empty()) throw DomainError("fiber: effective-area table is empty");
    for (const auto& [f, a] : aeff_um2.points())
        if (!(a > 0.0)) throw DomainError("fiber: effective area must be positive");
    for (const auto& [off, g] : raman.table)
        if (!(off >= 0.0)) throw DomainError("fiber: Raman gain offsets must be >= 0");
    for (const auto& e : lumped_events) {
        if (!(e.position_km > 0.0 && e.position_km < length_km))
            throw DomainError("fiber: lumped event position outside (0, length)");
        if (!std::isfinite(e.loss_db)) throw DomainError("fiber: lumped loss not finite");
    }
}

void ChannelPlan::validate() const {
    if (channels.empty()) throw DomainError("plan: no channels");
    if (cut_index >= channels.size()) throw DomainError("plan: cut_index out of range");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& c = channels[i];
        if (!(c.bandwidth_thz > 0.0)) throw DomainError("plan: bandwidth must be positive");
        if (!std::isfinite(c.power_mw) || c.power_mw < 0.0)
            throw DomainError("plan: launch power must be finite and non-negative");
        if (i > 0) {
            const auto& p = channels[i - 1];
            if (!(c.center_thz > p.center_thz))
                throw DomainError("plan: channels must be sorted by center frequency");
            if (c.center_thz - p.center_thz < 0.5 * (c.bandwidth_thz + p.bandwidth_thz) - 1e-12)
                throw DomainError("plan: channel spectra overlap");
        }
    }
}

}  // namespace pcfm
