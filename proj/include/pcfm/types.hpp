#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace pcfm {

/// Piecewise-linear table y(x) with flat extrapolation. A single-entry table
/// is a constant.
class Table1D {
public:
    Table1D() = default;
    explicit Table1D(std::vector<std::pair<double, double>> points);
    static Table1D constant(double value) { return Table1D({{0.0, value}}); }

    double operator()(double x) const;
    bool empty() const { return points_.empty(); }
    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

enum class LumpedTarget { signals, pumps, both };

struct LumpedEvent {
    double position_km = 0.0;
    double loss_db = 0.0;
    LumpedTarget applies_to = LumpedTarget::both;
};

/// Raman gain curve g(offset) in 1/(W km), measured with a pump at
/// `ref_pump_thz`. Offsets beyond the table give zero gain.
struct RamanGainCurve {
    double ref_pump_thz = 206.5;
    std::vector<std::pair<double, double>> table;  // (offset THz, gain 1/(W km))

    bool is_zero() const;
    /// Gain coupling donor frequency `f_hi` to receiver `f_lo`, scaled
    /// linearly with the donor frequency.
    double coupling(double f_lo, double f_hi) const;
};

struct FiberSpec {
    double length_km = 100.0;
    Table1D alpha_db_per_km;  // THz -> dB/km
    double beta2 = -21.3;     // ps^2/km
    double beta3 = 0.0;       // ps^3/km
    double beta4 = 0.0;       // ps^4/km
    double fc_thz = 193.5;
    Table1D aeff_um2;  // THz -> um^2
    double n2 = 2.6e-20;  // m^2/W
    RamanGainCurve raman;
    std::vector<LumpedEvent> lumped_events;

    /// Power attenuation in 1/km at frequency f.
    double alpha_per_km(double f_thz) const;
    /// Throws DomainError on broken invariants.
    void validate() const;
};

struct Channel {
    double center_thz = 0.0;
    double bandwidth_thz = 0.0;
    double power_mw = 0.0;

    /// Flat PSD of the rectangular spectrum, mW/THz.
    double psd() const { return power_mw / bandwidth_thz; }
};

struct ChannelPlan {
    std::vector<Channel> channels;
    std::size_t cut_index = 0;

    std::size_t size() const { return channels.size(); }
    void validate() const;
};

enum class PumpDirection { forward, backward };

struct RamanPump {
    double frequency_thz = 0.0;
    double power_mw = 0.0;
    PumpDirection direction = PumpDirection::backward;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

}  // namespace pcfm
