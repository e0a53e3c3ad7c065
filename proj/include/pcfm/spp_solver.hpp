#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcfm/specfun.hpp"
#include "pcfm/types.hpp"

namespace pcfm {

/// Sampled spatial power profiles of one span.
///
/// `z` is strictly increasing from 0 to the span length. Channel profiles are
/// normalized to their launch power, so profiles[i][0] == 1. At a lumped event
/// the grid holds a node at the exact event position and the stored value is
/// the right limit; the left limit is kept in `left_limits`.
struct SppGrid {
    std::vector<double> z;
    std::vector<std::vector<double>> profiles;       // [channel][node]
    std::vector<std::vector<double>> pump_profiles;  // [pump][node], mW
    std::vector<std::size_t> event_nodes;            // node index of each lumped event
    std::vector<std::vector<double>> left_limits;    // [channel][event]

    /// Fixed-point iterations spent on the backward-pump boundary problem.
    int iterations = 0;
    /// max |P_pump(L) - P_spec| / P_spec when the converged state at z = 0 is
    /// re-integrated as an initial-value problem. Zero without backward pumps.
    double boundary_residual = 0.0;

    double length() const { return z.back(); }
    std::size_t channel_count() const { return profiles.size(); }
    double at_end(std::size_t channel) const { return profiles[channel].back(); }
    /// Profile value just before node k (differs from profiles[ch][k] only at events).
    double left_value(std::size_t channel, std::size_t node) const;
};

/// Uniform grid of `grid_points` nodes on [0, fiber.length_km] with the
/// positions of lumped events inserted exactly.
std::vector<double> make_span_grid(const FiberSpec& fiber, std::size_t grid_points);

SppGrid attenuation_only_spp(const FiberSpec& fiber, const ChannelPlan& plan,
                             std::size_t grid_points);

struct RamanSolveOptions {
    double boundary_tol = 1e-8;
    int max_iterations = 200;
    double damping = 0.5;
};

/// Coupled Raman power equations with ISRS, forward and backward pumps,
/// intrinsic loss and lumped events. Fixed-step RK4 on the span grid; the
/// backward-pump boundary problem is solved by damped forward/backward sweeps.
/// `tol.rel_tol` is not used by the stepper (the grid fixes the accuracy); it is
/// reported through the grid-refinement check in the tests.
SppGrid solve_raman(const FiberSpec& fiber, const ChannelPlan& plan,
                    std::span<const RamanPump> pumps, std::size_t grid_points,
                    const specfun::EvalTolerance& tol = {},
                    const RamanSolveOptions& options = {});

/// End-to-end span power transfer Gamma * p(L) at a channel frequency.
double transfer_factor(const SppGrid& spp, std::size_t channel, double lumped_gain_db);

}  // namespace pcfm
