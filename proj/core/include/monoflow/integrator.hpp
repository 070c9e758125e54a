#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "monoflow/common.hpp"
#include "monoflow/field.hpp"

namespace monoflow {

/// Uniform grid on [t0, t1]. Every grid time anywhere in the library comes
/// from time_at(), never from accumulation, so "grid-aligned" is a single
/// well-defined predicate.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    int n_steps = 1;

    double dt() const { return (t1 - t0) / n_steps; }
    double time_at(int k) const { return t0 + k * dt(); }
    void validate() const;

    /// Index k with time_at(k) equal to t (absolute tolerance
    /// 1e-9 * max(1, t1 - t0)); throws InputError when t is off-grid.
    int index_of(double t) const;

    bool operator==(const TimeGrid&) const = default;
};

/// One discretized m-dimensional Brownian path: all increments for one
/// replica, generated once and shared by every initial condition and every
/// initial time of that replica.
struct NoiseRealization {
    TimeGrid grid;
    int m = 0;
    std::vector<double> increments; // [step * m + k], each ~ N(0, dt)
    std::uint64_t master_seed = 0;
    std::uint64_t replica = 0;

    double inc(int step, int k) const {
        return increments[static_cast<std::size_t>(step) * m + k];
    }
};

/// Counter-based draws keyed by (master_seed, replica): bit-identical for
/// any worker count and call order.
NoiseRealization sample_noise(const TimeGrid& grid, int m, std::uint64_t master_seed,
                              std::uint64_t replica);

struct BlowUp {
    double exit_time = 0.0;
    double exit_radius = 0.0;
};

/// A trajectory entry is either a live point or a blow-up marker; once a
/// trajectory blows up it stays blown up.
using FlowState = std::variant<Vec, BlowUp>;

inline bool alive(const FlowState& s) { return std::holds_alternative<Vec>(s); }
inline const Vec& value(const FlowState& s) { return std::get<Vec>(s); }
inline const BlowUp& blowup(const FlowState& s) { return std::get<BlowUp>(s); }

inline constexpr double kDefaultRMax = 1e6;

/// A single step multiplying |x| by more than this marks the trajectory as
/// blown up, so float overflow cannot masquerade as dynamics (the factor is
/// measured against max(1, |x|) to keep near-zero states out of it).
inline constexpr double kOvershootFactor = 1e3;

/// Explicit Euler with coefficients frozen at the left grid point, stopping
/// at the first grid time with |x| >= r_max.
class EulerStepper {
public:
    EulerStepper(const CoefficientField& field, const TimeGrid& grid, double r_max);

    /// Advances `x` over step k using the increments of `noise`. Returns
    /// false (filling `bu`) when the step leaves the live set.
    bool step(Vec& x, int k, const NoiseRealization& noise, BlowUp& bu);

    const TimeGrid& grid() const { return grid_; }

private:
    const CoefficientField* field_;
    TimeGrid grid_;
    double r_max_;
    Vec drift_buf_, sigma_buf_, next_;
};

/// Trajectory from x at grid-aligned start time s: one FlowState per grid
/// time in [s, t1]. |x| >= r_max yields an immediately blown-up trajectory.
std::vector<FlowState> evolve(const CoefficientField& field, const Vec& x, double s,
                              const TimeGrid& grid, const NoiseRealization& noise,
                              double r_max = kDefaultRMax);

/// Trajectories for many (initial time, initial point) combinations, all
/// under one shared NoiseRealization.
struct FlowGrid {
    CoefficientField field;
    TimeGrid grid;
    NoiseRealization noise;
    double r_max = kDefaultRMax;
    std::vector<Vec> initial_points;
    std::vector<double> initial_times;
    std::vector<int> initial_time_indices;
    // trajectories[s_index][point_index][k - initial_time_indices[s_index]]
    std::vector<std::vector<std::vector<FlowState>>> trajectories;

    const FlowState& state_at(int s_index, int point_index, double t) const;
    int time_index(double s) const; // index into initial_times
};

FlowGrid flow_grid(const CoefficientField& field, std::vector<Vec> points,
                   std::vector<double> times, const TimeGrid& grid,
                   const NoiseRealization& noise, double r_max = kDefaultRMax);

/// Replays the flow from (t, flow(s..t, x)) under the same noise and
/// compares with the direct flow at u. For the Euler recursion the replay
/// performs the identical float operations, so live discrepancies must be
/// <= 1e-10 * (1 + |value|) and blow-ups must agree exactly.
struct ComposeCheck {
    bool both_alive = false;
    double discrepancy = 0.0;
    bool blowup_agree = false;
    double exit_time_direct = 0.0;
    double exit_time_composed = 0.0;
    double reference_norm = 0.0;

    bool ok() const {
        return both_alive ? discrepancy <= 1e-10 * (1.0 + reference_norm) : blowup_agree;
    }
};

ComposeCheck compose_check(const FlowGrid& fg, double s, double t, double u, int x_index);

/// CSV dump: replica,s,x_id,t,x_1..x_d,blown_up,exit_time (exit_time empty
/// while alive, x columns empty after blow-up).
void write_trajectory_csv(std::ostream& os, const FlowGrid& fg, bool header = true);

} // namespace monoflow
