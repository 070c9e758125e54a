#include "monoflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "monoflow/rng.hpp"

namespace monoflow {

void TimeGrid::validate() const {
    require(t0 >= 0.0, "TimeGrid: t0 must be >= 0");
    require(t1 > t0, "TimeGrid: t1 must exceed t0");
    require(n_steps >= 1, "TimeGrid: need at least one step");
}

int TimeGrid::index_of(double t) const {
    validate();
    const double k_real = (t - t0) / dt();
    const int k = static_cast<int>(std::llround(k_real));
    const double tol = 1e-9 * std::max(1.0, t1 - t0);
    if (k < 0 || k > n_steps || std::abs(time_at(k) - t) > tol)
        throw InputError("TimeGrid: time is not a grid point");
    return k;
}

NoiseRealization sample_noise(const TimeGrid& grid, int m, std::uint64_t master_seed,
                              std::uint64_t replica) {
    grid.validate();
    require(m >= 0, "sample_noise: noise dimension must be >= 0");
    NoiseRealization noise;
    noise.grid = grid;
    noise.m = m;
    noise.master_seed = master_seed;
    noise.replica = replica;
    noise.increments.resize(static_cast<std::size_t>(grid.n_steps) * m);
    const double sd = std::sqrt(grid.dt());
    for (int step = 0; step < grid.n_steps; ++step)
        for (int k = 0; k < m; ++k) {
            const std::uint64_t index = static_cast<std::uint64_t>(step) * m + k;
            noise.increments[index] = sd * normal_draw(master_seed, Stream::noise, replica, index);
        }
    return noise;
}

EulerStepper::EulerStepper(const CoefficientField& field, const TimeGrid& grid, double r_max)
    : field_(&field), grid_(grid), r_max_(r_max) {
    grid_.validate();
    require(r_max_ > 0.0, "EulerStepper: blow-up radius must be positive");
}

bool EulerStepper::step(Vec& x, int k, const NoiseRealization& noise, BlowUp& bu) {
    const int d = field_->dim();
    const double h = grid_.dt();
    const double old_norm = norm(x);

    field_->drift_into(x, drift_buf_);
    next_.assign(x.begin(), x.end());
    for (int i = 0; i < d; ++i) next_[i] += drift_buf_[i] * h;
    for (int c = 0; c < field_->noise_dim(); ++c) {
        const double dw = noise.inc(k, c);
        field_->sigma_into(c, x, sigma_buf_);
        for (int i = 0; i < d; ++i) next_[i] += sigma_buf_[i] * dw;
    }

    const double new_norm = norm(next_);
    const bool overflow = !all_finite(next_);
    const bool overshoot = new_norm > kOvershootFactor * std::max(1.0, old_norm);
    if (overflow || overshoot || new_norm >= r_max_) {
        bu.exit_time = grid_.time_at(k + 1);
        bu.exit_radius = overflow ? std::numeric_limits<double>::infinity() : new_norm;
        return false;
    }
    x.swap(next_);
    return true;
}

std::vector<FlowState> evolve(const CoefficientField& field, const Vec& x, double s,
                              const TimeGrid& grid, const NoiseRealization& noise,
                              double r_max) {
    require(static_cast<int>(x.size()) == field.dim(), "evolve: initial point dimension mismatch");
    require(noise.m == field.noise_dim(), "evolve: noise dimension does not match the field");
    require(noise.grid == grid, "evolve: noise was sampled on a different grid");
    const int k0 = grid.index_of(s);

    std::vector<FlowState> states;
    states.reserve(grid.n_steps - k0 + 1);

    if (norm(x) >= r_max) {
        const BlowUp bu{s, norm(x)};
        for (int k = k0; k <= grid.n_steps; ++k) states.emplace_back(bu);
        return states;
    }

    EulerStepper stepper(field, grid, r_max);
    Vec cur = x;
    states.emplace_back(cur);
    BlowUp bu;
    bool live = true;
    for (int k = k0; k < grid.n_steps; ++k) {
        if (live) live = stepper.step(cur, k, noise, bu);
        if (live)
            states.emplace_back(cur);
        else
            states.emplace_back(bu);
    }
    return states;
}

int FlowGrid::time_index(double s) const {
    for (std::size_t i = 0; i < initial_times.size(); ++i)
        if (initial_times[i] == s) return static_cast<int>(i);
    // fall back to grid-index comparison so values equal up to grid lookup match
    const int ks = grid.index_of(s);
    for (std::size_t i = 0; i < initial_times.size(); ++i)
        if (initial_time_indices[i] == ks) return static_cast<int>(i);
    throw InputError("FlowGrid: no trajectories start at the requested time");
}

const FlowState& FlowGrid::state_at(int s_index, int point_index, double t) const {
    const int kt = grid.index_of(t);
    const int ks = initial_time_indices.at(s_index);
    require(kt >= ks, "FlowGrid: query time precedes the initial time");
    return trajectories.at(s_index).at(point_index).at(kt - ks);
}

FlowGrid flow_grid(const CoefficientField& field, std::vector<Vec> points,
                   std::vector<double> times, const TimeGrid& grid,
                   const NoiseRealization& noise, double r_max) {
    require(!points.empty(), "flow_grid: need at least one initial point");
    require(!times.empty(), "flow_grid: need at least one initial time");
    FlowGrid fg{field, grid, noise, r_max, std::move(points), std::move(times), {}, {}};
    fg.initial_time_indices.reserve(fg.initial_times.size());
    for (double s : fg.initial_times) fg.initial_time_indices.push_back(grid.index_of(s));

    fg.trajectories.resize(fg.initial_times.size());
    for (std::size_t si = 0; si < fg.initial_times.size(); ++si) {
        fg.trajectories[si].reserve(fg.initial_points.size());
        for (const Vec& x : fg.initial_points)
            fg.trajectories[si].push_back(
                evolve(field, x, fg.initial_times[si], grid, noise, r_max));
    }
    return fg;
}

ComposeCheck compose_check(const FlowGrid& fg, double s, double t, double u, int x_index) {
    require(s <= t && t <= u, "compose_check: need s <= t <= u");
    require(x_index >= 0 && x_index < static_cast<int>(fg.initial_points.size()),
            "compose_check: point index out of range");
    const int si = fg.time_index(s);
    const FlowState& mid = fg.state_at(si, x_index, t);
    const FlowState& direct = fg.state_at(si, x_index, u);

    ComposeCheck out;
    if (!alive(mid)) {
        // blown up before the restart time: the composed flow is blown up too
        out.both_alive = false;
        out.blowup_agree = !alive(direct) &&
                           blowup(direct).exit_time == blowup(mid).exit_time;
        out.exit_time_direct = alive(direct) ? 0.0 : blowup(direct).exit_time;
        out.exit_time_composed = blowup(mid).exit_time;
        return out;
    }

    const std::vector<FlowState> restart =
        evolve(fg.field, value(mid), t, fg.grid, fg.noise, fg.r_max);
    const int kt = fg.grid.index_of(t);
    const int ku = fg.grid.index_of(u);
    const FlowState& composed = restart.at(ku - kt);

    if (alive(direct) && alive(composed)) {
        out.both_alive = true;
        out.discrepancy = distance(value(direct), value(composed));
        out.reference_norm = norm(value(direct));
        out.blowup_agree = true;
    } else if (!alive(direct) && !alive(composed)) {
        out.blowup_agree = blowup(direct).exit_time == blowup(composed).exit_time;
        out.exit_time_direct = blowup(direct).exit_time;
        out.exit_time_composed = blowup(composed).exit_time;
    } else {
        out.blowup_agree = false;
        out.exit_time_direct = alive(direct) ? -1.0 : blowup(direct).exit_time;
        out.exit_time_composed = alive(composed) ? -1.0 : blowup(composed).exit_time;
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const FlowGrid& fg, bool header) {
    const int d = fg.field.dim();
    if (header) {
        os << "replica,s,x_id";
        os << ",t";
        for (int i = 1; i <= d; ++i) os << ",x_" << i;
        os << ",blown_up,exit_time\n";
    }

    char buf[64];
    const auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };

    for (std::size_t si = 0; si < fg.initial_times.size(); ++si) {
        const int ks = fg.initial_time_indices[si];
        for (std::size_t pi = 0; pi < fg.initial_points.size(); ++pi) {
            const auto& traj = fg.trajectories[si][pi];
            for (std::size_t off = 0; off < traj.size(); ++off) {
                const double t = fg.grid.time_at(ks + static_cast<int>(off));
                os << fg.noise.replica << ',' << num(fg.initial_times[si]) << ',' << pi << ','
                   << num(t);
                if (alive(traj[off])) {
                    for (double v : value(traj[off])) os << ',' << num(v);
                    os << ",0,";
                } else {
                    for (int i = 0; i < d; ++i) os << ',';
                    os << ",1," << num(blowup(traj[off]).exit_time);
                }
                os << '\n';
            }
        }
    }
}

} // namespace monoflow
