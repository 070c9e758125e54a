#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"

#include "monoflow/examples.hpp"
#include "monoflow/integrator.hpp"
#include "monoflow/parallel.hpp"

using namespace monoflow;

namespace {

NoiseRealization manual_noise(const TimeGrid& grid, int m, std::vector<double> increments) {
    NoiseRealization noise;
    noise.grid = grid;
    noise.m = m;
    noise.increments = std::move(increments);
    return noise;
}

} // namespace

TEST_CASE("time grid: canonical times and alignment lookup") {
    const TimeGrid grid{0.0, 1.0, 10};
    CHECK(grid.dt() == 0.1);
    CHECK(grid.index_of(0.0) == 0);
    CHECK(grid.index_of(grid.time_at(7)) == 7);
    CHECK(grid.index_of(1.0) == 10);
    CHECK_THROWS_AS(grid.index_of(0.05), InputError);
    CHECK_THROWS_AS(grid.index_of(1.2), InputError);
    CHECK_THROWS_AS((TimeGrid{1.0, 0.5, 10}).validate(), InputError);
    CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0}).validate(), InputError);
}

TEST_CASE("sample_noise: empty without noise, deterministic, correct variance") {
    const TimeGrid grid{0.0, 1.0, 16};
    CHECK(sample_noise(grid, 0, 1, 0).increments.empty());

    const NoiseRealization a = sample_noise(grid, 2, 42, 3);
    const NoiseRealization b = sample_noise(grid, 2, 42, 3);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != sample_noise(grid, 2, 42, 4).increments);

    // per-step sample variance over many replicas stays within 3 SE of dt
    const TimeGrid one_step{0.0, 0.01, 1};
    const long n = 100000;
    std::vector<double> draws(n);
    for_each_replica(n, 4, [&](long r) {
        draws[r] = sample_noise(one_step, 1, 7, static_cast<std::uint64_t>(r)).inc(0, 0);
    });
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : draws) var += (v - mean) * (v - mean);
    var /= (n - 1);
    const double se_var = one_step.dt() * std::sqrt(2.0 / (n - 1));
    CHECK(std::abs(var - one_step.dt()) <= 3.0 * se_var);
}

TEST_CASE("evolve: one pure-noise step lands on the increment") {
    const TimeGrid grid{0.0, 1.0, 1};
    const CoefficientField pure = make_additive_field(
        1, [](const Vec&, Vec& out) { out[0] = 0.0; }, 1.0, "pure_noise");
    const NoiseRealization noise = manual_noise(grid, 1, {0.3});
    const auto states = evolve(pure, {0.0}, 0.0, grid, noise);
    REQUIRE(states.size() == 2);
    CHECK(value(states[0])[0] == 0.0);
    CHECK(value(states[1])[0] == 0.3);
}

TEST_CASE("evolve: cubic drift blows up near the ODE time 1/(2x^2)") {
    const CoefficientField& cubic = lookup("cubic_blowup").field;
    double previous_exit = 3.0;
    for (int n_steps : {1000, 10000, 100000}) {
        const TimeGrid grid{0.0, 1.0, n_steps};
        const NoiseRealization noise = sample_noise(grid, 0, 1, 0);
        const auto states = evolve(cubic, {1.0}, 0.0, grid, noise, 1e6);
        REQUIRE_FALSE(alive(states.back()));
        const double exit = blowup(states.back()).exit_time;
        CHECK(exit >= 0.5);         // the scheme lags the exact solution
        CHECK(exit <= previous_exit + 1e-12); // refinement moves the exit down
        previous_exit = exit;
        if (n_steps == 10000) CHECK(std::abs(exit - 0.5) <= 0.05);
    }
}

TEST_CASE("evolve: linear ODE hits e^{-1}") {
    const TimeGrid grid{0.0, 1.0, 10000};
    const CoefficientField neg_lin(
        1, [](const Vec& x, Vec& out) { out[0] = -x[0]; }, {}, "-x");
    const NoiseRealization noise = sample_noise(grid, 0, 1, 0);
    const auto states = evolve(neg_lin, {1.0}, 0.0, grid, noise);
    CHECK(value(states.back())[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("evolve input contract") {
    const TimeGrid grid{0.0, 1.0, 4};
    const CoefficientField& gbm = lookup("gbm").field;
    const NoiseRealization noise = sample_noise(grid, 1, 5, 0);
    CHECK_THROWS_AS(evolve(gbm, {1.0}, 0.125, grid, noise), InputError); // off-grid start
    CHECK_THROWS_AS(evolve(gbm, {1.0, 2.0}, 0.0, grid, noise), InputError);
    const NoiseRealization wrong_m = sample_noise(grid, 3, 5, 0);
    CHECK_THROWS_AS(evolve(gbm, {1.0}, 0.0, grid, wrong_m), InputError);

    // starting outside the ball is an immediate blow-up, not an error
    const auto states = evolve(gbm, {2e6}, 0.0, grid, noise);
    CHECK_FALSE(alive(states.front()));
    CHECK(blowup(states.front()).exit_time == 0.0);
}

TEST_CASE("flow grid: degenerate cases and the shared-noise contract") {
    const TimeGrid grid{0.0, 1.0, 64};
    const CoefficientField& dw = lookup("double_well").field;
    const NoiseRealization noise = sample_noise(grid, 1, 9, 0);

    const FlowGrid fg = flow_grid(dw, {{0.3}, {0.3}, {-1.0}}, {0.0, 0.5}, grid, noise);
    const auto direct = evolve(dw, {0.3}, 0.0, grid, noise);
    for (int k = 0; k <= grid.n_steps; ++k)
        CHECK(value(fg.trajectories[0][0][k])[0] == value(direct[k])[0]);

    // equal initial points under one noise stay equal, bit for bit
    for (int k = 0; k <= grid.n_steps; ++k)
        CHECK(value(fg.trajectories[0][0][k])[0] == value(fg.trajectories[0][1][k])[0]);

    // a later initial time starts at its own grid index
    CHECK(fg.trajectories[1][2].size() == static_cast<std::size_t>(grid.n_steps / 2 + 1));
    CHECK(value(fg.state_at(1, 2, 0.5))[0] == -1.0);
}

TEST_CASE("additive noise cancels exactly in the difference recursion") {
    const TimeGrid grid{0.0, 1.0, 256};
    const CoefficientField& ou = lookup("linear_ou").field;
    const NoiseRealization noise = sample_noise(grid, 1, 21, 0);
    const auto xs = evolve(ou, {1.0}, 0.0, grid, noise);
    const auto ys = evolve(ou, {0.25}, 0.0, grid, noise);

    // deterministic Euler iteration of the drift difference
    double expected = 1.0 - 0.25;
    for (int k = 0; k <= grid.n_steps; ++k) {
        const double diff = value(xs[k])[0] - value(ys[k])[0];
        CHECK(std::abs(diff - expected) <= 1e-12);
        expected += (-value(xs[k])[0] + value(ys[k])[0]) * grid.dt();
    }
}

TEST_CASE("truncated field agrees exactly until the plateau is left") {
    const TimeGrid grid{0.0, 2.0, 512};
    const CoefficientField& dw = lookup("double_well").field;
    const CoefficientField trunc = truncate(dw, 1.5);
    const NoiseRealization noise = sample_noise(grid, 1, 33, 5);
    const auto full = evolve(dw, {0.2}, 0.0, grid, noise);
    const auto loc = evolve(trunc, {0.2}, 0.0, grid, noise);
    for (int k = 0; k <= grid.n_steps; ++k) {
        if (!alive(full[k]) || norm(value(full[k])) > 1.5) break;
        CHECK(value(full[k])[0] == value(loc[k])[0]);
    }
}

TEST_CASE("blow-up time is monotone in the stopping radius") {
    const CoefficientField& cubic = lookup("cubic_blowup").field;
    const TimeGrid grid{0.0, 1.0, 20000};
    const NoiseRealization noise = sample_noise(grid, 0, 1, 0);
    double previous = 0.0;
    for (double r_max : {1e2, 1e4, 1e6}) {
        const auto states = evolve(cubic, {1.0}, 0.0, grid, noise, r_max);
        REQUIRE_FALSE(alive(states.back()));
        const double exit = blowup(states.back()).exit_time;
        CHECK(exit >= previous);
        previous = exit;
    }
}

TEST_CASE("strong error order for the linear additive test problem") {
    // reference: exact flow between kicks driven by the same increments
    const CoefficientField& ou = lookup("linear_ou").field;
    const long replicas = 64;
    std::vector<double> log_h, log_err;
    for (int n_steps = 64; n_steps <= 4096; n_steps *= 2) {
        const TimeGrid grid{0.0, 1.0, n_steps};
        std::vector<double> errs(replicas);
        for_each_replica(replicas, 4, [&](long r) {
            const NoiseRealization noise =
                sample_noise(grid, 1, 1234, static_cast<std::uint64_t>(r));
            const auto traj = evolve(ou, {1.0}, 0.0, grid, noise);
            double exact = 1.0;
            const double decay = std::exp(-grid.dt());
            for (int k = 0; k < n_steps; ++k) exact = decay * exact + noise.inc(k, 0);
            errs[r] = std::abs(value(traj.back())[0] - exact);
        });
        const MeanSE m = mean_se(errs);
        log_h.push_back(std::log(grid.dt()));
        log_err.push_back(std::log(m.mean));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < log_h.size(); ++i) {
        mx += log_h[i];
        my += log_err[i];
    }
    mx /= log_h.size();
    my /= log_h.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_h.size(); ++i) {
        sxx += (log_h[i] - mx) * (log_h[i] - mx);
        sxy += (log_h[i] - mx) * (log_err[i] - my);
    }
    const double slope = sxy / sxx;
    CHECK(slope >= 0.9);
}

TEST_CASE("compose_check: identity restart, exact replay, blow-up agreement") {
    const TimeGrid grid{0.0, 1.0, 128};
    const CoefficientField& dw = lookup("double_well").field;
    const NoiseRealization noise = sample_noise(grid, 1, 77, 2);
    std::vector<double> times;
    for (int k = 0; k <= grid.n_steps; k += 16) times.push_back(grid.time_at(k));
    const FlowGrid fg = flow_grid(dw, {{0.4}, {-0.7}}, times, grid, noise);

    // s = t: restarting immediately replays the same state
    const ComposeCheck same = compose_check(fg, 0.0, 0.0, 1.0, 0);
    CHECK(same.both_alive);
    CHECK(same.discrepancy == 0.0);

    for (double s : {0.0, 0.25}) {
        for (double t : {0.375, 0.5}) {
            for (double u : {0.625, 1.0}) {
                const ComposeCheck res = compose_check(fg, s, t, u, 1);
                CHECK(res.both_alive);
                CHECK(res.ok());
                CHECK(res.discrepancy == 0.0); // bitwise replay of the recursion
            }
        }
    }

    // blow-up: both the direct and composed runs must exit at the same time
    const CoefficientField& cubic = lookup("cubic_blowup").field;
    const TimeGrid bgrid{0.0, 1.0, 512};
    const NoiseRealization bnoise = sample_noise(bgrid, 0, 5, 0);
    const FlowGrid bfg = flow_grid(cubic, {{1.1}}, {0.0, bgrid.time_at(64)}, bgrid, bnoise);
    const ComposeCheck blow = compose_check(bfg, 0.0, bgrid.time_at(64), 1.0, 0);
    CHECK_FALSE(blow.both_alive);
    CHECK(blow.blowup_agree);

    CHECK_THROWS_AS(compose_check(fg, 0.5, 0.25, 1.0, 0), InputError);
}

TEST_CASE("trajectory CSV carries the documented columns") {
    const TimeGrid grid{0.0, 0.5, 2};
    const CoefficientField& ou2 = lookup("linear_ou_2d").field;
    const NoiseRealization noise = sample_noise(grid, 2, 11, 4);
    const FlowGrid fg = flow_grid(ou2, {{0.1, -0.2}}, {0.0}, grid, noise);
    std::ostringstream os;
    write_trajectory_csv(os, fg);
    const std::string csv = os.str();
    CHECK(csv.rfind("replica,s,x_id,t,x_1,x_2,blown_up,exit_time\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4); // header + 3 grid times
    CHECK(csv.find("\n4,") != std::string::npos);         // replica id in rows
}
