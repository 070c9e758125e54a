#include "monoflow/examples.hpp"

#include <cmath>

namespace monoflow {

namespace {

using FieldFn = CoefficientField::FieldFn;

ExpectedClaim claim_A(double mu, double K, Vec lo, Vec hi) {
    ExpectedClaim c;
    c.kind = AssumptionKind::A_mu_K;
    c.mu = mu;
    c.level = K;
    c.box_low = std::move(lo);
    c.box_high = std::move(hi);
    return c;
}

ExpectedClaim claim_G(ScalarFn rho, std::string desc, Vec lo, Vec hi) {
    ExpectedClaim c;
    c.kind = AssumptionKind::G_rho;
    c.level = 1.0;
    c.scalar_fn = std::move(rho);
    c.scalar_desc = std::move(desc);
    c.box_low = std::move(lo);
    c.box_high = std::move(hi);
    return c;
}

ExpectedClaim claim_H(ScalarFn f, std::string desc, double mu, Vec lo, Vec hi) {
    ExpectedClaim c;
    c.kind = AssumptionKind::H_f_mu;
    c.mu = mu;
    c.level = 1.0;
    c.scalar_fn = std::move(f);
    c.scalar_desc = std::move(desc);
    c.box_low = std::move(lo);
    c.box_high = std::move(hi);
    return c;
}

ExpectedClaim claim_additive(double c_level, Vec lo, Vec hi) {
    ExpectedClaim c;
    c.kind = AssumptionKind::additive_growth;
    c.level = c_level;
    c.box_low = std::move(lo);
    c.box_high = std::move(hi);
    return c;
}

std::vector<ExampleEntry> build_registry() {
    std::vector<ExampleEntry> reg;

    // -- linear_ou: contracting linear drift, unit additive noise (d = 1)
    {
        CoefficientField f = make_additive_field(
            1, [](const Vec& x, Vec& out) { out[0] = -x[0]; }, 1.0, "linear_ou");
        ExampleEntry e{"linear_ou", std::move(f), {}, std::nullopt,
                       "globally contracting linear drift with unit additive noise"};
        e.expected.push_back(claim_A(0.0, 0.0, {-3.0}, {3.0}));
        e.expected.push_back(
            claim_H([](double) { return 1.0; }, "1", 5.0, {-3.0}, {3.0}));
        e.expected.push_back(
            claim_G([](double u) { return u + 1.0; }, "u+1", {-3.0}, {3.0}));
        reg.push_back(std::move(e));
    }

    // -- linear_ou_2d: the planar version, driven by two Brownian motions
    {
        CoefficientField f = make_additive_field(
            2,
            [](const Vec& x, Vec& out) {
                out[0] = -x[0];
                out[1] = -x[1];
            },
            1.0, "linear_ou_2d");
        ExampleEntry e{"linear_ou_2d", std::move(f), {}, std::nullopt,
                       "planar contracting linear drift with additive noise"};
        e.expected.push_back(claim_A(0.0, 0.0, {-3.0, -3.0}, {3.0, 3.0}));
        e.expected.push_back(
            claim_G([](double u) { return u + 2.0; }, "u+2", {-3.0, -3.0}, {3.0, 3.0}));
        e.expected.push_back(
            claim_H([](double) { return 1.0; }, "1", 5.0, {-3.0, -3.0}, {3.0, 3.0}));
        reg.push_back(std::move(e));
    }

    // -- gbm: zero drift, linear multiplicative noise (d = 1)
    {
        CoefficientField f(
            1, [](const Vec&, Vec& out) { out[0] = 0.0; },
            {[](const Vec& x, Vec& out) { out[0] = x[0]; }}, "gbm");
        ExampleEntry e{"gbm", std::move(f), {}, std::nullopt,
                       "zero drift with linear multiplicative noise; the one-sided "
                       "expression equals (1+mu)|x-y|^2 identically"};
        e.expected.push_back(claim_A(2.0, 3.0, {-3.0}, {3.0}));
        e.expected.push_back(claim_H([](double) { return 3.0; }, "3", 2.0, {-3.0}, {3.0}));
        e.expected.push_back(claim_H(
            [](double u) {
                const double lg = std::log(std::max(u, 1.0));
                return 3.0 * (lg * lg + 1.0);
            },
            "3((log+ u)^2+1)", 2.0, {-3.0}, {3.0}));
        e.expected.push_back(claim_G([](double u) { return u + 1.0; }, "u+1", {-3.0}, {3.0}));
        reg.push_back(std::move(e));
    }

    // -- double_well: b = x - x^3 with unit additive noise (d = 1)
    {
        CoefficientField f = make_additive_field(
            1, [](const Vec& x, Vec& out) { out[0] = x[0] - x[0] * x[0] * x[0]; }, 1.0,
            "double_well");
        ExampleEntry e{"double_well", std::move(f), {}, std::nullopt,
                       "double-well drift; dissipative at large |x|"};
        e.expected.push_back(
            claim_G([](double u) { return 2.0 * u + 2.0; }, "2u+1+sigma^2", {-3.0}, {3.0}));
        e.expected.push_back(claim_A(0.0, 2.0, {-3.0}, {3.0}));
        e.expected.push_back(claim_H([](double) { return 2.0; }, "2", 5.0, {-3.0}, {3.0}));
        e.expected.push_back(claim_H(
            [](double u) { return 2.0 * (std::log(std::max(u, 1.0)) + 1.0); },
            "2(log+ u+1)", 5.0, {-3.0}, {3.0}));
        reg.push_back(std::move(e));
    }

    // -- cubic_blowup: b = x^3, no noise; explodes in finite time
    {
        CoefficientField f(
            1, [](const Vec& x, Vec& out) { out[0] = x[0] * x[0] * x[0]; }, {}, "cubic_blowup");
        ExampleEntry e{"cubic_blowup", std::move(f), {}, BlowupClaim{{1.0}, 0.5},
                       "superlinear repelling drift; from x the exact solution explodes at "
                       "1/(2x^2), so no coercivity claim is registered"};
        reg.push_back(std::move(e));
    }

    // -- sqrt_coalescing: b = -sign(x) sqrt|x|, no noise; trajectories meet in
    //    finite time
    {
        CoefficientField f(
            1,
            [](const Vec& x, Vec& out) {
                const double v = x[0];
                out[0] = (v > 0.0 ? -1.0 : (v < 0.0 ? 1.0 : 0.0)) * std::sqrt(std::abs(v));
            },
            {}, "sqrt_coalescing");
        ExampleEntry e{"sqrt_coalescing", std::move(f), {}, std::nullopt,
                       "non-Lipschitz decreasing drift; from x=1 the solution hits 0 at t=2 "
                       "and coalesces with the trajectory started there"};
        e.expected.push_back(claim_A(0.0, 0.0, {-2.0}, {2.0}));
        reg.push_back(std::move(e));
    }

    // -- rotation: b = (-x2, x1) with unit additive noise
    {
        CoefficientField f = make_additive_field(
            2,
            [](const Vec& x, Vec& out) {
                out[0] = -x[1];
                out[1] = x[0];
            },
            1.0, "rotation");
        ExampleEntry e{"rotation", std::move(f), {}, std::nullopt,
                       "pure rotation: no radial drift, tangential part grows linearly"};
        e.expected.push_back(claim_A(0.0, 0.0, {-3.0, -3.0}, {3.0, 3.0}));
        e.expected.push_back(
            claim_G([](double u) { return u + 2.0; }, "u+2", {-3.0, -3.0}, {3.0, 3.0}));
        e.expected.push_back(claim_additive(0.5, {-10.0, -10.0}, {10.0, 10.0}));
        e.expected.push_back(
            claim_H([](double) { return 1.0; }, "1", 5.0, {-3.0, -3.0}, {3.0, 3.0}));
        reg.push_back(std::move(e));
    }

    // -- tangential_cubic: rotational drift of cubic magnitude, additive noise
    {
        CoefficientField f = make_additive_field(
            2,
            [](const Vec& x, Vec& out) {
                // |x|^2 (-x2, x1) = rho(|x|) (-x2, x1)/|x| with rho(r) = r^3
                const double r2 = x[0] * x[0] + x[1] * x[1];
                out[0] = -r2 * x[1];
                out[1] = r2 * x[0];
            },
            1.0, "tangential_cubic");
        ExampleEntry e{"tangential_cubic", std::move(f), {}, std::nullopt,
                       "exploratory: no radial component but a tangential part growing like "
                       "|x|^3; registered for experiments only, no completeness claim is made"};
        e.expected.push_back(
            claim_G([](double u) { return u + 2.0; }, "u+2", {-5.0, -5.0}, {5.0, 5.0}));
        reg.push_back(std::move(e));
    }

    // -- bounded_osc: bounded trigonometric drift and diffusion
    {
        CoefficientField f(
            1, [](const Vec& x, Vec& out) { out[0] = std::cos(x[0]); },
            {[](const Vec& x, Vec& out) { out[0] = std::sin(x[0]); }}, "bounded_osc");
        ExampleEntry e{"bounded_osc", std::move(f), {}, std::nullopt,
                       "bounded oscillating coefficients; the quadratic-envelope modulus "
                       "f(u) = beta(u^2+1) regime"};
        e.expected.push_back(claim_H(
            [](double u) { return 6.0 * (u * u + 1.0); }, "6(u^2+1)", 3.0, {-4.0}, {4.0}));
        e.expected.push_back(
            claim_G([](double u) { return u + 2.0; }, "u+2", {-4.0}, {4.0}));
        e.expected.push_back(claim_A(3.0, 6.0, {-4.0}, {4.0}));
        reg.push_back(std::move(e));
    }

    // -- trig_diffusion: planar field with componentwise trigonometric noise
    {
        CoefficientField f(
            2, [](const Vec&, Vec& out) { out[0] = out[1] = 0.0; },
            {[](const Vec& x, Vec& out) { out[0] = std::sin(x[0]); },
             [](const Vec& x, Vec& out) { out[1] = std::cos(x[1]); }},
            "trig_diffusion");
        ExampleEntry e{"trig_diffusion", std::move(f), {}, std::nullopt,
                       "zero drift with bounded Lipschitz trigonometric diffusion"};
        e.expected.push_back(claim_A(1.0, 2.0, {-3.0, -3.0}, {3.0, 3.0}));
        e.expected.push_back(
            claim_G([](double u) { return u + 2.0; }, "u+2", {-3.0, -3.0}, {3.0, 3.0}));
        e.expected.push_back(
            claim_H([](double) { return 2.0; }, "2", 1.0, {-3.0, -3.0}, {3.0, 3.0}));
        reg.push_back(std::move(e));
    }

    return reg;
}

} // namespace

const std::vector<ExampleEntry>& registry() {
    static const std::vector<ExampleEntry> reg = build_registry();
    return reg;
}

const ExampleEntry& lookup(const std::string& name) {
    for (const ExampleEntry& e : registry())
        if (e.name == name) return e;
    throw InputError("unknown example field '" + name + "'");
}

SampleDomain claim_domain(const ExpectedClaim& claim, int n_pairs) {
    SampleDomain dom;
    dom.box_low = claim.box_low;
    dom.box_high = claim.box_high;
    dom.n_pairs = n_pairs;
    return dom;
}

} // namespace monoflow
