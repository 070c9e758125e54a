#include <set>

#include "doctest.h"

#include "monoflow/analysis.hpp"
#include "monoflow/examples.hpp"
#include "monoflow/integrator.hpp"

using namespace monoflow;

TEST_CASE("registry contains the documented battery") {
    const std::set<std::string> required = {"linear_ou",   "gbm",         "double_well",
                                            "cubic_blowup", "sqrt_coalescing", "rotation",
                                            "tangential_cubic", "bounded_osc"};
    std::set<std::string> names;
    for (const ExampleEntry& e : registry()) names.insert(e.name);
    for (const std::string& want : required) CHECK(names.count(want) == 1);
    CHECK_THROWS_AS(lookup("no_such_field"), InputError);
}

TEST_CASE("every registered claim passes its checker on the reference domain") {
    for (const ExampleEntry& e : registry()) {
        CAPTURE(e.name);
        for (const ExpectedClaim& claim : e.expected) {
            CAPTURE(to_string(claim.kind));
            const SampleDomain dom = claim_domain(claim);
            AssumptionReport rep;
            switch (claim.kind) {
                case AssumptionKind::A_mu_K:
                    rep = check_A_mu_K(e.field, dom, claim.mu, claim.level);
                    break;
                case AssumptionKind::G_rho:
                    rep = check_G_rho(e.field, dom, claim.scalar_fn);
                    break;
                case AssumptionKind::H_f_mu:
                    rep = check_H_f_mu(e.field, dom, claim.scalar_fn, claim.mu);
                    break;
                case AssumptionKind::additive_growth:
                    rep = additive_conditions_check(e.field, dom, claim.level);
                    break;
                default:
                    FAIL("unexpected claim kind in registry");
            }
            CHECK(rep.verdict == Verdict::satisfied_at_level);
        }
    }
}

TEST_CASE("claims carry the documented shapes") {
    const ExampleEntry& gbm = lookup("gbm");
    bool has_constant_envelope = false;
    for (const ExpectedClaim& c : gbm.expected)
        if (c.kind == AssumptionKind::H_f_mu && c.scalar_fn &&
            c.scalar_fn(0.0) == c.scalar_fn(10.0) && c.scalar_fn(0.0) == 1.0 + c.mu)
            has_constant_envelope = true;
    CHECK(has_constant_envelope);

    const ExampleEntry& dw = lookup("double_well");
    bool has_coercivity = false;
    for (const ExpectedClaim& c : dw.expected)
        if (c.kind == AssumptionKind::G_rho && c.scalar_fn) {
            // rho(u) = 2u + 1 + sigma^2 with sigma = 1
            CHECK(c.scalar_fn(0.0) == doctest::Approx(2.0));
            CHECK(c.scalar_fn(3.0) == doctest::Approx(8.0));
            has_coercivity = true;
        }
    CHECK(has_coercivity);

    const ExampleEntry& cubic = lookup("cubic_blowup");
    for (const ExpectedClaim& c : cubic.expected)
        CHECK(c.kind != AssumptionKind::G_rho); // deliberately no coercivity claim
    REQUIRE(cubic.blowup.has_value());
    CHECK(cubic.blowup->x0 == Vec{1.0});
    CHECK(cubic.blowup->expected_exit == 0.5);

    const ExampleEntry& rot = lookup("rotation");
    bool has_additive = false;
    for (const ExpectedClaim& c : rot.expected)
        if (c.kind == AssumptionKind::additive_growth) {
            CHECK(c.level == 0.5);
            has_additive = true;
        }
    CHECK(has_additive);
}

TEST_CASE("cubic blow-up exit times fall toward the closed-form oracle") {
    const ExampleEntry& cubic = lookup("cubic_blowup");
    double previous = 10.0;
    for (int n_steps : {1000, 10000}) {
        const TimeGrid grid{0.0, 1.0, n_steps};
        const NoiseRealization noise = sample_noise(grid, 0, 1, 0);
        const auto states = evolve(cubic.field, cubic.blowup->x0, 0.0, grid, noise);
        REQUIRE_FALSE(alive(states.back()));
        const double exit = blowup(states.back()).exit_time;
        CHECK(exit < previous);
        CHECK(exit >= cubic.blowup->expected_exit);
        previous = exit;
    }
    CHECK(previous <= cubic.blowup->expected_exit + 0.05);
}
