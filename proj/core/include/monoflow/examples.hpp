#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monoflow/assumptions.hpp"
#include "monoflow/field.hpp"

namespace monoflow {

/// A claim a registered field is expected to satisfy on its reference
/// domain. Every claim in the registry is re-verified by the test suite.
struct ExpectedClaim {
    AssumptionKind kind = AssumptionKind::A_mu_K;
    double mu = 0.0;
    double level = 0.0;         // K for A_mu_K, c for additive_growth, 1 otherwise
    ScalarFn scalar_fn;         // rho for G_rho, f for H_f_mu
    std::string scalar_desc;    // human-readable form of scalar_fn
    Vec box_low, box_high;      // reference domain
};

/// Closed-form blow-up oracle, where one exists: starting at x0 the exit
/// time converges to expected_exit under grid refinement.
struct BlowupClaim {
    Vec x0;
    double expected_exit = 0.0;
};

struct ExampleEntry {
    std::string name;
    CoefficientField field;
    std::vector<ExpectedClaim> expected;
    std::optional<BlowupClaim> blowup;
    std::string notes;
};

/// Built-in battery of coefficient fields covering the regimes the checkers
/// and bound verifiers are designed for.
const std::vector<ExampleEntry>& registry();

/// Throws InputError for unknown names.
const ExampleEntry& lookup(const std::string& name);

SampleDomain claim_domain(const ExpectedClaim& claim, int n_pairs = 512);

} // namespace monoflow
