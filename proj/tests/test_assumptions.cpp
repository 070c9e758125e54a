#include <cmath>

#include "doctest.h"

#include "monoflow/assumptions.hpp"
#include "monoflow/examples.hpp"
#include "monoflow/rng.hpp"

using namespace monoflow;

namespace {

SampleDomain box1d(double lo, double hi, int n = 512) {
    SampleDomain dom;
    dom.box_low = {lo};
    dom.box_high = {hi};
    dom.n_pairs = n;
    return dom;
}

const CoefficientField& ou() { return lookup("linear_ou").field; }
const CoefficientField& gbm() { return lookup("gbm").field; }
const CoefficientField& cubic() { return lookup("cubic_blowup").field; }

CoefficientField drift_only_1d(CoefficientField::FieldFn f, const char* label) {
    return CoefficientField(1, std::move(f), {}, label);
}

} // namespace

TEST_CASE("one_sided_expr: frozen values") {
    // b = -x^3 with additive sigma: A vanishes and the drift term gives -8
    const CoefficientField neg_cubic = make_additive_field(
        1, [](const Vec& x, Vec& out) { out[0] = -x[0] * x[0] * x[0]; }, 1.0, "neg_cubic");
    CHECK(one_sided_expr(neg_cubic, {1.0}, {-1.0}, 5.0) == doctest::Approx(-8.0).epsilon(1e-14));

    // at x = y every term vanishes
    CHECK(one_sided_expr(gbm(), {0.7}, {0.7}, 3.0) == 0.0);
    CHECK(one_sided_expr(neg_cubic, {1.3}, {1.3}, 0.0) == 0.0);

    // b = 0, sigma(x) = x: tr A = ||A|| = (x-y)^2 = 4, so 4 + mu*4
    CHECK(one_sided_expr(gbm(), {3.0}, {1.0}, 1.0) == doctest::Approx(8.0).epsilon(1e-14));

    CHECK_THROWS_AS(one_sided_expr(gbm(), {1.0}, {1.0}, -1.0), InputError);
}

TEST_CASE("one_sided_expr symmetry and mu-monotonicity on samples") {
    const CoefficientField& field = lookup("trig_diffusion").field;
    for (std::uint64_t i = 0; i < 100; ++i) {
        Vec x(2), y(2);
        for (int c = 0; c < 2; ++c) {
            x[c] = 4.0 * uniform_open01(11, Stream::generic, i, c) - 2.0;
            y[c] = 4.0 * uniform_open01(11, Stream::generic, i, 2 + c) - 2.0;
        }
        const double forward = one_sided_expr(field, x, y, 1.5);
        const double backward = one_sided_expr(field, y, x, 1.5);
        CHECK(forward == doctest::Approx(backward).epsilon(1e-12));
        CHECK(one_sided_expr(field, x, y, 0.5) <= forward + 1e-12);
        CHECK(forward <= one_sided_expr(field, x, y, 3.0) + 1e-12);
    }
}

TEST_CASE("check_A_mu_K: contraction, gbm level, cubic violation") {
    const AssumptionReport contraction = check_A_mu_K(ou(), box1d(-3, 3), 0.0, 0.0);
    CHECK(contraction.verdict == Verdict::satisfied_at_level);
    CHECK(contraction.fitted_constant == doctest::Approx(-2.0).epsilon(1e-12));

    const AssumptionReport gbm_level = check_A_mu_K(gbm(), box1d(-3, 3), 3.0, 4.0);
    CHECK(gbm_level.verdict == Verdict::satisfied_at_level);
    CHECK(gbm_level.fitted_constant == doctest::Approx(4.0).epsilon(1e-12));

    const AssumptionReport blowup = check_A_mu_K(cubic(), box1d(-2, 2), 0.0, 1.0);
    CHECK(blowup.verdict == Verdict::violated);
    CHECK(blowup.fitted_constant > 1.0);
    CHECK(blowup.fitted_constant <= 24.0 + 1e-9); // sup of 2(x^2+xy+y^2) on the box
    CHECK(blowup.n_checked == 512);
}

TEST_CASE("check_A_mu_K reports are deterministic") {
    const AssumptionReport a = check_A_mu_K(gbm(), box1d(-3, 3), 1.0, 2.0);
    const AssumptionReport b = check_A_mu_K(gbm(), box1d(-3, 3), 1.0, 2.0);
    CHECK(a.fitted_constant == b.fitted_constant);
    CHECK(a.worst_pair.first == b.worst_pair.first);
    CHECK(a.worst_pair.second == b.worst_pair.second);

    SampleDomain pseudo = box1d(-3, 3);
    pseudo.sampler = Sampler::pseudo_random;
    pseudo.seed = 99;
    const AssumptionReport c = check_A_mu_K(gbm(), pseudo, 1.0, 2.0);
    const AssumptionReport d = check_A_mu_K(gbm(), pseudo, 1.0, 2.0);
    CHECK(c.fitted_constant == d.fitted_constant);
    CHECK(c.worst_pair.first == d.worst_pair.first);
}

TEST_CASE("check_G_rho: double-well style bound, trivial field, cubic violation") {
    const CoefficientField dw = make_additive_field(
        1, [](const Vec& x, Vec& out) { out[0] = -x[0] * x[0] * x[0] + x[0]; }, 1.0, "dw");
    const AssumptionReport ok =
        check_G_rho(dw, box1d(-3, 3), [](double u) { return 2.0 * u + 1.0; });
    CHECK(ok.verdict == Verdict::satisfied_at_level);

    const CoefficientField zero = drift_only_1d([](const Vec&, Vec& out) { out[0] = 0.0; }, "0");
    const AssumptionReport trivial = check_G_rho(zero, box1d(-1, 1), [](double) { return 1.0; });
    CHECK(trivial.verdict == Verdict::satisfied_at_level);
    CHECK(trivial.worst_ratio == 0.0); // slack 1 everywhere

    const AssumptionReport bad =
        check_G_rho(cubic(), box1d(-3, 3), [](double u) { return u + 1.0; });
    CHECK(bad.verdict == Verdict::violated);

    // rho must be positive and non-decreasing
    CHECK_THROWS_AS(check_G_rho(zero, box1d(-1, 1), [](double u) { return 1.0 - u; }),
                    InputError);
    CHECK_THROWS_AS(check_G_rho(zero, box1d(-1, 1), [](double u) { return u - 100.0; }),
                    InputError);
}

TEST_CASE("check_H_f_mu: constant envelope, gbm factorization, cubic violation") {
    const CoefficientField neg_lin =
        drift_only_1d([](const Vec& x, Vec& out) { out[0] = -x[0]; }, "-x");
    const AssumptionReport ok =
        check_H_f_mu(neg_lin, box1d(-3, 3), [](double) { return 1.0; }, 7.0);
    CHECK(ok.verdict == Verdict::satisfied_at_level);

    const double mu = 2.0;
    const AssumptionReport gbm_ok = check_H_f_mu(
        gbm(), box1d(-3, 3), [mu](double u) { return (1.0 + mu) * (u * u + 1.0); }, mu);
    CHECK(gbm_ok.verdict == Verdict::satisfied_at_level);

    const AssumptionReport bad =
        check_H_f_mu(cubic(), box1d(-2, 2), [](double) { return 1.0; }, 0.0);
    CHECK(bad.verdict == Verdict::violated);
}

TEST_CASE("a field passing A_mu_K with mu=0 passes H with the constant envelope") {
    // same-sample consistency between the two checkers
    const AssumptionReport a = check_A_mu_K(gbm(), box1d(-3, 3), 0.0, 1.0);
    const double level = std::max(a.fitted_constant, 1e-6);
    const AssumptionReport h =
        check_H_f_mu(gbm(), box1d(-3, 3), [level](double) { return level; }, 0.0);
    CHECK(h.verdict == Verdict::satisfied_at_level);
}

TEST_CASE("subadditivity_check: frozen cases") {
    // additive noise: both sides vanish
    const SubadditivityResult add =
        subadditivity_check(ou(), {0.0}, {1.0}, {0.0, 0.5, 1.0});
    CHECK(add.opnorm_holds);
    CHECK(add.trace_holds);
    CHECK(add.opnorm_slack == doctest::Approx(0.0));

    // sigma(x) = x: each term equals the segment length, equality holds
    const SubadditivityResult eq = subadditivity_check(gbm(), {0.0}, {1.0}, {0.0, 0.5, 1.0});
    CHECK(eq.opnorm_holds);
    CHECK(eq.trace_holds);
    CHECK(eq.opnorm_slack == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eq.trace_slack == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eq.refine_monotone_opnorm);
    CHECK(eq.refine_monotone_trace);

    CHECK_THROWS_AS(subadditivity_check(gbm(), {1.0}, {1.0}, {0.0, 1.0}), InputError);
    CHECK_THROWS_AS(subadditivity_check(gbm(), {0.0}, {1.0}, {0.0, 0.7, 0.3, 1.0}), InputError);
}

TEST_CASE("subadditivity holds on random segments and dyadic partitions") {
    const CoefficientField sine(
        2, [](const Vec&, Vec& out) { out[0] = out[1] = 0.0; },
        {[](const Vec& x, Vec& out) { out[0] = std::sin(x[0]); }}, "sine_d2");
    for (std::uint64_t i = 0; i < 50; ++i) {
        Vec x(2), y(2);
        for (int c = 0; c < 2; ++c) {
            x[c] = 6.0 * uniform_open01(13, Stream::generic, i, c) - 3.0;
            y[c] = 6.0 * uniform_open01(13, Stream::generic, i, 2 + c) - 3.0;
        }
        if (distance(x, y) < 1e-6) continue;
        for (int depth = 1; depth <= 4; ++depth) {
            std::vector<double> partition;
            const int n = 1 << depth;
            for (int k = 0; k <= n; ++k) partition.push_back(static_cast<double>(k) / n);
            const SubadditivityResult res = subadditivity_check(sine, x, y, partition);
            CHECK(res.opnorm_holds);
            CHECK(res.trace_holds);
            CHECK(res.refine_monotone_opnorm);
            CHECK(res.refine_monotone_trace);
        }
    }
}

TEST_CASE("lemma_G_check: linear drift fits C=1, cubic drift fails the hypothesis") {
    const AssumptionReport ok = lemma_G_check(ou(), {0.5, 1.0, 2.0});
    CHECK(ok.hypothesis_ok);
    CHECK(ok.verdict == Verdict::satisfied_at_level);
    // LHS = -2x^2 + 1 and K clamps to 0, so C = max 1/(1+|x|) <= 1
    CHECK(ok.fitted_constant <= 1.0 + 1e-9);
    CHECK(ok.fitted_constant > 0.0);

    const CoefficientField zero(1, [](const Vec&, Vec& out) { out[0] = 0.0; }, {}, "0");
    const AssumptionReport trivial = lemma_G_check(zero, {1.0, 2.0});
    CHECK(trivial.verdict == Verdict::satisfied_at_level);
    CHECK(trivial.fitted_constant == doctest::Approx(0.0));

    const AssumptionReport fail = lemma_G_check(cubic(), {1.0, 2.0, 4.0});
    CHECK_FALSE(fail.hypothesis_ok);
    CHECK(fail.verdict == Verdict::violated);
}

TEST_CASE("local_to_global_check: constant, linear-matrix, and dissipative cases") {
    // ratio identically -2
    SampleDomain box_a = box1d(-2, 0.5, 128);
    SampleDomain box_b = box1d(-0.5, 2, 128);
    const CoefficientField neg_lin =
        drift_only_1d([](const Vec& x, Vec& out) { out[0] = -x[0]; }, "-x");
    const LocalToGlobalResult lin =
        local_to_global_check(neg_lin, 0.0, {box_a, box_b}, {{{-1.9}, {1.9}}});
    CHECK(lin.holds);
    CHECK(lin.max_local_constant == doctest::Approx(-2.0).epsilon(1e-12));

    // additive noise with linear drift: ratio is twice a Rayleigh quotient of
    // the symmetric part
    const CoefficientField shear = make_additive_field(
        2,
        [](const Vec& x, Vec& out) {
            out[0] = -x[0] + 0.5 * x[1];
            out[1] = -x[1];
        },
        1.0, "shear");
    SampleDomain sq;
    sq.box_low = {-2.0, -2.0};
    sq.box_high = {2.0, 2.0};
    sq.n_pairs = 256;
    const LocalToGlobalResult mat =
        local_to_global_check(shear, 0.0, {sq}, {{{-1.5, -1.5}, {1.5, 1.5}}});
    CHECK(mat.holds);

    // dissipative cubic: one_sided_expr <= 0 everywhere
    SampleDomain wide = box1d(-5, 5, 256);
    const CoefficientField neg_cubic =
        drift_only_1d([](const Vec& x, Vec& out) { out[0] = -x[0] * x[0] * x[0]; }, "-x^3");
    const LocalToGlobalResult cube =
        local_to_global_check(neg_cubic, 0.0, {wide}, {{{-5.0}, {5.0}}});
    CHECK(cube.holds);

    // segment outside every box cannot be subdivided into covered pieces
    CHECK_THROWS_AS(local_to_global_check(neg_lin, 0.0, {box_a}, {{{5.0}, {9.0}}}), InputError);
}

TEST_CASE("sample domain rejects degenerate input") {
    SampleDomain dom;
    dom.box_low = {1.0};
    dom.box_high = {0.0};
    CHECK_THROWS_AS(dom.sample_pairs(), InputError);

    SampleDomain tiny = box1d(0.0, 1e-300, 4); // min separation unreachable
    tiny.min_separation = 1.0;
    CHECK_THROWS_AS(tiny.sample_pairs(), InputError);
}
