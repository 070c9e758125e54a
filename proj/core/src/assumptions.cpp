#include "monoflow/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monoflow/rng.hpp"

namespace monoflow {

double SampleDomain::diagonal() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
        const double w = box_high[i] - box_low[i];
        s += w * w;
    }
    return std::sqrt(s);
}

double SampleDomain::effective_min_separation() const {
    return min_separation > 0.0 ? min_separation : 1e-6 * diagonal();
}

void SampleDomain::validate() const {
    require(!box_low.empty(), "SampleDomain: empty box");
    require(box_low.size() == box_high.size(), "SampleDomain: box bound dimension mismatch");
    for (int i = 0; i < dim(); ++i)
        require(box_low[i] < box_high[i], "SampleDomain: box_low must be < box_high componentwise");
    require(n_pairs >= 1, "SampleDomain: n_pairs must be >= 1");
    require(effective_min_separation() > 0.0, "SampleDomain: min_separation must be positive");
}

namespace {

Vec map_to_box(const SampleDomain& dom, const double* unit) {
    Vec x(dom.dim());
    for (int i = 0; i < dom.dim(); ++i)
        x[i] = dom.box_low[i] + unit[i] * (dom.box_high[i] - dom.box_low[i]);
    return x;
}

// One abstract uniform source so the pair/point samplers do not care which
// generator backs them.
struct UnitSource {
    const SampleDomain& dom;
    std::uint64_t draw_index = 0;

    void fill(double* out, int count, std::uint64_t point_index) {
        if (dom.sampler == Sampler::low_discrepancy) {
            for (int i = 0; i < count; ++i) out[i] = halton(point_index + 1, halton_base(i));
        } else {
            for (int i = 0; i < count; ++i)
                out[i] = uniform_open01(dom.seed, Stream::sampler, 0, draw_index++);
        }
    }
};

} // namespace

std::vector<std::pair<Vec, Vec>> SampleDomain::sample_pairs() const {
    validate();
    const int d = dim();
    const double sep = effective_min_separation();
    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(n_pairs);

    UnitSource src{*this};
    std::vector<double> unit(2 * d);
    const long max_attempts = 1000L * n_pairs + 1000L;
    long attempts = 0;
    std::uint64_t point_index = 0;
    while (static_cast<int>(pairs.size()) < n_pairs) {
        if (++attempts > max_attempts)
            throw InputError("SampleDomain: all pairs rejected by min_separation");
        src.fill(unit.data(), 2 * d, point_index++);
        Vec x = map_to_box(*this, unit.data());
        Vec y = map_to_box(*this, unit.data() + d);
        if (distance(x, y) < sep) continue;
        pairs.emplace_back(std::move(x), std::move(y));
    }
    return pairs;
}

std::vector<Vec> SampleDomain::sample_points(int n) const {
    validate();
    require(n >= 1, "SampleDomain: need at least one point");
    const int d = dim();
    UnitSource src{*this};
    std::vector<double> unit(d);
    std::vector<Vec> points;
    points.reserve(n);
    for (int i = 0; i < n; ++i) {
        src.fill(unit.data(), d, static_cast<std::uint64_t>(i));
        points.push_back(map_to_box(*this, unit.data()));
    }
    return points;
}

const char* to_string(AssumptionKind k) {
    switch (k) {
        case AssumptionKind::A_mu_K: return "A_mu_K";
        case AssumptionKind::G_rho: return "G_rho";
        case AssumptionKind::H_f_mu: return "H_f_mu";
        case AssumptionKind::lemma_G: return "lemma_G";
        case AssumptionKind::additive_growth: return "additive_growth";
    }
    return "?";
}

const char* to_string(Verdict v) {
    return v == Verdict::satisfied_at_level ? "satisfied_at_level" : "violated";
}

double one_sided_expr(const CoefficientField& field, const Vec& x, const Vec& y, double mu) {
    require(mu >= 0.0, "one_sided_expr: mu must be >= 0");
    const Vec bx = field.drift(x);
    const Vec by = field.drift(y);
    double drift_term = 0.0;
    for (int i = 0; i < field.dim(); ++i) drift_term += (bx[i] - by[i]) * (x[i] - y[i]);

    const StructureMatrix a = structure_matrix(field, x, y);
    const auto [tr, opnorm] = trace_and_opnorm(a);
    return 2.0 * drift_term + tr + mu * opnorm;
}

namespace {

constexpr double kRatioTol = 1e-9;

// Probes a user-supplied scalar function for positivity and monotonicity on
// a geometric grid; the checkers require these of rho and f.
void probe_scalar_fn(const ScalarFn& fn, const char* name, double max_arg) {
    require(static_cast<bool>(fn), std::string(name) + ": function required");
    double prev = -std::numeric_limits<double>::infinity();
    for (double u = 0.0; u <= max_arg; u = (u == 0.0 ? 1e-6 : u * 2.0)) {
        const double v = fn(u);
        if (!(v > 0.0))
            throw InputError(std::string(name) + ": must be positive on the probe grid");
        if (v < prev - 1e-12 * std::abs(prev))
            throw InputError(std::string(name) + ": must be non-decreasing on the probe grid");
        prev = v;
        if (u > max_arg) break;
    }
}

AssumptionReport make_pair_ratio_report(AssumptionKind kind, double mu, double level,
                                        const std::vector<std::pair<Vec, Vec>>& pairs,
                                        const std::function<double(const Vec&, const Vec&)>& ratio) {
    AssumptionReport rep;
    rep.assumption = kind;
    rep.mu = mu;
    rep.level = level;
    rep.worst_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pairs) {
        const double r = ratio(x, y);
        if (r > rep.worst_ratio) {
            rep.worst_ratio = r;
            rep.worst_pair = {x, y};
        }
    }
    rep.n_checked = static_cast<long>(pairs.size());
    rep.fitted_constant = rep.worst_ratio;
    rep.verdict = (rep.worst_ratio <= level + kRatioTol) ? Verdict::satisfied_at_level
                                                         : Verdict::violated;
    return rep;
}

} // namespace

AssumptionReport check_A_mu_K(const CoefficientField& field, const SampleDomain& domain,
                              double mu, double K) {
    require(mu >= 0.0, "check_A_mu_K: mu must be >= 0");
    require(domain.dim() == field.dim(), "check_A_mu_K: domain dimension mismatch");
    const auto pairs = domain.sample_pairs();
    return make_pair_ratio_report(AssumptionKind::A_mu_K, mu, K, pairs,
                                  [&](const Vec& x, const Vec& y) {
                                      const double d2 = norm2(sub(x, y));
                                      return one_sided_expr(field, x, y, mu) / d2;
                                  });
}

AssumptionReport check_G_rho(const CoefficientField& field, const SampleDomain& domain,
                             ScalarFn rho) {
    require(domain.dim() == field.dim(), "check_G_rho: domain dimension mismatch");
    domain.validate();
    // largest |x|^2 reachable in the box
    double max_arg = 0.0;
    for (int i = 0; i < domain.dim(); ++i)
        max_arg += std::max(domain.box_low[i] * domain.box_low[i],
                            domain.box_high[i] * domain.box_high[i]);
    probe_scalar_fn(rho, "check_G_rho: rho", max_arg);

    const auto points = domain.sample_points(domain.n_pairs);
    AssumptionReport rep;
    rep.assumption = AssumptionKind::G_rho;
    rep.level = 1.0;
    rep.worst_ratio = -std::numeric_limits<double>::infinity();
    for (const Vec& x : points) {
        const double lhs = 2.0 * dot(field.drift(x), x) + cov_kernel(field, x, x).trace();
        const double r = lhs / rho(norm2(x));
        if (r > rep.worst_ratio) {
            rep.worst_ratio = r;
            rep.worst_pair = {x, x};
        }
    }
    rep.n_checked = static_cast<long>(points.size());
    rep.fitted_constant = rep.worst_ratio;
    rep.verdict = (rep.worst_ratio <= 1.0 + kRatioTol) ? Verdict::satisfied_at_level
                                                       : Verdict::violated;
    return rep;
}

AssumptionReport check_H_f_mu(const CoefficientField& field, const SampleDomain& domain,
                              ScalarFn f, double mu) {
    require(mu >= 0.0, "check_H_f_mu: mu must be >= 0");
    require(domain.dim() == field.dim(), "check_H_f_mu: domain dimension mismatch");
    domain.validate();
    double max_norm2 = 0.0;
    for (int i = 0; i < domain.dim(); ++i)
        max_norm2 += std::max(domain.box_low[i] * domain.box_low[i],
                              domain.box_high[i] * domain.box_high[i]);
    probe_scalar_fn(f, "check_H_f_mu: f", std::sqrt(max_norm2));

    const auto pairs = domain.sample_pairs();
    AssumptionReport rep = make_pair_ratio_report(
        AssumptionKind::H_f_mu, mu, 1.0, pairs, [&](const Vec& x, const Vec& y) {
            const double d2 = norm2(sub(x, y));
            const double cap = f(std::max(norm(x), norm(y)));
            return one_sided_expr(field, x, y, mu) / (cap * d2);
        });
    return rep;
}

namespace {

// ||A(x,y)|| / |x-y| and tr A(x,y) / |x-y| for one segment piece.
std::pair<double, double> segment_ratios(const CoefficientField& field, const Vec& x,
                                         const Vec& y) {
    const double len = distance(x, y);
    const auto [tr, opnorm] = trace_and_opnorm(structure_matrix(field, x, y));
    return {opnorm / len, tr / len};
}

std::pair<double, double> partition_sums(const CoefficientField& field, const Vec& x,
                                         const Vec& y, const std::vector<double>& gammas) {
    double sum_op = 0.0, sum_tr = 0.0;
    const int d = static_cast<int>(x.size());
    Vec a(d), b(d);
    for (std::size_t i = 1; i < gammas.size(); ++i) {
        for (int c = 0; c < d; ++c) {
            a[c] = x[c] + gammas[i - 1] * (y[c] - x[c]);
            b[c] = x[c] + gammas[i] * (y[c] - x[c]);
        }
        const auto [op, tr] = segment_ratios(field, a, b);
        sum_op += op;
        sum_tr += tr;
    }
    return {sum_op, sum_tr};
}

} // namespace

SubadditivityResult subadditivity_check(const CoefficientField& field, const Vec& x,
                                        const Vec& y, const std::vector<double>& partition) {
    require(x != y, "subadditivity_check: x and y must differ");
    require(partition.size() >= 2, "subadditivity_check: need at least {0,1}");
    require(partition.front() == 0.0 && partition.back() == 1.0,
            "subadditivity_check: partition must start at 0 and end at 1");
    for (std::size_t i = 1; i < partition.size(); ++i)
        require(partition[i] > partition[i - 1], "subadditivity_check: partition must increase");

    constexpr double kSlackTol = 1e-9;
    const auto [lhs_op, lhs_tr] = segment_ratios(field, x, y);
    const auto [rhs_op, rhs_tr] = partition_sums(field, x, y, partition);

    SubadditivityResult res;
    res.opnorm_slack = rhs_op - lhs_op;
    res.trace_slack = rhs_tr - lhs_tr;
    res.opnorm_holds = res.opnorm_slack >= -kSlackTol;
    res.trace_holds = res.trace_slack >= -kSlackTol;

    // Refinement monotonicity: inserting one midpoint at a time must never
    // decrease the right-hand sums.
    res.refine_monotone_opnorm = true;
    res.refine_monotone_trace = true;
    std::vector<double> refined = partition;
    double prev_op = rhs_op, prev_tr = rhs_tr;
    for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
        const double mid = 0.5 * (partition[i] + partition[i + 1]);
        auto pos = std::upper_bound(refined.begin(), refined.end(), mid);
        refined.insert(pos, mid);
        const auto [op, tr] = partition_sums(field, x, y, refined);
        if (op < prev_op - kSlackTol) res.refine_monotone_opnorm = false;
        if (tr < prev_tr - kSlackTol) res.refine_monotone_trace = false;
        prev_op = op;
        prev_tr = tr;
    }
    return res;
}

namespace {

// Fit of the zero-mu one-sided constant on the centered box of half-width R.
double fit_one_sided_constant(const CoefficientField& field, double radius, int n_pairs,
                              std::uint64_t seed) {
    SampleDomain dom;
    dom.box_low.assign(field.dim(), -radius);
    dom.box_high.assign(field.dim(), radius);
    dom.n_pairs = n_pairs;
    dom.seed = seed;
    const auto pairs = dom.sample_pairs();
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pairs)
        worst = std::max(worst, one_sided_expr(field, x, y, 0.0) / norm2(sub(x, y)));
    return worst;
}

// Direction set with |x| = r exactly, from low-discrepancy points on the
// sphere (box points normalized).
std::vector<Vec> points_at_radius(int dim, double r, int n) {
    std::vector<Vec> pts;
    pts.reserve(n);
    std::uint64_t index = 0;
    while (static_cast<int>(pts.size()) < n) {
        Vec x(dim);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            x[i] = 2.0 * halton(++index + static_cast<std::uint64_t>(i) * 7919u, halton_base(i)) - 1.0;
            s += x[i] * x[i];
        }
        if (s < 1e-8) continue;
        const double scale = r / std::sqrt(s);
        for (double& v : x) v *= scale;
        pts.push_back(std::move(x));
    }
    return pts;
}

double fit_remainder_constant(const CoefficientField& field, const std::vector<double>& radii,
                              double K, int n_per_radius) {
    double c = -std::numeric_limits<double>::infinity();
    for (double r : radii) {
        for (const Vec& x : points_at_radius(field.dim(), r, n_per_radius)) {
            const double lhs = 2.0 * dot(field.drift(x), x) + cov_kernel(field, x, x).trace();
            c = std::max(c, (lhs - K * norm2(x)) / (1.0 + norm(x)));
        }
    }
    return c;
}

} // namespace

AssumptionReport lemma_G_check(const CoefficientField& field, const std::vector<double>& radii,
                               int n_per_radius, std::uint64_t seed) {
    require(!radii.empty(), "lemma_G_check: need at least one radius");
    for (double r : radii) require(r > 0.0, "lemma_G_check: radii must be positive");
    std::vector<double> sorted = radii;
    std::sort(sorted.begin(), sorted.end());
    const double r_max = sorted.back();

    AssumptionReport rep;
    rep.assumption = AssumptionKind::lemma_G;
    rep.mu = 0.0;

    // Hypothesis: a stable zero-mu one-sided constant on the enclosing ball.
    const double k_base = fit_one_sided_constant(field, r_max, 4 * n_per_radius, seed);
    const double k_double = fit_one_sided_constant(field, 2.0 * r_max, 4 * n_per_radius, seed + 1);
    const double k_drift = std::abs(k_double - k_base) / std::max(1.0, std::abs(k_base));
    rep.hypothesis_ok = k_drift < 0.10;
    const double K = std::max(k_double, 0.0);
    rep.level = K;

    const double c_base = fit_remainder_constant(field, sorted, K, n_per_radius);
    std::vector<double> extended = sorted;
    extended.push_back(2.0 * r_max);
    const double c_double = fit_remainder_constant(field, extended, K, n_per_radius);

    rep.fitted_constant = c_double;
    rep.worst_ratio = c_double;
    rep.n_checked = static_cast<long>((sorted.size() + extended.size()) * n_per_radius);
    const double c_drift = std::abs(c_double - c_base) / std::max(1.0, std::abs(c_base));
    if (!rep.hypothesis_ok) {
        rep.verdict = Verdict::violated;
        rep.note = "one-sided constant fit is unstable under radius doubling; "
                   "the linear-remainder hypothesis fails on the probed ball";
    } else {
        rep.verdict = (c_drift < 0.10) ? Verdict::satisfied_at_level : Verdict::violated;
        if (rep.verdict == Verdict::violated)
            rep.note = "remainder constant fit drifts >=10% under radius doubling";
    }
    return rep;
}

LocalToGlobalResult local_to_global_check(const CoefficientField& field, double mu,
                                          const std::vector<SampleDomain>& boxes,
                                          const std::vector<std::pair<Vec, Vec>>& long_pairs) {
    require(!boxes.empty(), "local_to_global_check: need at least one box");
    require(!long_pairs.empty(), "local_to_global_check: need at least one pair");

    LocalToGlobalResult res;
    res.max_local_constant = -std::numeric_limits<double>::infinity();
    for (const SampleDomain& box : boxes) {
        require(box.dim() == field.dim(), "local_to_global_check: box dimension mismatch");
        for (const auto& [x, y] : box.sample_pairs())
            res.max_local_constant =
                std::max(res.max_local_constant, one_sided_expr(field, x, y, mu) / norm2(sub(x, y)));
    }

    const auto piece_in_some_box = [&](const Vec& a, const Vec& b) {
        // boxes are convex, so a piece lies in a box iff both endpoints do
        for (const SampleDomain& box : boxes) {
            bool in = true;
            for (int ci = 0; ci < box.dim(); ++ci) {
                if (a[ci] < box.box_low[ci] || a[ci] > box.box_high[ci] ||
                    b[ci] < box.box_low[ci] || b[ci] > box.box_high[ci]) {
                    in = false;
                    break;
                }
            }
            if (in) return true;
        }
        return false;
    };

    res.worst_global_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : long_pairs) {
        require(x.size() == y.size() && static_cast<int>(x.size()) == field.dim(),
                "local_to_global_check: pair dimension mismatch");
        int pieces = 0;
        for (int n = 1; n <= (1 << 16) && pieces == 0; n *= 2) {
            bool ok = true;
            for (int i = 0; i < n && ok; ++i) {
                Vec a(x.size()), b(x.size());
                for (std::size_t c = 0; c < x.size(); ++c) {
                    a[c] = x[c] + (static_cast<double>(i) / n) * (y[c] - x[c]);
                    b[c] = x[c] + (static_cast<double>(i + 1) / n) * (y[c] - x[c]);
                }
                ok = piece_in_some_box(a, b);
            }
            if (ok) pieces = n;
        }
        if (pieces == 0)
            throw InputError("local_to_global_check: segment not coverable by the supplied boxes");

        // each covered piece is itself a local pair: its ratio feeds the
        // local constant, which is exactly how the subdivision argument
        // controls the long pair
        for (int i = 0; i < pieces; ++i) {
            Vec a(x.size()), b(x.size());
            for (std::size_t c = 0; c < x.size(); ++c) {
                a[c] = x[c] + (static_cast<double>(i) / pieces) * (y[c] - x[c]);
                b[c] = x[c] + (static_cast<double>(i + 1) / pieces) * (y[c] - x[c]);
            }
            res.max_local_constant =
                std::max(res.max_local_constant, one_sided_expr(field, a, b, mu) / norm2(sub(a, b)));
        }

        res.worst_global_ratio =
            std::max(res.worst_global_ratio, one_sided_expr(field, x, y, mu) / norm2(sub(x, y)));
    }

    res.holds = res.worst_global_ratio <= res.max_local_constant + 1e-6;
    return res;
}

} // namespace monoflow
