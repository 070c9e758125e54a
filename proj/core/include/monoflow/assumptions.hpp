#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monoflow/common.hpp"
#include "monoflow/field.hpp"

namespace monoflow {

enum class Sampler { pseudo_random, low_discrepancy };

/// Box from which point pairs are drawn when checking a quantified
/// inequality. Pairs closer than min_separation are rejected and redrawn
/// (the defining ratios are 0/0 at x = y).
struct SampleDomain {
    Vec box_low;
    Vec box_high;
    int n_pairs = 256;
    Sampler sampler = Sampler::low_discrepancy;
    double min_separation = 0.0; // <= 0 picks the default 1e-6 * box diagonal
    std::uint64_t seed = 0;      // used by the pseudo_random sampler

    int dim() const { return static_cast<int>(box_low.size()); }
    double diagonal() const;
    double effective_min_separation() const;
    void validate() const;

    std::vector<std::pair<Vec, Vec>> sample_pairs() const;
    std::vector<Vec> sample_points(int n) const;
};

enum class AssumptionKind { A_mu_K, G_rho, H_f_mu, lemma_G, additive_growth };
enum class Verdict { satisfied_at_level, violated };

const char* to_string(AssumptionKind k);
const char* to_string(Verdict v);

/// Outcome of a sampled check. `worst_ratio` is the maximum of the defining
/// ratio over all accepted pairs; the verdict compares it against `level`
/// (K for the one-sided family, 1 for the ratio-normalized families).
/// Sampling cannot prove the universally quantified statement, so the report
/// always carries the witness pair and the number of pairs checked.
struct AssumptionReport {
    AssumptionKind assumption = AssumptionKind::A_mu_K;
    double mu = 0.0;
    double level = 0.0;
    double fitted_constant = 0.0;
    std::pair<Vec, Vec> worst_pair;
    double worst_ratio = 0.0;
    long n_checked = 0;
    Verdict verdict = Verdict::violated;
    bool hypothesis_ok = true; // lemma_G only: monotonicity hypothesis stable
    std::string note;
};

using ScalarFn = std::function<double(double)>;

/// 2<b(x)-b(y), x-y> + tr A(x,y) + mu * ||A(x,y)||, the left-hand side of
/// the one-sided Lipschitz family.
double one_sided_expr(const CoefficientField& field, const Vec& x, const Vec& y, double mu);

/// Does one_sided_expr(x,y,mu) <= K |x-y|^2 hold on the sampled pairs?
/// fitted_constant is the maximal observed ratio regardless of the verdict.
AssumptionReport check_A_mu_K(const CoefficientField& field, const SampleDomain& domain,
                              double mu, double K);

/// Coercivity: 2<b(x),x> + tr a(x,x) <= rho(|x|^2) on sampled points.
/// rho must be positive and non-decreasing (probed on a 1-D grid).
AssumptionReport check_G_rho(const CoefficientField& field, const SampleDomain& domain,
                             ScalarFn rho);

/// one_sided_expr(x,y,mu) <= f(|x| v |y|) |x-y|^2 with f continuous,
/// positive, non-decreasing (probed on a grid).
AssumptionReport check_H_f_mu(const CoefficientField& field, const SampleDomain& domain,
                              ScalarFn f, double mu);

/// Partition subadditivity of ||A||/|x-y| and tr A/|x-y| along the segment
/// x -> y, plus refinement monotonicity of the right-hand sums.
struct SubadditivityResult {
    bool opnorm_holds = false;
    bool trace_holds = false;
    bool refine_monotone_opnorm = false;
    bool refine_monotone_trace = false;
    double opnorm_slack = 0.0; // rhs - lhs
    double trace_slack = 0.0;
};

SubadditivityResult subadditivity_check(const CoefficientField& field, const Vec& x,
                                        const Vec& y, const std::vector<double>& partition);

/// Fits the smallest C with 2<b(x),x> + tr a(x,x) <= K|x|^2 + C(1+|x|) over
/// points with |x| in `radii`, K itself fitted from the zero-mu one-sided
/// check on the enclosing ball (clamped to >= 0). The verdict demands the C
/// fit to be stable (<10% drift) when the largest radius is doubled;
/// hypothesis_ok reports whether the K fit itself was stable.
AssumptionReport lemma_G_check(const CoefficientField& field, const std::vector<double>& radii,
                               int n_per_radius = 128, std::uint64_t seed = 0);

/// Numerical witness that a locally fitted one-sided constant controls long
/// pairs once their segments are subdivided into box-sized pieces.
struct LocalToGlobalResult {
    bool holds = false;
    double max_local_constant = 0.0;
    double worst_global_ratio = 0.0;
};

LocalToGlobalResult local_to_global_check(const CoefficientField& field, double mu,
                                          const std::vector<SampleDomain>& boxes,
                                          const std::vector<std::pair<Vec, Vec>>& long_pairs);

} // namespace monoflow
