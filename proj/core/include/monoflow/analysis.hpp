#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monoflow/assumptions.hpp"
#include "monoflow/common.hpp"
#include "monoflow/field.hpp"
#include "monoflow/integrator.hpp"

namespace monoflow {

/// (4 ^ 1/p) * pi p / sin(pi p) + 1 for p in (0,1): the constant in the
/// pathwise-to-moment estimate used throughout the bound checks.
double gronwall_const(double p);

/// Monte-Carlo comparison of an empirical moment against a closed-form
/// bound. Verdict rule: within_bound iff empirical + 3 * std_error <= bound.
struct BoundCheck {
    std::string name;
    double empirical = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    long replicas = 0;
    long excluded = 0;
    Verdict verdict = Verdict::violated;
    std::vector<std::string> warnings;
    std::vector<double> per_replica; // raw per-replica statistic (optional dump)

    bool within_bound() const { return verdict == Verdict::satisfied_at_level; }
};

Verdict bound_verdict(double empirical, double std_error, double bound);

enum class GronwallMode {
    deterministic_psi, // bound c_p * exp(p Int psi) * E (H*)^p
    exponent_pair,     // bound (c_{p nu})^(1/nu) * (E exp(p mu Int psi))^(1/mu) * (E (H*)^(p nu))^(1/nu)
};

enum class GronwallConstruction {
    squared_norm, // Z_t = |x0 + W_t|^2, H_t = |x0|^2 + d t
    zero,         // Z = M = H = 0: the degenerate 0 <= 0 case
};

/// Built-in construction Z_t = |x0 + W_t|^2 on the grid, with
/// H_t = |x0|^2 + d t and the compensated discrete martingale chosen so the
/// pathwise inequality Z <= Int psi Z + M + H holds by algebraic identity
/// (exactly, for every replica, at every grid point). psi is the constant
/// psi_const >= 0; any positive value only slackens the hypothesis.
struct GronwallSpec {
    GronwallConstruction construction = GronwallConstruction::squared_norm;
    int dim = 1;
    Vec x0;                 // defaults to the origin
    double psi_const = 0.0; // deterministic integrand
    TimeGrid grid;          // horizon t must be grid.t1
    GronwallMode mode = GronwallMode::deterministic_psi;
    double nu = 0.0;        // exponent_pair mode only; requires nu > 1, p * nu < 1
};

/// Verifies the pathwise hypothesis on every replica (aborting with
/// ConstructionError on any violation beyond 1e-8 * (1 + Z)) and compares
/// the empirical E sup Z^p against the closed-form bound. H is
/// deterministic, so the bound carries no MC error of its own.
BoundCheck gronwall_mc_verify(const GronwallSpec& spec, double p, double t, long replicas,
                              std::uint64_t seed, int threads = 1);

/// Two-point moment bound under shared noise:
///   E sup_{s<=t<=T} |X_t(x) - X_t(y)|^q
///     <= |x-y|^q * c_{qQ/p}^{1/Q} * (E exp{(Pq/2) Int f(|X(x)| v |X(y)|)})^{1/P}
/// with p = mu + 2. Both sides are estimated from the same replicas; the
/// reported std_error conservatively adds the left-side SE and the
/// delta-method SE of the right side.
struct MomentBoundParams {
    Vec x, y;
    ScalarFn f;
    std::string f_desc;
    double mu = 0.0;
    double q = 1.0;
    double P = 2.0;
    double Q = 2.0;
};

BoundCheck moment_bound_verify(const CoefficientField& field, const MomentBoundParams& params,
                               const TimeGrid& grid, double r_max, long replicas,
                               std::uint64_t seed, int threads = 1);

/// Log-log regression of E sup_t |X_t(x) - X_t(x + h e_1)| against h.
/// The slope is reported descriptively next to 1 - d/q; it is never a
/// pass/fail quantity.
struct HolderEstimate {
    double q = 0.0;
    std::vector<std::pair<double, double>> pairs; // (scale, mean sup-distance)
    double slope = 0.0;
    double claimed_exponent = 0.0; // 1 - d/q
    long excluded = 0;
    long replicas = 0;
};

HolderEstimate holder_estimate(const CoefficientField& field, const Vec& base_x,
                               const std::vector<double>& scales, double q,
                               const TimeGrid& grid, double r_max, long replicas,
                               std::uint64_t seed, int threads = 1);

/// First grid time at which two trajectories under shared noise come within
/// eps, whether they stay within 10*eps afterwards, and (optionally) pinning:
/// merging the trajectories at the first hit, after which their distance is
/// exactly zero.
struct CoalescenceResult {
    std::optional<double> first_hit;
    bool stays_below = false;
    bool pinned = false;
};

CoalescenceResult coalescence_detect(const CoefficientField& field, const Vec& x, const Vec& y,
                                     const TimeGrid& grid, const NoiseRealization& noise,
                                     double eps, bool pin = false, double r_max = kDefaultRMax);

enum class CloudKind { segment, circle, cantor_dust, product_cantor };

/// Finite point set approximating a set of prescribed upper box-counting
/// dimension: a segment or circle (dimension 1), the ambient_d-fold product
/// of middle-interval Cantor sets (dimension ambient_d * log2 / log(1/r)),
/// or Cantor x full interval in the plane (dimension 1 + log2 / log(1/r)).
struct PointCloud {
    std::vector<Vec> points;
    double nominal_dimension = 0.0;
    std::string construction;
};

PointCloud minkowski_cloud(CloudKind kind, double delta, int n_points, int ambient_d);

/// Pairwise sup-distance moments over a point cloud versus the bound
/// c * |x-y|^q * exp(qKT/2), with c calibrated as the maximal observed
/// prefactor on a held-out pair set. Both readings of the left side are
/// produced: the plain sup-distance and its q-th power.
struct DeltaCheckParams {
    double q = 1.5;
    double K = 0.0;
    double mu = 0.0;
    int eval_pairs = 32;
    int holdout_pairs = 16;
};

struct DeltaCheckResult {
    BoundCheck linear_reading;  // E sup |X(x)-X(y)|      vs c |x-y|^q e^{qKT/2}
    BoundCheck q_power_reading; // E sup |X(x)-X(y)|^q    vs c |x-y|^q e^{qKT/2}
    double calibrated_c_linear = 0.0;
    double calibrated_c_q_power = 0.0;
    double initial_diameter = 0.0;
    double mean_final_diameter = 0.0;
    double se_final_diameter = 0.0;
    double max_final_diameter = 0.0;
    double blowup_fraction = 0.0;
    long replicas = 0;
};

DeltaCheckResult delta_complete_check(const CoefficientField& field, const PointCloud& cloud,
                                      const DeltaCheckParams& params, const TimeGrid& grid,
                                      double r_max, long replicas, std::uint64_t seed,
                                      int threads = 1);

/// b(x) split into its radial multiple of x and the orthogonal remainder.
struct AdditiveDecomposition {
    double radial_coeff = 0.0;
    Vec tangential;
};

AdditiveDecomposition additive_decomposition(const CoefficientField& field, const Vec& x);

/// Fits the smallest c with <b(x),x> <= c(1+|x|^2) and
/// |b(x) - radial part| <= c(1+|x|^2) over sampled points (a ball of radius
/// min_separation around the origin is excluded, where the decomposition is
/// undefined).
AssumptionReport additive_conditions_check(const CoefficientField& field,
                                           const SampleDomain& domain, double c);

/// Pathwise a-priori bound for additive noise under linear drift growth:
///   |X_t| <= (|x| + sigma sup_{s<=t}|W_s| + c t) exp(c t)
/// checked on every replica at every grid point, tolerance
/// 1e-6 * bound(T). The BoundCheck reports the worst replica.
BoundCheck additive_apriori_check(const CoefficientField& drift_field, double sigma, double c,
                                  const Vec& x, const TimeGrid& grid, long replicas,
                                  std::uint64_t seed, int threads = 1);

} // namespace monoflow
