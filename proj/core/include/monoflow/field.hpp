#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "monoflow/common.hpp"
#include "monoflow/linalg.hpp"

namespace monoflow {

/// The coefficient pair (b, sigma_1..sigma_m) of
///   dX_t = b(X_t) dt + sum_k sigma_k(X_t) dW^k_t.
/// Immutable after construction; evaluation must be pure, so a field can be
/// shared freely across worker threads.
class CoefficientField {
public:
    /// Writes the d-vector value into `out` (pre-sized to d by the caller).
    using FieldFn = std::function<void(const Vec&, Vec&)>;

    CoefficientField(int dim, FieldFn drift, std::vector<FieldFn> diffusion,
                     std::string label);

    int dim() const { return dim_; }
    int noise_dim() const { return static_cast<int>(diffusion_.size()); }
    const std::string& label() const { return label_; }

    void drift_into(const Vec& x, Vec& out) const;
    void sigma_into(int k, const Vec& x, Vec& out) const;

    Vec drift(const Vec& x) const;
    Vec sigma(int k, const Vec& x) const;

private:
    int dim_;
    FieldFn drift_;
    std::vector<FieldFn> diffusion_;
    std::string label_;
};

/// Radial cutoff psi(s): identically 1 on s <= 1, identically 0 on s >= 2,
/// non-increasing in between. The quintic profile is the default (C^2,
/// polynomial transition, bit-for-bit reproducible); the exponential bump
/// quotient gives a C-infinity alternative.
struct CutoffProfile {
    enum class Shape { quintic, smooth_exponential };
    Shape shape = Shape::quintic;

    double eval(double s) const;
};

/// Covariance kernel a(x,y)[i][j] = sum_k sigma_k^i(x) sigma_k^j(y).
SquareMat cov_kernel(const CoefficientField& field, const Vec& x, const Vec& y);

/// a(x,x) - a(x,y) - a(y,x) + a(y,y), evaluated at a fixed pair of points.
/// Always computed as sum_k (sigma_k(x)-sigma_k(y))(sigma_k(x)-sigma_k(y))^T,
/// which is symmetric positive semi-definite by construction even in floating
/// point; the four-kernel form is kept for cross-checks only.
struct StructureMatrix {
    SquareMat entries;
    Vec x, y;
};

StructureMatrix structure_matrix(const CoefficientField& field, const Vec& x, const Vec& y);

/// Same value assembled from four covariance-kernel evaluations (test
/// cross-check; not guaranteed PSD in floating point).
SquareMat structure_matrix_via_kernel(const CoefficientField& field, const Vec& x, const Vec& y);

/// (trace, operator norm) of a symmetric PSD matrix.
std::pair<double, double> trace_and_opnorm(const SquareMat& a);
std::pair<double, double> trace_and_opnorm(const StructureMatrix& a);

/// Field with drift psi(|x|/N)^2 b(x) and diffusion psi(|x|/N) sigma_k(x):
/// agrees with `field` exactly on |x| <= N and vanishes on |x| >= 2N.
CoefficientField truncate(const CoefficientField& field, double cutoff_radius,
                          CutoffProfile profile = {});

/// Convenience builders.
CoefficientField make_additive_field(int dim, CoefficientField::FieldFn drift,
                                     double sigma_scale, std::string label);

} // namespace monoflow
