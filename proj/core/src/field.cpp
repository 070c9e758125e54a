#include "monoflow/field.hpp"

#include <cassert>
#include <cmath>
#include <utility>

namespace monoflow {

CoefficientField::CoefficientField(int dim, FieldFn drift, std::vector<FieldFn> diffusion,
                                   std::string label)
    : dim_(dim), drift_(std::move(drift)), diffusion_(std::move(diffusion)),
      label_(std::move(label)) {
    require(dim_ >= 1, "CoefficientField: dimension must be >= 1");
    require(static_cast<bool>(drift_), "CoefficientField: drift function required");
    for (const auto& s : diffusion_)
        require(static_cast<bool>(s), "CoefficientField: null diffusion function");
}

void CoefficientField::drift_into(const Vec& x, Vec& out) const {
    require(static_cast<int>(x.size()) == dim_, "drift: input dimension mismatch");
    out.assign(dim_, 0.0);
    drift_(x, out);
    if (static_cast<int>(out.size()) != dim_)
        throw InternalError("drift returned a vector of wrong length for field '" + label_ + "'");
}

void CoefficientField::sigma_into(int k, const Vec& x, Vec& out) const {
    require(k >= 0 && k < noise_dim(), "sigma: component index out of range");
    require(static_cast<int>(x.size()) == dim_, "sigma: input dimension mismatch");
    out.assign(dim_, 0.0);
    diffusion_[k](x, out);
    if (static_cast<int>(out.size()) != dim_)
        throw InternalError("sigma returned a vector of wrong length for field '" + label_ + "'");
}

Vec CoefficientField::drift(const Vec& x) const {
    Vec out;
    drift_into(x, out);
    return out;
}

Vec CoefficientField::sigma(int k, const Vec& x) const {
    Vec out;
    sigma_into(k, x, out);
    return out;
}

double CutoffProfile::eval(double s) const {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double u = s - 1.0;
    switch (shape) {
        case Shape::quintic: {
            // smootherstep ramp on [1,2], descending
            const double w = u * u * u * (u * (6.0 * u - 15.0) + 10.0);
            return 1.0 - w;
        }
        case Shape::smooth_exponential: {
            const double f_up = std::exp(-1.0 / (2.0 - s));
            const double f_down = std::exp(-1.0 / u);
            return f_up / (f_up + f_down);
        }
    }
    return 0.0;
}

SquareMat cov_kernel(const CoefficientField& field, const Vec& x, const Vec& y) {
    const int d = field.dim();
    require(static_cast<int>(x.size()) == d && static_cast<int>(y.size()) == d,
            "cov_kernel: dimension mismatch");
    SquareMat a(d);
    Vec sx, sy;
    for (int k = 0; k < field.noise_dim(); ++k) {
        field.sigma_into(k, x, sx);
        field.sigma_into(k, y, sy);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) += sx[i] * sy[j];
    }
    return a;
}

StructureMatrix structure_matrix(const CoefficientField& field, const Vec& x, const Vec& y) {
    const int d = field.dim();
    require(static_cast<int>(x.size()) == d && static_cast<int>(y.size()) == d,
            "structure_matrix: dimension mismatch");
    StructureMatrix result{SquareMat(d), x, y};
    Vec sx, sy;
    for (int k = 0; k < field.noise_dim(); ++k) {
        field.sigma_into(k, x, sx);
        field.sigma_into(k, y, sy);
        for (int i = 0; i < d; ++i) sx[i] -= sy[i];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) result.entries(i, j) += sx[i] * sx[j];
    }
    return result;
}

SquareMat structure_matrix_via_kernel(const CoefficientField& field, const Vec& x, const Vec& y) {
    const int d = field.dim();
    const SquareMat axx = cov_kernel(field, x, x);
    const SquareMat axy = cov_kernel(field, x, y);
    const SquareMat ayx = cov_kernel(field, y, x);
    const SquareMat ayy = cov_kernel(field, y, y);
    SquareMat out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = axx(i, j) - axy(i, j) - ayx(i, j) + ayy(i, j);
    return out;
}

std::pair<double, double> trace_and_opnorm(const SquareMat& a) {
    return {a.trace(), sym_max_eigenvalue(a)};
}

std::pair<double, double> trace_and_opnorm(const StructureMatrix& a) {
    return trace_and_opnorm(a.entries);
}

CoefficientField truncate(const CoefficientField& field, double cutoff_radius,
                          CutoffProfile profile) {
    require(cutoff_radius > 0.0, "truncate: cutoff radius must be positive");
    const double n_radius = cutoff_radius;

    CoefficientField::FieldFn drift = [field, n_radius, profile](const Vec& x, Vec& out) {
        const double psi = profile.eval(norm(x) / n_radius);
        if (psi == 0.0) return; // out is already zero
        field.drift_into(x, out);
        if (psi != 1.0) {
            const double w = psi * psi;
            for (double& v : out) v *= w;
        }
    };

    std::vector<CoefficientField::FieldFn> diffusion;
    diffusion.reserve(field.noise_dim());
    for (int k = 0; k < field.noise_dim(); ++k) {
        diffusion.push_back([field, n_radius, profile, k](const Vec& x, Vec& out) {
            const double psi = profile.eval(norm(x) / n_radius);
            if (psi == 0.0) return;
            field.sigma_into(k, x, out);
            if (psi != 1.0)
                for (double& v : out) v *= psi;
        });
    }

    return CoefficientField(field.dim(), std::move(drift), std::move(diffusion),
                            field.label() + "|trunc");
}

CoefficientField make_additive_field(int dim, CoefficientField::FieldFn drift,
                                     double sigma_scale, std::string label) {
    std::vector<CoefficientField::FieldFn> diffusion;
    diffusion.reserve(dim);
    for (int k = 0; k < dim; ++k) {
        diffusion.push_back([k, sigma_scale](const Vec&, Vec& out) { out[k] = sigma_scale; });
    }
    return CoefficientField(dim, std::move(drift), std::move(diffusion), std::move(label));
}

} // namespace monoflow
