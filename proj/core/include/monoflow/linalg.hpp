#pragma once

#include <utility>
#include <vector>

#include "monoflow/common.hpp"

namespace monoflow {

/// Small dense square matrix, row-major. Sized for d x d with d in the
/// single digits; no attempt at large-scale performance.
class SquareMat {
public:
    SquareMat() = default;
    explicit SquareMat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius() const;
    double max_abs_asymmetry() const;

private:
    int n_ = 0;
    std::vector<double> a_;
};

/// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
/// tolerance 1e-12 relative to the Frobenius norm, at most 100 sweeps.
/// Returned unsorted.
std::vector<double> jacobi_eigenvalues(SquareMat a);

/// Largest eigenvalue of a symmetric matrix: closed form for n <= 2,
/// Jacobi iteration above that. Throws InternalError if the matrix is
/// asymmetric beyond 1e-12 relative to its scale.
double sym_max_eigenvalue(const SquareMat& a);

/// Smallest eigenvalue, same contract as sym_max_eigenvalue.
double sym_min_eigenvalue(const SquareMat& a);

} // namespace monoflow
