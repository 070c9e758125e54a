#include "monoflow/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace monoflow {

double SquareMat::frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
}

double SquareMat::max_abs_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
}

namespace {

void check_symmetric(const SquareMat& a) {
    const double scale = std::max(a.frobenius(), 1e-300);
    if (a.max_abs_asymmetry() > 1e-12 * scale)
        throw InternalError("symmetric eigensolver received an asymmetric matrix");
}

double off_diagonal_norm2(const SquareMat& a) {
    double s = 0.0;
    const int n = a.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return s;
}

} // namespace

std::vector<double> jacobi_eigenvalues(SquareMat a) {
    const int n = a.size();
    if (n == 0) return {};
    if (n == 1) return {a(0, 0)};

    const double fro = a.frobenius();
    const double tol2 = (1e-12 * fro) * (1e-12 * fro);
    constexpr int max_sweeps = 100;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_diagonal_norm2(a) <= tol2) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a(i, i);
    return eig;
}

double sym_max_eigenvalue(const SquareMat& a) {
    check_symmetric(a);
    const int n = a.size();
    if (n == 0) return 0.0;
    if (n == 1) return a(0, 0);
    if (n == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double diff = a(0, 0) - a(1, 1);
        const double disc = std::sqrt(diff * diff + 4.0 * a(0, 1) * a(1, 0));
        return 0.5 * (tr + disc);
    }
    const std::vector<double> eig = jacobi_eigenvalues(a);
    return *std::max_element(eig.begin(), eig.end());
}

double sym_min_eigenvalue(const SquareMat& a) {
    check_symmetric(a);
    const int n = a.size();
    if (n == 0) return 0.0;
    if (n == 1) return a(0, 0);
    if (n == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double diff = a(0, 0) - a(1, 1);
        const double disc = std::sqrt(diff * diff + 4.0 * a(0, 1) * a(1, 0));
        return 0.5 * (tr - disc);
    }
    const std::vector<double> eig = jacobi_eigenvalues(a);
    return *std::min_element(eig.begin(), eig.end());
}

} // namespace monoflow
