#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace monoflow {

/// State-space vector. Live states must be finite in every component;
/// blow-up is tracked separately (see integrator.hpp).
using Vec = std::vector<double>;

/// Bad caller input: wrong dimensions, parameter constraint violations,
/// malformed configs. Maps to CLI exit status 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A run that cannot produce a verdict: a built-in verification construction
/// failed its own pathwise hypothesis, or too many replicas were excluded.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Broken internal invariant (e.g. an asymmetric matrix reaching the
/// symmetric eigensolver).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline double distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InputError(what);
}

} // namespace monoflow
