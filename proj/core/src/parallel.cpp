#include "monoflow/parallel.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace monoflow {

void for_each_replica(long n, int threads, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    unsigned t = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    if (t > static_cast<unsigned>(n)) t = static_cast<unsigned>(n);

    if (t == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        const long lo = static_cast<long>(w * (n / t) + std::min<long>(w, n % t));
        const long hi = lo + n / t + (w < static_cast<unsigned>(n % t) ? 1 : 0);
        pool.emplace_back([&, lo, hi] {
            try {
                for (long i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

MeanSE mean_se(std::span<const double> values) {
    MeanSE out;
    out.n = static_cast<long>(values.size());
    if (out.n == 0) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / out.n;
    if (out.n < 2) return out;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        ss += d * d;
    }
    out.se = std::sqrt(ss / (out.n - 1)) / std::sqrt(static_cast<double>(out.n));
    return out;
}

} // namespace monoflow
