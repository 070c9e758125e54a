#pragma once

#include <functional>
#include <span>

namespace monoflow {

/// Runs fn(replica) for replica in [0, n) on a block-partitioned worker
/// pool. Each replica writes only its own slots, and every reduction in this
/// library walks the result arrays in replica order afterwards, so outputs
/// are identical for any worker count. threads <= 0 uses the machine
/// parallelism.
void for_each_replica(long n, int threads, const std::function<void(long)>& fn);

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    long n = 0;
};

/// Sample mean and standard error, accumulated in index order.
MeanSE mean_se(std::span<const double> values);

} // namespace monoflow
