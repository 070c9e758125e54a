#pragma once

#include <array>
#include <cstdint>

namespace monoflow {

// Counter-based randomness: every draw is a pure function of
// (seed, stream, replica, index), so replicas can be generated in any order
// on any number of workers and still come out bit-identical.

/// Philox4x32-10 block cipher (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Independent draw streams carved out of the counter space.
enum class Stream : std::uint32_t {
    noise = 0,      // Brownian increments
    sampler = 1,    // pseudo-random domain sampling
    cloud = 2,      // point-cloud pair selection
    generic = 3,    // test helpers
};

/// Uniform on the open interval (0,1); safe to feed into normal_icdf.
double uniform_open01(std::uint64_t seed, Stream stream, std::uint64_t replica,
                      std::uint64_t index);

/// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
/// Uses only +,-,*,/ and sqrt/log, so results are reproducible across
/// conforming platforms.
double normal_icdf(double p);

/// One standard normal draw from the counter-based stream.
double normal_draw(std::uint64_t seed, Stream stream, std::uint64_t replica,
                   std::uint64_t index);

/// Halton radical-inverse in the given base, for low-discrepancy sampling.
double halton(std::uint64_t index, int base);

/// n-th prime for Halton bases (0-indexed; supports dimensions up to 32).
int halton_base(int dim);

} // namespace monoflow
