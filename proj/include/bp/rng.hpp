#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "bp/errors.hpp"

namespace bp {

// Self-contained xoshiro256++ stream. We do not use <random> engines or
// distributions because their output is implementation-defined; experiment
// reruns must be bit-identical across toolchains.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit();

    bool bernoulli(double p) { return next_unit() < p; }

    /// Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t n);

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t s_[4];
};

/// Derives the seed of a named sub-stream. All randomness in an experiment
/// flows from one master seed through (name, index) sub-streams, so trials
/// are independent and individually replayable.
std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                             std::uint64_t index);

inline RngStream substream(std::uint64_t master, std::string_view name,
                           std::uint64_t index = 0) {
    return RngStream(substream_seed(master, name, index));
}

/// Samples an index from a discrete distribution given by (unnormalized)
/// nonnegative weights. Throws NumericalError when the total weight is zero.
std::size_t sample_discrete(RngStream& rng, const std::vector<double>& weights);

} // namespace bp
