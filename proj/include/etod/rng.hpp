#pragma once

#include <array>
#include <cstdint>

namespace etod {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// A counter-based random stream. The (master_seed, stream_index) pair fully
/// determines the sequence; the position counter is the only mutable part, so
/// copying a stream forks an identical sequence. Distinct stream indices map
/// to disjoint Philox counter blocks.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
        : master_seed_(master_seed), stream_index_(stream_index)
    {}

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }
    [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_index_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return position_; }

    /// Child stream with the same seed and a hashed index; position restarts at 0.
    [[nodiscard]] RngStream derive(std::uint64_t child) const noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double next_uniform() noexcept;

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t position_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Each sampler advances the stream. Parameter checks throw InvalidParameter.
double sample_normal(RngStream& stream, double mean, double sd);
/// exp(N(mu, sigma^2)); mean is exp(mu + sigma^2/2).
double sample_lognormal(RngStream& stream, double mu, double sigma);
int sample_bernoulli(RngStream& stream, double p);
/// Gamma(shape k, scale s), mean k*s. Marsaglia-Tsang squeeze.
double sample_gamma(RngStream& stream, double shape, double scale = 1.0);
/// Uniform integer in [0, n).
std::uint64_t sample_index(RngStream& stream, std::uint64_t n);

}  // namespace etod
