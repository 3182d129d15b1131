#include "etod/rng.hpp"

#include "etod/error.hpp"

#include <cmath>
#include <numbers>

namespace etod {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RngStream RngStream::derive(std::uint64_t child) const noexcept
{
    return RngStream(master_seed_, mix64(mix64(stream_index_) ^ mix64(child + 0x632BE59BD9B4E019ull)));
}

std::uint64_t RngStream::next_u64() noexcept
{
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
         static_cast<std::uint32_t>(stream_index_), static_cast<std::uint32_t>(stream_index_ >> 32)},
        {static_cast<std::uint32_t>(master_seed_), static_cast<std::uint32_t>(master_seed_ >> 32)});
    ++position_;
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double RngStream::next_uniform() noexcept
{
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_normal(RngStream& stream, double mean, double sd)
{
    if (!(sd >= 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
        throw Error(ErrorCode::InvalidParameter, "normal requires finite mean and sd >= 0");
    }
    // Box-Muller, one variate per pair so each draw consumes exactly two words.
    const double u1 = stream.next_uniform();
    const double u2 = stream.next_uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
}

double sample_lognormal(RngStream& stream, double mu, double sigma)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
        throw Error(ErrorCode::InvalidParameter, "lognormal requires finite mu and sigma >= 0");
    }
    return std::exp(sample_normal(stream, mu, sigma));
}

int sample_bernoulli(RngStream& stream, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidParameter, "bernoulli requires p in [0,1]");
    return stream.next_uniform() < p ? 1 : 0;
}

double sample_gamma(RngStream& stream, double shape, double scale)
{
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
        throw Error(ErrorCode::InvalidParameter, "gamma requires shape > 0 and scale > 0");
    }
    if (shape < 1.0) {
        // Gamma(k) = Gamma(k+1) * U^(1/k)
        const double g = sample_gamma(stream, shape + 1.0, 1.0);
        return scale * g * std::pow(stream.next_uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = sample_normal(stream, 0.0, 1.0);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = stream.next_uniform();
        if (u < 1.0 - 0.0331 * z * z * z * z) return scale * d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
}

std::uint64_t sample_index(RngStream& stream, std::uint64_t n)
{
    if (n == 0) throw Error(ErrorCode::InvalidParameter, "sample_index requires n > 0");
    // Rejection to remove modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
        r = stream.next_u64();
    } while (r >= limit);
    return r % n;
}

}  // namespace etod
