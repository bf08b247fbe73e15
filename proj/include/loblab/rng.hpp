#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace loblab {

// Philox4x32-10 counter-based generator. A stream is the pair (key, stream id);
// the per-draw counter occupies the low 64 bits of the 128-bit counter block.
// Streams derived by split() are independent of how many draws the parent made.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : key_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (buffered_ == 0) refill();
        --buffered_;
        return buffer_[buffered_];
    }

    Rng split(std::uint64_t child) const;

    std::uint64_t seed() const { return key_; }
    std::uint64_t stream() const { return stream_; }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
    double normal() { return normal_(*this); }
    double exponential() { return -std::log(uniform()); }
    bool bernoulli(double p) { return uniform() < p; }

private:
    void refill();

    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix64(std::uint64_t x);

// The raw ten-round block function.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

}  // namespace loblab
