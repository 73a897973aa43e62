#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace jamset {

// Philox4x64-10 (Salmon, Moraes, Dror, Shaw; "Parallel random numbers: as
// easy as 1, 2, 3", SC'11), used as a counter-based stream.
//
// Stream layout, so that other implementations can reproduce it exactly:
//   key     = {seed, stream}
//   counter = {block, 0, 0, 0}, block = 0, 1, 2, ...
//   output  = the four 64-bit words of philox(counter, key), in order.
// Derived variates are documented on the member functions below.
using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxBlock philox4x64_10(PhiloxBlock counter, PhiloxKey key) noexcept;

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_{seed, stream} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (pos_ == 4) refill();
        return buffer_[pos_++];
    }

    std::uint64_t seed() const noexcept { return key_[0]; }
    std::uint64_t stream() const noexcept { return key_[1]; }

    // (x >> 11) * 2^-53, in [0, 1).
    double uniform() noexcept;

    // -log(1 - uniform()), rate 1.
    double exponential() noexcept;

    // Uniform integer in [0, bound) via Lemire's multiply-and-reject.
    // bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;

    // Inverse-CDF sequential search; intended for moderate means.
    std::uint64_t poisson(double mean) noexcept;

private:
    void refill() noexcept;

    PhiloxKey key_;
    std::uint64_t block_ = 0;
    PhiloxBlock buffer_{};
    int pos_ = 4;
};

} // namespace jamset
