#pragma once

#include <array>
#include <cstdint>

namespace cshock {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Random stream owned by one trajectory.
///
/// A stream is identified by (master seed, stream index). The Philox key is the
/// 64-bit master seed, counter words 2-3 hold the stream index and words 0-1 a
/// block counter, so every (seed, index) pair yields a disjoint sequence and
/// path i of a batch is reproducible without generating paths 0..i-1.
///
/// Samplers are written out here rather than taken from <random> because the
/// standard distributions are implementation-defined; only the libm functions
/// (log, exp, cos, lgamma) are borrowed.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept;

    static RandomStream child(std::uint64_t master_seed, std::uint64_t index) noexcept {
        return RandomStream(master_seed, index);
    }

    std::uint64_t next_u64() noexcept;

    // [0, 1) with 53 random bits.
    double uniform() noexcept;
    // (0, 1), never returns an endpoint.
    double uniform_open() noexcept;
    double exponential() noexcept;
    double normal() noexcept;
    bool coin() noexcept;
    std::uint64_t poisson(double mean);

private:
    void refill() noexcept;

    Philox4x32::Key key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    Philox4x32::Counter out_{};
    int used_ = 4;  // 32-bit words consumed from out_
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cshock
