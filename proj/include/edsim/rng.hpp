#pragma once

#include <array>
#include <cstdint>

namespace edsim {

/// Counter-based random stream built on Philox4x32-10.
///
/// Draw number k of stream (seed, substream) is a pure function of the triple
/// (seed, substream, k): the 128-bit counter block is (k_lo, k_hi, sub_lo, sub_hi)
/// and the 64-bit key is the seed. Distinct substreams therefore never overlap,
/// and a stream can be replayed or repositioned with seek() without touching
/// any other stream.
class RandomStream {
public:
    RandomStream() = default;
    RandomStream(std::uint64_t seed, std::uint64_t substream_id)
        : seed_(seed), substream_(substream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t substream_id() const { return substream_; }
    std::uint64_t counter() const { return counter_; }

    void seek(std::uint64_t counter) { counter_ = counter; }

    /// One raw 64-bit draw; advances the counter by exactly one.
    std::uint64_t next_u64() {
        const auto block = philox(counter_++);
        return (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    }

    /// Uniform on [0,1) with 53 bits of resolution. Consumes one raw draw.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// UniformRandomBitGenerator interface, for std:: algorithms.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next_u64(); }

    /// The raw Philox4x32-10 bijection (Salmon et al., SC'11).
    static std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> x,
                                                      std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(kMul0, x[0], hi0, lo0);
            mulhilo(kMul1, x[2], hi1, lo1);
            x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return x;
    }

    /// Stream family helper: substream id for (replication, concern) pairs.
    static constexpr std::uint64_t family_id(std::uint64_t replication, std::uint32_t concern) {
        return (replication << 8) | (concern & 0xffu);
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    std::array<std::uint32_t, 4> philox(std::uint64_t ctr) const {
        return philox4x32_10({static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32),
                              static_cast<std::uint32_t>(substream_),
                              static_cast<std::uint32_t>(substream_ >> 32)},
                             {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    }

    std::uint64_t seed_ = 0;
    std::uint64_t substream_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace edsim
