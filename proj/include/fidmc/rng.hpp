#pragma once

#include <cstdint>

namespace fidmc {

// SplitMix64 finalizer. Used as a counter-based generator: the k-th output
// of a stream is a pure function of (seed, counter), so any draw can be
// produced without generating its predecessors.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// A deterministic uniform stream identified by (seed, stream index). Stream
// i owns the counter block [i * 2^20, (i + 1) * 2^20), so separate draws of
// a run get non-overlapping substreams and results are independent of how
// draws are scheduled across threads.
class SplitStream {
public:
    SplitStream(std::uint64_t seed, std::uint64_t stream_index = 0)
        : seed_(seed), counter_(stream_index << 20) {}

    std::uint64_t next_u64() {
        constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
        return mix64(seed_ + (++counter_) * kGolden);
    }

    // Uniform on the open interval (0, 1): (z >> 11 + 0.5) * 2^-53 never
    // returns an exact 0 or 1, so downstream quantile calls stay off the
    // degenerate edges.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace fidmc
