#pragma once

#include <cstdint>

namespace blockrel {

// SplitMix64. Chosen over <random> engines because the raw stream is trivial to
// reproduce in other languages, which the schedule fixtures rely on.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform-ish value in [0, bound); modulo bias is irrelevant at these bounds.
    constexpr std::uint64_t below(std::uint64_t bound) { return next() % bound; }

private:
    std::uint64_t state_;
};

/// Stateless hash of a tuple, used where a decision must not depend on call order.
constexpr std::uint64_t mix_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    SplitMix64 g(a ^ (b * 0xD1B54A32D192ED03ULL) ^ (c * 0x8CB92BA72F3D8DD7ULL));
    g.next();
    return g.next();
}

}  // namespace blockrel
