#ifndef ISLANDGA_RNG_HPP
#define ISLANDGA_RNG_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace islandga {

/// FNV-1a, 64 bit. Fixed published constants so that hashes (and thus
/// partition assignment and stream derivation) are identical across
/// platforms and implementation languages.
inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline constexpr std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                                       std::uint64_t seed = kFnvOffsetBasis) {
    std::uint64_t h = seed;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = kFnvOffsetBasis) {
    std::uint64_t h = seed;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// One step of the splitmix64 sequence; also used as a finalizing mixer.
inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// A self-contained deterministic random stream (xoshiro256**, seeded via
/// splitmix64 from a single 64-bit stream key). The engine and every
/// derived draw are fully specified here, so sequences are reproducible
/// across platforms and independent of any standard-library details.
class StreamRng {
public:
    explicit StreamRng(std::uint64_t stream_key) {
        std::uint64_t s = stream_key;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Masked rejection sampling: unbiased and
    /// deterministic for a given stream. n must be >= 1.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t mask = std::bit_ceil(n) - 1;
        for (;;) {
            const std::uint64_t v = next_u64() & mask;
            if (v < n) return v;
        }
    }

    bool bernoulli(double p) { return uniform_double() < p; }

    /// A fair coin, one engine step.
    std::uint8_t next_bit() { return static_cast<std::uint8_t>(next_u64() >> 63); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

/// Derives the stream key for one (generation, phase, task index) triple.
/// Distinct triples yield distinct keys; the derivation is a published
/// byte-level hash so other implementations can reproduce the streams.
inline std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t generation,
                                       std::string_view phase, std::uint64_t index) {
    std::uint8_t fixed[24];
    for (int i = 0; i < 8; ++i) fixed[i] = static_cast<std::uint8_t>(master_seed >> (8 * i));
    for (int i = 0; i < 8; ++i) fixed[8 + i] = static_cast<std::uint8_t>(generation >> (8 * i));
    for (int i = 0; i < 8; ++i) fixed[16 + i] = static_cast<std::uint8_t>(index >> (8 * i));
    std::uint64_t h = fnv1a64(std::span<const std::uint8_t>(fixed, sizeof fixed));
    h = fnv1a64(phase, h);
    return splitmix64(h);
}

inline StreamRng phase_stream(std::uint64_t master_seed, std::uint64_t generation,
                              std::string_view phase, std::uint64_t index) {
    return StreamRng(derive_stream_key(master_seed, generation, phase, index));
}

} // namespace islandga

#endif // ISLANDGA_RNG_HPP
