#pragma once

#include <cstdint>
#include <span>

namespace aoi::rng {

/**
 * Counter-based random stream: splitmix64 with fold-in substream derivation.
 *
 * The generator is the standard splitmix64 sequence
 *     state += 0x9E3779B97F4A7C15;  output = mix64(state)
 * and substreams are derived with
 *     fold_in(key, data) = mix64(key + 0x9E3779B97F4A7C15 * (data + 1)),
 * applied as seed -> run -> user. Any implementation of these two functions
 * reproduces our streams bit-for-bit; the identifier below is recorded in
 * every report for provenance.
 */
inline constexpr const char* kAlgorithmId = "splitmix64/fold-in-v1";

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derive a child stream key from a parent key and an index.
constexpr std::uint64_t fold_in(std::uint64_t key, std::uint64_t data) {
    return mix64(key + kGolden * (data + 1));
}

class Stream {
  public:
    explicit constexpr Stream(std::uint64_t key) : state_(key) {}

    constexpr std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

    /// Index drawn from the (not necessarily normalized) weights.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_unit() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t state_;
};

} // namespace aoi::rng
