#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace cachenet {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash an ordered tuple of keys into one 64-bit value.
constexpr std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto k : keys) h = mix64(h ^ mix64(k + 0x9e3779b97f4a7c15ULL));
    return h;
}

/// Counter-based random stream: the n-th output is a pure function of
/// (key, n). Streams keyed by (seed, slot, observer) or (seed, trial) are
/// therefore reproducible regardless of evaluation order.
///
/// Satisfies UniformRandomBitGenerator so it plugs into <random>
/// distributions.
class CounterStream {
public:
    using result_type = std::uint64_t;

    explicit CounterStream(std::uint64_t key) : key_(key) {}
    CounterStream(std::initializer_list<std::uint64_t> keys) : key_(hash_keys(keys)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace cachenet
