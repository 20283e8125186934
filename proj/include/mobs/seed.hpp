#pragma once

#include <cstdint>

namespace mobs {

/// SplitMix64 finalizer. Used both as a stream-splitting hash and as a
/// counter-based uniform generator, so results never depend on the order in
/// which parallel workers consume random numbers.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed splitting rule: child = mix64(mix64(parent ^ stream·φ) + index).
/// Distinct (stream, index) pairs give statistically independent children.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
    return mix64(mix64(parent ^ (stream * 0x9e3779b97f4a7c15ULL)) + index);
}

/// Uniform in [0, 1) with 53 random bits, from a (seed, counter) pair.
constexpr double uniform01(std::uint64_t seed, std::uint64_t counter) noexcept {
    return static_cast<double>(mix64(seed ^ mix64(counter)) >> 11) * 0x1.0p-53;
}

/// Named seed streams.
enum class SeedStream : std::uint64_t {
    background_absent = 1,
    background_present = 2,
    split = 3,
    reader_train = 4,
    mc_perception = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t parent, SeedStream stream,
                                    std::uint64_t index) noexcept {
    return derive_seed(parent, static_cast<std::uint64_t>(stream), index);
}

}  // namespace mobs
