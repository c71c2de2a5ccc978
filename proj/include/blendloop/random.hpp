#pragma once

#include <cstdint>
#include <random>

namespace blendloop {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of replication r under base_seed: mix64(base_seed ^ mix64(r)).
constexpr std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t replication) noexcept
{
    return mix64(base_seed ^ mix64(replication));
}

enum class Stream : std::uint64_t {
    Disturbance = 0x6469737475726221ULL,
    Sensor = 0x73656e736f722121ULL,
};

// Independent generator for one noise source of one trace.
inline std::mt19937_64 make_stream(std::uint64_t seed, Stream which)
{
    return std::mt19937_64(mix64(seed ^ static_cast<std::uint64_t>(which)));
}

} // namespace blendloop
