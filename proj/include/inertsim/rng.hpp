#pragma once

#include <cstdint>
#include <random>

namespace inertsim {

using Engine = std::mt19937_64;

/// Identifies one independent random stream. Streams are derived from the
/// triple alone, so results do not depend on scheduling or thread count.
struct StreamId
{
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
    std::uint64_t agent = 0;
};

/// Engine for the stream (master_seed, replicate, agent).
Engine make_stream(StreamId id);

inline Engine make_stream(std::uint64_t master_seed, std::uint64_t replicate, std::uint64_t agent)
{
    return make_stream(StreamId{master_seed, replicate, agent});
}

/// Uniform on the open interval (0, 1); never returns 0 or 1.
inline double uniform_open(Engine& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by the polar method.
double standard_normal(Engine& rng);

}  // namespace inertsim
