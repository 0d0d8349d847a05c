#include "inertsim/rng.hpp"

#include <array>
#include <cmath>

namespace inertsim {
namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Engine make_stream(StreamId id)
{
    const std::uint64_t a = mix(id.master_seed);
    const std::uint64_t b = mix(a ^ mix(id.replicate + 0x632be59bd9b4e019ULL));
    const std::uint64_t c = mix(b ^ mix(id.agent + 0x8cb92ba72f3d8dd7ULL));
    std::array<std::uint32_t, 6> words{};
    for (std::size_t k = 0; k < 3; ++k) {
        const std::uint64_t w = k == 0 ? a : (k == 1 ? b : c);
        words[2 * k] = static_cast<std::uint32_t>(w);
        words[2 * k + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Engine(seq);
}

double standard_normal(Engine& rng)
{
    while (true) {
        const double u = 2.0 * uniform_open(rng) - 1.0;
        const double v = 2.0 * uniform_open(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0)
            return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

}  // namespace inertsim
