#pragma once

#include <cstdint>
#include <random>

namespace compca {

// Independent substreams for one replicate. Each (master seed, replicate,
// stream) triple seeds its own mt19937_64 through std::seed_seq, so a
// replicate draws the same numbers whether it runs alone, serially, or on a
// worker thread.
enum class RngStream : std::uint32_t {
    Basis = 1,
    Wishart = 2,
    Means = 3,
    Samples = 4,
    Folds = 5,
};

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master, std::uint64_t replicate, RngStream stream)
{
    std::seed_seq seq{
        static_cast<std::uint32_t>(master & 0xffffffffu),
        static_cast<std::uint32_t>(master >> 32),
        static_cast<std::uint32_t>(replicate & 0xffffffffu),
        static_cast<std::uint32_t>(replicate >> 32),
        static_cast<std::uint32_t>(stream),
    };
    return Rng(seq);
}

}  // namespace compca
