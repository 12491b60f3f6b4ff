#pragma once

#include <cstdint>
#include <random>

#include "mpmc/types.hpp"

namespace mpmc {

using Engine = std::mt19937_64;

/// Independent random streams derived from one root seed. Each consumer of
/// randomness in a chain draws from its own stream so that changing how often
/// one consumer draws never shifts the values seen by another.
enum class Stream : std::uint32_t {
    momentum = 1,
    selection = 2,
    metropolis = 3,
    multistart = 4,
    initial = 5,
};

/// Deterministic engine for (seed, stream, chain, a, b). The extra words make
/// streams counter-addressable, e.g. one multistart engine per (iteration, call).
Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t chain,
                   std::uint64_t a = 0, std::uint64_t b = 0);

Vec standard_normal(Engine& engine, Eigen::Index n);
double uniform01(Engine& engine);

struct ChainStreams {
    Engine momentum;
    Engine selection;
    Engine metropolis;

    ChainStreams(std::uint64_t seed, std::uint64_t chain)
        : momentum(make_engine(seed, Stream::momentum, chain)),
          selection(make_engine(seed, Stream::selection, chain)),
          metropolis(make_engine(seed, Stream::metropolis, chain)) {}
};

}  // namespace mpmc
