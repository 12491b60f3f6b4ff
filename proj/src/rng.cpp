#include "mpmc/rng.hpp"

namespace mpmc {

Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t chain, std::uint64_t a,
                   std::uint64_t b) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(stream),
                      lo(chain), hi(chain), lo(a), hi(a), lo(b), hi(b)};
    return Engine(seq);
}

Vec standard_normal(Engine& engine, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal(engine);
    return out;
}

double uniform01(Engine& engine) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace mpmc
