#pragma once
// Counter-based stream derivation: every (run seed, episode, step, purpose)
// tuple maps to an independent generator, so parallel runs and re-runs draw
// identical numbers regardless of scheduling.

#include <cstdint>
#include <random>

#include "smrl/types.hpp"

namespace smrl {

using Rng = std::mt19937_64;

namespace stream {
// Purposes keep streams for different consumers of the same (episode, step) apart.
inline constexpr std::uint64_t kTransition = 1;
inline constexpr std::uint64_t kCandidates = 2;
inline constexpr std::uint64_t kAdversary = 3;
inline constexpr std::uint64_t kTrial = 4;
inline constexpr std::uint64_t kPolicy = 5;
}  // namespace stream

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t run_seed, std::uint64_t episode,
                                    std::uint64_t step, std::uint64_t purpose) {
    std::uint64_t h = splitmix64(run_seed);
    h = splitmix64(h ^ episode);
    h = splitmix64(h ^ (step + 0x632be59bd9b4e019ULL));
    return splitmix64(h ^ (purpose * 0xd1b54a32d192ed03ULL));
}

inline Rng make_stream(std::uint64_t run_seed, std::uint64_t episode, std::uint64_t step,
                       std::uint64_t purpose) {
    return Rng(stream_seed(run_seed, episode, step, purpose));
}

// Vector of i.i.d. standard normals.
Vec standard_normal(Rng& rng, Eigen::Index n);

// Uniform direction on the unit sphere in R^n.
Vec unit_sphere(Rng& rng, Eigen::Index n);

}  // namespace smrl
