#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cmath>
#include <cstdint>

namespace mvsim {

/// SplitMix64 engine; satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return mix(state_ += kGamma); }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

private:
    std::uint64_t state_;
};

/// Counter-based Gaussian source: the draw for (particle, step) depends only
/// on (seed, particle, step), never on evaluation order or thread layout.
class NoiseSource {
public:
    explicit NoiseSource(std::uint64_t seed) noexcept : seed_key_(SplitMix64::mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    std::uint64_t particle_key(std::uint64_t particle) const noexcept {
        return SplitMix64::mix(seed_key_ + SplitMix64::mix(particle * kParticleStride + 1));
    }

    /// Standard normal for a precomputed particle key.
    static double normal(std::uint64_t key, std::uint64_t step) noexcept {
        SplitMix64 engine(key + step * kStepStride);
        boost::random::normal_distribution<double> dist;
        return dist(engine);
    }

    double normal_for(std::uint64_t particle, std::uint64_t step) const noexcept {
        return normal(particle_key(particle), step);
    }

    /// Draws reserved for initial-law sampling, disjoint from the step lane.
    double initial_uniform(std::uint64_t particle) const noexcept {
        SplitMix64 engine(particle_key(particle) ^ kInitialLane);
        boost::random::uniform_01<double> dist;
        return dist(engine);
    }

    double initial_normal(std::uint64_t particle) const noexcept {
        SplitMix64 engine(SplitMix64::mix(particle_key(particle) ^ kInitialLane));
        boost::random::normal_distribution<double> dist;
        return dist(engine);
    }

private:
    static constexpr std::uint64_t kParticleStride = 0xd6e8feb86659fd93ULL;
    static constexpr std::uint64_t kStepStride = 0xd1b54a32d192ed03ULL;
    static constexpr std::uint64_t kInitialLane = 0xa0761d6478bd642fULL;

    std::uint64_t seed_key_;
};

}  // namespace mvsim
