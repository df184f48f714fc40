#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bgf {

/// xoshiro256** engine. Satisfies UniformRandomBitGenerator so it plugs into
/// the <random> distributions; seeded through splitmix64.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1), 53 bits.
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    bool operator==(const Xoshiro256&) const = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Engine plus the variate generators the samplers need.
class Random {
public:
    explicit Random(Xoshiro256 engine) : engine_(engine) {}

    double uniform() noexcept { return engine_.uniform(); }
    double exponential() noexcept { return -std::log(engine_.uniform()); }
    double normal() { return gauss_(engine_); }
    Xoshiro256& engine() noexcept { return engine_; }

private:
    Xoshiro256 engine_;
    std::normal_distribution<double> gauss_;
};

/// Deterministic stream identified by a master seed and an integer path.
/// Streams with distinct paths are decorrelated by hashing the path through
/// splitmix64; the same (seed, path) always yields the same engine state.
class RngStream {
public:
    explicit RngStream(std::uint64_t master_seed = 0) : master_seed_(master_seed) {}
    RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
        : master_seed_(master_seed), path_(std::move(path)) {}

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    RngStream child(std::uint64_t index) const;
    RngStream child(std::span<const std::uint64_t> indices) const;

    /// Fresh engine positioned at the start of this stream.
    Xoshiro256 engine() const noexcept;
    Random random() const { return Random(engine()); }

    std::string describe() const;

private:
    std::uint64_t master_seed_;
    std::vector<std::uint64_t> path_;
};

}  // namespace bgf
