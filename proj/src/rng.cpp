#include "bgf/rng.hpp"

#include <sstream>

namespace bgf {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void Xoshiro256::reseed(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

RngStream RngStream::child(std::uint64_t index) const {
    auto p = path_;
    p.push_back(index);
    return RngStream(master_seed_, std::move(p));
}

RngStream RngStream::child(std::span<const std::uint64_t> indices) const {
    auto p = path_;
    p.insert(p.end(), indices.begin(), indices.end());
    return RngStream(master_seed_, std::move(p));
}

Xoshiro256 RngStream::engine() const noexcept {
    // Fold the path into the seed one level at a time; the length is mixed in
    // so that (1) and (1, 0) do not collide.
    std::uint64_t state = master_seed_ ^ 0x6a09e667f3bcc908ULL;
    std::uint64_t h = splitmix64(state);
    for (std::uint64_t id : path_) {
        std::uint64_t s2 = h ^ (id * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
        h = splitmix64(s2);
    }
    std::uint64_t s3 = h ^ static_cast<std::uint64_t>(path_.size());
    return Xoshiro256(splitmix64(s3));
}

std::string RngStream::describe() const {
    std::ostringstream os;
    os << master_seed_;
    for (auto id : path_) os << '/' << id;
    return os.str();
}

}  // namespace bgf
