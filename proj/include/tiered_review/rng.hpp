#pragma once

// Seeded random streams addressed by (master_seed, path).
//
// A stream's engine state is a pure function of its master seed and its
// path, so any replication of any study can be regenerated in isolation and
// parallel schedules produce identical draws.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <vector>

namespace tiered_review {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Order-sensitive combination of a parent key and a child index.
inline std::uint64_t mix_key(std::uint64_t key, std::uint64_t index) {
    std::uint64_t s = key ^ (0xD1B54A32D192ED03ULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

}  // namespace detail

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    friend bool operator==(const Xoshiro256pp&, const Xoshiro256pp&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

/// A reproducible random stream. Two streams built from the same
/// (master_seed, path) yield the same draw sequence; child() derives an
/// independent sub-stream without consuming draws from the parent.
class RngStream {
public:
    using result_type = Xoshiro256pp::result_type;

    explicit RngStream(std::uint64_t master_seed)
        : master_seed_(master_seed), key_(derive_root(master_seed)), engine_(key_) {}

    RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
        : RngStream(master_seed) {
        for (auto index : path) descend(index);
        engine_.reseed(key_);
    }

    [[nodiscard]] RngStream child(std::uint64_t index) const {
        return RngStream(*this, index);
    }

    std::uint64_t master_seed() const { return master_seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    static constexpr result_type min() { return Xoshiro256pp::min(); }
    static constexpr result_type max() { return Xoshiro256pp::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1).
    double uniform_open01() {
        double u;
        do { u = uniform01(); } while (u == 0.0);
        return u;
    }

private:
    RngStream(const RngStream& parent, std::uint64_t index)
        : master_seed_(parent.master_seed_), path_(parent.path_), key_(parent.key_) {
        descend(index);
        engine_.reseed(key_);
    }

    static std::uint64_t derive_root(std::uint64_t seed) {
        std::uint64_t s = seed ^ 0x6A09E667F3BCC909ULL;
        return detail::splitmix64(s);
    }

    void descend(std::uint64_t index) {
        path_.push_back(index);
        key_ = detail::mix_key(key_, index);
    }

    std::uint64_t master_seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
    Xoshiro256pp engine_;
};

}  // namespace tiered_review
