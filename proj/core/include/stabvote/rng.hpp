#pragma once

#include <cstdint>

namespace stabvote {

// Counter-based generator: every draw is a hash of (key, counter), so a
// stream keyed by (seed, sample index) yields the same values no matter
// which thread runs the sample. splitmix64 finalizer (Stafford mix).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ull))), ctr_(0) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ull); }

    // uniform in [0, 1) with 53 random bits
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

    // sign in {-1,+1}, P(+1) = p
    int next_sign(double p) { return next_bernoulli(p) ? +1 : -1; }

    // uniform integer in [0, m); m up to 2^32 keeps the mulhi unbiased enough
    // for Monte Carlo use (bias < 2^-32)
    std::uint32_t next_below(std::uint32_t m) {
        return std::uint32_t((next_u64() >> 32) * std::uint64_t(m) >> 32);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace stabvote
