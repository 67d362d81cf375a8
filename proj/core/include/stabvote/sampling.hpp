#pragma once

#include "stabvote/rng.hpp"

#include <cstdint>
#include <vector>

namespace stabvote {

// Walker/Vose alias table; one sample costs one uniform draw.
class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights);

    std::uint32_t sample(CounterRng& rng) const {
        std::uint64_t u = rng.next_u64();
        auto prod = (unsigned __int128)u * size_;
        auto slot = std::uint32_t(std::uint64_t(prod >> 64));
        double frac = double(std::uint64_t(prod) >> 11) * 0x1.0p-53;
        return frac < prob_[slot] ? slot : alias_[slot];
    }

    std::size_t size() const { return std::size_t(size_); }

private:
    std::uint64_t size_ = 0;
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Binomial(n, p) at one fixed (n, p), alias-sampled over the support
// truncated where the pmf falls below 1e-18 of the mode (total clipped
// mass stays under 1e-14).
class BinomialSampler {
public:
    BinomialSampler() = default;
    BinomialSampler(std::uint64_t n, double p);

    std::uint64_t sample(CounterRng& rng) const { return lo_ + table_.sample(rng); }

    std::uint64_t support_lo() const { return lo_; }
    std::uint64_t support_hi() const { return lo_ + table_.size() - 1; }

private:
    std::uint64_t lo_ = 0;
    AliasTable table_;
};

// Binomial(m, p) where m varies per draw but p is fixed: decompose m into
// powers of two and add independent Binomial(2^j, p) draws (an exact
// decomposition since the blocks are disjoint).
class BitBinomialSampler {
public:
    BitBinomialSampler() = default;
    BitBinomialSampler(int max_bits, double p);

    std::uint64_t sample(std::uint64_t m, CounterRng& rng) const;

private:
    std::vector<BinomialSampler> bit_;
};

} // namespace stabvote
