#include "stabvote/sampling.hpp"

#include "stabvote/errors.hpp"

#include <bit>
#include <cmath>

namespace stabvote {

AliasTable::AliasTable(const std::vector<double>& weights) {
    std::size_t m = weights.size();
    if (m == 0) throw DomainError("alias table needs at least one outcome");
    double total = 0;
    for (double w : weights) {
        if (!(w >= 0)) throw DomainError("alias weights must be nonnegative");
        total += w;
    }
    if (!(total > 0)) throw DomainError("alias weights must not all be zero");

    size_ = m;
    prob_.assign(m, 0.0);
    alias_.assign(m, 0);

    std::vector<double> scaled(m);
    for (std::size_t i = 0; i < m; ++i) scaled[i] = weights[i] * double(m) / total;

    std::vector<std::uint32_t> small, large;
    small.reserve(m);
    large.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(std::uint32_t(i));

    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back(), l = large.back();
        small.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0; // numerical leftovers
}

BinomialSampler::BinomialSampler(std::uint64_t n, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial sampler requires 0 < p < 1");

    auto mode = std::uint64_t(std::floor((double(n) + 1.0) * p));
    if (mode > n) mode = n;

    const long double odds = (long double)p / (1.0L - (long double)p);
    const long double cutoff = 1e-18L;
    const std::uint64_t max_width = std::uint64_t(64) << 20;

    // unnormalized pmf by recurrence outward from the mode
    std::vector<double> right{1.0}, left;
    long double v = 1.0L;
    for (std::uint64_t k = mode; k < n; ++k) {
        v *= (long double)(n - k) / (long double)(k + 1) * odds;
        if (v < cutoff) break;
        right.push_back(double(v));
        if (right.size() > max_width) throw DomainError("binomial support too wide");
    }
    v = 1.0L;
    for (std::uint64_t k = mode; k > 0; --k) {
        v *= (long double)k / (long double)(n - k + 1) / odds;
        if (v < cutoff) break;
        left.push_back(double(v));
        if (left.size() > max_width) throw DomainError("binomial support too wide");
    }

    lo_ = mode - left.size();
    std::vector<double> w;
    w.reserve(left.size() + right.size());
    for (std::size_t i = left.size(); i-- > 0;) w.push_back(left[i]);
    for (double x : right) w.push_back(x);
    table_ = AliasTable(w);
}

BitBinomialSampler::BitBinomialSampler(int max_bits, double p) {
    if (max_bits < 1 || max_bits > 63) throw DomainError("bit-binomial needs 1 <= max_bits <= 63");
    bit_.reserve(max_bits);
    for (int j = 0; j < max_bits; ++j) bit_.emplace_back(std::uint64_t(1) << j, p);
}

std::uint64_t BitBinomialSampler::sample(std::uint64_t m, CounterRng& rng) const {
    if (m >> bit_.size()) throw DomainError("bit-binomial m exceeds configured range");
    std::uint64_t total = 0;
    while (m) {
        int j = std::countr_zero(m);
        m &= m - 1;
        total += bit_[std::size_t(j)].sample(rng);
    }
    return total;
}

} // namespace stabvote
