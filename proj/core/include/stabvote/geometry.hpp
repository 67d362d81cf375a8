#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "stabvote/hypercube.hpp"

namespace stabvote {

// Exhaustive geometry is capped at 2^N_GEOM-point masks.
inline constexpr int N_GEOM = 20;

// Hamming distance #{i : x_i != y_i}.
int l0_distance(const VoteVector& x, const VoteVector& y);

// Characteristic vector of a subset of {-1,1}^n, bit order matching idx(x).
class SubsetMask {
public:
    explicit SubsetMask(int n);

    int n() const { return n_; }
    std::uint64_t size() const { return std::uint64_t(1) << n_; }

    bool test(std::uint64_t idx) const { return (words_[idx >> 6] >> (idx & 63)) & 1; }
    void set(std::uint64_t idx) { words_[idx >> 6] |= std::uint64_t(1) << (idx & 63); }
    std::uint64_t count() const;

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    bool operator==(const SubsetMask& o) const = default;

private:
    int n_;
    std::vector<std::uint64_t> words_;
};

// side = +1 or -1: the set {x : f(x) = side}.
SubsetMask mask_from_function(const BooleanFunction& f, int side);

bool is_subset(const SubsetMask& a, const SubsetMask& b);

// Gamma_k(S): everything within l0 distance k of S, by k rounds of
// single-flip dilation (n shifted-mask unions per round).
SubsetMask neighborhood(const SubsetMask& s, int k);

// B_k = Gamma_k({y : sum y_i >= 0}) = {x : sum x_i >= -2k}, built from the
// popcount form; the dilation equivalence is validated in tests, not assumed.
SubsetMask half_ball(int n, int k);

// Configurations whose outcome an adversary controlling at most k votes can
// change, split by the original winner.
struct VulnerabilityReport {
    int n = 0;
    int k = 0;
    std::uint64_t total = 0;
    std::uint64_t from_plus = 0;  // original winner +1, flippable to -1
    std::uint64_t from_minus = 0; // original winner -1, flippable to +1
};

VulnerabilityReport vulnerable_count(const Method& f, int k);

// Harper audit: requires |S| >= |B_k| (DomainError otherwise) and returns
// whether |Gamma_1(S)| >= |Gamma_1(B_k)|. A false return means a bug in the
// dilation code, not a property of S; callers treat it as an invariant
// failure.
bool check_harper(const SubsetMask& s, int k);

struct OptimalityReport {
    int n = 0;
    int k = 0;
    double t = 0.0; // threshold of the reference method (0 for majority)
    std::uint64_t reference_count = 0; // vulnerable_count of the reference
    std::uint64_t min_count = 0;
    std::uint64_t competitors = 0;   // functions examined (reference included)
    std::uint64_t co_minimizers = 0; // competitors attaining min_count
    bool exhaustive = false;
    bool reference_minimal = false;
    std::map<std::uint64_t, std::uint64_t> distribution; // exhaustive runs only
    std::vector<std::uint64_t> co_minimizer_tables;      // table bits, n <= 6 only
};

// Minimality of majority's vulnerable_count among balanced competitors.
// n=3 is exhaustive over all C(8,4)=70 balanced functions; odd n in (3, 16]
// samples `trials` uniformly random balanced functions.
OptimalityReport verify_majority_optimal(int n, int k, std::uint64_t trials = 100000,
                                         std::uint64_t seed = 0);

// Same for Maj_{n,t} among competitors with the same +1-count. Exhaustive
// when n <= 6 and the competitor count is at most 10^6, sampled otherwise.
// Odd t is outside the stated optimality claim and needs allow_odd_t.
OptimalityReport verify_threshold_optimal(int n, double t, int k, std::uint64_t trials = 100000,
                                          std::uint64_t seed = 0, bool allow_odd_t = false);

} // namespace stabvote
