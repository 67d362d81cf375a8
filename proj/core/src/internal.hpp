#pragma once

// Helpers shared between core translation units. Not installed.

#include <memory>
#include <variant>
#include <vector>

#include "stabvote/hypercube.hpp"

namespace stabvote {

struct MethodRuntime {
    struct WeightedInt {
        std::vector<long long> w;
        double t;
    };
    struct WeightedReal {
        std::vector<double> w;
        double t;
    };
    struct TwoTierRt {
        std::vector<std::vector<int>> states; // 0-based voter indices
        std::vector<Method> inner;            // one per state (sizes differ)
        std::unique_ptr<Method> outer;
    };
    struct UNRt {
        int need_nonperm;
    };
    std::variant<std::monostate, WeightedInt, WeightedReal, TwoTierRt, UNRt> v;
};

// smallest integer k with 2k - n >= t
int ceil_half(int n, double t);

// P[Bin(n, p) >= k_min], exact / via log-gamma
Rat binomial_tail_prob(long long n, long long k_min, const Rat& p);
double binomial_tail_prob_f(long long n, long long k_min, double p);

// number of inputs where the method evaluates to +1 (exact, any supported n)
Int method_count_plus(const Method& f);

} // namespace stabvote
