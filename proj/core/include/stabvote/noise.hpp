#pragma once

#include <cstdint>
#include <vector>

#include "stabvote/hypercube.hpp"
#include "stabvote/rng.hpp"

namespace stabvote {

// Corruption: each vote is kept with probability rho, otherwise resampled
// from the measure. At p=1/2 the per-coordinate disagreement probability is
// (1-rho)/2, so rho = 1-2*eps for flip probability eps.
struct CorruptionModel {
    double rho = 1.0; // in [0, 1]
    BiasedMeasure measure;
};

void validate_model(const CorruptionModel& model);

struct StabilityEstimate {
    double value = 0.0;       // in [-1, 1]
    double std_error = 0.0;   // 0 when exact
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    bool exact = false;
};

// Corrupt one vote configuration (one decision draw per coordinate, then a
// resample draw when the coordinate is not kept).
VoteVector sample_corrupted(const VoteVector& x, const CorruptionModel& model, CounterRng& rng);

// Real-valued table over the cube, indexed like BooleanFunction.
struct RealTable {
    int n = 0;
    std::vector<double> v; // size 2^n
};

// g(x) = E[f(Y) | X=x], by n single-coordinate averaging passes, O(n 2^n).
RealTable noise_operator(const Method& f, const CorruptionModel& model);

// S_rho(f) = E f(X) f(Y) = E f(X) g(X), dense tables only.
StabilityEstimate stability_exact(const Method& f, const CorruptionModel& model);

// S_rho(f) at p=1/2 via the transform identity sum_S rho^|S| c(S)^2, used to
// cross-check stability_exact.
double stability_wht(const Method& f, double rho);

// Monte Carlo estimate of E f(X) f(Y): agreement counting over `samples`
// i.i.d. pairs. Sample s draws from the stream keyed (seed, s), so the result
// is bit-identical for any thread count. Majority/threshold methods (alone or
// as two-tier states) use binomial count sampling with per-sample cost
// independent of the electorate size.
StabilityEstimate stability_mc(const Method& f, const CorruptionModel& model,
                               std::uint64_t samples, std::uint64_t seed, int threads = 1);

// P[outcome changes] = (1 - S)/2.
double outcome_change_prob(double stability);

// lim_n S_rho(Maj_n) = (2/pi) arcsin(rho).
double majority_limit_stability(double rho);

// Threshold whose majority expectation is closest to mu. E Maj_{n,t} is a
// step function of t jumping at achievable vote sums; the minimizer is a
// t-interval and the returned t is its midpoint (ties toward smaller |t|,
// then smaller t). Unbounded end intervals report an infinite endpoint.
struct ThresholdMatch {
    double t = 0.0;        // midpoint representative
    double lo = 0.0;       // optimal interval (lo, hi], -inf/+inf at the ends
    double hi = 0.0;
    double achieved = 0.0; // E Maj_{n,t} at the returned t
};

ThresholdMatch find_matching_threshold(int n, double mu, const BiasedMeasure& measure = {});

// First-order small-eps stability approximations (eps = (1-rho)/2):
// majority 1-(4/pi)sqrt(eps); equal two-tier over m majority states
// 1-2(2/pi)^{3/2} sqrt(m) sqrt(eps). Valid in the regime m < 1/eps < n; the
// m=1 two-tier formula intentionally does not reduce to the majority one.
double asymptotic_small_eps_majority(double eps);
double asymptotic_small_eps_two_tier(int m, double eps);

// Ratio of the two change probabilities, sqrt(2m/pi); 5.698035 at m=51.
double asymptotic_ratio_two_tier(int m);

} // namespace stabvote
