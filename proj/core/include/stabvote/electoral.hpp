#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stabvote/hypercube.hpp"
#include "stabvote/noise.hpp"

namespace stabvote {

struct StateSpec {
    std::string name;
    std::int64_t voters = 0;  // odd, positive
    std::int64_t electors = 0; // positive
};

struct EcScenario {
    std::vector<StateSpec> states;
    double epsilon = 1e-4; // per-vote corruption probability, rho = 1-2*eps
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 0;
};

void validate_scenario(const EcScenario& scenario);

// CSV with header `name,voters,electors`. Even voter counts are rounded up
// to the next odd number, with a note appended to `warnings`. Parse errors
// carry line numbers.
std::vector<StateSpec> load_states(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<StateSpec> load_states_file(const std::string& path,
                                        std::vector<std::string>* warnings = nullptr);

struct EcOutcome {
    int winner = 0; // sign of the weighted state-majority sum, +1 on zero
    bool tie = false;
};

// winner = sign(sum_s electors_s * Maj(votes_s)).
EcOutcome ec_outcome(const std::vector<VoteVector>& votes, const std::vector<StateSpec>& states);

enum class EcMethod { NationalMajority, ElectoralCollege };

// Seeded Monte Carlo estimate of P[outcome(X) != outcome(Y)] where each vote
// independently flips with probability eps. Vote sums are sufficient, so
// samples draw per-state binomial counts; cost per sample does not grow with
// the electorate size. `value` is the flip probability.
StabilityEstimate flip_prob_mc(EcMethod method, const EcScenario& scenario, int threads = 1);

struct EcComparison {
    std::uint64_t total_voters = 0;
    int m = 0; // number of states
    double epsilon = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    StabilityEstimate majority; // value = flip probability
    StabilityEstimate college;
    double ratio = 0.0;    // college/majority flip probabilities
    double ratio_se = 0.0; // first-order error propagation
    double asymptotic_ratio = 0.0; // sqrt(2m/pi), the equal-state prediction
};

// The national majority baseline runs over the same total electorate.
EcComparison compare_ec_vs_majority(const EcScenario& scenario, int threads = 1);

} // namespace stabvote
