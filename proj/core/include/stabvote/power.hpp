#pragma once

#include <vector>

#include "stabvote/hypercube.hpp"

namespace stabvote {

// Pivotal count b_i: the number of configurations of the other n-1 voters
// for which flipping voter i's vote flips the outcome. 0 <= b_i <= 2^(n-1).
Int pivotal_count(const Method& f, int i);

// Influence of voter i: probability that voter i is pivotal when the other
// voters draw i.i.d. from the given measure. Equals b_i / 2^(n-1) at p=1/2.
// Exact for dense tables at any rational-representable p, and for the
// structured methods (dictator, majority, threshold, integer-weighted,
// two-tier over those, UN council) via closed forms.
ExactScalar influence(const Method& f, int i, const BiasedMeasure& measure = {});

// Normalized Banzhaf index beta_i = b_i / sum_j b_j, exact.
// Throws DomainError for constant functions (all b_j = 0).
std::vector<Rat> banzhaf_indices(const Method& f);

struct PivotalReport {
    int n = 0;
    double p = 0.5;
    std::vector<Int> b;                 // pivotal counts
    std::vector<ExactScalar> influence; // under the report's measure
    std::vector<Rat> banzhaf;           // normalized, sums to 1
};

PivotalReport pivotal_report(const Method& f, const BiasedMeasure& measure = {});

// Influence of a single voter under majority with n voters (n odd):
// C(n-1, (n-1)/2) / 2^(n-1). Exact rational numerator/denominator.
Rat majority_influence_rat(long long n);

// Same value; exact rational path for n <= 100000, long-double log-gamma
// beyond (relative error under 1e-12 through n ~ 10^7).
ExactScalar majority_influence_exact(long long n);

// Serialized report (stable field order). Implemented in json_io.cpp.
std::string pivotal_report_json(const PivotalReport& rep);

}  // namespace stabvote
