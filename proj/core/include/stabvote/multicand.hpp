#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stabvote/hypercube.hpp"
#include "stabvote/noise.hpp"
#include "stabvote/rng.hpp"

namespace stabvote {

// Dense k-candidate tables are capped at N_MULTI entries.
inline constexpr std::uint64_t N_MULTI = 16000000;

// Per-voter candidate ids in {0..k-1}, voter i at entry i-1.
using MultiVoteVector = std::vector<std::uint8_t>;

void validate_multi_votes(const MultiVoteVector& votes, int k);

enum class TieRule { LowestId, SeededRandom };

struct PluralityResult {
    int winner = 0;
    bool tie = false; // the tie rule decided the outcome
};

// Winner by vote count; rng required only for TieRule::SeededRandom.
PluralityResult plurality(const MultiVoteVector& votes, int k, TieRule rule = TieRule::LowestId,
                          CounterRng* rng = nullptr);

// f : {0..k-1}^n -> {0..k-1}, dense (table of k^n ids, mixed-radix index
// with voter 1 as the lowest digit) or the lazy plurality rule. Plurality
// instances materialize a table automatically when k^n <= N_MULTI.
class MultiFunction {
public:
    MultiFunction(int n, int k, std::vector<std::uint8_t> table);
    static MultiFunction plurality_fn(int n, int k);

    int n() const { return n_; }
    int k() const { return k_; }
    bool dense() const { return !table_.empty(); }
    std::uint64_t size() const; // k^n, dense only
    const std::vector<std::uint8_t>* table() const { return table_.empty() ? nullptr : &table_; }

    int evaluate(const MultiVoteVector& votes) const;
    int eval_index(std::uint64_t idx) const; // dense only

private:
    MultiFunction() = default;
    int n_ = 0, k_ = 0;
    bool is_plurality_ = false;
    std::vector<std::uint8_t> table_;
};

// Agreement probability P[f(X) = f(Y)]: X uniform over candidates per
// coordinate; Y keeps each coordinate with probability rho, else resamples
// uniformly from all k candidates. At k=2 this equals (1 + S_rho)/2 for the
// +-1 relabeling.
StabilityEstimate stability_k_exact(const MultiFunction& f, double rho);
StabilityEstimate stability_k_mc(const MultiFunction& f, double rho, std::uint64_t samples,
                                 std::uint64_t seed, int threads = 1);

// ---- ranked ballots -----------------------------------------------------------

struct RankedProfile {
    int m = 0;                             // candidates
    std::vector<std::string> names;        // id -> display name
    std::vector<std::vector<int>> ballots; // each a permutation of 0..m-1, best first
};

void validate_profile(const RankedProfile& profile);

// CSV, one ballot per row, most-preferred candidate first. Rows of integers
// are taken as ids; otherwise the distinct names are sorted and numbered in
// that order. Parse errors name the offending line.
RankedProfile load_profile(std::istream& in);
RankedProfile load_profile_file(const std::string& path);

struct Tournament {
    int m = 0;
    std::vector<std::vector<long long>> prefer; // prefer[a][b]: ballots ranking a above b

    // strict pairwise-majority relation
    bool beats(int a, int b) const { return prefer[a][b] > prefer[b][a]; }
};

Tournament pairwise_tournament(const RankedProfile& profile);

struct CondorcetResult {
    std::optional<int> winner;               // beats every other candidate
    std::optional<std::array<int, 3>> cycle; // witness a>b>c>a if one exists
    Tournament tournament;
};

CondorcetResult condorcet_analysis(const RankedProfile& profile);

} // namespace stabvote
