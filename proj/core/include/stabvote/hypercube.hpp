#pragma once

#include "stabvote/errors.hpp"
#include "stabvote/rational.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace stabvote {

// Dense truth tables are capped at 2^N_DENSE bits (2 MiB); beyond that a
// method is evaluated lazily from its spec.
inline constexpr int N_DENSE = 24;

// A full vote configuration; entries are exactly -1 or +1, voter i at x[i-1].
using VoteVector = std::vector<int8_t>;

void validate_votes(const VoteVector& x);

// idx(x) = sum over voters of 2^(i-1) * (1+x_i)/2: voter 1 is the least
// significant bit, +1 encodes bit 1.
std::uint64_t vote_index(const VoteVector& x);
VoteVector vote_from_index(int n, std::uint64_t idx);

struct BiasedMeasure {
    double p = 0.5; // P(X_i = +1)
    bool uniform() const { return p == 0.5; }
};

void validate_measure(const BiasedMeasure& m);

// f:{-1,1}^n -> {-1,1} as a bit-packed table; bit at idx(x) is (1+f(x))/2.
class BooleanFunction {
public:
    BooleanFunction(int n);

    int n() const { return n_; }
    std::uint64_t size() const { return std::uint64_t(1) << n_; }

    int eval_index(std::uint64_t idx) const {
        return (words_[idx >> 6] >> (idx & 63)) & 1 ? +1 : -1;
    }
    int evaluate(const VoteVector& x) const;

    void set_index(std::uint64_t idx, int value);

    std::uint64_t count_plus() const;

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    bool operator==(const BooleanFunction& o) const = default;

private:
    int n_;
    std::vector<std::uint64_t> words_;
};

// ---- method specs --------------------------------------------------------

struct Dictator {
    int i = 1; // 1-based voter index
};
struct Majority {};
struct ThresholdMajority {
    double t = 0.0; // f(x) = +1 iff sum x_i >= t
};
struct WeightedMajority {
    std::vector<double> w;
    double t = 0.0; // f(x) = +1 iff sum w_i x_i >= t
};
struct MethodSpec;
struct TwoTier {
    // states[s] lists the 1-based voter ids of state s; the partition must
    // cover {1..n} disjointly. `inner` is applied to each state's votes,
    // `outer` to the vector of state winners.
    std::vector<std::vector<int>> states;
    std::shared_ptr<MethodSpec> inner;
    std::shared_ptr<MethodSpec> outer;
};
enum class UNEra { Pre1965, Post1965 };
struct UNCouncil {
    // Pre1965: n=11, 5 permanent + 6 nonpermanent, passes iff all permanent
    // and at least 2 nonpermanent vote +1. Post1965: n=15, 5 + 10, needs all
    // permanent and at least 4 nonpermanent.
    UNEra era = UNEra::Post1965;
};

using MethodVariant =
    std::variant<Dictator, Majority, ThresholdMajority, WeightedMajority, TwoTier, UNCouncil>;

struct MethodSpec {
    MethodVariant v;
};

MethodSpec equal_two_tier(int m, int state_size); // m contiguous states, maj/maj

int un_council_n(UNEra era);

enum class TieReach { No, Yes, Unknown };

struct MethodRuntime; // prepared lazy-evaluation state, defined in hypercube.cpp

// Evaluable voting method: a validated spec, a dense table, or both.
// Dense tables are materialized automatically for n <= N_DENSE.
class Method {
public:
    Method(MethodSpec spec, int n);
    explicit Method(BooleanFunction table);

    int n() const { return n_; }
    bool dense() const { return table_.has_value(); }
    const BooleanFunction* table() const { return table_ ? &*table_ : nullptr; }
    const MethodSpec* spec() const { return spec_ ? &*spec_ : nullptr; }

    // sign(0) := +1 everywhere; tie_reachable reports whether that rule can
    // ever fire for this method (Unknown for non-integer weighted sums that
    // were never observed to hit the threshold exactly).
    TieReach tie_reachable() const { return tie_reachable_; }

    int evaluate(const VoteVector& x) const;
    int evaluate_index(std::uint64_t idx) const;

    // prepared lazy-evaluation state; opaque outside the core sources
    const MethodRuntime* runtime() const { return rt_.get(); }

private:
    int n_;
    std::optional<MethodSpec> spec_;
    std::optional<BooleanFunction> table_;
    std::shared_ptr<const MethodRuntime> rt_;
    TieReach tie_reachable_ = TieReach::Unknown;
};

Method make_method(const MethodSpec& spec, int n);

// A probability/expectation that is exact (rational) when the computation
// path allows it and floating point otherwise.
struct ExactScalar {
    Rat exact;       // meaningful iff is_exact
    double value;    // always set
    bool is_exact;
};

// E f(X) under the product measure. Exact for dense tables, for
// dictator/majority/threshold at any n, for UN council rules, and for
// two-tier compositions of those; p-biased closed forms above
// EXACT_BIAS_LIMIT voters fall back to floating point with is_exact=false.
inline constexpr int EXACT_BIAS_LIMIT = 2048;

ExactScalar expectation(const Method& f, const BiasedMeasure& measure);

// true iff the two dense tables assign +1 to equally many configurations
bool same_balance(const Method& f, const Method& g);

// ---- truth-table file format ---------------------------------------------
// line 1: "n=<int>"; line 2: ceil(2^n/4) hex digits, most significant first,
// bit at position idx(x). Bit-exact round trip.

void save_table(const BooleanFunction& f, std::ostream& out);
BooleanFunction load_table(std::istream& in);
void save_table_file(const BooleanFunction& f, const std::string& path);
BooleanFunction load_table_file(const std::string& path);

// ---- spec JSON -------------------------------------------------------------
// {"type":"majority"} | {"type":"dictator","i":1} |
// {"type":"threshold-majority","t":2} | {"type":"weighted-majority","w":[..],"t":0} |
// {"type":"two-tier","states":[[1,2],[3,4,5]],"inner":{..},"outer":{..}} |
// {"type":"un-council","era":"pre1965"|"post1965"}; optional top-level "n".

std::string method_spec_to_json(const MethodSpec& spec, std::optional<int> n = {});
std::pair<MethodSpec, std::optional<int>> method_spec_from_json(const std::string& text);

} // namespace stabvote
