#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabvote/hypercube.hpp"
#include "stabvote/rational.hpp"
#include "stabvote/rng.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace stabvote;

namespace {

// Independent rule-by-rule evaluator used as the oracle for both the dense
// materializer and the lazy path. Deliberately naive.
int direct_eval(const MethodSpec& spec, const VoteVector& x);

struct DirectVisitor {
    const VoteVector& x;

    int operator()(const Dictator& d) const { return x[std::size_t(d.i - 1)]; }
    int operator()(const Majority&) const {
        long long sum = 0;
        for (int v : x) sum += v;
        return sum >= 0 ? +1 : -1;
    }
    int operator()(const ThresholdMajority& t) const {
        long long sum = 0;
        for (int v : x) sum += v;
        return double(sum) >= t.t ? +1 : -1;
    }
    int operator()(const WeightedMajority& w) const {
        double sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i) sum += w.w[i] * x[i];
        return sum >= w.t ? +1 : -1;
    }
    int operator()(const TwoTier& tt) const {
        VoteVector winners;
        for (const auto& st : tt.states) {
            VoteVector local;
            for (int v : st) local.push_back(x[std::size_t(v - 1)]);
            winners.push_back(int8_t(direct_eval(*tt.inner, local)));
        }
        return direct_eval(*tt.outer, winners);
    }
    int operator()(const UNCouncil& u) const {
        for (int i = 0; i < 5; ++i)
            if (x[std::size_t(i)] != +1) return -1;
        int yes = 0;
        for (std::size_t i = 5; i < x.size(); ++i) yes += x[i] == +1;
        return yes >= (u.era == UNEra::Pre1965 ? 2 : 4) ? +1 : -1;
    }
};

int direct_eval(const MethodSpec& spec, const VoteVector& x) {
    return std::visit(DirectVisitor{x}, spec.v);
}

void check_dense_matches_direct(const MethodSpec& spec, int n) {
    Method f = make_method(spec, n);
    REQUIRE(f.dense());
    for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << n); ++idx) {
        VoteVector x = vote_from_index(n, idx);
        if (f.evaluate_index(idx) != direct_eval(spec, x)) {
            CAPTURE(n);
            CAPTURE(idx);
            REQUIRE(f.evaluate_index(idx) == direct_eval(spec, x));
        }
    }
}

MethodSpec wmaj(std::vector<double> w, double t) {
    return MethodSpec{WeightedMajority{std::move(w), t}};
}

MethodSpec two_tier(std::vector<std::vector<int>> states, MethodSpec inner, MethodSpec outer) {
    TwoTier tt;
    tt.states = std::move(states);
    tt.inner = std::make_shared<MethodSpec>(std::move(inner));
    tt.outer = std::make_shared<MethodSpec>(std::move(outer));
    return MethodSpec{std::move(tt)};
}

BooleanFunction random_table(int n, std::uint64_t seed) {
    BooleanFunction f(n);
    CounterRng rng(seed, 0);
    for (std::uint64_t idx = 0; idx < f.size(); ++idx)
        if (rng.next_bernoulli(0.5)) f.set_index(idx, 1);
    return f;
}

} // namespace

TEST_CASE("vote index convention: voter 1 is the least significant bit") {
    CHECK(vote_index({+1, -1, +1}) == 5);
    CHECK(vote_index({-1, -1, -1}) == 0);
    CHECK(vote_index({+1, +1, +1}) == 7);
    CHECK(vote_index({-1, +1}) == 2);

    for (int n = 1; n <= 12; ++n)
        for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << n); ++idx)
            CHECK(vote_index(vote_from_index(n, idx)) == idx);

    CHECK_THROWS_AS(validate_votes({+1, 0, -1}), DomainError);
    CHECK_THROWS_AS(validate_votes({+1, +2}), DomainError);
    CHECK_NOTHROW(validate_votes({+1, -1}));
}

TEST_CASE("boolean function set/eval round trip and count") {
    BooleanFunction f(3);
    CHECK(f.count_plus() == 0);
    for (std::uint64_t idx = 0; idx < 8; ++idx) CHECK(f.eval_index(idx) == -1);

    f.set_index(3, 1);
    f.set_index(5, 1);
    f.set_index(6, 1);
    f.set_index(7, 1);
    CHECK(f.count_plus() == 4);
    CHECK(f.eval_index(3) == +1);
    CHECK(f.eval_index(4) == -1);
    CHECK(f.evaluate({+1, +1, -1}) == +1); // idx 3
    CHECK(f.evaluate({-1, -1, +1}) == -1); // idx 4

    f.set_index(3, -1);
    CHECK(f.eval_index(3) == -1);
    CHECK(f.count_plus() == 3);
}

TEST_CASE("dense materialization agrees with the direct rule, exhaustively") {
    for (int n : {1, 2, 3, 5, 8}) {
        check_dense_matches_direct(MethodSpec{Majority{}}, n);
        check_dense_matches_direct(MethodSpec{Dictator{1}}, n);
        check_dense_matches_direct(MethodSpec{Dictator{n}}, n);
        check_dense_matches_direct(MethodSpec{ThresholdMajority{0.0}}, n);
        check_dense_matches_direct(MethodSpec{ThresholdMajority{1.0}}, n);
        check_dense_matches_direct(MethodSpec{ThresholdMajority{-2.5}}, n);

        std::vector<double> wi, wr;
        for (int i = 1; i <= n; ++i) {
            wi.push_back(double(i));
            wr.push_back(0.25 * i + 0.5);
        }
        check_dense_matches_direct(wmaj(wi, 2.0), n);
        check_dense_matches_direct(wmaj(wr, 1.0), n);
    }

    check_dense_matches_direct(equal_two_tier(3, 3), 9);
    check_dense_matches_direct(
        two_tier({{1}, {2, 3, 4}, {5, 6, 7, 8, 9}}, MethodSpec{Majority{}},
                 wmaj({1.0, 3.0, 5.0}, 4.0)),
        9);
    // nested two-tier: states of states
    check_dense_matches_direct(
        two_tier({{1, 2, 3, 4}, {5, 6, 7, 8}}, equal_two_tier(2, 2), MethodSpec{Dictator{2}}), 8);

    check_dense_matches_direct(MethodSpec{UNCouncil{UNEra::Pre1965}}, 11);
}

TEST_CASE("un post1965 matches the direct rule on all 32768 configurations") {
    MethodSpec spec{UNCouncil{UNEra::Post1965}};
    Method f = make_method(spec, 15);
    REQUIRE(f.dense());

    // second independent form: weighted majority 7x5 + 1x10, threshold 32
    std::vector<double> w(15, 1.0);
    for (int i = 0; i < 5; ++i) w[std::size_t(i)] = 7.0;
    Method g = make_method(wmaj(w, 32.0), 15);

    for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << 15); ++idx) {
        VoteVector x = vote_from_index(15, idx);
        int want = direct_eval(spec, x);
        REQUIRE(f.evaluate_index(idx) == want);
        REQUIRE(g.evaluate_index(idx) == want);
    }
    CHECK(f.table()->count_plus() == 848);
}

TEST_CASE("lazy evaluation above the dense cap agrees with the direct rule") {
    const int n = 25;
    REQUIRE(n > N_DENSE);

    std::vector<double> wi, wr;
    for (int i = 1; i <= n; ++i) {
        wi.push_back(double((i * 7) % 11 + 1));
        wr.push_back(0.125 * i + 0.375);
    }
    std::vector<std::vector<int>> five_by_five(5);
    for (int v = 1; v <= n; ++v) five_by_five[std::size_t((v - 1) / 5)].push_back(v);

    std::vector<MethodSpec> specs;
    specs.push_back(MethodSpec{Majority{}});
    specs.push_back(MethodSpec{ThresholdMajority{4.0}});
    specs.push_back(MethodSpec{Dictator{17}});
    specs.push_back(wmaj(wi, 13.0));
    specs.push_back(wmaj(wr, 2.5));
    specs.push_back(two_tier(five_by_five, MethodSpec{Majority{}}, MethodSpec{Majority{}}));

    CounterRng rng(99, 0);
    for (const auto& spec : specs) {
        Method f = make_method(spec, n);
        REQUIRE_FALSE(f.dense());
        for (int trial = 0; trial < 20000; ++trial) {
            std::uint64_t idx = rng.next_u64() & ((std::uint64_t(1) << n) - 1);
            VoteVector x = vote_from_index(n, idx);
            REQUIRE(f.evaluate_index(idx) == direct_eval(spec, x));
            REQUIRE(f.evaluate(x) == direct_eval(spec, x));
        }
    }
}

TEST_CASE("expectation is exact and matches hand values") {
    // E Maj_{3,2}: one configuration (+,+,+) reaches sum >= 2, so (1-7)/8
    Method m32 = make_method(MethodSpec{ThresholdMajority{2.0}}, 3);
    ExactScalar e = expectation(m32, {});
    CHECK(e.is_exact);
    CHECK(e.exact == Rat(-3, 4));
    CHECK(e.value == doctest::Approx(-0.75));

    // balanced methods at p = 1/2
    CHECK(expectation(make_method(MethodSpec{Majority{}}, 3), {}).exact == Rat(0));
    CHECK(expectation(make_method(MethodSpec{Dictator{2}}, 5), {}).exact == Rat(0));

    // dictator under bias: E = 2p - 1
    CHECK(expectation(make_method(MethodSpec{Dictator{1}}, 3), {0.25}).exact == Rat(-1, 2));

    // dense table route vs structured route at n = 7, p = 1/4
    Method maj7 = make_method(MethodSpec{Majority{}}, 7);
    ExactScalar dense = expectation(maj7, {0.25});
    Rat p(1, 4), q(3, 4), pass(0);
    for (int k = 4; k <= 7; ++k)
        pass += Rat(binomial_coeff(7, k)) * rat_pow(p, unsigned(k)) * rat_pow(q, unsigned(7 - k));
    CHECK(dense.is_exact);
    CHECK(dense.exact == 2 * pass - 1);
}

TEST_CASE("expectation uses the structured closed form beyond the dense cap") {
    const int n = 25;
    Method maj = make_method(MethodSpec{Majority{}}, n);
    REQUIRE_FALSE(maj.dense());
    ExactScalar e = expectation(maj, {0.25});
    REQUIRE(e.is_exact);

    Rat p(1, 4), q(3, 4), pass(0);
    for (int k = 13; k <= n; ++k)
        pass += Rat(binomial_coeff(n, k)) * rat_pow(p, unsigned(k)) *
                rat_pow(q, unsigned(n - k));
    CHECK(e.exact == 2 * pass - 1);
    CHECK(e.value == doctest::Approx(to_double(2 * pass - 1)).epsilon(1e-15));

    // UN councils have a closed form too; check post1965 at p = 1/2 against
    // the dense table average.
    Method un = make_method(MethodSpec{UNCouncil{UNEra::Post1965}}, 15);
    ExactScalar eu = expectation(un, {});
    CHECK(eu.exact == Rat(2 * 848 - 32768, 32768));
}

TEST_CASE("tie reachability reflects achievable sums") {
    CHECK(make_method(MethodSpec{Majority{}}, 3).tie_reachable() == TieReach::No);
    CHECK(make_method(MethodSpec{Majority{}}, 4).tie_reachable() == TieReach::Yes);
    CHECK(make_method(MethodSpec{Dictator{1}}, 4).tie_reachable() == TieReach::No);
    CHECK(make_method(MethodSpec{ThresholdMajority{2.0}}, 3).tie_reachable() == TieReach::No);
    CHECK(make_method(MethodSpec{ThresholdMajority{2.0}}, 4).tie_reachable() == TieReach::Yes);
    CHECK(make_method(MethodSpec{ThresholdMajority{0.5}}, 5).tie_reachable() == TieReach::No);
    CHECK(make_method(MethodSpec{UNCouncil{UNEra::Pre1965}}, 11).tie_reachable() ==
          TieReach::No);

    // integer weights go through subset-sum: 1-2+3 == 2 is achievable
    CHECK(make_method(wmaj({1, 2, 3}, 2.0), 3).tie_reachable() == TieReach::Yes);
    // parity obstruction: sums of +-1 +-2 +-4 are odd
    CHECK(make_method(wmaj({1, 2, 4}, 2.0), 3).tie_reachable() == TieReach::No);
    CHECK(make_method(wmaj({1, 2, 3}, 2.5), 3).tie_reachable() == TieReach::No);

    // non-integer weights: exact hit observed while materializing
    CHECK(make_method(wmaj({0.5, 0.5}, 1.0), 2).tie_reachable() == TieReach::Yes);
    // no hit, flag stays unknown
    CHECK(make_method(wmaj({0.5, 1.25}, 0.25), 2).tie_reachable() == TieReach::Unknown);

    // two-tier combines its parts: odd states, odd count of states
    CHECK(make_method(equal_two_tier(3, 3), 9).tie_reachable() == TieReach::No);
    CHECK(make_method(equal_two_tier(2, 3), 6).tie_reachable() == TieReach::Yes);

    BooleanFunction t = random_table(4, 1);
    CHECK(Method(t).tie_reachable() == TieReach::No);
}

TEST_CASE("methods built from raw tables expose the table and no spec") {
    BooleanFunction t = random_table(5, 7);
    Method f(t);
    CHECK(f.n() == 5);
    CHECK(f.dense());
    CHECK(f.spec() == nullptr);
    for (std::uint64_t idx = 0; idx < 32; ++idx)
        CHECK(f.evaluate_index(idx) == t.eval_index(idx));
}

TEST_CASE("spec validation rejects malformed methods") {
    CHECK_THROWS_AS(make_method(MethodSpec{Dictator{0}}, 3), DomainError);
    CHECK_THROWS_AS(make_method(MethodSpec{Dictator{4}}, 3), DomainError);
    CHECK_THROWS_AS(make_method(MethodSpec{Majority{}}, 0), DomainError);
    CHECK_THROWS_AS(make_method(wmaj({1, 2}, 0.0), 3), DomainError);
    CHECK_THROWS_AS(make_method(MethodSpec{UNCouncil{UNEra::Pre1965}}, 15), DomainError);
    CHECK_THROWS_AS(make_method(MethodSpec{UNCouncil{UNEra::Post1965}}, 11), DomainError);

    CHECK_THROWS_AS(make_method(two_tier({{1, 2}, {2, 3}}, MethodSpec{Majority{}},
                                         MethodSpec{Majority{}}),
                                3),
                    DomainError);
    CHECK_THROWS_AS(make_method(two_tier({{1, 2}}, MethodSpec{Majority{}},
                                         MethodSpec{Majority{}}),
                                3),
                    DomainError);
    CHECK_THROWS_AS(make_method(two_tier({{1, 2}, {3, 5}}, MethodSpec{Majority{}},
                                         MethodSpec{Majority{}}),
                                4),
                    DomainError);

    CHECK_THROWS_AS(validate_measure(BiasedMeasure{-0.1}), DomainError);
    CHECK_THROWS_AS(validate_measure(BiasedMeasure{1.5}), DomainError);
}

TEST_CASE("equal_two_tier lays out contiguous states") {
    MethodSpec spec = equal_two_tier(3, 3);
    const auto& tt = std::get<TwoTier>(spec.v);
    REQUIRE(tt.states.size() == 3);
    CHECK(tt.states[0] == std::vector<int>{1, 2, 3});
    CHECK(tt.states[2] == std::vector<int>{7, 8, 9});
    CHECK(std::holds_alternative<Majority>(tt.inner->v));
    CHECK(std::holds_alternative<Majority>(tt.outer->v));
    CHECK_THROWS_AS(equal_two_tier(0, 3), DomainError);
}

TEST_CASE("same_balance compares +1 counts") {
    Method maj3 = make_method(MethodSpec{Majority{}}, 3);
    Method dict = make_method(MethodSpec{Dictator{1}}, 3);
    Method m32 = make_method(MethodSpec{ThresholdMajority{2.0}}, 3);
    CHECK(same_balance(maj3, dict));
    CHECK_FALSE(same_balance(maj3, m32));
}

TEST_CASE("truth table files round trip bit-exactly") {
    Method maj3 = make_method(MethodSpec{Majority{}}, 3);
    std::ostringstream out;
    save_table(*maj3.table(), out);
    CHECK(out.str() == "n=3\ne8\n");

    for (int n : {1, 2, 3, 6, 13}) {
        BooleanFunction f = random_table(n, std::uint64_t(n) * 31 + 1);
        std::ostringstream buf;
        save_table(f, buf);
        std::istringstream in(buf.str());
        BooleanFunction g = load_table(in);
        CHECK(f == g);
    }
}

TEST_CASE("truth table parse errors carry the byte offset") {
    auto expect_error = [](const std::string& text) {
        std::istringstream in(text);
        try {
            load_table(in);
            FAIL("expected DomainError for: " << text);
        } catch (const DomainError& e) {
            CHECK(std::string(e.what()).find("at byte") != std::string::npos);
        }
    };
    expect_error("m=3\ne8\n");
    expect_error("n=3\ne\n");       // too few digits
    expect_error("n=3\ne8f\n");     // too many digits
    expect_error("n=3\nzz\n");      // not hex
    expect_error("n=\ne8\n");
    expect_error("");
}

TEST_CASE("spec json round trips every variant") {
    std::vector<MethodSpec> specs;
    specs.push_back(MethodSpec{Majority{}});
    specs.push_back(MethodSpec{Dictator{3}});
    specs.push_back(MethodSpec{ThresholdMajority{2.0}});
    specs.push_back(wmaj({1.0, 2.5, 3.0}, 0.5));
    specs.push_back(two_tier({{1, 2, 3}, {4, 5}}, MethodSpec{Majority{}}, wmaj({2.0, 1.0}, 0.0)));
    specs.push_back(MethodSpec{UNCouncil{UNEra::Pre1965}});
    specs.push_back(MethodSpec{UNCouncil{UNEra::Post1965}});

    for (const auto& spec : specs) {
        std::string text = method_spec_to_json(spec);
        auto [back, n] = method_spec_from_json(text);
        CHECK_FALSE(n.has_value());
        CHECK(method_spec_to_json(back) == text);
    }

    std::string with_n = method_spec_to_json(MethodSpec{Majority{}}, 7);
    auto [spec_n, n7] = method_spec_from_json(with_n);
    REQUIRE(n7.has_value());
    CHECK(*n7 == 7);
    CHECK(std::holds_alternative<Majority>(spec_n.v));
}

TEST_CASE("spec json rejects malformed input") {
    CHECK_THROWS_AS(method_spec_from_json("not json"), DomainError);
    CHECK_THROWS_AS(method_spec_from_json("{}"), DomainError);
    CHECK_THROWS_AS(method_spec_from_json(R"({"type":"banana"})"), DomainError);
    CHECK_THROWS_AS(method_spec_from_json(R"({"type":"dictator"})"), DomainError);
    CHECK_THROWS_AS(method_spec_from_json(R"({"type":"weighted-majority","w":[1,2]})"),
                    DomainError);
    CHECK_THROWS_AS(method_spec_from_json(R"({"type":"un-council","era":"1980"})"), DomainError);
    CHECK_THROWS_AS(
        method_spec_from_json(R"({"type":"two-tier","states":[[1]],"inner":{"type":"majority"}})"),
        DomainError);
}
