#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabvote/hypercube.hpp"
#include "stabvote/power.hpp"
#include "stabvote/rational.hpp"
#include "stabvote/rng.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

using namespace stabvote;

namespace {

MethodSpec wmaj(std::vector<double> w, double t) {
    return MethodSpec{WeightedMajority{std::move(w), t}};
}

BooleanFunction random_table(int n, std::uint64_t seed) {
    BooleanFunction f(n);
    CounterRng rng(seed, 0);
    for (std::uint64_t idx = 0; idx < f.size(); ++idx)
        if (rng.next_bernoulli(0.5)) f.set_index(idx, 1);
    return f;
}

// brute pivotal count: pairs (x, x^e_i) with different outcomes, each counted
// once from its bit-is-zero side
Int brute_pivotal(const Method& f, int i) {
    const std::uint64_t bit = std::uint64_t(1) << (i - 1);
    Int count = 0;
    for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << f.n()); ++idx) {
        if (idx & bit) continue;
        if (f.evaluate_index(idx) != f.evaluate_index(idx | bit)) ++count;
    }
    return count;
}

// brute biased influence: sum of p^k q^(n-1-k) over pivotal configurations of
// the other voters, k their +1 count
Rat brute_influence(const Method& f, int i, const Rat& p) {
    const std::uint64_t bit = std::uint64_t(1) << (i - 1);
    const Rat q = 1 - p;
    Rat acc = 0;
    for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << f.n()); ++idx) {
        if (idx & bit) continue;
        if (f.evaluate_index(idx) == f.evaluate_index(idx | bit)) continue;
        int k = std::popcount(idx);
        acc += rat_pow(p, unsigned(k)) * rat_pow(q, unsigned(f.n() - 1 - k));
    }
    return acc;
}

} // namespace

TEST_CASE("un council pivotal counts and banzhaf indices") {
    Method pre = make_method(MethodSpec{UNCouncil{UNEra::Pre1965}}, 11);
    CHECK(pivotal_count(pre, 1) == 57);
    CHECK(pivotal_count(pre, 5) == 57);
    CHECK(pivotal_count(pre, 6) == 5);
    CHECK(pivotal_count(pre, 11) == 5);
    auto beta_pre = banzhaf_indices(pre);
    CHECK(beta_pre[0] == Rat(57, 315));
    CHECK(beta_pre[10] == Rat(5, 315));

    Method post = make_method(MethodSpec{UNCouncil{UNEra::Post1965}}, 15);
    CHECK(pivotal_count(post, 1) == 848);
    CHECK(pivotal_count(post, 15) == 84);
    auto beta_post = banzhaf_indices(post);
    CHECK(beta_post[0] == Rat(848, 5080));
    CHECK(beta_post[14] == Rat(84, 5080));

    // permanent-member influence at p = 1/2: 848 / 2^14
    ExactScalar inf = influence(post, 1);
    CHECK(inf.is_exact);
    CHECK(inf.exact == Rat(53, 1024));
}

TEST_CASE("influence equals pivotal count over 2^(n-1), exhaustively") {
    std::vector<Method> cases;
    for (std::uint64_t s = 1; s <= 6; ++s) cases.emplace_back(random_table(10, s));
    cases.push_back(make_method(MethodSpec{Majority{}}, 9));
    cases.push_back(make_method(MethodSpec{ThresholdMajority{3.0}}, 8));
    cases.push_back(make_method(wmaj({1, 2, 3, 4, 5, 6, 7}, 3.0), 7));
    cases.push_back(make_method(equal_two_tier(3, 3), 9));
    cases.push_back(make_method(MethodSpec{UNCouncil{UNEra::Pre1965}}, 11));
    cases.push_back(Method(random_table(12, 77)));

    for (const Method& f : cases) {
        for (int i = 1; i <= f.n(); ++i) {
            Int b = brute_pivotal(f, i);
            CHECK(pivotal_count(f, i) == b);
            ExactScalar inf = influence(f, i);
            REQUIRE(inf.is_exact);
            CHECK(inf.exact == Rat(b, Int(1) << unsigned(f.n() - 1)));
        }
    }
}

TEST_CASE("banzhaf indices sum to one and are proportional to pivotal counts") {
    for (std::uint64_t s : {11, 12, 13}) {
        Method f(random_table(8, s));
        auto beta = banzhaf_indices(f);
        REQUIRE(int(beta.size()) == 8);
        Rat sum = 0;
        Int total = 0;
        for (int i = 1; i <= 8; ++i) total += pivotal_count(f, i);
        for (int i = 1; i <= 8; ++i) {
            sum += beta[std::size_t(i - 1)];
            CHECK(beta[std::size_t(i - 1)] == Rat(pivotal_count(f, i), total));
        }
        CHECK(sum == Rat(1));
    }

    BooleanFunction constant(4);
    CHECK_THROWS_AS(banzhaf_indices(Method(constant)), DomainError);
}

TEST_CASE("influence vanishes exactly on ignored coordinates") {
    // f = majority of voters 1, 3, 5 embedded in n = 6
    BooleanFunction junta(6);
    for (std::uint64_t idx = 0; idx < 64; ++idx) {
        int sum = (idx & 1 ? 1 : -1) + (idx & 4 ? 1 : -1) + (idx & 16 ? 1 : -1);
        if (sum > 0) junta.set_index(idx, 1);
    }
    Method f(junta);
    for (int i : {1, 3, 5}) CHECK(influence(f, i).exact == Rat(1, 2));
    for (int i : {2, 4, 6}) {
        CHECK(influence(f, i).exact == Rat(0));
        CHECK(pivotal_count(f, i) == 0);
    }

    // ground truth from the brute count on random tables
    for (std::uint64_t s : {21, 22}) {
        Method g(random_table(9, s));
        for (int i = 1; i <= 9; ++i)
            CHECK((influence(g, i).exact == Rat(0)) == (brute_pivotal(g, i) == 0));
    }
}

TEST_CASE("biased influence is exact on dense tables") {
    Method maj3 = make_method(MethodSpec{Majority{}}, 3);
    ExactScalar inf = influence(maj3, 2, {0.25});
    REQUIRE(inf.is_exact);
    CHECK(inf.exact == Rat(3, 8)); // P(other two split) = 2 p q

    Method and3 = make_method(MethodSpec{ThresholdMajority{2.0}}, 3);
    CHECK(influence(and3, 1, {}).exact == Rat(1, 4));
    CHECK(influence(and3, 1, {0.25}).exact == Rat(1, 16)); // both others +1

    for (std::uint64_t s : {5, 6}) {
        Method f(random_table(7, s));
        for (double p : {0.25, 0.125, 0.75}) {
            for (int i = 1; i <= 7; ++i) {
                ExactScalar e = influence(f, i, {p});
                REQUIRE(e.is_exact);
                CHECK(e.exact == brute_influence(f, i, rat_from_double(p)));
            }
        }
    }

    Method dict = make_method(MethodSpec{Dictator{2}}, 4);
    CHECK(influence(dict, 2, {0.3}).exact == Rat(1));
    CHECK(influence(dict, 1, {0.3}).exact == Rat(0));
}

TEST_CASE("closed forms above the dense cap match combinatorics") {
    const int n = 25;
    Method maj = make_method(MethodSpec{Majority{}}, n);
    REQUIRE_FALSE(maj.dense());
    ExactScalar e = influence(maj, 7);
    REQUIRE(e.is_exact);
    CHECK(e.exact == majority_influence_rat(n));
    CHECK(e.exact == Rat(binomial_coeff(24, 12), Int(1) << 24));

    // even-n majority: pivotal iff the other 25 voters sum to -1
    Method maj26 = make_method(MethodSpec{Majority{}}, 26);
    CHECK(influence(maj26, 1).exact == Rat(binomial_coeff(25, 12), Int(1) << 25));

    // threshold t=4 at odd n: pivotal iff the other 24 voters sum to 4
    Method thr = make_method(MethodSpec{ThresholdMajority{4.0}}, n);
    CHECK(influence(thr, 1).exact == Rat(binomial_coeff(24, 14), Int(1) << 24));

    // integer weights that reduce to the same threshold function
    Method wthr = make_method(wmaj(std::vector<double>(25, 2.0), 8.0), n);
    CHECK(influence(wthr, 3).exact == influence(thr, 3).exact);

    // equal two-tier: state-pivotal times voter-pivotal, 5 states of 5
    Method tt = make_method(equal_two_tier(5, 5), 25);
    REQUIRE_FALSE(tt.dense());
    ExactScalar itt = influence(tt, 13);
    REQUIRE(itt.is_exact);
    CHECK(itt.exact == Rat(9, 64));
}

TEST_CASE("two-tier closed form matches the dense route below the cap") {
    Method tt = make_method(equal_two_tier(3, 5), 15);
    REQUIRE(tt.dense());
    // I_maj3(states) * I_maj5(voters) = 1/2 * 3/8
    CHECK(influence(tt, 1).exact == Rat(3, 16));
    for (int i = 2; i <= 15; ++i) CHECK(influence(tt, i).exact == Rat(3, 16));
}

TEST_CASE("majority influence helpers agree with each other") {
    CHECK(majority_influence_rat(1) == Rat(1));
    CHECK(majority_influence_rat(3) == Rat(1, 2));
    CHECK(majority_influence_rat(5) == Rat(3, 8));
    CHECK_THROWS_AS(majority_influence_rat(4), DomainError);
    CHECK_THROWS_AS(majority_influence_rat(-3), DomainError);
    CHECK_THROWS_AS(majority_influence_exact(10), DomainError);

    for (long long n : {1, 3, 5, 7, 9, 11, 13}) {
        Method maj = make_method(MethodSpec{Majority{}}, int(n));
        CHECK(influence(maj, 1).exact == majority_influence_rat(n));
        ExactScalar e = majority_influence_exact(n);
        CHECK(e.is_exact);
        CHECK(e.exact == majority_influence_rat(n));
    }

    // float fallback stays within 1e-12 relative of the exact value
    ExactScalar big = majority_influence_exact(100001);
    CHECK_FALSE(big.is_exact);
    double exact = to_double(Rat(binomial_coeff(100000, 50000), Int(1) << 100000));
    CHECK(std::abs(big.value - exact) / exact < 1e-12);

    // sqrt(n) * I_n approaches sqrt(2/pi) from above
    double limit = std::sqrt(2.0 / std::acos(-1.0));
    double i_lo = majority_influence_exact(101).value * std::sqrt(101.0);
    double i_hi = majority_influence_exact(10001).value * std::sqrt(10001.0);
    CHECK(i_lo > i_hi);
    CHECK(i_hi > limit);
    CHECK(i_hi - limit < 1e-4);
}

TEST_CASE("symmetric methods spread influence equally") {
    Method maj9 = make_method(MethodSpec{Majority{}}, 9);
    auto beta = banzhaf_indices(maj9);
    for (const Rat& b : beta) CHECK(b == Rat(1, 9));

    Method tt = make_method(equal_two_tier(3, 3), 9);
    ExactScalar first = influence(tt, 1);
    for (int i = 2; i <= 9; ++i) CHECK(influence(tt, i).exact == first.exact);
}

TEST_CASE("pivotal report is consistent with the individual queries") {
    Method f = make_method(MethodSpec{UNCouncil{UNEra::Post1965}}, 15);
    PivotalReport rep = pivotal_report(f);
    CHECK(rep.n == 15);
    CHECK(rep.p == 0.5);
    REQUIRE(rep.b.size() == 15);
    REQUIRE(rep.influence.size() == 15);
    REQUIRE(rep.banzhaf.size() == 15);

    Rat sum = 0;
    for (int i = 1; i <= 15; ++i) {
        CHECK(rep.b[std::size_t(i - 1)] == pivotal_count(f, i));
        CHECK(rep.influence[std::size_t(i - 1)].exact == influence(f, i).exact);
        sum += rep.banzhaf[std::size_t(i - 1)];
    }
    CHECK(sum == Rat(1));

    PivotalReport biased = pivotal_report(f, {0.25});
    CHECK(biased.p == 0.25);
    CHECK(biased.b == rep.b);           // counts ignore the measure
    CHECK(biased.banzhaf == rep.banzhaf);
    CHECK(biased.influence[0].exact != rep.influence[0].exact);
}

TEST_CASE("pivotal report serializes to well-formed json") {
    Method pre = make_method(MethodSpec{UNCouncil{UNEra::Pre1965}}, 11);
    PivotalReport rep = pivotal_report(pre);
    auto doc = nlohmann::json::parse(pivotal_report_json(rep));
    CHECK(doc["n"] == 11);
    CHECK(doc["p"] == 0.5);
    REQUIRE(doc["pivotal"].size() == 11);
    CHECK(doc["pivotal"][0] == "57");
    CHECK(doc["pivotal"][10] == "5");
    CHECK(doc["influence"][0]["exact"] == true);
    CHECK(doc["influence"][0]["value"].get<double>() == doctest::Approx(57.0 / 1024.0));
    CHECK(doc["banzhaf"][0]["num"] == "19");
    CHECK(doc["banzhaf"][0]["den"] == "105");
}
