#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabvote/electoral.hpp"
#include "stabvote/hypercube.hpp"
#include "stabvote/noise.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

using namespace stabvote;

namespace {

std::vector<StateSpec> equal_states(int m, std::int64_t voters, std::int64_t electors) {
    std::vector<StateSpec> states;
    for (int s = 0; s < m; ++s)
        states.push_back({"S" + std::to_string(s + 1), voters, electors});
    return states;
}

} // namespace

TEST_CASE("state csv loads names, voters, electors") {
    std::istringstream in(
        "name,voters,electors\n"
        "Alpha, 101, 10\n"
        "\n"
        "Beta,3,1\n");
    std::vector<std::string> warnings;
    auto states = load_states(in, &warnings);
    REQUIRE(states.size() == 2);
    CHECK(states[0].name == "Alpha");
    CHECK(states[0].voters == 101);
    CHECK(states[0].electors == 10);
    CHECK(states[1].name == "Beta");
    CHECK(warnings.empty());
}

TEST_CASE("even voter counts are rounded up with a warning") {
    std::istringstream in("name,voters,electors\nGamma,100,5\n");
    std::vector<std::string> warnings;
    auto states = load_states(in, &warnings);
    CHECK(states[0].voters == 101);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("line 2") != std::string::npos);
    CHECK(warnings[0].find("Gamma") != std::string::npos);
    CHECK(warnings[0].find("101") != std::string::npos);

    // loading without a warning sink still rounds
    std::istringstream again("name,voters,electors\nGamma,100,5\n");
    CHECK(load_states(again)[0].voters == 101);
}

TEST_CASE("state csv parse errors name the line") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            load_states(in);
            FAIL("expected DomainError for: " << text);
        } catch (const DomainError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error("voters,name,electors\nA,1,1\n", "line 1");
    expect_error("name,voters,electors\nA,1\n", "line 2");
    expect_error("name,voters,electors\nA,one,1\n", "voters");
    expect_error("name,voters,electors\nA,-3,1\n", "positive");
    expect_error("name,voters,electors\nA,3,0\n", "electors");
    expect_error("name,voters,electors\n,3,1\n", "empty state name");
    expect_error("name,voters,electors\n", "no data rows");
    expect_error("", "empty");
    CHECK_THROWS_AS(load_states_file("/nonexistent/states.csv"), DomainError);
}

TEST_CASE("scenario validation") {
    EcScenario ok{equal_states(3, 5, 1), 0.01, 1000, 0};
    CHECK_NOTHROW(validate_scenario(ok));

    EcScenario bad = ok;
    bad.states.clear();
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
    bad = ok;
    bad.states[0].voters = 4;
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
    bad = ok;
    bad.states[0].electors = 0;
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
    bad = ok;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
    bad = ok;
    bad.epsilon = 0.5;
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
    bad = ok;
    bad.samples = 0;
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
    bad = ok;
    bad.samples = std::uint64_t(1) << 48;
    CHECK_THROWS_AS(validate_scenario(bad), DomainError);
}

TEST_CASE("college outcomes weigh state majorities by electors") {
    std::vector<StateSpec> states = {{"A", 1, 3}, {"B", 1, 1}, {"C", 1, 1}};
    EcOutcome r = ec_outcome({{+1}, {-1}, {-1}}, states);
    CHECK(r.winner == +1); // 3 - 1 - 1 > 0
    CHECK_FALSE(r.tie);
    CHECK(ec_outcome({{-1}, {+1}, {+1}}, states).winner == -1);

    // state majority decides each delegation
    std::vector<StateSpec> one = {{"A", 3, 7}};
    CHECK(ec_outcome({{+1, +1, -1}}, one).winner == +1);
    CHECK(ec_outcome({{-1, -1, +1}}, one).winner == -1);

    // elector tie goes to +1 and is flagged
    std::vector<StateSpec> pair = {{"A", 1, 1}, {"B", 1, 1}};
    EcOutcome tie = ec_outcome({{+1}, {-1}}, pair);
    CHECK(tie.winner == +1);
    CHECK(tie.tie);

    CHECK_THROWS_AS(ec_outcome({{+1}}, states), DomainError);
    CHECK_THROWS_AS(ec_outcome({{+1, -1}}, one), DomainError);
    CHECK_THROWS_AS(ec_outcome({{+1, 0, -1}}, one), DomainError);
    CHECK_THROWS_AS(ec_outcome({}, {}), DomainError);
}

TEST_CASE("single-state flip probabilities match exact boolean stability") {
    // one state of 5 voters: both methods are Maj_5; eps = 0.05 means rho = 0.9
    EcScenario sc{equal_states(1, 5, 10), 0.05, 200000, 3};
    Method maj5 = make_method(MethodSpec{Majority{}}, 5);
    double flip = outcome_change_prob(stability_exact(maj5, {0.9, {}}).value);

    StabilityEstimate nat = flip_prob_mc(EcMethod::NationalMajority, sc);
    StabilityEstimate col = flip_prob_mc(EcMethod::ElectoralCollege, sc);
    CHECK_FALSE(nat.exact);
    CHECK(nat.samples == sc.samples);
    CHECK(nat.seed == sc.seed);
    CHECK(std::abs(nat.value - flip) < 4 * nat.std_error + 1e-9);
    CHECK(std::abs(col.value - flip) < 4 * col.std_error + 1e-9);
    // the two methods draw decorrelated streams, so the estimates differ
    CHECK(nat.value != col.value);
}

TEST_CASE("college flips at least as often as the national majority") {
    EcScenario sc{equal_states(5, 5, 1), 0.02, 200000, 17};
    EcComparison cmp = compare_ec_vs_majority(sc);
    CHECK(cmp.total_voters == 25);
    CHECK(cmp.m == 5);
    CHECK(cmp.epsilon == 0.02);
    CHECK(cmp.samples == sc.samples);
    CHECK(cmp.seed == sc.seed);
    CHECK(cmp.college.value >
          cmp.majority.value - 3 * (cmp.college.std_error + cmp.majority.std_error));
    CHECK(cmp.ratio == doctest::Approx(cmp.college.value / cmp.majority.value));
    CHECK(cmp.ratio_se > 0);
    CHECK(cmp.asymptotic_ratio ==
          doctest::Approx(asymptotic_ratio_two_tier(5)).epsilon(1e-12));
}

TEST_CASE("standard error scales like one over sqrt(samples)") {
    EcScenario small{equal_states(3, 101, 1), 0.05, 50000, 7};
    EcScenario big = small;
    big.samples = 200000;
    double se_small = flip_prob_mc(EcMethod::NationalMajority, small).std_error;
    double se_big = flip_prob_mc(EcMethod::NationalMajority, big).std_error;
    CHECK(se_small / se_big == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("vanishing corruption yields zero flips") {
    EcScenario sc{equal_states(3, 101, 1), 1e-9, 10000, 1};
    CHECK(flip_prob_mc(EcMethod::NationalMajority, sc).value == 0.0);
    EcComparison cmp = compare_ec_vs_majority(sc);
    CHECK(cmp.majority.value == 0.0);
    CHECK(std::isnan(cmp.ratio)); // undefined when the baseline never flips
}

TEST_CASE("one state makes the comparison a self-test") {
    EcScenario sc{equal_states(1, 101, 538), 0.05, 200000, 5};
    EcComparison cmp = compare_ec_vs_majority(sc);
    CHECK(cmp.ratio == doctest::Approx(1.0).epsilon(0.05));
    CHECK(cmp.asymptotic_ratio == doctest::Approx(std::sqrt(2.0 / std::acos(-1.0))));
}

TEST_CASE("estimates are bit-identical across thread counts") {
    EcScenario sc{{{"A", 101, 10}, {"B", 55, 6}, {"C", 1001, 20}}, 0.01, 60000, 9};
    StabilityEstimate one = flip_prob_mc(EcMethod::ElectoralCollege, sc, 1);
    StabilityEstimate four = flip_prob_mc(EcMethod::ElectoralCollege, sc, 4);
    CHECK(one.value == four.value);
    CHECK(one.std_error == four.std_error);

    EcComparison ca = compare_ec_vs_majority(sc, 1);
    EcComparison cb = compare_ec_vs_majority(sc, 4);
    CHECK(ca.majority.value == cb.majority.value);
    CHECK(ca.college.value == cb.college.value);
    CHECK(ca.ratio == cb.ratio);

    EcScenario other = sc;
    other.seed = 10;
    CHECK(flip_prob_mc(EcMethod::ElectoralCollege, other).value != one.value);
}

TEST_CASE("mixed state sizes run through distinct samplers") {
    // sizes collide on purpose: two states share one sampler slot
    EcScenario sc{{{"A", 51, 5}, {"B", 51, 5}, {"C", 7, 1}, {"D", 2001, 30}}, 0.03, 80000, 2};
    StabilityEstimate col = flip_prob_mc(EcMethod::ElectoralCollege, sc);
    CHECK(col.value > 0.0);
    CHECK(col.value < 1.0);
    StabilityEstimate nat = flip_prob_mc(EcMethod::NationalMajority, sc);
    CHECK(std::abs(nat.value - col.value) < 0.2); // same ballpark, tiny electorate
}
