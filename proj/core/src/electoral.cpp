#include "stabvote/electoral.hpp"

#include "stabvote/parallel.hpp"
#include "stabvote/rng.hpp"
#include "stabvote/sampling.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace stabvote {

void validate_scenario(const EcScenario& scenario) {
    if (scenario.states.empty()) throw DomainError("scenario needs at least one state");
    for (const auto& s : scenario.states) {
        if (s.name.empty()) throw DomainError("state name must be nonempty");
        if (s.voters <= 0 || s.voters % 2 == 0)
            throw DomainError("state " + s.name + ": voter count must be odd and positive");
        if (s.electors <= 0) throw DomainError("state " + s.name + ": electors must be positive");
    }
    if (!(scenario.epsilon > 0.0) || !(scenario.epsilon < 0.5))
        throw DomainError("epsilon must lie in (0, 1/2)");
    if (scenario.samples == 0) throw DomainError("sample count must be positive");
    if (scenario.samples >= (std::uint64_t(1) << 48))
        throw DomainError("sample count exceeds the stream key range");
}

static std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        std::size_t b = cur.find_first_not_of(" \t\r");
        std::size_t e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

static std::int64_t parse_positive(const std::string& tok, const char* what, int lineno) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0)
        throw DomainError("state parse error at line " + std::to_string(lineno) + ": " + what +
                          " must be a positive integer, got '" + tok + "'");
    return v;
}

std::vector<StateSpec> load_states(std::istream& in, std::vector<std::string>* warnings) {
    std::vector<StateSpec> states;
    std::string line;
    int lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto toks = split_csv_row(line);
        if (!saw_header) {
            if (toks != std::vector<std::string>{"name", "voters", "electors"})
                throw DomainError("state parse error at line " + std::to_string(lineno) +
                                  ": expected header name,voters,electors");
            saw_header = true;
            continue;
        }
        if (toks.size() != 3)
            throw DomainError("state parse error at line " + std::to_string(lineno) +
                              ": expected 3 fields, got " + std::to_string(toks.size()));
        StateSpec s;
        s.name = toks[0];
        if (s.name.empty())
            throw DomainError("state parse error at line " + std::to_string(lineno) +
                              ": empty state name");
        s.voters = parse_positive(toks[1], "voters", lineno);
        s.electors = parse_positive(toks[2], "electors", lineno);
        if (s.voters % 2 == 0) {
            ++s.voters;
            if (warnings)
                warnings->push_back("line " + std::to_string(lineno) + ": " + s.name +
                                    " has an even voter count; using " + std::to_string(s.voters));
        }
        states.push_back(std::move(s));
    }
    if (!saw_header) throw DomainError("state file is empty");
    if (states.empty()) throw DomainError("state file has no data rows");
    return states;
}

std::vector<StateSpec> load_states_file(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open: " + path);
    return load_states(in, warnings);
}

EcOutcome ec_outcome(const std::vector<VoteVector>& votes, const std::vector<StateSpec>& states) {
    if (states.empty()) throw DomainError("scenario needs at least one state");
    if (votes.size() != states.size())
        throw DomainError("need one vote vector per state");
    std::int64_t weighted = 0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        if (states[s].voters <= 0 || states[s].voters % 2 == 0)
            throw DomainError("state " + states[s].name + ": voter count must be odd and positive");
        if (std::int64_t(votes[s].size()) != states[s].voters)
            throw DomainError("state " + states[s].name + ": vote vector has wrong length");
        std::int64_t sum = 0;
        for (std::int8_t v : votes[s]) {
            if (v != 1 && v != -1) throw DomainError("votes must be +1 or -1");
            sum += v;
        }
        weighted += (sum >= 0 ? 1 : -1) * states[s].electors;
    }
    return {weighted >= 0 ? 1 : -1, weighted == 0};
}

namespace {

// One corrupted election, reduced to counts: a is the +1 tally, eps flips
// each vote independently, so the corrupted tally is a - dp + dm.
struct StateDraw {
    std::int64_t margin_x; // 2a - n
    std::int64_t margin_y;
};

inline StateDraw draw_state(std::int64_t n, const BinomialSampler& bin,
                            const BitBinomialSampler& flips, CounterRng& rng) {
    std::int64_t a = std::int64_t(bin.sample(rng));
    std::int64_t dp = std::int64_t(flips.sample(std::uint64_t(a), rng));
    std::int64_t dm = std::int64_t(flips.sample(std::uint64_t(n - a), rng));
    std::int64_t mx = 2 * a - n;
    return {mx, mx - 2 * (dp - dm)};
}

} // namespace

StabilityEstimate flip_prob_mc(EcMethod method, const EcScenario& scenario, int threads) {
    validate_scenario(scenario);
    const auto& states = scenario.states;
    const double eps = scenario.epsilon;

    // Streams are keyed by (seed, sample index | method tag) so the two
    // methods of a comparison draw independent randomness and thread count
    // cannot affect the result.
    const std::uint64_t tag = std::uint64_t(method == EcMethod::ElectoralCollege ? 1 : 0) << 48;
    const int nthreads = resolve_threads(threads);

    std::uint64_t flips_total = 0;
    if (method == EcMethod::NationalMajority) {
        std::int64_t total = 0;
        for (const auto& s : states) total += s.voters;
        BinomialSampler bin(std::uint64_t(total), 0.5);
        BitBinomialSampler flip_bits(std::bit_width(std::uint64_t(total)), eps);
        std::vector<std::uint64_t> part(std::size_t(nthreads), 0);
        parallel_ranges(scenario.samples, nthreads,
                        [&](int worker, std::uint64_t begin, std::uint64_t end) {
                            std::uint64_t flips = 0;
                            for (std::uint64_t i = begin; i < end; ++i) {
                                CounterRng rng(scenario.seed, tag | i);
                                StateDraw d = draw_state(total, bin, flip_bits, rng);
                                flips += (d.margin_x >= 0) != (d.margin_y >= 0);
                            }
                            part[std::size_t(worker)] = flips;
                        });
        for (std::uint64_t f : part) flips_total += f;
    } else {
        std::map<std::int64_t, std::size_t> slot;
        for (const auto& s : states) slot.emplace(s.voters, 0);
        std::vector<BinomialSampler> bins;
        bins.reserve(slot.size());
        std::int64_t max_voters = 0;
        for (auto& [n, idx] : slot) {
            idx = bins.size();
            bins.emplace_back(std::uint64_t(n), 0.5);
            max_voters = std::max(max_voters, n);
        }
        std::vector<std::size_t> bin_of(states.size());
        for (std::size_t s = 0; s < states.size(); ++s) bin_of[s] = slot[states[s].voters];
        BitBinomialSampler flip_bits(std::bit_width(std::uint64_t(max_voters)), eps);

        std::vector<std::uint64_t> part(std::size_t(nthreads), 0);
        parallel_ranges(scenario.samples, nthreads,
                        [&](int worker, std::uint64_t begin, std::uint64_t end) {
                            std::uint64_t flips = 0;
                            for (std::uint64_t i = begin; i < end; ++i) {
                                CounterRng rng(scenario.seed, tag | i);
                                std::int64_t ex = 0, ey = 0;
                                for (std::size_t s = 0; s < states.size(); ++s) {
                                    StateDraw d = draw_state(states[s].voters, bins[bin_of[s]],
                                                             flip_bits, rng);
                                    ex += (d.margin_x >= 0 ? 1 : -1) * states[s].electors;
                                    ey += (d.margin_y >= 0 ? 1 : -1) * states[s].electors;
                                }
                                flips += (ex >= 0) != (ey >= 0);
                            }
                            part[std::size_t(worker)] = flips;
                        });
        for (std::uint64_t f : part) flips_total += f;
    }

    StabilityEstimate est;
    est.value = double(flips_total) / double(scenario.samples);
    est.std_error = scenario.samples > 1
                        ? std::sqrt(std::max(0.0, est.value * (1.0 - est.value)) /
                                    double(scenario.samples - 1))
                        : 0.0;
    est.samples = scenario.samples;
    est.seed = scenario.seed;
    est.exact = false;
    return est;
}

EcComparison compare_ec_vs_majority(const EcScenario& scenario, int threads) {
    validate_scenario(scenario);
    EcComparison cmp;
    for (const auto& s : scenario.states) cmp.total_voters += std::uint64_t(s.voters);
    cmp.m = int(scenario.states.size());
    cmp.epsilon = scenario.epsilon;
    cmp.samples = scenario.samples;
    cmp.seed = scenario.seed;
    cmp.majority = flip_prob_mc(EcMethod::NationalMajority, scenario, threads);
    cmp.college = flip_prob_mc(EcMethod::ElectoralCollege, scenario, threads);
    cmp.asymptotic_ratio = asymptotic_ratio_two_tier(cmp.m);
    if (cmp.majority.value > 0.0) {
        cmp.ratio = cmp.college.value / cmp.majority.value;
        double rel_c = cmp.college.value > 0.0 ? cmp.college.std_error / cmp.college.value : 0.0;
        double rel_m = cmp.majority.std_error / cmp.majority.value;
        cmp.ratio_se = cmp.ratio * std::sqrt(rel_c * rel_c + rel_m * rel_m);
    } else {
        cmp.ratio = std::numeric_limits<double>::quiet_NaN();
        cmp.ratio_se = std::numeric_limits<double>::quiet_NaN();
    }
    return cmp;
}

} // namespace stabvote
