// stabvote: election stability analysis from the command line.
//
// Exit codes: 0 success, 1 bad input or usage, 2 internal invariant failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stabvote/electoral.hpp"
#include "stabvote/geometry.hpp"
#include "stabvote/hypercube.hpp"
#include "stabvote/multicand.hpp"
#include "stabvote/noise.hpp"
#include "stabvote/power.hpp"

using namespace stabvote;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kMethodHelp =
    "Built-in method or file. Built-ins: maj | dict:<i> | wmaj:<w1,w2,...;t> | "
    "two-tier:<m>x<s> (m equal majority states of s voters) | un-pre1965 | un-post1965. "
    "A file is a truth table (*.ht) or a method spec (*.json); other two-tier shapes "
    "go through spec JSON.";

constexpr const char* kFormatFooter =
    "Truth-table file: line 1 'n=<int>', line 2 ceil(2^n/4) hex digits, most significant\n"
    "first, bit at position idx(x) = sum 2^(i-1)(1+x_i)/2 (voter 1 = least significant\n"
    "bit, +1 = bit set). The same format doubles as a subset-mask file.\n"
    "Spec JSON: {\"type\":\"majority\"} | {\"type\":\"dictator\",\"i\":1} |\n"
    "{\"type\":\"threshold-majority\",\"t\":2} | {\"type\":\"weighted-majority\",\"w\":[..],\"t\":0} |\n"
    "{\"type\":\"two-tier\",\"states\":[[1,2],[3,4,5]],\"inner\":{..},\"outer\":{..}} |\n"
    "{\"type\":\"un-council\",\"era\":\"pre1965\"|\"post1965\"}; optional top-level \"n\".";

std::uint64_t parse_count(const std::string& text, const char* what) {
    errno = 0;
    char* end = nullptr;
    long double v = std::strtold(text.c_str(), &end);
    if (errno || end != text.c_str() + text.size() || !(v >= 1) || v > 0x1.0p53 ||
        std::fmod(v, 1.0L) != 0.0L)
        throw DomainError(std::string(what) + " must be a positive integer (scientific "
                                              "notation accepted), got '" +
                          text + "'");
    return std::uint64_t(v);
}

// "lo:hi:steps", inclusive linear grid
std::vector<double> parse_sweep(const std::string& text, const char* what) {
    double lo = 0, hi = 0;
    long long steps = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> lo >> c1 >> hi >> c2 >> steps) || c1 != ':' || c2 != ':' || !ss.eof() ||
        steps < 1 || steps > 1000000 || (steps == 1 && lo != hi) || hi < lo)
        throw DomainError(std::string(what) + " must be lo:hi:steps, got '" + text + "'");
    std::vector<double> grid;
    grid.reserve(std::size_t(steps));
    for (long long i = 0; i < steps; ++i)
        grid.push_back(steps == 1 ? lo : lo + (hi - lo) * double(i) / double(steps - 1));
    return grid;
}

std::optional<int> spec_implied_n(const MethodSpec& spec) {
    if (const auto* w = std::get_if<WeightedMajority>(&spec.v)) return int(w->w.size());
    if (const auto* tt = std::get_if<TwoTier>(&spec.v)) {
        std::size_t total = 0;
        for (const auto& st : tt->states) total += st.size();
        return int(total);
    }
    if (const auto* un = std::get_if<UNCouncil>(&spec.v)) return un_council_n(un->era);
    return {};
}

MethodSpec builtin_spec(const std::string& name) {
    if (name == "maj") return {Majority{}};
    if (name == "un-pre1965") return {UNCouncil{UNEra::Pre1965}};
    if (name == "un-post1965") return {UNCouncil{UNEra::Post1965}};
    auto colon = name.find(':');
    std::string head = name.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : name.substr(colon + 1);
    if (head == "dict" && !arg.empty()) {
        return {Dictator{std::stoi(arg)}};
    }
    if (head == "wmaj" && !arg.empty()) {
        auto semi = arg.find(';');
        if (semi == std::string::npos)
            throw DomainError("wmaj needs weights and a threshold: wmaj:<w1,w2,...;t>");
        WeightedMajority wm;
        std::istringstream ws(arg.substr(0, semi));
        std::string tok;
        while (std::getline(ws, tok, ',')) wm.w.push_back(std::stod(tok));
        wm.t = std::stod(arg.substr(semi + 1));
        return {std::move(wm)};
    }
    if (head == "two-tier" && !arg.empty()) {
        auto x = arg.find('x');
        if (x == std::string::npos)
            throw DomainError("two-tier needs a grid: two-tier:<m>x<s>");
        int m = std::stoi(arg.substr(0, x));
        int s = std::stoi(arg.substr(x + 1));
        return equal_two_tier(m, s);
    }
    throw DomainError("unknown method '" + name +
                      "'; built-ins are maj, dict:<i>, wmaj:<w1,...;t>, two-tier:<m>x<s>, "
                      "un-pre1965, un-post1965 (plurality:<k> applies to stability-k only)");
}

Method resolve_method(const std::string& text, std::optional<int> n_flag) {
    if (std::filesystem::exists(text)) {
        std::ifstream in(text);
        if (!in) throw DomainError("cannot open: " + text);
        in >> std::ws;
        if (in.peek() == '{') {
            std::stringstream ss;
            ss << in.rdbuf();
            auto [spec, n_file] = method_spec_from_json(ss.str());
            std::optional<int> n = n_flag ? n_flag : n_file;
            if (!n) n = spec_implied_n(spec);
            if (!n) throw DomainError("method spec in " + text + " needs --n");
            return make_method(spec, *n);
        }
        in.seekg(0);
        BooleanFunction f = load_table(in);
        if (n_flag && *n_flag != f.n())
            throw DomainError("--n disagrees with the table header in " + text);
        return Method(std::move(f));
    }
    MethodSpec spec = builtin_spec(text);
    std::optional<int> n = n_flag ? n_flag : spec_implied_n(spec);
    if (!n) throw DomainError("built-in method '" + text + "' needs --n");
    return make_method(spec, *n);
}

void write_output(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw DomainError("cannot write: " + out);
    f << text;
}

ordered_json estimate_node(const StabilityEstimate& est) {
    ordered_json j;
    j["value"] = est.value;
    j["stderr"] = est.std_error;
    j["samples"] = est.samples;
    j["seed"] = est.seed;
    j["exact"] = est.exact;
    return j;
}

ordered_json scalar_node(const ExactScalar& e) {
    ordered_json j;
    j["value"] = e.value;
    j["exact"] = e.is_exact;
    if (e.is_exact) {
        j["num"] = to_decimal(boost::multiprecision::numerator(e.exact));
        j["den"] = to_decimal(boost::multiprecision::denominator(e.exact));
    }
    return j;
}

// hex digits in the truth-table file convention (most significant first)
std::string bits_to_hex(int n, std::uint64_t bits) {
    BooleanFunction f(n);
    f.words()[0] = bits;
    std::ostringstream os;
    save_table(f, os);
    std::string text = os.str();
    auto nl = text.find('\n');
    std::string hex = text.substr(nl + 1);
    if (!hex.empty() && hex.back() == '\n') hex.pop_back();
    return hex;
}

int threads_from_env() {
    if (const char* env = std::getenv("STABVOTE_THREADS")) {
        try {
            int t = std::stoi(env);
            if (t >= 0) return t;
        } catch (...) {
        }
        throw DomainError("STABVOTE_THREADS must be a nonnegative integer");
    }
    return 1;
}

struct McChoice {
    bool exact = true;
    std::uint64_t samples = 0;
};

McChoice pick_engine(bool exact_flag, const std::string& mc, const char* what) {
    if (exact_flag && !mc.empty())
        throw DomainError(std::string("choose one of --exact/--mc for ") + what);
    if (mc.empty()) return {true, 0};
    return {false, parse_count(mc, "--mc")};
}

std::string csv_num(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Election stability analysis: influence and Banzhaf power, noise "
                 "stability, adversarial vulnerability, multi-candidate plurality and "
                 "Condorcet analysis, and electoral-college comparisons."};
    app.require_subcommand(1);
    app.footer(kFormatFooter);

    std::string method_text, out_path, mc_text, sweep_text, profile_path, states_path;
    std::optional<int> n_flag;
    double p = 0.5, rho = -1.0;
    std::uint64_t seed = 0;
    int threads = -1; // -1: take STABVOTE_THREADS or 1
    int k = 0;

    auto add_common = [&](CLI::App* sub, bool with_measure) {
        sub->add_option("--out", out_path, "Output path; '-' or omitted for stdout");
        if (with_measure)
            sub->add_option("--p", p, "P(vote = +1) for the product measure (default 0.5)");
    };

    auto* power = app.add_subcommand(
        "power", "Pivotal counts, influences, and Banzhaf indices of a voting method");
    power->add_option("--method", method_text, kMethodHelp)->required();
    power->add_option("--n", n_flag, "Number of voters (required when the method does not fix it)");
    add_common(power, true);
    power->footer(kFormatFooter);

    auto* stab = app.add_subcommand(
        "stability", "Noise stability S_rho(f) = E f(X)f(Y) under vote corruption");
    stab->add_option("--method", method_text, kMethodHelp)->required();
    stab->add_option("--n", n_flag, "Number of voters");
    stab->add_option("--rho", rho, "Correlation in [0,1]; per-vote flip probability is (1-rho)/2");
    stab->add_option("--sweep", sweep_text,
                     "rho sweep lo:hi:steps; emits CSV 'rho,value,stderr' instead of JSON");
    bool exact_flag = false;
    stab->add_flag("--exact", exact_flag, "Exact engine (dense tables, n <= 24); the default");
    stab->add_option("--mc", mc_text, "Monte Carlo engine with this many samples (e.g. 1e6)");
    stab->add_option("--seed", seed, "Monte Carlo seed (default 0)");
    stab->add_option("--threads", threads,
                     "Worker threads for MC (0 = hardware); never changes results. "
                     "Default: STABVOTE_THREADS or 1");
    add_common(stab, true);
    stab->footer(kFormatFooter);

    auto* stabk = app.add_subcommand(
        "stability-k", "Plurality agreement probability P[f(X)=f(Y)] for k candidates");
    stabk->add_option("--k", k, "Number of candidates (>= 2)")->required();
    stabk->add_option("--n", n_flag, "Number of voters")->required();
    stabk->add_option("--rho", rho, "Per-vote keep probability; resample uniform otherwise")
        ->required();
    stabk->add_flag("--exact", exact_flag, "Exact engine (k^n <= 16e6 table); the default");
    stabk->add_option("--mc", mc_text, "Monte Carlo engine with this many samples");
    stabk->add_option("--seed", seed, "Monte Carlo seed (default 0)");
    stabk->add_option("--threads", threads, "Worker threads for MC; never changes results");
    add_common(stabk, false);

    auto* adv = app.add_subcommand(
        "adversary", "Configurations whose outcome at most k vote flips can change");
    adv->add_option("--method", method_text, kMethodHelp);
    adv->add_option("--n", n_flag, "Number of voters");
    adv->add_option("--k", k, "Adversary budget (flips)");
    add_common(adv, false);
    adv->footer(kFormatFooter);

    std::string trials_text = "100000";
    double verify_t = 0.0;
    bool have_t = false, allow_odd = false;
    auto* verify = adv->add_subcommand(
        "verify", "Check minimality of majority's vulnerable count among balanced "
                  "competitors (exhaustive at n=3, sampled for odd n <= 16)");
    verify->add_option("--n", n_flag, "Number of voters (odd)")->required();
    verify->add_option("--k", k, "Adversary budget")->required();
    verify->add_option("--t", verify_t, "Check Maj_{n,t} against same-balance competitors instead")
        ->trigger_on_parse()
        ->each([&](const std::string&) { have_t = true; });
    verify->add_flag("--allow-odd-t", allow_odd, "Permit odd thresholds (outside the stated claim)");
    verify->add_option("--trials", trials_text, "Sampled competitors when not exhaustive");
    verify->add_option("--seed", seed, "Sampling seed");
    verify->add_option("--out", out_path, "Output path; '-' or omitted for stdout");

    auto* cond = app.add_subcommand("condorcet",
                                    "Pairwise tournament, Condorcet winner, and cycle witness");
    cond->add_option("--profile", profile_path,
                     "Ranked-ballot CSV: one ballot per row, most-preferred candidate first; "
                     "integer rows are candidate ids, otherwise names are sorted and numbered")
        ->required();
    add_common(cond, false);

    auto* ec = app.add_subcommand(
        "ec", "Electoral college vs national majority under per-vote corruption");
    ec->add_option("--states", states_path, "CSV with header name,voters,electors")->required();
    double epsilon = 1e-4;
    std::string samples_text = "1000000", sweep_eps_text;
    ec->add_option("--epsilon", epsilon, "Per-vote corruption probability in (0, 1/2)");
    ec->add_option("--samples", samples_text, "Monte Carlo samples per method (e.g. 1e6)");
    ec->add_option("--seed", seed, "Monte Carlo seed (default 0)");
    ec->add_option("--sweep-eps", sweep_eps_text,
                   "epsilon sweep lo:hi:steps; emits CSV "
                   "'epsilon,majority,majority_stderr,college,college_stderr,ratio,ratio_stderr'");
    ec->add_option("--threads", threads, "Worker threads; never changes results");
    add_common(ec, false);

    auto* meth = app.add_subcommand(
        "method", "Inspect a voting method and convert between spec JSON and truth tables");
    meth->add_option("--method", method_text, kMethodHelp)->required();
    meth->add_option("--n", n_flag, "Number of voters");
    std::string save_table_path, save_spec_path;
    meth->add_option("--save-table", save_table_path, "Write the dense truth table here");
    meth->add_option("--save-spec", save_spec_path, "Write the method spec JSON here");
    add_common(meth, true);
    meth->footer(kFormatFooter);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (threads == -1) threads = threads_from_env();

        if (power->parsed()) {
            Method m = resolve_method(method_text, n_flag);
            write_output(pivotal_report_json(pivotal_report(m, {p})), out_path);
        } else if (stab->parsed()) {
            Method m = resolve_method(method_text, n_flag);
            McChoice eng = pick_engine(exact_flag, mc_text, "stability");
            auto run = [&](double r) {
                return eng.exact ? stability_exact(m, {r, {p}})
                                 : stability_mc(m, {r, {p}}, eng.samples, seed, threads);
            };
            if (!sweep_text.empty()) {
                std::ostringstream csv;
                csv << "rho,value,stderr\n";
                for (double r : parse_sweep(sweep_text, "--sweep")) {
                    StabilityEstimate est = run(r);
                    csv << csv_num(r) << ',' << csv_num(est.value) << ',' << csv_num(est.std_error)
                        << '\n';
                }
                write_output(csv.str(), out_path);
            } else {
                if (rho < 0) throw DomainError("stability needs --rho or --sweep");
                StabilityEstimate est = run(rho);
                ordered_json j;
                j["rho"] = rho;
                j.update(estimate_node(est));
                write_output(j.dump(2) + "\n", out_path);
            }
        } else if (stabk->parsed()) {
            MultiFunction f = MultiFunction::plurality_fn(*n_flag, k);
            McChoice eng = pick_engine(exact_flag, mc_text, "stability-k");
            StabilityEstimate est = eng.exact ? stability_k_exact(f, rho)
                                              : stability_k_mc(f, rho, eng.samples, seed, threads);
            ordered_json j;
            j["k"] = k;
            j["n"] = *n_flag;
            j["rho"] = rho;
            j.update(estimate_node(est));
            write_output(j.dump(2) + "\n", out_path);
        } else if (verify->parsed()) {
            std::uint64_t trials = parse_count(trials_text, "--trials");
            OptimalityReport rep = have_t
                                       ? verify_threshold_optimal(*n_flag, verify_t, k, trials,
                                                                  seed, allow_odd)
                                       : verify_majority_optimal(*n_flag, k, trials, seed);
            ordered_json j;
            j["mode"] = have_t ? "threshold" : "majority";
            j["n"] = rep.n;
            j["k"] = rep.k;
            if (have_t) j["t"] = rep.t;
            j["exhaustive"] = rep.exhaustive;
            j["competitors"] = rep.competitors;
            j["reference_count"] = rep.reference_count;
            j["min_count"] = rep.min_count;
            j["co_minimizers"] = rep.co_minimizers;
            j["reference_minimal"] = rep.reference_minimal;
            if (rep.exhaustive) {
                ordered_json dist;
                for (const auto& [count, mult] : rep.distribution)
                    dist[std::to_string(count)] = mult;
                j["distribution"] = std::move(dist);
            }
            if (!rep.co_minimizer_tables.empty()) {
                ordered_json tabs = ordered_json::array();
                for (std::uint64_t bits : rep.co_minimizer_tables)
                    tabs.push_back(bits_to_hex(rep.n, bits));
                j["co_minimizer_tables"] = std::move(tabs);
            }
            write_output(j.dump(2) + "\n", out_path);
        } else if (adv->parsed()) {
            if (method_text.empty() || adv->count("--k") == 0)
                throw DomainError("adversary needs --method and --k (or the verify subcommand)");
            Method m = resolve_method(method_text, n_flag);
            VulnerabilityReport rep = vulnerable_count(m, k);
            ordered_json j;
            j["n"] = rep.n;
            j["k"] = rep.k;
            j["total"] = rep.total;
            j["from_plus"] = rep.from_plus;
            j["from_minus"] = rep.from_minus;
            write_output(j.dump(2) + "\n", out_path);
        } else if (cond->parsed()) {
            RankedProfile profile = load_profile_file(profile_path);
            CondorcetResult res = condorcet_analysis(profile);
            ordered_json j;
            j["m"] = profile.m;
            j["names"] = profile.names;
            j["ballots"] = profile.ballots.size();
            if (res.winner)
                j["winner"] = profile.names[std::size_t(*res.winner)];
            else
                j["winner"] = nullptr;
            if (res.cycle) {
                ordered_json cyc = ordered_json::array();
                for (int c : *res.cycle) cyc.push_back(profile.names[std::size_t(c)]);
                j["cycle"] = std::move(cyc);
            } else {
                j["cycle"] = nullptr;
            }
            j["prefer"] = res.tournament.prefer;
            write_output(j.dump(2) + "\n", out_path);
        } else if (ec->parsed()) {
            EcScenario sc;
            std::vector<std::string> warnings;
            sc.states = load_states_file(states_path, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            sc.samples = parse_count(samples_text, "--samples");
            sc.seed = seed;
            if (!sweep_eps_text.empty()) {
                std::ostringstream csv;
                csv << "epsilon,majority,majority_stderr,college,college_stderr,ratio,"
                       "ratio_stderr\n";
                for (double e : parse_sweep(sweep_eps_text, "--sweep-eps")) {
                    sc.epsilon = e;
                    EcComparison cmp = compare_ec_vs_majority(sc, threads);
                    csv << csv_num(e) << ',' << csv_num(cmp.majority.value) << ','
                        << csv_num(cmp.majority.std_error) << ',' << csv_num(cmp.college.value)
                        << ',' << csv_num(cmp.college.std_error) << ',' << csv_num(cmp.ratio)
                        << ',' << csv_num(cmp.ratio_se) << '\n';
                }
                write_output(csv.str(), out_path);
            } else {
                sc.epsilon = epsilon;
                EcComparison cmp = compare_ec_vs_majority(sc, threads);
                ordered_json j;
                j["m"] = cmp.m;
                j["total_voters"] = cmp.total_voters;
                j["epsilon"] = cmp.epsilon;
                j["samples"] = cmp.samples;
                j["seed"] = cmp.seed;
                j["majority"] = estimate_node(cmp.majority);
                j["college"] = estimate_node(cmp.college);
                j["ratio"] = cmp.ratio;
                j["ratio_stderr"] = cmp.ratio_se;
                j["asymptotic_ratio"] = cmp.asymptotic_ratio;
                write_output(j.dump(2) + "\n", out_path);
            }
        } else if (meth->parsed()) {
            Method m = resolve_method(method_text, n_flag);
            if (!save_table_path.empty()) {
                if (!m.dense())
                    throw DomainError("method has no dense table to save (n > 24)");
                save_table_file(*m.table(), save_table_path);
            }
            if (!save_spec_path.empty()) {
                if (!m.spec())
                    throw DomainError("method was built from a raw table; no spec to save");
                write_output(method_spec_to_json(*m.spec(), m.n()), save_spec_path);
            }
            ordered_json j;
            j["n"] = m.n();
            j["dense"] = m.dense();
            j["tie_reachable"] = m.tie_reachable() == TieReach::No    ? "no"
                                 : m.tie_reachable() == TieReach::Yes ? "yes"
                                                                      : "unknown";
            j["expectation"] = scalar_node(expectation(m, {p}));
            if (m.dense()) j["count_plus"] = m.table()->count_plus();
            write_output(j.dump(2) + "\n", out_path);
        }
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
