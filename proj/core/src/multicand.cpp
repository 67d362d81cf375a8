#include "stabvote/multicand.hpp"

#include "stabvote/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace stabvote {

void validate_multi_votes(const MultiVoteVector& votes, int k) {
    if (votes.empty()) throw DomainError("empty vote vector");
    if (k < 2 || k > 255) throw DomainError("candidate count must lie in [2, 255]");
    for (std::uint8_t v : votes)
        if (int(v) >= k) throw DomainError("candidate id out of range");
}

PluralityResult plurality(const MultiVoteVector& votes, int k, TieRule rule, CounterRng* rng) {
    validate_multi_votes(votes, k);
    std::vector<std::uint32_t> counts(k, 0);
    for (std::uint8_t v : votes) ++counts[v];
    std::uint32_t best = *std::max_element(counts.begin(), counts.end());
    std::vector<int> leaders;
    for (int c = 0; c < k; ++c)
        if (counts[c] == best) leaders.push_back(c);
    if (leaders.size() == 1) return {leaders[0], false};
    if (rule == TieRule::LowestId) return {leaders[0], true};
    if (!rng) throw DomainError("seeded-random tie rule needs an rng");
    return {leaders[rng->next_below(std::uint32_t(leaders.size()))], true};
}

// k^n when it fits under the dense cap
static std::optional<std::uint64_t> dense_size(int n, int k) {
    std::uint64_t sz = 1;
    for (int i = 0; i < n; ++i) {
        if (sz > N_MULTI / std::uint64_t(k)) return {};
        sz *= std::uint64_t(k);
    }
    return sz;
}

MultiFunction::MultiFunction(int n, int k, std::vector<std::uint8_t> table) : n_(n), k_(k) {
    if (n < 1) throw DomainError("voter count must be positive");
    if (k < 2 || k > 255) throw DomainError("candidate count must lie in [2, 255]");
    auto sz = dense_size(n, k);
    if (!sz) throw DomainError("dense table exceeds N_MULTI entries");
    if (table.size() != *sz) throw DomainError("table size must be k^n");
    for (std::uint8_t v : table)
        if (v >= k) throw DomainError("table entry out of range");
    table_ = std::move(table);
}

MultiFunction MultiFunction::plurality_fn(int n, int k) {
    if (n < 1) throw DomainError("voter count must be positive");
    if (k < 2 || k > 255) throw DomainError("candidate count must lie in [2, 255]");
    MultiFunction f;
    f.n_ = n;
    f.k_ = k;
    f.is_plurality_ = true;
    if (auto sz = dense_size(n, k)) {
        f.table_.resize(*sz);
        MultiVoteVector votes(n, 0);
        std::vector<std::uint32_t> counts(k, 0);
        counts[0] = std::uint32_t(n);
        for (std::uint64_t idx = 0;; ++idx) {
            std::uint32_t best = *std::max_element(counts.begin(), counts.end());
            for (int c = 0; c < k; ++c)
                if (counts[c] == best) {
                    f.table_[idx] = std::uint8_t(c);
                    break;
                }
            if (idx + 1 == *sz) break;
            // odometer step, maintaining the count vector
            for (int i = 0;; ++i) {
                --counts[votes[i]];
                if (++votes[i] < k) {
                    ++counts[votes[i]];
                    break;
                }
                votes[i] = 0;
                ++counts[0];
            }
        }
    }
    return f;
}

std::uint64_t MultiFunction::size() const {
    if (table_.empty()) throw DomainError("lazy function has no dense size");
    return table_.size();
}

int MultiFunction::eval_index(std::uint64_t idx) const {
    if (table_.empty()) throw DomainError("eval_index requires a dense table");
    return table_[idx];
}

int MultiFunction::evaluate(const MultiVoteVector& votes) const {
    if (int(votes.size()) != n_) throw DomainError("vote vector length mismatch");
    validate_multi_votes(votes, k_);
    if (!table_.empty()) {
        std::uint64_t idx = 0, place = 1;
        for (int i = 0; i < n_; ++i, place *= std::uint64_t(k_)) idx += votes[i] * place;
        return table_[idx];
    }
    return plurality(votes, k_).winner;
}

// ---- k-candidate stability -----------------------------------------------------

StabilityEstimate stability_k_exact(const MultiFunction& f, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
    if (!f.table()) throw DomainError("exact stability requires a dense table (k^n <= N_MULTI)");
    const auto& tab = *f.table();
    int n = f.n(), k = f.k();
    std::uint64_t sz = tab.size();
    std::vector<double> h(sz);
    long double agree = 0.0L;
    for (int c = 0; c < k; ++c) {
        for (std::uint64_t idx = 0; idx < sz; ++idx) h[idx] = tab[idx] == c ? 1.0 : 0.0;
        // h becomes P[f(Y)=c | X=x] via one averaging pass per coordinate
        std::uint64_t stride = 1;
        for (int i = 0; i < n; ++i, stride *= std::uint64_t(k)) {
            std::uint64_t block = stride * std::uint64_t(k);
            for (std::uint64_t base = 0; base < sz; base += block)
                for (std::uint64_t lo = 0; lo < stride; ++lo) {
                    double sum = 0.0;
                    for (int v = 0; v < k; ++v) sum += h[base + lo + v * stride];
                    double mixed = (1.0 - rho) * (sum / k);
                    for (int v = 0; v < k; ++v) {
                        double& e = h[base + lo + v * stride];
                        e = rho * e + mixed;
                    }
                }
        }
        for (std::uint64_t idx = 0; idx < sz; ++idx)
            if (tab[idx] == c) agree += h[idx];
    }
    StabilityEstimate est;
    est.value = std::clamp(double(agree / (long double)sz), 0.0, 1.0);
    est.exact = true;
    return est;
}

StabilityEstimate stability_k_mc(const MultiFunction& f, double rho, std::uint64_t samples,
                                 std::uint64_t seed, int threads) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
    if (samples < 1) throw DomainError("samples must be >= 1");
    int n = f.n(), k = f.k();

    int nthreads = resolve_threads(threads);
    std::vector<std::uint64_t> agree_w(std::size_t(std::max(1, nthreads)), 0);
    parallel_ranges(samples, nthreads, [&](int w, std::uint64_t b, std::uint64_t e) {
        MultiVoteVector x(n), y(n);
        std::uint64_t agree = 0;
        for (std::uint64_t s = b; s < e; ++s) {
            CounterRng rng(seed, s);
            for (int i = 0; i < n; ++i) {
                x[i] = std::uint8_t(rng.next_below(std::uint32_t(k)));
                bool keep = rng.next_double() < rho;
                y[i] = keep ? x[i] : std::uint8_t(rng.next_below(std::uint32_t(k)));
            }
            if (f.evaluate(x) == f.evaluate(y)) ++agree;
        }
        agree_w[std::size_t(w)] = agree;
    });
    std::uint64_t agree = 0;
    for (std::uint64_t a : agree_w) agree += a;

    StabilityEstimate est;
    est.samples = samples;
    est.seed = seed;
    est.value = double(agree) / double(samples);
    est.std_error = samples > 1 ? std::sqrt(std::max(0.0, est.value * (1.0 - est.value)) /
                                            double(samples - 1))
                                : 0.0;
    return est;
}

// ---- ranked profiles -------------------------------------------------------------

void validate_profile(const RankedProfile& profile) {
    if (profile.m < 1) throw DomainError("profile needs at least one candidate");
    if (profile.ballots.empty()) throw DomainError("profile needs at least one ballot");
    for (const auto& b : profile.ballots) {
        if (int(b.size()) != profile.m) throw DomainError("ballot length must equal m");
        std::vector<char> seen(profile.m, 0);
        for (int c : b) {
            if (c < 0 || c >= profile.m || seen[c]) throw DomainError("ballot is not a permutation");
            seen[c] = 1;
        }
    }
    if (!profile.names.empty() && int(profile.names.size()) != profile.m)
        throw DomainError("name list must have one entry per candidate");
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

static bool all_integers(const std::vector<std::vector<std::string>>& rows) {
    for (const auto& row : rows)
        for (const auto& tok : row) {
            if (tok.empty()) return false;
            for (char ch : tok)
                if (!std::isdigit((unsigned char)ch)) return false;
        }
    return true;
}

RankedProfile load_profile(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto toks = split_csv_row(line);
        for (const auto& t : toks)
            if (t.empty())
                throw DomainError("profile parse error at line " + std::to_string(lineno) +
                                  ": empty field");
        if (!rows.empty() && toks.size() != rows.front().size())
            throw DomainError("profile parse error at line " + std::to_string(lineno) +
                              ": expected " + std::to_string(rows.front().size()) + " fields");
        rows.push_back(std::move(toks));
    }
    if (rows.empty()) throw DomainError("profile contains no ballots");

    RankedProfile p;
    p.m = int(rows.front().size());
    if (all_integers(rows)) {
        for (int c = 0; c < p.m; ++c) p.names.push_back(std::to_string(c));
        for (const auto& row : rows) {
            std::vector<int> b;
            for (const auto& tok : row) b.push_back(std::stoi(tok));
            p.ballots.push_back(std::move(b));
        }
    } else {
        std::map<std::string, int> id; // sorted by name
        for (const auto& row : rows)
            for (const auto& tok : row) id.emplace(tok, 0);
        if (int(id.size()) != p.m)
            throw DomainError("profile names do not form a consistent candidate set");
        int next = 0;
        for (auto& [name, cid] : id) {
            cid = next++;
            p.names.push_back(name);
        }
        for (const auto& row : rows) {
            std::vector<int> b;
            for (const auto& tok : row) b.push_back(id[tok]);
            p.ballots.push_back(std::move(b));
        }
    }
    validate_profile(p);
    return p;
}

RankedProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open: " + path);
    return load_profile(in);
}

Tournament pairwise_tournament(const RankedProfile& profile) {
    validate_profile(profile);
    Tournament t;
    t.m = profile.m;
    t.prefer.assign(profile.m, std::vector<long long>(profile.m, 0));
    std::vector<int> rank(profile.m);
    for (const auto& b : profile.ballots) {
        for (int pos = 0; pos < profile.m; ++pos) rank[b[pos]] = pos;
        for (int a = 0; a < profile.m; ++a)
            for (int c = 0; c < profile.m; ++c)
                if (a != c && rank[a] < rank[c]) ++t.prefer[a][c];
    }
    return t;
}

CondorcetResult condorcet_analysis(const RankedProfile& profile) {
    CondorcetResult res;
    res.tournament = pairwise_tournament(profile);
    const Tournament& t = res.tournament;
    for (int a = 0; a < t.m; ++a) {
        bool all = true;
        for (int b = 0; b < t.m; ++b)
            if (b != a && !t.beats(a, b)) {
                all = false;
                break;
            }
        if (all) {
            res.winner = a;
            return res;
        }
    }
    for (int a = 0; a < t.m; ++a)
        for (int b = 0; b < t.m; ++b)
            for (int c = 0; c < t.m; ++c)
                if (a != b && b != c && a != c && t.beats(a, b) && t.beats(b, c) &&
                    t.beats(c, a)) {
                    res.cycle = {a, b, c};
                    return res;
                }
    return res;
}

} // namespace stabvote
