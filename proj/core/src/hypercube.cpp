#include "stabvote/hypercube.hpp"

#include "internal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace stabvote {

Int binomial_coeff(long long n, long long k) {
    if (n < 0 || k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    Int r = 1;
    for (long long j = 1; j <= k; ++j) {
        r *= n - k + j;
        r /= j;
    }
    return r;
}

// pmf recurrence, one big-int op per step
Int binomial_tail_count(long long n, long long k_min) {
    if (k_min <= 0) return Int(1) << unsigned(n);
    if (k_min > n) return 0;
    Int c = 1; // C(n, 0)
    long long k = 0;
    while (k < k_min) {
        c *= n - k;
        ++k;
        c /= k;
    }
    Int sum = 0;
    while (true) {
        sum += c;
        if (k == n) break;
        c *= n - k;
        ++k;
        c /= k;
    }
    return sum;
}

void validate_votes(const VoteVector& x) {
    if (x.empty()) throw DomainError("empty vote vector");
    for (int8_t v : x)
        if (v != -1 && v != 1) throw DomainError("vote entries must be -1 or +1");
}

std::uint64_t vote_index(const VoteVector& x) {
    if (x.size() > 63) throw DomainError("vote_index requires n <= 63");
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] == 1) idx |= std::uint64_t(1) << i;
    return idx;
}

VoteVector vote_from_index(int n, std::uint64_t idx) {
    if (n < 1 || n > 63) throw DomainError("vote_from_index requires 1 <= n <= 63");
    VoteVector x(n);
    for (int i = 0; i < n; ++i)
        x[i] = (idx >> i) & 1 ? +1 : -1;
    return x;
}

void validate_measure(const BiasedMeasure& m) {
    if (!(m.p > 0.0 && m.p < 1.0)) throw DomainError("measure requires 0 < p < 1");
}

BooleanFunction::BooleanFunction(int n) : n_(n) {
    if (n < 1 || n > N_DENSE)
        throw DomainError("dense truth table requires 1 <= n <= " + std::to_string(N_DENSE));
    words_.assign((size() + 63) / 64, 0);
}

int BooleanFunction::evaluate(const VoteVector& x) const {
    validate_votes(x);
    if (int(x.size()) != n_) throw DomainError("vote vector length mismatch");
    return eval_index(vote_index(x));
}

void BooleanFunction::set_index(std::uint64_t idx, int value) {
    if (value == 1)
        words_[idx >> 6] |= std::uint64_t(1) << (idx & 63);
    else
        words_[idx >> 6] &= ~(std::uint64_t(1) << (idx & 63));
}

std::uint64_t BooleanFunction::count_plus() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
}

int un_council_n(UNEra era) { return era == UNEra::Pre1965 ? 11 : 15; }

MethodSpec equal_two_tier(int m, int state_size) {
    if (m < 1 || state_size < 1) throw DomainError("two-tier sizes must be positive");
    TwoTier tt;
    tt.states.resize(m);
    int v = 1;
    for (int s = 0; s < m; ++s)
        for (int j = 0; j < state_size; ++j) tt.states[s].push_back(v++);
    tt.inner = std::make_shared<MethodSpec>(MethodSpec{Majority{}});
    tt.outer = std::make_shared<MethodSpec>(MethodSpec{Majority{}});
    return MethodSpec{std::move(tt)};
}

// ---- validation ------------------------------------------------------------

static void validate_spec(const MethodSpec& spec, int n);

namespace {
struct ValidateVisitor {
    int n;
    void operator()(const Dictator& d) const {
        if (d.i < 1 || d.i > n) throw DomainError("dictator index out of range");
    }
    void operator()(const Majority&) const {}
    void operator()(const ThresholdMajority& t) const {
        if (!std::isfinite(t.t)) throw DomainError("threshold must be finite");
    }
    void operator()(const WeightedMajority& w) const {
        if (int(w.w.size()) != n) throw DomainError("weight vector length must equal n");
        if (!std::isfinite(w.t)) throw DomainError("threshold must be finite");
        for (double wi : w.w)
            if (!std::isfinite(wi)) throw DomainError("weights must be finite");
    }
    void operator()(const TwoTier& tt) const {
        if (!tt.inner || !tt.outer) throw DomainError("two-tier requires inner and outer specs");
        if (tt.states.empty()) throw DomainError("two-tier requires at least one state");
        std::vector<char> seen(n + 1, 0);
        for (const auto& st : tt.states) {
            if (st.empty()) throw DomainError("two-tier states must be nonempty");
            for (int v : st) {
                if (v < 1 || v > n) throw DomainError("two-tier voter id out of range");
                if (seen[v]) throw DomainError("two-tier states must be disjoint");
                seen[v] = 1;
            }
        }
        for (int v = 1; v <= n; ++v)
            if (!seen[v]) throw DomainError("two-tier states must cover every voter");
        for (const auto& st : tt.states) validate_spec(*tt.inner, int(st.size()));
        validate_spec(*tt.outer, int(tt.states.size()));
    }
    void operator()(const UNCouncil& u) const {
        if (n != un_council_n(u.era))
            throw DomainError("UN council requires n=" + std::to_string(un_council_n(u.era)));
    }
};
} // namespace

static void validate_spec(const MethodSpec& spec, int n) {
    if (n < 1) throw DomainError("voter count must be positive");
    std::visit(ValidateVisitor{n}, spec.v);
}

// ---- prepared lazy evaluation ----------------------------------------------

static bool integral_weights(const WeightedMajority& w) {
    double total = 0;
    for (double wi : w.w) {
        if (wi != std::floor(wi)) return false;
        total += std::fabs(wi);
    }
    return total <= 9.0e15; // keep int64 sums exact
}

// ---- tie reachability ------------------------------------------------------

// achievable vote sums are {-n, -n+2, ..., n}; a tie needs sum == t exactly
static bool threshold_tie_reachable(int n, double t) {
    if (t != std::floor(t) || std::fabs(t) > n) return false;
    long long ti = (long long)t;
    return ((n + ti) % 2) == 0;
}

// subset-sum reachability of t over sums of +-w_i (integer weights)
static TieReach weighted_tie_reachable(const std::vector<long long>& w, double t) {
    if (t != std::floor(t)) return TieReach::No;
    long long total = 0;
    for (long long wi : w) total += std::llabs(wi);
    if (std::fabs(t) > double(total)) return TieReach::No;
    if (total > (1 << 22) || w.size() > 4096) return TieReach::Unknown;
    std::vector<char> reach(2 * total + 1, 0), nxt;
    reach[total] = 1;
    for (long long wi : w) {
        nxt.assign(2 * total + 1, 0);
        for (long long s = -total; s <= total; ++s)
            if (reach[s + total]) {
                nxt[s + wi + total] = 1;
                nxt[s - wi + total] = 1;
            }
        reach.swap(nxt);
    }
    return reach[(long long)t + total] ? TieReach::Yes : TieReach::No;
}

// ---- dense materialization ---------------------------------------------------

int ceil_half(int n, double t) { return int(std::ceil((n + t) / 2.0)); }

static void materialize_dictator(BooleanFunction& f, int j) {
    static constexpr std::uint64_t pat[6] = {
        0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
        0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
    auto& words = f.words();
    for (std::size_t wi = 0; wi < words.size(); ++wi)
        words[wi] = j < 6 ? pat[j] : ((wi >> (j - 6)) & 1 ? ~std::uint64_t(0) : 0);
    if (f.n() < 6) { // clear bits beyond 2^n
        std::uint64_t mask = (std::uint64_t(1) << f.size()) - 1;
        words[0] &= mask;
    }
}

static void materialize_threshold(BooleanFunction& f, double t) {
    int n = f.n();
    int kmin = ceil_half(n, t);
    for (std::uint64_t idx = 0; idx < f.size(); ++idx)
        if (std::popcount(idx) >= kmin) f.set_index(idx, 1);
}

namespace {
struct WeightedDense {
    bool tie_hit = false;
};
} // namespace

template <typename Num>
static WeightedDense materialize_weighted(BooleanFunction& f, const std::vector<Num>& w,
                                          double t) {
    WeightedDense res;
    int n = f.n();
    Num sum = 0;
    for (Num wi : w) sum -= wi;
    std::uint64_t g = 0;
    std::uint64_t total = f.size();
    for (std::uint64_t i = 0;; ++i) {
        if (double(sum) == t) res.tie_hit = true;
        if (double(sum) >= t) f.set_index(g, 1);
        if (i + 1 == total) break;
        int b = std::countr_zero(i + 1);
        g ^= std::uint64_t(1) << b;
        if ((g >> b) & 1)
            sum += 2 * w[b];
        else
            sum -= 2 * w[b];
    }
    return res;
}

static void materialize_un(BooleanFunction& f, UNEra era) {
    std::uint64_t perm = 0b11111;
    int need = era == UNEra::Pre1965 ? 2 : 4;
    for (std::uint64_t idx = 0; idx < f.size(); ++idx) {
        bool pass = (idx & perm) == perm && std::popcount(idx >> 5) >= need;
        if (pass) f.set_index(idx, 1);
    }
}

// ---- Method ------------------------------------------------------------------

static TieReach combine_tie(TieReach a, TieReach b) {
    if (a == TieReach::Yes || b == TieReach::Yes) return TieReach::Yes;
    if (a == TieReach::Unknown || b == TieReach::Unknown) return TieReach::Unknown;
    return TieReach::No;
}

Method::Method(MethodSpec spec, int n) : n_(n), spec_(std::move(spec)) {
    validate_spec(*spec_, n);

    auto rt = std::make_shared<MethodRuntime>();
    TieReach tie = TieReach::Unknown;

    if (const auto* d = std::get_if<Dictator>(&spec_->v)) {
        (void)d;
        tie = TieReach::No;
    } else if (std::get_if<Majority>(&spec_->v)) {
        tie = threshold_tie_reachable(n, 0.0) ? TieReach::Yes : TieReach::No;
    } else if (const auto* t = std::get_if<ThresholdMajority>(&spec_->v)) {
        tie = threshold_tie_reachable(n, t->t) ? TieReach::Yes : TieReach::No;
    } else if (const auto* w = std::get_if<WeightedMajority>(&spec_->v)) {
        if (integral_weights(*w)) {
            MethodRuntime::WeightedInt wi;
            wi.t = w->t;
            for (double x : w->w) wi.w.push_back((long long)x);
            tie = weighted_tie_reachable(wi.w, w->t);
            rt->v = std::move(wi);
        } else {
            rt->v = MethodRuntime::WeightedReal{w->w, w->t};
            tie = TieReach::Unknown;
        }
    } else if (const auto* tt = std::get_if<TwoTier>(&spec_->v)) {
        MethodRuntime::TwoTierRt r;
        tie = TieReach::No;
        for (const auto& st : tt->states) {
            std::vector<int> zero_based;
            for (int v : st) zero_based.push_back(v - 1);
            r.states.push_back(std::move(zero_based));
            r.inner.emplace_back(*tt->inner, int(st.size()));
            tie = combine_tie(tie, r.inner.back().tie_reachable());
        }
        r.outer = std::make_unique<Method>(*tt->outer, int(tt->states.size()));
        tie = combine_tie(tie, r.outer->tie_reachable());
        rt->v = std::move(r);
    } else if (std::get_if<UNCouncil>(&spec_->v)) {
        tie = TieReach::No;
    }

    rt_ = std::move(rt);

    if (n <= N_DENSE) {
        BooleanFunction table(n);
        if (const auto* d = std::get_if<Dictator>(&spec_->v)) {
            materialize_dictator(table, d->i - 1);
        } else if (std::get_if<Majority>(&spec_->v)) {
            materialize_threshold(table, 0.0);
        } else if (const auto* t = std::get_if<ThresholdMajority>(&spec_->v)) {
            materialize_threshold(table, t->t);
        } else if (const auto* w = std::get_if<WeightedMajority>(&spec_->v)) {
            if (const auto* wi = std::get_if<MethodRuntime::WeightedInt>(&rt_->v)) {
                materialize_weighted(table, wi->w, wi->t);
            } else {
                auto res = materialize_weighted(table, w->w, w->t);
                if (res.tie_hit) tie = TieReach::Yes;
            }
        } else if (const auto* tt = std::get_if<TwoTier>(&spec_->v)) {
            const auto& r = std::get<MethodRuntime::TwoTierRt>(rt_->v);
            int m = int(tt->states.size());
            VoteVector winners(m);
            for (std::uint64_t idx = 0; idx < table.size(); ++idx) {
                for (int s = 0; s < m; ++s) {
                    std::uint64_t sub = 0;
                    const auto& vs = r.states[s];
                    for (std::size_t j = 0; j < vs.size(); ++j)
                        sub |= ((idx >> vs[j]) & 1) << j;
                    winners[s] = int8_t(r.inner[s].table()->eval_index(sub));
                }
                if (r.outer->evaluate(winners) == 1) table.set_index(idx, 1);
            }
        } else if (const auto* u = std::get_if<UNCouncil>(&spec_->v)) {
            materialize_un(table, u->era);
        }
        table_ = std::move(table);
    }

    tie_reachable_ = tie;
}

Method::Method(BooleanFunction table)
    : n_(table.n()), table_(std::move(table)), tie_reachable_(TieReach::No) {
    // raw tables carry no sum structure, so the zero rule never fires
}

Method make_method(const MethodSpec& spec, int n) { return Method(spec, n); }

int Method::evaluate_index(std::uint64_t idx) const {
    if (table_) return table_->eval_index(idx);
    return evaluate(vote_from_index(n_, idx));
}

int Method::evaluate(const VoteVector& x) const {
    if (int(x.size()) != n_) throw DomainError("vote vector length mismatch");
    if (table_) return table_->eval_index(vote_index(x));
    validate_votes(x);

    const MethodSpec& s = *spec_;
    if (const auto* d = std::get_if<Dictator>(&s.v)) return x[d->i - 1];
    if (std::get_if<Majority>(&s.v)) {
        long long sum = 0;
        for (int8_t v : x) sum += v;
        return sum >= 0 ? +1 : -1;
    }
    if (const auto* t = std::get_if<ThresholdMajority>(&s.v)) {
        long long sum = 0;
        for (int8_t v : x) sum += v;
        return double(sum) >= t->t ? +1 : -1;
    }
    if (std::get_if<WeightedMajority>(&s.v)) {
        if (const auto* wi = std::get_if<MethodRuntime::WeightedInt>(&rt_->v)) {
            long long dot = 0;
            for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * wi->w[i];
            return double(dot) >= wi->t ? +1 : -1;
        }
        const auto& wr = std::get<MethodRuntime::WeightedReal>(rt_->v);
        double dot = 0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * wr.w[i];
        return dot >= wr.t ? +1 : -1;
    }
    if (std::get_if<TwoTier>(&s.v)) {
        const auto& r = std::get<MethodRuntime::TwoTierRt>(rt_->v);
        VoteVector winners(r.states.size());
        VoteVector sub;
        for (std::size_t st = 0; st < r.states.size(); ++st) {
            sub.clear();
            for (int v : r.states[st]) sub.push_back(x[v]);
            winners[st] = int8_t(r.inner[st].evaluate(sub));
        }
        return r.outer->evaluate(winners);
    }
    const auto& u = std::get<UNCouncil>(s.v);
    int need = u.era == UNEra::Pre1965 ? 2 : 4;
    for (int i = 0; i < 5; ++i)
        if (x[i] != 1) return -1;
    int yes = 0;
    for (std::size_t i = 5; i < x.size(); ++i)
        if (x[i] == 1) ++yes;
    return yes >= need ? +1 : -1;
}

// ---- expectation ------------------------------------------------------------

namespace {
struct ExpResult {
    std::optional<Rat> exact;
    double value = 0.0;
};
} // namespace

// exact dyadic decomposition of a double in (0,1): p = a / 2^s
static void dyadic(double p, Int& a, unsigned& s) {
    int e = 0;
    double m = std::frexp(p, &e); // p = m * 2^e, m in [0.5, 1)
    Int num = 0;
    for (int i = 0; i < 53; ++i) {
        m *= 2;
        num <<= 1;
        if (m >= 1.0) {
            num += 1;
            m -= 1.0;
        }
    }
    // p = num * 2^(e-53)
    int shift = 53 - e;
    while (shift > 0 && (num & 1) == 0) {
        num >>= 1;
        --shift;
    }
    a = num;
    s = unsigned(std::max(shift, 0));
}

Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("value must be finite");
    if (x < 0) return -rat_from_double(-x);
    Int a;
    unsigned s;
    dyadic(x, a, s);
    return Rat(a, Int(1) << s);
}

// P[Bin(n, p) >= k_min], exact
Rat binomial_tail_prob(long long n, long long k_min, const Rat& p) {
    if (k_min <= 0) return 1;
    if (k_min > n) return 0;
    Rat q = 1 - p;
    // pmf recurrence from k = 0
    Rat pmf = rat_pow(q, unsigned(n));
    Rat tail = 0;
    for (long long k = 0; k <= n; ++k) {
        if (k >= k_min) tail += pmf;
        if (k < n) pmf = pmf * Rat(n - k, k + 1) * p / q;
    }
    return tail;
}

// floating tail via log-gamma, for n beyond the exact-bias limit
double binomial_tail_prob_f(long long n, long long k_min, double p) {
    if (k_min <= 0) return 1.0;
    if (k_min > n) return 0.0;
    double lp = std::log(p), lq = std::log1p(-p);
    double acc = 0.0;
    for (long long k = k_min; k <= n; ++k) {
        double lg = std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
                    std::lgamma(double(n - k + 1)) + k * lp + (n - k) * lq;
        acc += std::exp(lg);
    }
    return std::min(acc, 1.0);
}

static ExpResult expectation_spec(const MethodSpec& spec, int n, const BiasedMeasure& m);

// Poisson-binomial count distribution over heterogeneous biases, exact
template <typename T>
static std::vector<T> poisson_binomial(const std::vector<T>& ps) {
    std::vector<T> dp(ps.size() + 1, T(0));
    dp[0] = T(1);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        // in-place downdate, high index first
        for (std::size_t j = i + 1; j-- > 0;) {
            dp[j + 1] += dp[j] * ps[i];
            dp[j] *= (T(1) - ps[i]);
        }
    }
    return dp;
}

namespace {
// expectation of an outer spec when coordinate i is +1 with bias ps[i]
template <typename T>
struct HeteroEval {
    static T run(const MethodSpec& spec, const std::vector<T>& ps);
};

template <typename T>
T hetero_threshold(const std::vector<T>& ps, double t) {
    int m = int(ps.size());
    int kmin = ceil_half(m, t);
    if (kmin <= 0) return T(1);
    if (kmin > m) return T(-1);
    auto dp = poisson_binomial(ps);
    T tail(0);
    for (int k = kmin; k <= m; ++k) tail += dp[k];
    return T(2) * tail - T(1);
}

template <typename T>
T HeteroEval<T>::run(const MethodSpec& spec, const std::vector<T>& ps) {
    int m = int(ps.size());
    if (const auto* d = std::get_if<Dictator>(&spec.v)) return T(2) * ps[d->i - 1] - T(1);
    if (std::get_if<Majority>(&spec.v)) return hetero_threshold(ps, 0.0);
    if (const auto* t = std::get_if<ThresholdMajority>(&spec.v))
        return hetero_threshold(ps, t->t);
    if (const auto* w = std::get_if<WeightedMajority>(&spec.v)) {
        long long total = 0;
        for (double wi : w->w) {
            if (wi != std::floor(wi)) throw DomainError("no closed-form expectation: non-integer outer weights");
            total += std::llabs((long long)wi);
        }
        if (total > 4096) throw DomainError("no closed-form expectation: outer weight range too large");
        std::vector<T> dp(2 * total + 1, T(0));
        dp[total] = T(1); // offset by +total
        for (int i = 0; i < m; ++i) {
            long long wi = (long long)w->w[i];
            std::vector<T> nd(2 * total + 1, T(0));
            for (long long s = -total; s <= total; ++s) {
                if (dp[s + total] == T(0)) continue;
                nd[s + wi + total] += dp[s + total] * ps[i];
                nd[s - wi + total] += dp[s + total] * (T(1) - ps[i]);
            }
            dp.swap(nd);
        }
        T win(0);
        for (long long s = -total; s <= total; ++s)
            if (double(s) >= w->t) win += dp[s + total];
        return T(2) * win - T(1);
    }
    if (const auto* tt = std::get_if<TwoTier>(&spec.v)) {
        std::vector<T> inner_ps;
        for (const auto& st : tt->states) {
            std::vector<T> sub;
            for (int v : st) sub.push_back(ps[v - 1]);
            T e = HeteroEval<T>::run(*tt->inner, sub);
            inner_ps.push_back((T(1) + e) / T(2));
        }
        return HeteroEval<T>::run(*tt->outer, inner_ps);
    }
    const auto& u = std::get<UNCouncil>(spec.v);
    int need = u.era == UNEra::Pre1965 ? 2 : 4;
    T perm(1);
    for (int i = 0; i < 5; ++i) perm *= ps[i];
    std::vector<T> rest(ps.begin() + 5, ps.end());
    auto dp = poisson_binomial(rest);
    T tail(0);
    for (std::size_t k = need; k < dp.size(); ++k) tail += dp[k];
    return T(2) * perm * tail - T(1);
}
} // namespace

static ExpResult expectation_spec(const MethodSpec& spec, int n, const BiasedMeasure& m) {
    ExpResult res;
    if (const auto* d = std::get_if<Dictator>(&spec.v)) {
        (void)d;
        res.exact = Rat(2) * rat_from_double(m.p) - 1;
        res.value = to_double(*res.exact);
        return res;
    }
    if (std::get_if<Majority>(&spec.v) || std::get_if<ThresholdMajority>(&spec.v)) {
        double t = 0.0;
        if (const auto* tm = std::get_if<ThresholdMajority>(&spec.v)) t = tm->t;
        long long kmin = ceil_half(n, t);
        if (m.uniform()) {
            Int tail = binomial_tail_count(n, kmin);
            res.exact = Rat(2 * tail - (Int(1) << unsigned(n)), Int(1) << unsigned(n));
            res.value = to_double(*res.exact);
        } else if (n <= EXACT_BIAS_LIMIT) {
            Rat tail = binomial_tail_prob(n, kmin, rat_from_double(m.p));
            res.exact = 2 * tail - 1;
            res.value = to_double(*res.exact);
        } else {
            res.value = 2.0 * binomial_tail_prob_f(n, kmin, m.p) - 1.0;
        }
        return res;
    }
    if (std::get_if<WeightedMajority>(&spec.v))
        throw DomainError("no closed-form expectation for weighted majority with n > N_DENSE");
    if (const auto* tt = std::get_if<TwoTier>(&spec.v)) {
        // per-state winner biases, then the outer method on heterogeneous biases
        bool all_exact = true;
        std::vector<Rat> exact_ps;
        std::vector<double> float_ps;
        for (const auto& st : tt->states) {
            ExpResult e = expectation_spec(*tt->inner, int(st.size()), m);
            if (!e.exact) all_exact = false;
            if (all_exact) exact_ps.push_back((1 + *e.exact) / 2);
            float_ps.push_back((1.0 + e.value) / 2.0);
        }
        if (all_exact) {
            // equal biases collapse to a plain binomial tail; detect to keep
            // big equal-state instances cheap
            bool equal = std::all_of(exact_ps.begin(), exact_ps.end(),
                                     [&](const Rat& r) { return r == exact_ps[0]; });
            const auto* om = std::get_if<Majority>(&tt->outer->v);
            const auto* ot = std::get_if<ThresholdMajority>(&tt->outer->v);
            if (equal && (om || ot)) {
                double t = ot ? ot->t : 0.0;
                long long kmin = ceil_half(int(exact_ps.size()), t);
                Rat tail = binomial_tail_prob(exact_ps.size(), kmin, exact_ps[0]);
                res.exact = 2 * tail - 1;
            } else {
                res.exact = HeteroEval<Rat>::run(*tt->outer, exact_ps);
            }
            res.value = to_double(*res.exact);
        } else {
            res.value = HeteroEval<double>::run(*tt->outer, float_ps);
        }
        return res;
    }
    const auto& u = std::get<UNCouncil>(spec.v);
    int need = u.era == UNEra::Pre1965 ? 2 : 4;
    int nonperm = n - 5;
    Rat p = rat_from_double(m.p);
    Rat pass = rat_pow(p, 5) * binomial_tail_prob(nonperm, need, p);
    res.exact = 2 * pass - 1;
    res.value = to_double(*res.exact);
    return res;
}

ExactScalar expectation(const Method& f, const BiasedMeasure& measure) {
    validate_measure(measure);
    ExactScalar out{Rat(0), 0.0, false};

    if (f.table()) {
        const BooleanFunction& t = *f.table();
        int n = t.n();
        if (measure.uniform()) {
            Int plus = t.count_plus();
            out.exact = Rat(2 * plus - (Int(1) << unsigned(n)), Int(1) << unsigned(n));
        } else {
            // group by popcount level: P(x) depends only on #(+1 votes)
            std::vector<std::uint64_t> plus_at(n + 1, 0);
            for (std::uint64_t idx = 0; idx < t.size(); ++idx)
                if (t.eval_index(idx) == 1) ++plus_at[std::popcount(idx)];
            Rat p = rat_from_double(measure.p), q = 1 - p;
            Rat e = 0;
            for (int k = 0; k <= n; ++k) {
                Rat level = rat_pow(p, unsigned(k)) * rat_pow(q, unsigned(n - k));
                e += level * Rat(2 * Int(plus_at[k]) - binomial_coeff(n, k));
            }
            out.exact = e;
        }
        out.value = to_double(out.exact);
        out.is_exact = true;
        return out;
    }

    ExpResult r = expectation_spec(*f.spec(), f.n(), measure);
    if (r.exact) {
        out.exact = *r.exact;
        out.value = r.value;
        out.is_exact = true;
    } else {
        out.value = r.value;
        out.is_exact = false;
    }
    return out;
}

Int method_count_plus(const Method& f) {
    if (f.table()) return Int(f.table()->count_plus());
    ExactScalar e = expectation(f, {});
    if (!e.is_exact) throw DomainError("method has no exact vote count");
    Rat cp = (1 + e.exact) / 2 * Rat(Int(1) << unsigned(f.n()));
    if (boost::multiprecision::denominator(cp) != 1)
        throw InvariantError("count_plus produced a non-integer");
    return boost::multiprecision::numerator(cp);
}

bool same_balance(const Method& f, const Method& g) {
    if (f.n() != g.n()) throw DomainError("same_balance requires equal n");
    if (!f.table() || !g.table())
        throw DomainError("same_balance requires dense tables (n <= N_DENSE)");
    return f.table()->count_plus() == g.table()->count_plus();
}

// ---- truth-table file format -------------------------------------------------

void save_table(const BooleanFunction& f, std::ostream& out) {
    out << "n=" << f.n() << "\n";
    std::uint64_t digits = (f.size() + 3) / 4;
    std::string hex(digits, '0');
    static const char* H = "0123456789abcdef";
    for (std::uint64_t d = 0; d < digits; ++d) {
        unsigned nib = 0;
        for (unsigned b = 0; b < 4; ++b) {
            std::uint64_t bit = 4 * d + b;
            if (bit < f.size() && f.eval_index(bit) == 1) nib |= 1u << b;
        }
        hex[digits - 1 - d] = H[nib];
    }
    out << hex << "\n";
}

static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

BooleanFunction load_table(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw DomainError("truth table parse error at byte 0: missing header");
    if (header.rfind("n=", 0) != 0)
        throw DomainError("truth table parse error at byte 0: expected 'n='");
    int n = 0;
    try {
        std::size_t pos = 0;
        n = std::stoi(header.substr(2), &pos);
        if (pos + 2 != header.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw DomainError("truth table parse error at byte 2: bad voter count");
    }
    if (n < 1 || n > N_DENSE)
        throw DomainError("truth table requires 1 <= n <= " + std::to_string(N_DENSE));
    std::string hex;
    if (!std::getline(in, hex))
        throw DomainError("truth table parse error at byte " + std::to_string(header.size() + 1) +
                          ": missing table line");
    std::uint64_t offset = header.size() + 1;
    std::uint64_t expect = ((std::uint64_t(1) << n) + 3) / 4;
    if (hex.size() != expect)
        throw DomainError("truth table parse error at byte " + std::to_string(offset) +
                          ": expected " + std::to_string(expect) + " hex digits, got " +
                          std::to_string(hex.size()));
    BooleanFunction f(n);
    for (std::uint64_t i = 0; i < expect; ++i) {
        int v = hex_val(hex[i]);
        if (v < 0)
            throw DomainError("truth table parse error at byte " + std::to_string(offset + i) +
                              ": invalid hex digit");
        std::uint64_t d = expect - 1 - i;
        for (unsigned b = 0; b < 4; ++b) {
            std::uint64_t bit = 4 * d + b;
            if (bit < f.size() && (v >> b) & 1) f.set_index(bit, 1);
        }
    }
    return f;
}

void save_table_file(const BooleanFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open for writing: " + path);
    save_table(f, out);
}

BooleanFunction load_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open: " + path);
    return load_table(in);
}

} // namespace stabvote
