#include "stabvote/power.hpp"

#include "internal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace stabvote {

// ---- dense pivotal counting -------------------------------------------------

// kLowMask[j] keeps the bit positions whose j-th index bit is 0
static constexpr std::uint64_t kLowMask[6] = {
    0x5555555555555555ull, 0x3333333333333333ull, 0x0F0F0F0F0F0F0F0Full,
    0x00FF00FF00FF00FFull, 0x0000FFFF0000FFFFull, 0x00000000FFFFFFFFull};

// number of index pairs (idx, idx ^ 2^j) on which the table differs
static std::uint64_t dense_pivotal(const BooleanFunction& t, int j) {
    const auto& w = t.words();
    std::uint64_t count = 0;
    if (j < 6) {
        unsigned sh = 1u << unsigned(j);
        for (std::uint64_t word : w)
            count += std::popcount((word ^ (word >> sh)) & kLowMask[j]);
    } else {
        std::uint64_t step = std::uint64_t(1) << unsigned(j - 6);
        for (std::uint64_t wi = 0; wi < w.size(); ++wi)
            if (!(wi & step)) count += std::popcount(w[wi] ^ w[wi + step]);
    }
    return count;
}

// pivotal pairs bucketed by how many of the other voters are +1
static std::vector<std::uint64_t> dense_pivotal_levels(const BooleanFunction& t, int j) {
    std::vector<std::uint64_t> lv(t.n(), 0);
    std::uint64_t bit = std::uint64_t(1) << unsigned(j);
    for (std::uint64_t idx = 0; idx < t.size(); ++idx) {
        if (idx & bit) continue;
        if (t.eval_index(idx) != t.eval_index(idx | bit)) ++lv[std::popcount(idx)];
    }
    return lv;
}

// ---- closed forms -------------------------------------------------------------

// Flipping voter i changes [sum >= t] iff the others' sum s lies in
// [t-1, t+1). The parity of s is that of n-1, so at most one level matches;
// writes the matching plus-count k and returns whether one exists.
static bool threshold_pivot_level(int n, double t, long long& k_star) {
    for (long long s = (long long)std::ceil(t - 1.0); double(s) < t + 1.0; ++s) {
        if (((s % 2) + 2) % 2 != (n - 1) % 2) continue;
        if (s < -(n - 1) || s > n - 1) return false;
        k_star = (s + n - 1) / 2;
        return true;
    }
    return false;
}

// configurations of the other voters with weighted sum in [t-|w_i|, t+|w_i|)
static Int weighted_pivot_count(const std::vector<long long>& w, double t, int i0) {
    long long wi = std::llabs(w[i0]);
    if (wi == 0) return 0;
    long long total = 0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (int(j) != i0) total += std::llabs(w[j]);
    if (total > (1 << 22)) throw DomainError("pivotal count: weight range too large");
    std::vector<Int> dp(2 * total + 1, Int(0)), nd;
    dp[total] = 1; // sums offset by +total
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (int(j) == i0) continue;
        nd.assign(2 * total + 1, Int(0));
        for (long long s = -total; s <= total; ++s) {
            if (dp[s + total] == 0) continue;
            nd[s + w[j] + total] += dp[s + total];
            nd[s - w[j] + total] += dp[s + total];
        }
        dp.swap(nd);
    }
    Int count = 0;
    for (long long s = -total; s <= total; ++s)
        if (t - double(wi) <= double(s) && double(s) < t + double(wi)) count += dp[s + total];
    return count;
}

// same window, probability version: others draw +w_j with probability q[j]
template <typename T>
static T weighted_pivot_prob(const std::vector<long long>& w, double t, int i0,
                             const std::vector<T>& q) {
    long long wi = std::llabs(w[i0]);
    if (wi == 0) return T(0);
    long long total = 0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (int(j) != i0) total += std::llabs(w[j]);
    if (total > (1 << 22)) throw DomainError("influence: weight range too large");
    std::vector<T> dp(2 * total + 1, T(0)), nd;
    dp[total] = T(1);
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (int(j) == i0) continue;
        nd.assign(2 * total + 1, T(0));
        for (long long s = -total; s <= total; ++s) {
            if (dp[s + total] == T(0)) continue;
            nd[s + w[j] + total] += dp[s + total] * q[j];
            nd[s - w[j] + total] += dp[s + total] * (T(1) - q[j]);
        }
        dp.swap(nd);
    }
    T acc(0);
    for (long long s = -total; s <= total; ++s)
        if (t - double(wi) <= double(s) && double(s) < t + double(wi)) acc += dp[s + total];
    return acc;
}

// ---- two-tier outer pivotality -------------------------------------------------

// Counts configurations of the voters outside state s0 for which the outer
// method is pivotal in coordinate s0. Sum-structured outers use exact DP over
// the other states' winner sums; anything else falls back to enumerating the
// outer truth table (kept small).
static Int outer_pivot_configs(const MethodRuntime::TwoTierRt& rt, const MethodSpec& outer,
                               int s0) {
    int m = int(rt.states.size());
    std::vector<Int> cp(m), cm(m);
    for (int s = 0; s < m; ++s) {
        if (s == s0) continue;
        cp[s] = method_count_plus(rt.inner[s]);
        cm[s] = (Int(1) << unsigned(rt.states[s].size())) - cp[s];
    }
    if (const auto* d = std::get_if<Dictator>(&outer.v)) {
        if (d->i - 1 != s0) return 0;
        Int all = 1;
        for (int s = 0; s < m; ++s)
            if (s != s0) all *= cp[s] + cm[s];
        return all;
    }
    bool is_sum = std::holds_alternative<Majority>(outer.v) ||
                  std::holds_alternative<ThresholdMajority>(outer.v) ||
                  std::holds_alternative<WeightedMajority>(outer.v);
    if (is_sum) {
        std::vector<long long> w(m, 1);
        double t = 0.0;
        if (const auto* ot = std::get_if<ThresholdMajority>(&outer.v)) t = ot->t;
        if (const auto* ow = std::get_if<WeightedMajority>(&outer.v)) {
            t = ow->t;
            for (int s = 0; s < m; ++s) {
                if (ow->w[s] != std::floor(ow->w[s]))
                    throw DomainError("pivotal count: non-integer outer weights");
                w[s] = (long long)ow->w[s];
            }
        }
        long long wi = std::llabs(w[s0]);
        if (wi == 0) return 0;
        long long total = 0;
        for (int s = 0; s < m; ++s)
            if (s != s0) total += std::llabs(w[s]);
        std::vector<Int> dp(2 * total + 1, Int(0)), nd;
        dp[total] = 1;
        for (int s = 0; s < m; ++s) {
            if (s == s0) continue;
            nd.assign(2 * total + 1, Int(0));
            for (long long x = -total; x <= total; ++x) {
                if (dp[x + total] == 0) continue;
                nd[x + w[s] + total] += dp[x + total] * cp[s];
                nd[x - w[s] + total] += dp[x + total] * cm[s];
            }
            dp.swap(nd);
        }
        Int count = 0;
        for (long long x = -total; x <= total; ++x)
            if (t - double(wi) <= double(x) && double(x) < t + double(wi)) count += dp[x + total];
        return count;
    }
    if (const auto* u = std::get_if<UNCouncil>(&outer.v)) {
        int need = u->era == UNEra::Pre1965 ? 2 : 4;
        // DP over nonpermanent states' yes-counts, weighted by config counts
        std::vector<Int> dp(1, Int(1));
        for (int s = 5; s < m; ++s) {
            if (s == s0) continue;
            std::vector<Int> nd(dp.size() + 1, Int(0));
            for (std::size_t k = 0; k < dp.size(); ++k) {
                if (dp[k] == 0) continue;
                nd[k + 1] += dp[k] * cp[s];
                nd[k] += dp[k] * cm[s];
            }
            dp.swap(nd);
        }
        Int perm = 1;
        for (int s = 0; s < 5; ++s)
            if (s != s0) perm *= cp[s];
        if (s0 < 5) {
            Int tail = 0;
            for (std::size_t k = need; k < dp.size(); ++k) tail += dp[k];
            return perm * tail;
        }
        return std::size_t(need - 1) < dp.size() ? perm * dp[need - 1] : Int(0);
    }
    const Method& om = *rt.outer;
    if (!om.table() || m > 16)
        throw DomainError("pivotal count unsupported for this outer method");
    const BooleanFunction& tab = *om.table();
    std::uint64_t bit = std::uint64_t(1) << unsigned(s0);
    Int acc = 0;
    for (std::uint64_t idx = 0; idx < tab.size(); ++idx) {
        if (idx & bit) continue;
        if (tab.eval_index(idx) == tab.eval_index(idx | bit)) continue;
        Int prod = 1;
        for (int s = 0; s < m; ++s) {
            if (s == s0) continue;
            prod *= (idx >> s) & 1 ? cp[s] : cm[s];
        }
        acc += prod;
    }
    return acc;
}

// probability version: q[s] = P(state s winner is +1), s != s0
template <typename T>
static T outer_pivot_prob(const MethodRuntime::TwoTierRt& rt, const MethodSpec& outer, int s0,
                          const std::vector<T>& q) {
    int m = int(rt.states.size());
    if (const auto* d = std::get_if<Dictator>(&outer.v)) return T(d->i - 1 == s0 ? 1 : 0);
    bool is_sum = std::holds_alternative<Majority>(outer.v) ||
                  std::holds_alternative<ThresholdMajority>(outer.v) ||
                  std::holds_alternative<WeightedMajority>(outer.v);
    if (is_sum) {
        std::vector<long long> w(m, 1);
        double t = 0.0;
        if (const auto* ot = std::get_if<ThresholdMajority>(&outer.v)) t = ot->t;
        if (const auto* ow = std::get_if<WeightedMajority>(&outer.v)) {
            t = ow->t;
            for (int s = 0; s < m; ++s) {
                if (ow->w[s] != std::floor(ow->w[s]))
                    throw DomainError("influence: non-integer outer weights");
                w[s] = (long long)ow->w[s];
            }
        }
        return weighted_pivot_prob(w, t, s0, q);
    }
    if (const auto* u = std::get_if<UNCouncil>(&outer.v)) {
        int need = u->era == UNEra::Pre1965 ? 2 : 4;
        std::vector<T> dp(1, T(1));
        for (int s = 5; s < m; ++s) {
            if (s == s0) continue;
            std::vector<T> nd(dp.size() + 1, T(0));
            for (std::size_t k = 0; k < dp.size(); ++k) {
                nd[k + 1] += dp[k] * q[s];
                nd[k] += dp[k] * (T(1) - q[s]);
            }
            dp.swap(nd);
        }
        T perm(1);
        for (int s = 0; s < 5; ++s)
            if (s != s0) perm *= q[s];
        if (s0 < 5) {
            T tail(0);
            for (std::size_t k = need; k < dp.size(); ++k) tail += dp[k];
            return perm * tail;
        }
        return std::size_t(need - 1) < dp.size() ? perm * dp[need - 1] : T(0);
    }
    const Method& om = *rt.outer;
    if (!om.table() || m > 16) throw DomainError("influence unsupported for this outer method");
    const BooleanFunction& tab = *om.table();
    std::uint64_t bit = std::uint64_t(1) << unsigned(s0);
    T acc(0);
    for (std::uint64_t idx = 0; idx < tab.size(); ++idx) {
        if (idx & bit) continue;
        if (tab.eval_index(idx) == tab.eval_index(idx | bit)) continue;
        T prod(1);
        for (int s = 0; s < m; ++s) {
            if (s == s0) continue;
            prod *= (idx >> s) & 1 ? q[s] : T(1) - q[s];
        }
        acc += prod;
    }
    return acc;
}

// ---- lazy pivotal dispatch -----------------------------------------------------

static Int lazy_pivotal(const Method& f, int i0) {
    const MethodSpec& s = *f.spec();
    int n = f.n();
    if (const auto* d = std::get_if<Dictator>(&s.v))
        return d->i - 1 == i0 ? Int(1) << unsigned(n - 1) : Int(0);
    if (std::holds_alternative<Majority>(s.v) || std::holds_alternative<ThresholdMajority>(s.v)) {
        double t = 0.0;
        if (const auto* tm = std::get_if<ThresholdMajority>(&s.v)) t = tm->t;
        long long k_star = 0;
        if (!threshold_pivot_level(n, t, k_star)) return 0;
        return binomial_coeff(n - 1, k_star);
    }
    if (std::holds_alternative<WeightedMajority>(s.v)) {
        const auto* wi = std::get_if<MethodRuntime::WeightedInt>(&f.runtime()->v);
        if (!wi)
            throw DomainError("no closed-form pivotal count for non-integer weights with n > N_DENSE");
        return weighted_pivot_count(wi->w, wi->t, i0);
    }
    if (const auto* tt = std::get_if<TwoTier>(&s.v)) {
        const auto& rt = std::get<MethodRuntime::TwoTierRt>(f.runtime()->v);
        for (std::size_t st = 0; st < rt.states.size(); ++st) {
            const auto& vs = rt.states[st];
            auto it = std::find(vs.begin(), vs.end(), i0);
            if (it == vs.end()) continue;
            Int inner_b = pivotal_count(rt.inner[st], int(it - vs.begin()) + 1);
            if (inner_b == 0) return 0;
            return inner_b * outer_pivot_configs(rt, *tt->outer, int(st));
        }
        throw InvariantError("voter missing from the two-tier partition");
    }
    const auto& u = std::get<UNCouncil>(s.v);
    int need = u.era == UNEra::Pre1965 ? 2 : 4;
    if (i0 < 5) return binomial_tail_count(n - 5, need);
    return binomial_coeff(n - 6, need - 1);
}

Int pivotal_count(const Method& f, int i) {
    if (i < 1 || i > f.n()) throw DomainError("voter index out of range");
    if (f.table()) return Int(dense_pivotal(*f.table(), i - 1));
    return lazy_pivotal(f, i - 1);
}

// ---- influence -----------------------------------------------------------------

static ExactScalar exact_result(Rat r) {
    ExactScalar out{std::move(r), 0.0, true};
    out.value = to_double(out.exact);
    return out;
}

static ExactScalar float_result(double v) { return ExactScalar{Rat(0), v, false}; }

ExactScalar influence(const Method& f, int i, const BiasedMeasure& measure) {
    validate_measure(measure);
    if (i < 1 || i > f.n()) throw DomainError("voter index out of range");
    int n = f.n(), i0 = i - 1;

    if (measure.uniform())
        return exact_result(Rat(pivotal_count(f, i), Int(1) << unsigned(n - 1)));

    if (f.table()) {
        auto lv = dense_pivotal_levels(*f.table(), i0);
        Rat p = rat_from_double(measure.p), q = 1 - p, acc = 0;
        for (int k = 0; k < n; ++k) {
            if (lv[k] == 0) continue;
            acc += Rat(Int(lv[k])) * rat_pow(p, unsigned(k)) * rat_pow(q, unsigned(n - 1 - k));
        }
        return exact_result(acc);
    }

    const MethodSpec& s = *f.spec();
    if (const auto* d = std::get_if<Dictator>(&s.v)) return exact_result(Rat(d->i == i ? 1 : 0));
    if (std::holds_alternative<Majority>(s.v) || std::holds_alternative<ThresholdMajority>(s.v)) {
        double t = 0.0;
        if (const auto* tm = std::get_if<ThresholdMajority>(&s.v)) t = tm->t;
        long long k = 0;
        if (!threshold_pivot_level(n, t, k)) return exact_result(Rat(0));
        if (n <= EXACT_BIAS_LIMIT) {
            Rat p = rat_from_double(measure.p);
            return exact_result(binomial_coeff(n - 1, k) * rat_pow(p, unsigned(k)) *
                                rat_pow(1 - p, unsigned(n - 1 - k)));
        }
        double lg = std::lgamma(double(n)) - std::lgamma(double(k + 1)) -
                    std::lgamma(double(n - k));
        return float_result(
            std::exp(lg + double(k) * std::log(measure.p) +
                     double(n - 1 - k) * std::log1p(-measure.p)));
    }
    if (std::holds_alternative<WeightedMajority>(s.v)) {
        const auto* wi = std::get_if<MethodRuntime::WeightedInt>(&f.runtime()->v);
        if (!wi)
            throw DomainError("no closed-form influence for non-integer weights with n > N_DENSE");
        std::vector<Rat> q(wi->w.size(), rat_from_double(measure.p));
        return exact_result(weighted_pivot_prob(wi->w, wi->t, i0, q));
    }
    if (const auto* tt = std::get_if<TwoTier>(&s.v)) {
        const auto& rt = std::get<MethodRuntime::TwoTierRt>(f.runtime()->v);
        for (std::size_t st = 0; st < rt.states.size(); ++st) {
            const auto& vs = rt.states[st];
            auto it = std::find(vs.begin(), vs.end(), i0);
            if (it == vs.end()) continue;
            ExactScalar inner = influence(rt.inner[st], int(it - vs.begin()) + 1, measure);
            int m = int(rt.states.size());
            bool all_exact = inner.is_exact;
            std::vector<Rat> qr(m);
            std::vector<double> qf(m);
            for (int s2 = 0; s2 < m; ++s2) {
                if (s2 == int(st)) continue;
                ExactScalar e = expectation(rt.inner[s2], measure);
                all_exact = all_exact && e.is_exact;
                if (e.is_exact) qr[s2] = (1 + e.exact) / 2;
                qf[s2] = (1.0 + e.value) / 2.0;
            }
            if (all_exact)
                return exact_result(inner.exact * outer_pivot_prob(rt, *tt->outer, int(st), qr));
            return float_result(inner.value * outer_pivot_prob(rt, *tt->outer, int(st), qf));
        }
        throw InvariantError("voter missing from the two-tier partition");
    }
    const auto& u = std::get<UNCouncil>(s.v);
    int need = u.era == UNEra::Pre1965 ? 2 : 4;
    Rat p = rat_from_double(measure.p), q = 1 - p;
    if (i0 < 5)
        return exact_result(rat_pow(p, 4) * binomial_tail_prob(n - 5, need, p));
    return exact_result(rat_pow(p, 5) * binomial_coeff(n - 6, need - 1) *
                        rat_pow(p, unsigned(need - 1)) * rat_pow(q, unsigned(n - 5 - need)));
}

// ---- Banzhaf and reports ---------------------------------------------------------

std::vector<Rat> banzhaf_indices(const Method& f) {
    std::vector<Int> b(f.n());
    Int total = 0;
    for (int i = 1; i <= f.n(); ++i) {
        b[i - 1] = pivotal_count(f, i);
        total += b[i - 1];
    }
    if (total == 0) throw DomainError("Banzhaf indices are undefined for a constant method");
    std::vector<Rat> out;
    out.reserve(b.size());
    for (const Int& bi : b) out.emplace_back(bi, total);
    return out;
}

PivotalReport pivotal_report(const Method& f, const BiasedMeasure& measure) {
    validate_measure(measure);
    PivotalReport rep;
    rep.n = f.n();
    rep.p = measure.p;
    Int total = 0;
    for (int i = 1; i <= f.n(); ++i) {
        rep.b.push_back(pivotal_count(f, i));
        total += rep.b.back();
        rep.influence.push_back(influence(f, i, measure));
    }
    if (total != 0)
        for (const Int& bi : rep.b) rep.banzhaf.emplace_back(bi, total);
    return rep;
}

// ---- majority influence ----------------------------------------------------------

Rat majority_influence_rat(long long n) {
    if (n < 1 || n % 2 == 0) throw DomainError("majority influence requires odd n >= 1");
    return Rat(binomial_coeff(n - 1, (n - 1) / 2), Int(1) << unsigned(n - 1));
}

ExactScalar majority_influence_exact(long long n) {
    if (n < 1 || n % 2 == 0) throw DomainError("majority influence requires odd n >= 1");
    if (n <= 100000) return exact_result(majority_influence_rat(n));
    long double log_c =
        std::lgamma((long double)n) - 2.0L * std::lgamma((long double)(n + 1) / 2.0L);
    long double ln2 = 0.69314718055994530941723212145817657L;
    return float_result(double(std::exp(log_c - (long double)(n - 1) * ln2)));
}

} // namespace stabvote
