#include "stabvote/noise.hpp"

#include "internal.hpp"
#include "stabvote/parallel.hpp"
#include "stabvote/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>

namespace stabvote {

void validate_model(const CorruptionModel& model) {
    if (!(model.rho >= 0.0 && model.rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
    validate_measure(model.measure);
}

VoteVector sample_corrupted(const VoteVector& x, const CorruptionModel& model, CounterRng& rng) {
    validate_model(model);
    validate_votes(x);
    VoteVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        bool keep = rng.next_double() < model.rho;
        y[i] = keep ? x[i] : int8_t(rng.next_sign(model.measure.p));
    }
    return y;
}

RealTable noise_operator(const Method& f, const CorruptionModel& model) {
    validate_model(model);
    if (!f.table())
        throw DomainError("noise_operator requires a dense table (n <= N_DENSE)");
    const BooleanFunction& t = *f.table();
    int n = t.n();
    RealTable g;
    g.n = n;
    g.v.resize(t.size());
    for (std::uint64_t idx = 0; idx < t.size(); ++idx) g.v[idx] = double(t.eval_index(idx));
    double rho = model.rho, p = model.measure.p;
    double up_minus = (1 - rho) * p;      // P(Y_i = +1 | X_i = -1)
    double up_plus = rho + (1 - rho) * p; // P(Y_i = +1 | X_i = +1)
    for (int i = 0; i < n; ++i) {
        std::uint64_t bit = std::uint64_t(1) << unsigned(i);
        for (std::uint64_t idx = 0; idx < t.size(); ++idx) {
            if (idx & bit) continue;
            double lo = g.v[idx], hi = g.v[idx | bit];
            g.v[idx] = up_minus * hi + (1.0 - up_minus) * lo;
            g.v[idx | bit] = up_plus * hi + (1.0 - up_plus) * lo;
        }
    }
    return g;
}

StabilityEstimate stability_exact(const Method& f, const CorruptionModel& model) {
    RealTable g = noise_operator(f, model);
    const BooleanFunction& t = *f.table();
    int n = t.n();
    // group f*g by popcount level so the p-weighted sum stays well conditioned
    std::vector<long double> level(n + 1, 0.0L);
    for (std::uint64_t idx = 0; idx < t.size(); ++idx)
        level[std::popcount(idx)] += (long double)(t.eval_index(idx)) * g.v[idx];
    long double p = model.measure.p, q = 1.0L - p;
    long double acc = 0.0L;
    for (int k = 0; k <= n; ++k)
        acc += level[k] * std::pow(p, (long double)k) * std::pow(q, (long double)(n - k));
    StabilityEstimate est;
    est.value = std::clamp(double(acc), -1.0, 1.0);
    est.exact = true;
    return est;
}

double stability_wht(const Method& f, double rho) {
    if (!f.table()) throw DomainError("stability_wht requires a dense table");
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
    const BooleanFunction& t = *f.table();
    int n = t.n();
    std::vector<double> v(t.size());
    for (std::uint64_t idx = 0; idx < t.size(); ++idx) v[idx] = double(t.eval_index(idx));
    for (std::uint64_t len = 1; len < t.size(); len <<= 1)
        for (std::uint64_t i = 0; i < t.size(); i += 2 * len)
            for (std::uint64_t j = i; j < i + len; ++j) {
                double a = v[j], b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
    // bucket squared coefficients by character degree
    std::vector<long double> deg(n + 1, 0.0L);
    long double scale = std::pow(0.5L, (long double)n);
    for (std::uint64_t s = 0; s < t.size(); ++s) {
        long double c = v[s] * scale;
        deg[std::popcount(s)] += c * c;
    }
    long double acc = 0.0L;
    for (int k = 0; k <= n; ++k) acc += deg[k] * std::pow((long double)rho, (long double)k);
    return std::clamp(double(acc), -1.0, 1.0);
}

// ---- Monte Carlo -----------------------------------------------------------

namespace {

struct Scratch {
    VoteVector x, y, wx, wy;
};

struct ThresholdLike {
    long long n;
    double t;
};

std::optional<ThresholdLike> threshold_form(const MethodSpec* s, int n) {
    if (!s) return {};
    if (std::holds_alternative<Majority>(s->v)) return ThresholdLike{n, 0.0};
    if (const auto* t = std::get_if<ThresholdMajority>(&s->v)) return ThresholdLike{n, t->t};
    return {};
}

} // namespace

StabilityEstimate stability_mc(const Method& f, const CorruptionModel& model,
                               std::uint64_t samples, std::uint64_t seed, int threads) {
    validate_model(model);
    if (samples < 1) throw DomainError("samples must be >= 1");
    double p = model.measure.p, rho = model.rho;
    double flip_plus = (1.0 - rho) * (1.0 - p); // a +1 vote ends up -1
    double flip_minus = (1.0 - rho) * p;        // a -1 vote ends up +1

    // route: binomial count sampling when vote sums are sufficient statistics
    std::function<bool(CounterRng&, Scratch&)> once;

    BinomialSampler bin_x;
    BitBinomialSampler bit_p, bit_m;
    std::vector<int> state_sampler;     // two-tier: state -> sampler slot
    std::vector<BinomialSampler> bins;  // one per distinct state size
    std::vector<double> inner_t;        // two-tier inner thresholds

    if (auto th = threshold_form(f.spec(), f.n())) {
        long long n = th->n;
        double t = th->t;
        bin_x = BinomialSampler(std::uint64_t(n), p);
        int bits = std::bit_width(std::uint64_t(n));
        bit_p = BitBinomialSampler(bits, flip_plus);
        bit_m = BitBinomialSampler(bits, flip_minus);
        once = [&bin_x, &bit_p, &bit_m, n, t](CounterRng& rng, Scratch&) {
            long long a = (long long)bin_x.sample(rng);
            long long dp = (long long)bit_p.sample(std::uint64_t(a), rng);
            long long dm = (long long)bit_m.sample(std::uint64_t(n - a), rng);
            long long sx = 2 * a - n;
            long long sy = sx - 2 * dp + 2 * dm;
            return (double(sx) >= t) == (double(sy) >= t);
        };
    } else if (f.spec() && std::holds_alternative<TwoTier>(f.spec()->v)) {
        const auto& rt = std::get<MethodRuntime::TwoTierRt>(f.runtime()->v);
        int m = int(rt.states.size());
        bool countable = true;
        std::map<int, int> slot;
        for (int s = 0; s < m; ++s) {
            auto th = threshold_form(rt.inner[s].spec(), rt.inner[s].n());
            if (!th) {
                countable = false;
                break;
            }
            inner_t.push_back(th->t);
            auto [it, fresh] = slot.emplace(rt.inner[s].n(), int(bins.size()));
            if (fresh) bins.emplace_back(std::uint64_t(rt.inner[s].n()), p);
            state_sampler.push_back(it->second);
        }
        if (countable) {
            int max_n = 0;
            for (int s = 0; s < m; ++s) max_n = std::max(max_n, rt.inner[s].n());
            int bits = std::bit_width(std::uint64_t(max_n));
            bit_p = BitBinomialSampler(bits, flip_plus);
            bit_m = BitBinomialSampler(bits, flip_minus);
            const Method* outer = rt.outer.get();
            const auto* sizes = &rt.states;
            once = [&bins, &state_sampler, &inner_t, &bit_p, &bit_m, outer, sizes,
                    m](CounterRng& rng, Scratch& sc) {
                sc.wx.resize(m);
                sc.wy.resize(m);
                for (int s = 0; s < m; ++s) {
                    long long ns = (long long)(*sizes)[s].size();
                    long long a = (long long)bins[state_sampler[s]].sample(rng);
                    long long dp = (long long)bit_p.sample(std::uint64_t(a), rng);
                    long long dm = (long long)bit_m.sample(std::uint64_t(ns - a), rng);
                    long long sx = 2 * a - ns;
                    long long sy = sx - 2 * dp + 2 * dm;
                    sc.wx[s] = double(sx) >= inner_t[s] ? 1 : -1;
                    sc.wy[s] = double(sy) >= inner_t[s] ? 1 : -1;
                }
                return outer->evaluate(sc.wx) == outer->evaluate(sc.wy);
            };
        }
    }
    if (!once && f.table()) {
        const BooleanFunction* tab = f.table();
        int n = f.n();
        once = [tab, n, p, rho](CounterRng& rng, Scratch&) {
            std::uint32_t ix = 0, iy = 0;
            for (int i = 0; i < n; ++i) {
                bool xb = rng.next_bernoulli(p);
                bool yb = rng.next_double() < rho ? xb : rng.next_bernoulli(p);
                ix |= std::uint32_t(xb) << i;
                iy |= std::uint32_t(yb) << i;
            }
            return tab->eval_index(ix) == tab->eval_index(iy);
        };
    }
    if (!once) {
        const Method* fp = &f;
        int n = f.n();
        double pp = p, rr = rho;
        once = [fp, n, pp, rr](CounterRng& rng, Scratch& sc) {
            sc.x.resize(n);
            sc.y.resize(n);
            for (int i = 0; i < n; ++i) {
                sc.x[i] = int8_t(rng.next_sign(pp));
                sc.y[i] = rng.next_double() < rr ? sc.x[i] : int8_t(rng.next_sign(pp));
            }
            return fp->evaluate(sc.x) == fp->evaluate(sc.y);
        };
    }

    int nthreads = resolve_threads(threads);
    std::vector<std::uint64_t> agree_w(std::size_t(std::max(1, nthreads)), 0);
    parallel_ranges(samples, nthreads, [&](int w, std::uint64_t b, std::uint64_t e) {
        Scratch sc;
        std::uint64_t agree = 0;
        for (std::uint64_t s = b; s < e; ++s) {
            CounterRng rng(seed, s);
            if (once(rng, sc)) ++agree;
        }
        agree_w[std::size_t(w)] = agree;
    });
    std::uint64_t agree = 0;
    for (std::uint64_t a : agree_w) agree += a;

    StabilityEstimate est;
    est.samples = samples;
    est.seed = seed;
    est.value = (2.0 * double(agree) - double(samples)) / double(samples);
    est.std_error =
        samples > 1
            ? std::sqrt(std::max(0.0, 1.0 - est.value * est.value) / double(samples - 1))
            : 0.0;
    return est;
}

// ---- scalar maps and closed forms -------------------------------------------

double outcome_change_prob(double stability) {
    if (!(stability >= -1.0 && stability <= 1.0))
        throw DomainError("stability must lie in [-1, 1]");
    return (1.0 - stability) / 2.0;
}

double majority_limit_stability(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
    return (2.0 / std::numbers::pi) * std::asin(rho);
}

ThresholdMatch find_matching_threshold(int n, double mu, const BiasedMeasure& measure) {
    validate_measure(measure);
    if (n < 1) throw DomainError("n must be positive");
    if (!(mu >= -1.0 && mu <= 1.0)) throw DomainError("mu must lie in [-1, 1]");

    // Candidate cuts: f_s = [sum >= s] for the achievable sums s (step 2 from
    // -n), plus s = n+2 for the constant -1 function. Representative t = s-1.
    bool exact = measure.uniform() || n <= EXACT_BIAS_LIMIT;
    Rat mu_r = exact ? rat_from_double(mu) : Rat(0);
    Rat p_r = (exact && !measure.uniform()) ? rat_from_double(measure.p) : Rat(0);

    bool have = false;
    long long best_s = 0;
    Rat best_gap_r;
    double best_gap_f = 0.0, best_e = 0.0;
    for (long long s = -n; s <= n + 2; s += 2) {
        long long k_min = ceil_half(n, double(s));
        Rat gap_r;
        double gap_f, e_f;
        if (measure.uniform()) {
            Int tail = binomial_tail_count(n, k_min);
            Rat e = Rat(2 * tail - (Int(1) << unsigned(n)), Int(1) << unsigned(n));
            gap_r = abs(e - mu_r);
            e_f = to_double(e);
            gap_f = to_double(gap_r);
        } else if (exact) {
            Rat e = 2 * binomial_tail_prob(n, k_min, p_r) - 1;
            gap_r = abs(e - mu_r);
            e_f = to_double(e);
            gap_f = to_double(gap_r);
        } else {
            e_f = 2.0 * binomial_tail_prob_f(n, k_min, measure.p) - 1.0;
            gap_f = std::fabs(e_f - mu);
        }
        bool better;
        if (!have) {
            better = true;
        } else if (exact ? (gap_r != best_gap_r) : (gap_f != best_gap_f)) {
            better = exact ? (gap_r < best_gap_r) : (gap_f < best_gap_f);
        } else {
            long long t_new = s - 1, t_old = best_s - 1;
            better = std::llabs(t_new) != std::llabs(t_old) ? std::llabs(t_new) < std::llabs(t_old)
                                                            : t_new < t_old;
        }
        if (better) {
            have = true;
            best_s = s;
            best_gap_r = gap_r;
            best_gap_f = gap_f;
            best_e = e_f;
        }
    }
    ThresholdMatch out;
    out.t = double(best_s - 1);
    out.lo = best_s == -n ? -std::numeric_limits<double>::infinity() : double(best_s - 2);
    out.hi = best_s == n + 2 ? std::numeric_limits<double>::infinity() : double(best_s);
    out.achieved = best_e;
    return out;
}

double asymptotic_small_eps_majority(double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
    return 1.0 - (4.0 / std::numbers::pi) * std::sqrt(eps);
}

double asymptotic_small_eps_two_tier(int m, double eps) {
    if (m < 1) throw DomainError("m must be >= 1");
    if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
    return 1.0 - 2.0 * std::pow(2.0 / std::numbers::pi, 1.5) * std::sqrt(double(m)) *
                     std::sqrt(eps);
}

double asymptotic_ratio_two_tier(int m) {
    if (m < 1) throw DomainError("m must be >= 1");
    return std::sqrt(2.0 * double(m) / std::numbers::pi);
}

} // namespace stabvote
