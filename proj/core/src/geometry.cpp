#include "stabvote/geometry.hpp"

#include "internal.hpp"
#include "stabvote/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace stabvote {

int l0_distance(const VoteVector& x, const VoteVector& y) {
    if (x.size() != y.size()) throw DomainError("l0_distance requires equal lengths");
    validate_votes(x);
    validate_votes(y);
    int d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
    return d;
}

SubsetMask::SubsetMask(int n) : n_(n) {
    if (n < 1 || n > N_GEOM)
        throw DomainError("subset mask requires 1 <= n <= " + std::to_string(N_GEOM));
    words_.assign((size() + 63) / 64, 0);
}

std::uint64_t SubsetMask::count() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
}

SubsetMask mask_from_function(const BooleanFunction& f, int side) {
    if (side != 1 && side != -1) throw DomainError("side must be +1 or -1");
    SubsetMask s(f.n());
    const auto& fw = f.words();
    for (std::size_t i = 0; i < fw.size(); ++i)
        s.words()[i] = side == 1 ? fw[i] : ~fw[i];
    if (f.n() < 6) s.words()[0] &= (std::uint64_t(1) << f.size()) - 1;
    return s;
}

bool is_subset(const SubsetMask& a, const SubsetMask& b) {
    if (a.n() != b.n()) throw DomainError("subset test requires equal n");
    for (std::size_t i = 0; i < a.words().size(); ++i)
        if (a.words()[i] & ~b.words()[i]) return false;
    return true;
}

// kLowMask[j] keeps bit positions whose j-th index bit is 0
static constexpr std::uint64_t kLowMask[6] = {
    0x5555555555555555ull, 0x3333333333333333ull, 0x0F0F0F0F0F0F0F0Full,
    0x00FF00FF00FF00FFull, 0x0000FFFF0000FFFFull, 0x00000000FFFFFFFFull};

static SubsetMask dilate1(const SubsetMask& s) {
    SubsetMask out = s;
    const auto& in = s.words();
    auto& ow = out.words();
    for (int j = 0; j < s.n(); ++j) {
        if (j < 6) {
            unsigned sh = 1u << unsigned(j);
            for (std::size_t i = 0; i < in.size(); ++i)
                ow[i] |= ((in[i] & kLowMask[j]) << sh) | ((in[i] >> sh) & kLowMask[j]);
        } else {
            std::uint64_t step = std::uint64_t(1) << unsigned(j - 6);
            for (std::uint64_t i = 0; i < in.size(); ++i) ow[i] |= in[i ^ step];
        }
    }
    return out;
}

SubsetMask neighborhood(const SubsetMask& s, int k) {
    if (k < 0 || k > s.n()) throw DomainError("k must lie in [0, n]");
    SubsetMask cur = s;
    for (int round = 0; round < k; ++round) cur = dilate1(cur);
    return cur;
}

SubsetMask half_ball(int n, int k) {
    if (n < 1 || n > N_GEOM) throw DomainError("half_ball requires 1 <= n <= N_GEOM");
    if (k < 0 || k > n) throw DomainError("k must lie in [0, n]");
    // sum x = 2*popcount - n >= -2k  iff  popcount >= ceil((n - 2k)/2)
    int kmin = (n - 2 * k + 1) / 2; // ceil for positive, <= 0 handled below
    SubsetMask s(n);
    for (std::uint64_t idx = 0; idx < s.size(); ++idx)
        if (std::popcount(idx) >= kmin) s.set(idx);
    return s;
}

VulnerabilityReport vulnerable_count(const Method& f, int k) {
    if (!f.table()) throw DomainError("vulnerable_count requires a dense table");
    int n = f.n();
    if (n > N_GEOM) throw DomainError("vulnerable_count requires n <= " + std::to_string(N_GEOM));
    if (k < 1 || k > n) throw DomainError("k must lie in [1, n]");
    SubsetMask sp = mask_from_function(*f.table(), +1);
    SubsetMask sm = mask_from_function(*f.table(), -1);
    VulnerabilityReport r;
    r.n = n;
    r.k = k;
    r.from_minus = neighborhood(sp, k).count() - sp.count();
    r.from_plus = neighborhood(sm, k).count() - sm.count();
    r.total = r.from_plus + r.from_minus;
    return r;
}

bool check_harper(const SubsetMask& s, int k) {
    if (k < 0 || k > s.n()) throw DomainError("k must lie in [0, n]");
    SubsetMask bk = half_ball(s.n(), k);
    if (s.count() < bk.count())
        throw DomainError("Harper precondition violated: |S| < |B_k|");
    return neighborhood(s, 1).count() >= neighborhood(bk, 1).count();
}

// ---- optimality verification ---------------------------------------------------

static std::uint64_t vulnerable_total(const SubsetMask& sp, int k) {
    SubsetMask sm(sp.n());
    for (std::size_t i = 0; i < sp.words().size(); ++i) sm.words()[i] = ~sp.words()[i];
    if (sp.n() < 6) sm.words()[0] &= (std::uint64_t(1) << sp.size()) - 1;
    return (neighborhood(sp, k).count() - sp.count()) +
           (neighborhood(sm, k).count() - sm.count());
}

// n <= 6: the whole table fits one word
static std::uint64_t vulnerable_total_bits(int n, std::uint64_t bits, int k) {
    SubsetMask sp(n);
    sp.words()[0] = bits;
    return vulnerable_total(sp, k);
}

// uniformly random subset of exactly c of the 2^n points (partial shuffle)
static SubsetMask random_subset(int n, std::uint64_t c, CounterRng& rng,
                                std::vector<std::uint32_t>& scratch) {
    std::uint64_t sz = std::uint64_t(1) << n;
    scratch.resize(sz);
    std::iota(scratch.begin(), scratch.end(), 0u);
    SubsetMask s(n);
    for (std::uint64_t i = 0; i < c; ++i) {
        std::uint64_t j = i + rng.next_below(std::uint32_t(sz - i));
        std::swap(scratch[i], scratch[j]);
        s.set(scratch[i]);
    }
    return s;
}

static OptimalityReport verify_against_competitors(const Method& ref, int k, std::uint64_t trials,
                                                   std::uint64_t seed) {
    int n = ref.n();
    std::uint64_t c = ref.table()->count_plus();
    OptimalityReport rep;
    rep.n = n;
    rep.k = k;
    rep.reference_count = vulnerable_count(ref, k).total;
    rep.min_count = rep.reference_count;

    Int space = binomial_coeff(std::int64_t(std::uint64_t(1) << n), std::int64_t(c));
    bool exhaustive = n <= 6 && space <= 1000000;
    rep.exhaustive = exhaustive;

    auto consider = [&](std::uint64_t count, std::uint64_t table_bits, bool keep_table) {
        ++rep.competitors;
        if (exhaustive) ++rep.distribution[count];
        if (count < rep.min_count) {
            rep.min_count = count;
            rep.co_minimizers = 0;
            rep.co_minimizer_tables.clear();
        }
        if (count == rep.min_count) {
            ++rep.co_minimizers;
            if (keep_table) rep.co_minimizer_tables.push_back(table_bits);
        }
    };

    if (exhaustive) {
        std::uint64_t bits = std::uint64_t(1) << n; // table size in bits, <= 64
        if (c == 0 || c == bits) {
            std::uint64_t only = c == 0 ? 0
                                 : bits == 64 ? ~std::uint64_t(0)
                                              : (std::uint64_t(1) << bits) - 1;
            consider(vulnerable_total_bits(n, only, k), only, true);
        } else {
            // Gosper's hack over all c-subsets of the table positions
            std::uint64_t v = (std::uint64_t(1) << c) - 1;
            while (true) {
                consider(vulnerable_total_bits(n, v, k), v, true);
                if (bits == 64 && v == (~std::uint64_t(0) << (64 - c))) break;
                std::uint64_t u = v & (~v + 1);
                std::uint64_t w = v + u;
                v = w | (((v ^ w) >> 2) / u);
                if (bits < 64 && v >= (std::uint64_t(1) << bits)) break;
            }
        }
    } else {
        if (n > 16) throw DomainError("sampled verification capped at n <= 16");
        std::vector<std::uint32_t> scratch;
        for (std::uint64_t tr = 0; tr < trials; ++tr) {
            CounterRng rng(seed, tr);
            SubsetMask s = random_subset(n, c, rng, scratch);
            consider(vulnerable_total(s, k), 0, false);
        }
    }
    rep.reference_minimal = rep.reference_count == rep.min_count;
    return rep;
}

OptimalityReport verify_majority_optimal(int n, int k, std::uint64_t trials, std::uint64_t seed) {
    if (n < 3 || n % 2 == 0) throw DomainError("verification requires odd n >= 3");
    if (k < 1 || k > n) throw DomainError("k must lie in [1, n]");
    Method maj(MethodSpec{Majority{}}, n);
    OptimalityReport rep = verify_against_competitors(maj, k, trials, seed);
    rep.t = 0.0;
    return rep;
}

OptimalityReport verify_threshold_optimal(int n, double t, int k, std::uint64_t trials,
                                          std::uint64_t seed, bool allow_odd_t) {
    if (n < 3 || n % 2 == 0 || n > N_GEOM) throw DomainError("verification requires odd n <= N_GEOM");
    if (k < 1 || k > n) throw DomainError("k must lie in [1, n]");
    bool t_even = t == std::floor(t) && std::fmod(std::fabs(t), 2.0) == 0.0;
    if (!t_even && !allow_odd_t)
        throw DomainError("threshold optimality is stated for even t; pass allow_odd_t to explore");
    Method ref(MethodSpec{ThresholdMajority{t}}, n);
    OptimalityReport rep = verify_against_competitors(ref, k, trials, seed);
    rep.t = t;
    return rep;
}

} // namespace stabvote
