#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace stabvote {

// Exact arithmetic for counts that exceed native width and for
// expectations/indices that must not round.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline std::string to_decimal(const Int& v) { return v.str(); }

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat rat_pow(const Rat& base, unsigned exp) {
    Rat acc = 1, b = base;
    while (exp) {
        if (exp & 1u) acc *= b;
        b *= b;
        exp >>= 1;
    }
    return acc;
}

// C(n, k) as an exact integer; 0 outside the triangle.
Int binomial_coeff(long long n, long long k);

// sum over k >= k_min of C(n, k), exact.
Int binomial_tail_count(long long n, long long k_min);

// Exact rational value of a finite double (dyadic decomposition).
Rat rat_from_double(double x);

} // namespace stabvote
