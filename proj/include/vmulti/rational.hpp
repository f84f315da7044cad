#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmulti {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline Rational make_rational(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rational(Integer(num), Integer(den));
}

// Largest integer <= q.
inline Integer rational_floor(const Rational& q) {
    Integer n = numerator(q), d = denominator(q);
    Integer r = n / d;
    if (n % d != 0 && n < 0) --r;
    return r;
}

// Smallest integer >= q.
inline Integer rational_ceil(const Rational& q) {
    Integer n = numerator(q), d = denominator(q);
    Integer r = n / d;
    if (n % d != 0 && n > 0) ++r;
    return r;
}

inline long long to_long(const Integer& n) {
    return static_cast<long long>(n);
}

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

// Serialization contract: "p" for integers, "p/q" otherwise.
inline std::string rational_to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

inline Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse rational: \"" + s + "\"");
    }
}

inline Integer integer_lcm(const Integer& a, const Integer& b) {
    if (a == 0 || b == 0) return 0;
    return boost::multiprecision::lcm(a, b);
}

// lcm of the denominators of a batch of rationals; 1 for an empty batch.
inline Integer denominator_lcm(const std::vector<Rational>& qs) {
    Integer l = 1;
    for (const auto& q : qs) l = integer_lcm(l, denominator(q));
    return l;
}

}  // namespace vmulti
