#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "errors.hpp"

namespace vessiot {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;  // always stored gcd-reduced, denominator > 0

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Rat rat_pow(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    if (base == 0) {
        if (e < 0) throw DivisionByZero("0 raised to a negative power");
        return Rat(0);
    }
    Rat b = e < 0 ? Rat(1) / base : base;
    unsigned long n = e < 0 ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Rat acc(1);
    while (n) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline int rat_sign(const Rat& r) { return r < 0 ? -1 : (r > 0 ? 1 : 0); }

/* gcd on Q: gcd of numerators over lcm of denominators; gcd(0,0) = 0. */
inline Rat rat_gcd(const Rat& a, const Rat& b) {
    using boost::multiprecision::gcd;
    using boost::multiprecision::lcm;
    if (a == 0) return rat_abs(b);
    if (b == 0) return rat_abs(a);
    Int n = gcd(rat_num(a), rat_num(b));
    Int d = lcm(rat_den(a), rat_den(b));
    return Rat(n, d);
}

inline std::string rat_to_string(const Rat& r) {
    if (rat_den(r) == 1) return rat_num(r).str();
    return rat_num(r).str() + "/" + rat_den(r).str();
}

/* Accepts "p" or "p/q", optional leading '-'. */
inline Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        Int n(s.substr(0, slash));
        Int d(s.substr(slash + 1));
        if (d == 0) throw DivisionByZero("rational literal with zero denominator: " + s);
        return Rat(n, d);
    } catch (const std::runtime_error&) {
        throw;
    } catch (const std::exception&) {
        throw Error("malformed rational literal: " + s);
    }
}

} // namespace vessiot
