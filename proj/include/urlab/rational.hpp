#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "urlab/errors.hpp"

namespace urlab {

using BigInt = boost::multiprecision::cpp_int;
/// Canonical exact rational: gcd-reduced, denominator > 0, sign on the numerator.
using Rat = boost::multiprecision::cpp_rational;

/// Floor division, correct for negative numerators. b must be positive.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if (a % b != 0 && a < 0) --q;
    return q;
}

inline BigInt floor_rat(const Rat& q) { return floor_div(numerator(q), denominator(q)); }

inline int sign_of(const Rat& q) { return q.sign(); }

/// Renders "p/q", or just "p" when q = 1. Integers in decimal, arbitrary precision.
inline std::string rat_to_string(const Rat& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) {
        s += "/";
        s += denominator(q).str();
    }
    return s;
}

/// Parses "p" or "p/q" with optional leading '-'. Throws ParseError on malformed input.
Rat rat_from_string(const std::string& s);

}  // namespace urlab
