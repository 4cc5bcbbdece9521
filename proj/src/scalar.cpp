#include "urlab/scalar.hpp"

#include <cctype>

namespace urlab {

Rat rat_from_string(const std::string& s) {
    auto bad = [&]() -> ParseError { return ParseError("malformed rational: '" + s + "'"); };
    if (s.empty()) throw bad();
    auto slash = s.find('/');
    auto check_int = [&](const std::string& part, bool allow_sign) {
        if (part.empty()) throw bad();
        std::size_t i = 0;
        if (allow_sign && (part[0] == '-' || part[0] == '+')) i = 1;
        if (i == part.size()) throw bad();
        for (; i < part.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(part[i]))) throw bad();
    };
    try {
        if (slash == std::string::npos) {
            check_int(s, true);
            return Rat(BigInt(s));
        }
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        check_int(num, true);
        check_int(den, false);
        BigInt d(den);
        if (d == 0) throw bad();
        return Rat(BigInt(num), d);
    } catch (const std::exception&) {
        throw bad();
    }
}

int Scalar::sign() const {
    const int sx = sign_of(rat_);
    const int sy = sign_of(irr_);
    if (sy == 0) return sx;
    if (sx == 0) return sy;
    if (sx == sy) return sx;
    // Opposite signs: compare rat_^2 with 2·irr_^2 exactly.
    const Rat t = rat_ * rat_ - Rat(2) * irr_ * irr_;
    // t = 0 would mean √2 rational; cannot happen with irr_ != 0.
    return sx > 0 ? sign_of(t) : -sign_of(t);
}

Scalar& Scalar::operator*=(const Scalar& o) {
    // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
    Rat nr = rat_ * o.rat_ + Rat(2) * irr_ * o.irr_;
    Rat ni = rat_ * o.irr_ + irr_ * o.rat_;
    rat_ = std::move(nr);
    irr_ = std::move(ni);
    return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) {
    // 1/(c + d√2) = (c − d√2)/(c² − 2d²)
    const Rat norm = o.rat_ * o.rat_ - Rat(2) * o.irr_ * o.irr_;
    if (norm == 0) throw PreconditionError("scalar division by zero");
    Scalar conj(o.rat_ / norm, -o.irr_ / norm);
    return *this *= conj;
}

std::string Scalar::str() const {
    if (irr_ == 0) return rat_to_string(rat_);
    std::string s;
    if (rat_ != 0) s = rat_to_string(rat_);
    std::string coeff;
    if (irr_ == 1)
        coeff = "";
    else if (irr_ == -1)
        coeff = "-";
    else
        coeff = rat_to_string(irr_);
    if (!s.empty() && sign_of(irr_) > 0) s += "+";
    s += coeff + "√2";
    return s;
}

double Scalar::approx() const {
    return rat_.convert_to<double>() + irr_.convert_to<double>() * 1.4142135623730951;
}

Ordering scalar_compare(const Scalar& a, const Scalar& b) {
    const int s = (a - b).sign();
    return s < 0 ? Ordering::Less : (s > 0 ? Ordering::Greater : Ordering::Equal);
}

BigInt scalar_floor(const Scalar& s) {
    if (s.is_rational()) return floor_rat(s.rat());
    // Write s = (A + B√2)/Q with integers A, B and Q > 0.
    const BigInt q1 = denominator(s.rat()), q2 = denominator(s.irr());
    const BigInt Q = q1 * q2;
    const BigInt A = numerator(s.rat()) * q2;
    const BigInt B = numerator(s.irr()) * q1;
    BigInt f;
    if (B > 0) {
        // B√2 ∈ [r, r+1) with r = isqrt(2B²)
        const BigInt r = sqrt(BigInt(2) * B * B);
        f = floor_div(A + r, Q);
    } else {
        // B√2 = −|B|√2 ∈ (−r−1, −r) with r = isqrt(2B²); irrational, both ends open
        const BigInt r = sqrt(BigInt(2) * B * B);
        f = floor_div(A - r - 1, Q);
    }
    // The estimate is off by at most one unit window; fix with exact compares.
    while (s >= Scalar(f + 1)) ++f;
    while (s < Scalar(f)) --f;
    return f;
}

namespace {

/// Largest k >= 1 with num/den >= k, i.e. floor(num/den), clamped to >= 1.
BigInt accel_steps(const Scalar& num, const Scalar& den) {
    BigInt k = scalar_floor(num / den);
    if (k < 1) k = 1;
    return k;
}

}  // namespace

Rat rational_in_interval(const Scalar& lo, const Scalar& hi) {
    if (!(lo < hi))
        throw EmptyIntervalError("empty interval (" + lo.str() + ", " + hi.str() + ")");
    // Denominator 1: the smallest integer strictly above lo, if it fits.
    const BigInt n = scalar_floor(lo);
    if (Scalar(n + 1) < hi) return Rat(n + 1);
    // No integer inside: the interval sits within [n, n+1]. Mediant descent
    // between n/1 and (n+1)/1; runs in one direction are taken in bulk.
    BigInt a = n, b = 1;      // left bound a/b <= lo
    BigInt c = n + 1, d = 1;  // right bound c/d >= hi
    for (;;) {
        const BigInt mn = a + c, md = b + d;
        const Scalar mid(Rat(mn, md));
        if (lo < mid && mid < hi) return Rat(mn, md);
        if (mid <= lo) {
            // Slide left bound right: L_k = (a+kc)/(b+kd) <= lo while k <= (lo·b − a)/(c − lo·d).
            const Scalar num = lo * Scalar(b) - Scalar(a);
            const Scalar den = Scalar(c) - lo * Scalar(d);
            const BigInt k = accel_steps(num, den);
            a += k * c;
            b += k * d;
        } else {
            // Slide right bound left: R_k = (ka+c)/(kb+d) >= hi while k <= (c − hi·d)/(hi·b − a).
            const Scalar num = Scalar(c) - hi * Scalar(d);
            const Scalar den = hi * Scalar(b) - Scalar(a);
            const BigInt k = accel_steps(num, den);
            c += k * a;
            d += k * b;
        }
    }
}

}  // namespace urlab
