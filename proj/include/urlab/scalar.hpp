#pragma once

#include <compare>
#include <optional>
#include <string>

#include "urlab/rational.hpp"

namespace urlab {

enum class Ordering { Less = -1, Equal = 0, Greater = 1 };

/// Exact element of the field Q(√2): value = rat + irr·√2.
/// Both parts are canonical rationals, so equality is representation equality
/// and the value is rational iff irr = 0.
class Scalar {
public:
    Scalar() = default;
    Scalar(int v) : rat_(v) {}                // NOLINT: implicit by design
    Scalar(long v) : rat_(v) {}               // NOLINT
    Scalar(const BigInt& v) : rat_(v) {}      // NOLINT
    Scalar(Rat rat) : rat_(std::move(rat)) {} // NOLINT
    Scalar(Rat rat, Rat irr) : rat_(std::move(rat)), irr_(std::move(irr)) {}

    static Scalar sqrt2() { return Scalar(Rat(0), Rat(1)); }

    const Rat& rat() const { return rat_; }
    const Rat& irr() const { return irr_; }

    bool is_rational() const { return irr_ == 0; }
    bool is_zero() const { return rat_ == 0 && irr_ == 0; }

    /// The rational value; throws PreconditionError when the value is irrational.
    const Rat& as_rational() const {
        if (!is_rational()) throw PreconditionError("scalar is irrational: " + str());
        return rat_;
    }

    /// Exact sign of rat + irr·√2, decided by integer cross-multiplication.
    int sign() const;

    Scalar operator-() const { return Scalar(-rat_, -irr_); }
    Scalar& operator+=(const Scalar& o) { rat_ += o.rat_; irr_ += o.irr_; return *this; }
    Scalar& operator-=(const Scalar& o) { rat_ -= o.rat_; irr_ -= o.irr_; return *this; }
    Scalar& operator*=(const Scalar& o);
    Scalar& operator/=(const Scalar& o);

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.rat_ == b.rat_ && a.irr_ == b.irr_;
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }
    friend bool operator<(const Scalar& a, const Scalar& b) { return (a - b).sign() < 0; }
    friend bool operator>(const Scalar& a, const Scalar& b) { return (a - b).sign() > 0; }
    friend bool operator<=(const Scalar& a, const Scalar& b) { return (a - b).sign() <= 0; }
    friend bool operator>=(const Scalar& a, const Scalar& b) { return (a - b).sign() >= 0; }

    /// Human-readable form, e.g. "3/2", "√2", "1+2/3√2", "-√2".
    std::string str() const;

    double approx() const;

private:
    Rat rat_{0};
    Rat irr_{0};
};

Ordering scalar_compare(const Scalar& a, const Scalar& b);

inline const Scalar& scalar_min(const Scalar& a, const Scalar& b) { return b < a ? b : a; }
inline const Scalar& scalar_max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }
inline Scalar scalar_abs(const Scalar& a) { return a.sign() < 0 ? -a : a; }

/// Exact floor of a Q(√2) value, via integer square roots.
BigInt scalar_floor(const Scalar& s);

/// The rational in the open interval (lo, hi) with minimal denominator and,
/// among those, minimal numerator. Stern–Brocot mediant descent with run
/// acceleration; throws EmptyIntervalError when lo >= hi.
Rat rational_in_interval(const Scalar& lo, const Scalar& hi);

}  // namespace urlab
