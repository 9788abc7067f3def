#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>

#include "aeq/errors.hpp"

namespace aeq {

/// Exact rational arithmetic for small values, used by the exact-mode
/// equivariance checks. Overflow past 64 bits raises an Error instead of
/// wrapping.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

    /// Exact conversion of a dyadic double (num / 2^k with small k). Values
    /// that would need denominators above 2^20 are rejected.
    static Rational from_double(double value);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(checked(mul128(a.num_, b.den_) + mul128(b.num_, a.den_)),
                        checked(mul128(a.den_, b.den_)));
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(checked(mul128(a.num_, b.den_) - mul128(b.num_, a.den_)),
                        checked(mul128(a.den_, b.den_)));
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(checked(mul128(a.num_, b.num_)), checked(mul128(a.den_, b.den_)));
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return mul128(a.num_, b.den_) < mul128(b.num_, a.den_);
    }

private:
    static __int128 mul128(std::int64_t a, std::int64_t b) {
        return static_cast<__int128>(a) * static_cast<__int128>(b);
    }
    static std::int64_t checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN) {
            throw Error("rational arithmetic overflow");
        }
        return static_cast<std::int64_t>(v);
    }

    void normalize() {
        if (den_ == 0) throw Error("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational Rational::from_double(double value) {
    if (!std::isfinite(value)) throw Error("cannot convert non-finite double to rational");
    int exp = 0;
    const double mant = std::frexp(value, &exp);  // value = mant * 2^exp, |mant| in [0.5, 1)
    double scaled = mant;
    std::int64_t den = 1;
    int shift = exp;
    // Shift the mantissa left until it is integral; bounded so the
    // denominator stays small enough for exact downstream arithmetic.
    while (scaled != std::floor(scaled)) {
        scaled *= 2.0;
        --shift;
        if (shift < -20) {
            throw Error("double is not exactly representable as a small rational");
        }
    }
    std::int64_t num = static_cast<std::int64_t>(scaled);
    if (shift >= 0) {
        if (shift > 40) throw Error("double too large for exact rational conversion");
        num <<= shift;
    } else {
        den = std::int64_t{1} << (-shift);
    }
    return Rational(num, den);
}

inline Rational relu(const Rational& x) {
    return (x < Rational(0)) ? Rational(0) : x;
}

}  // namespace aeq
