#pragma once

#include <dissect/ints.hpp>
#include <string>

namespace dissect {

// Exact rational, always in lowest terms with positive denominator.
class Rational {
public:
    Rational() : q_(0) {}
    Rational(long n) : q_(n) {}  // NOLINT: implicit on purpose
    Rational(const Int& n) : q_(n) {}
    Rational(const Int& num, const Int& den);
    Rational(long num, long den) : Rational(Int(num), Int(den)) {}

    // accepts "p/q" or "p"; rejects anything else (incl. decimals)
    static Rational parse(const std::string& s);

    Int num() const { return q_.get_num(); }
    Int den() const { return q_.get_den(); }
    bool is_integer() const { return q_.get_den() == 1; }

    Int floor() const;
    Int ceil() const;
    Int round_half_even() const;  // nearest integer, ties to even

    double to_double() const { return q_.get_d(); }
    std::string str() const;  // "p/q", or "p" when the denominator is 1

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

private:
    explicit Rational(const mpq_class& q) : q_(q) {}  // assumed canonical
    mpq_class q_;
};

}  // namespace dissect
