#include <dissect/rational.hpp>

#include <stdexcept>

namespace dissect {

Rational::Rational(const Int& num, const Int& den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.q_ == 0) throw std::domain_error("rational division by zero");
    return Rational(mpq_class(a.q_ / b.q_));
}

Rational Rational::parse(const std::string& s) {
    auto is_int = [](const std::string& t) {
        if (t.empty()) return false;
        size_t i = (t[0] == '-') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (!isdigit((unsigned char)t[i])) return false;
        return true;
    };
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        if (!is_int(s)) throw std::invalid_argument("bad rational: " + s);
        return Rational(Int(s), Int(1));
    }
    std::string p = s.substr(0, slash), q = s.substr(slash + 1);
    if (!is_int(p) || !is_int(q)) throw std::invalid_argument("bad rational: " + s);
    Int den(q);
    if (den == 0) throw std::invalid_argument("bad rational (zero denominator): " + s);
    return Rational(Int(p), den);
}

std::string Rational::str() const {
    if (is_integer()) return num().get_str();
    return num().get_str() + "/" + den().get_str();
}

Int Rational::floor() const {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), num().get_mpz_t(), den().get_mpz_t());
    return q;
}

Int Rational::ceil() const {
    Int q;
    mpz_cdiv_q(q.get_mpz_t(), num().get_mpz_t(), den().get_mpz_t());
    return q;
}

Int Rational::round_half_even() const {
    Int fl = floor();
    Rational frac = *this - Rational(fl);
    Rational half(1, 2);
    if (frac > half) return fl + 1;
    if (frac < half) return fl;
    return mpz_even_p(fl.get_mpz_t()) ? fl : fl + 1;
}

}  // namespace dissect
