#include <dissect/rational.hpp>

#include <doctest.h>

#include <stdexcept>

using dissect::Int;
using dissect::Rational;

TEST_CASE("construction normalizes") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(0, 5) == Rational(0));
    CHECK(Rational(7).den() == 1);
}

TEST_CASE("parse") {
    CHECK(Rational::parse("1/7") == Rational(1, 7));
    CHECK(Rational::parse("19/32") == Rational(19, 32));
    CHECK(Rational::parse("3") == Rational(3));
    CHECK(Rational::parse("-2/6") == Rational(-1, 3));
    CHECK_THROWS_AS(Rational::parse("0.125"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("a/b"), std::invalid_argument);
}

TEST_CASE("arithmetic stays exact") {
    Rational a(1, 3), b(1, 6);
    CHECK(a + b == Rational(1, 2));
    CHECK(a - b == Rational(1, 6));
    CHECK(a * b == Rational(1, 18));
    CHECK(a / b == Rational(2));
    CHECK(Rational(1) - Rational(1, 3) - Rational(2, 3) * Rational(1, 4) == Rational(1, 2));
}

TEST_CASE("comparisons") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(0));
    CHECK(Rational(19, 32) > Rational(4, 7));
    CHECK(Rational(2, 4) <= Rational(1, 2));
}

TEST_CASE("floor and ceil") {
    CHECK(Rational(7, 2).floor() == 3);
    CHECK(Rational(7, 2).ceil() == 4);
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(-7, 2).ceil() == -3);
    CHECK(Rational(6, 2).floor() == 3);
    CHECK(Rational(6, 2).ceil() == 3);
}

TEST_CASE("round half to even") {
    CHECK(Rational(5, 2).round_half_even() == 2);
    CHECK(Rational(7, 2).round_half_even() == 4);
    CHECK(Rational(9, 2).round_half_even() == 4);
    CHECK(Rational(11, 4).round_half_even() == 3);
    CHECK(Rational(-5, 2).round_half_even() == -2);
    CHECK(Rational(91, 8).round_half_even() == 11);  // 11.375
    CHECK(Rational(17, 60).round_half_even() * 0 == 0);
    CHECK((Rational(17, 60) * 40).round_half_even() == 11);  // 11.33..
}

TEST_CASE("string form") {
    CHECK(Rational(19, 32).str() == "19/32");
    CHECK(Rational(4).str() == "4");
    CHECK(Rational(-1, 3).str() == "-1/3");
}

TEST_CASE("double approximation") {
    CHECK(Rational(1, 2).to_double() == doctest::Approx(0.5));
    CHECK(Rational(19, 32).to_double() == doctest::Approx(0.59375));
}
