#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rsparse {

// Exact rational in lowest terms with a positive denominator.
class Rational {
public:
    using integer = boost::multiprecision::cpp_int;

    Rational() : v_(0) {}
    Rational(long long n) : v_(n) {}  // NOLINT: implicit by design for literals
    Rational(long long n, long long d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        // the backend rejects negative denominators
        v_ = d < 0 ? boost::multiprecision::cpp_rational(-integer(n), -integer(d))
                   : boost::multiprecision::cpp_rational(integer(n), integer(d));
    }
    Rational(const integer& n, const integer& d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        v_ = d < 0 ? boost::multiprecision::cpp_rational(-n, -d) : boost::multiprecision::cpp_rational(n, d);
    }

    // Accepts "n", "n/d" and "-n/d".
    static Rational parse(const std::string& s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rational(integer(trim(s)), integer(1));
            return Rational(integer(trim(s.substr(0, slash))), integer(trim(s.substr(slash + 1))));
        } catch (const std::domain_error&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("not a rational: '" + s + "'");
        }
    }

    integer num() const { return boost::multiprecision::numerator(v_); }
    integer den() const { return boost::multiprecision::denominator(v_); }
    double to_double() const { return v_.convert_to<double>(); }
    std::string str() const {
        if (den() == 1) return num().str();
        return num().str() + "/" + den().str();
    }
    bool is_integer() const { return den() == 1; }

    Rational operator-() const { Rational r; r.v_ = -v_; return r; }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.v_ == 0) throw std::domain_error("Rational: division by zero");
        v_ /= o.v_;
        return *this;
    }
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        if (a.v_ < b.v_) return std::strong_ordering::less;
        if (a.v_ > b.v_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    Rational reciprocal() const { return Rational(1) / *this; }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument("empty rational");
        return s.substr(b, e - b + 1);
    }
    boost::multiprecision::cpp_rational v_;
};

}  // namespace rsparse
