#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <ostream>
#include <string>
#include <string_view>

#include "moduli/error.hpp"

namespace moduli {

using big_int = boost::multiprecision::cpp_int;

// Exact rational number, always in lowest terms with positive denominator.
class rational {
public:
    rational() = default;
    rational(long long v) : v_(v) {}
    rational(const big_int& v) : v_(v) {}
    rational(const big_int& num, const big_int& den) {
        if (den == 0) throw error(error_kind::division_by_zero, "zero denominator");
        v_ = den < 0 ? boost::multiprecision::cpp_rational(-num, -den) : boost::multiprecision::cpp_rational(num, den);
    }

    static rational parse(std::string_view s) {
        auto trim = [](std::string_view t) {
            while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
            while (!t.empty() && (t.back() == ' ' || t.back() == '\t')) t.remove_suffix(1);
            return t;
        };
        s = trim(s);
        auto slash = s.find('/');
        auto parse_int = [](std::string_view t) {
            if (t.empty()) throw error(error_kind::parse, "empty integer");
            std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
            if (i == t.size()) throw error(error_kind::parse, "bad integer '" + std::string(t) + "'");
            for (std::size_t j = i; j < t.size(); ++j)
                if (t[j] < '0' || t[j] > '9') throw error(error_kind::parse, "bad integer '" + std::string(t) + "'");
            return big_int(std::string(t[0] == '+' ? t.substr(1) : t));
        };
        if (slash == std::string_view::npos) return rational(parse_int(s));
        return rational(parse_int(trim(s.substr(0, slash))), parse_int(trim(s.substr(slash + 1))));
    }

    big_int num() const { return boost::multiprecision::numerator(v_); }
    big_int den() const { return boost::multiprecision::denominator(v_); }

    bool is_zero() const { return v_ == 0; }
    bool is_integer() const { return den() == 1; }
    int sign() const { return v_ < 0 ? -1 : (v_ > 0 ? 1 : 0); }

    // Only meaningful when is_integer(); throws if it does not fit.
    long long to_int() const {
        if (!is_integer()) throw error(error_kind::precondition_violated, "not an integer: " + str());
        return num().convert_to<long long>();
    }
    double to_double() const { return v_.convert_to<double>(); }

    std::string str() const {
        if (is_integer()) return num().str();
        return num().str() + "/" + den().str();
    }

    rational& operator+=(const rational& o) { v_ += o.v_; return *this; }
    rational& operator-=(const rational& o) { v_ -= o.v_; return *this; }
    rational& operator*=(const rational& o) { v_ *= o.v_; return *this; }
    rational& operator/=(const rational& o) {
        if (o.is_zero()) throw error(error_kind::division_by_zero, "division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend rational operator+(rational a, const rational& b) { return a += b; }
    friend rational operator-(rational a, const rational& b) { return a -= b; }
    friend rational operator*(rational a, const rational& b) { return a *= b; }
    friend rational operator/(rational a, const rational& b) { return a /= b; }
    rational operator-() const { rational r; r.v_ = -v_; return r; }

    friend bool operator==(const rational& a, const rational& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const rational& a, const rational& b) {
        if (a.v_ < b.v_) return std::strong_ordering::less;
        if (a.v_ > b.v_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const rational& r) { return os << r.str(); }

private:
    boost::multiprecision::cpp_rational v_;
};

// Integer power; negative exponents are allowed for nonzero bases.
inline rational pow(const rational& base, long long e) {
    if (e < 0) {
        if (base.is_zero()) throw error(error_kind::division_by_zero, "zero to a negative power");
        return rational(1) / pow(base, -e);
    }
    rational result(1), b = base;
    while (e > 0) {
        if (e & 1) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

} // namespace moduli
