#pragma once

#include "vmulti/cyclotomic.hpp"

#include <cctype>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace vmulti {

class Tower;

// The scalar tower Q < Q(zeta_N) < Frac(Q(zeta_N)[tau]).  tau is a formal
// transcendental; no numeric value is ever substituted for it.  N is chosen
// per session as the lcm of the denominators of the rational exponents in
// play, so that every monodromy scalar exp(2*pi*i*q) is an exact zeta power.
class ScalarField : public std::enable_shared_from_this<ScalarField> {
public:
    static std::shared_ptr<const ScalarField> make(long long cyclotomic_order) {
        return std::shared_ptr<const ScalarField>(new ScalarField(cyclotomic_order));
    }

    long long cyclotomic_order() const { return cyclo_->order(); }
    const CycloFieldPtr& cyclotomic_field() const { return cyclo_; }

    Tower from_rational(const Rational& q) const;
    Tower from_cyclotomic(const Cyclotomic& c) const;
    Tower zeta(long long power = 1) const;
    Tower tau() const;
    // exp(2*pi*i*q) as an exact root of unity; q must have denominator
    // dividing the cyclotomic order.
    Tower exp_two_pi_i(const Rational& q) const;

private:
    explicit ScalarField(long long order) : cyclo_(std::make_shared<CyclotomicField>(order)) {}
    CycloFieldPtr cyclo_;
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

// Element of the tower: a reduced fraction num/den of polynomials in tau over
// Q(zeta_N), with monic denominator.
class Tower {
public:
    Tower() : Tower(Rational(0)) {}
    Tower(int v) : Tower(Rational(v)) {}
    explicit Tower(const Rational& v)
        : num_(v == Rational(0) ? Poly<Cyclotomic>() : Poly<Cyclotomic>::constant(Cyclotomic(v))),
          den_(Poly<Cyclotomic>::constant(Cyclotomic(Rational(1)))) {}
    Tower(ScalarFieldPtr field, Poly<Cyclotomic> num, Poly<Cyclotomic> den)
        : field_(std::move(field)), num_(std::move(num)), den_(std::move(den)) {
        normalize();
    }

    const ScalarFieldPtr& field() const { return field_; }
    const Poly<Cyclotomic>& num() const { return num_; }
    const Poly<Cyclotomic>& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.degree() == 0; }
    bool is_rational() const {
        return is_polynomial() && num_.degree() <= 0 && num_.coeff(0).is_rational();
    }
    Rational rational_part() const { return num_.coeff(0).rational_part(); }

    friend bool operator==(const Tower& a, const Tower& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Tower& a, const Tower& b) { return !(a == b); }

    friend Tower operator+(const Tower& a, const Tower& b) {
        return Tower(merge(a, b), a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Tower operator-(const Tower& a, const Tower& b) {
        return Tower(merge(a, b), a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    Tower operator-() const { return Tower(field_, -num_, den_); }
    friend Tower operator*(const Tower& a, const Tower& b) {
        return Tower(merge(a, b), a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Tower operator/(const Tower& a, const Tower& b) {
        if (b.is_zero()) throw std::domain_error("tower division by zero");
        return Tower(merge(a, b), a.num_ * b.den_, a.den_ * b.num_);
    }
    Tower& operator+=(const Tower& o) { return *this = *this + o; }
    Tower& operator-=(const Tower& o) { return *this = *this - o; }
    Tower& operator*=(const Tower& o) { return *this = *this * o; }
    Tower& operator/=(const Tower& o) { return *this = *this / o; }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::string n = poly_to_string(num_);
        if (den_.degree() == 0 && den_.coeff(0) == Cyclotomic(Rational(1))) return n;
        return "(" + n + ") / (" + poly_to_string(den_) + ")";
    }

private:
    static ScalarFieldPtr merge(const Tower& a, const Tower& b) {
        if (a.field_ && b.field_ && a.field_->cyclotomic_order() != b.field_->cyclotomic_order())
            throw std::invalid_argument("scalar field mismatch");
        return a.field_ ? a.field_ : b.field_;
    }

    void normalize() {
        if (den_.is_zero()) throw std::domain_error("tower with zero denominator");
        if (num_.is_zero()) {
            den_ = Poly<Cyclotomic>::constant(Cyclotomic(Rational(1)));
            return;
        }
        Poly<Cyclotomic> g = poly_gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = Poly<Cyclotomic>::divmod(num_, g).first;
            den_ = Poly<Cyclotomic>::divmod(den_, g).first;
        }
        Cyclotomic lead = den_.leading();
        if (lead != Cyclotomic(Rational(1))) {
            Cyclotomic inv = lead.inverse();
            num_ = inv * num_;
            den_ = inv * den_;
        }
    }

    static std::string poly_to_string(const Poly<Cyclotomic>& p) {
        if (p.is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        for (int i = p.degree(); i >= 0; --i) {
            Cyclotomic c = p.coeff(static_cast<std::size_t>(i));
            if (c.is_zero()) continue;
            if (!first) os << " + ";
            first = false;
            std::string cs = c.to_string();
            bool trivial = (cs == "1") && i > 0;
            if (!trivial) {
                if (c.rep().degree() > 0 && i > 0 && c.rep().coeffs().size() > 1)
                    os << "(" << cs << ")";
                else
                    os << cs;
                if (i > 0) os << "*";
            }
            if (i > 0) {
                os << "tau";
                if (i > 1) os << "^" << i;
            }
        }
        return os.str();
    }

    ScalarFieldPtr field_;
    Poly<Cyclotomic> num_;
    Poly<Cyclotomic> den_;
};

inline Tower ScalarField::from_rational(const Rational& q) const {
    return Tower(shared_from_this(), Poly<Cyclotomic>::constant(Cyclotomic(q)),
                 Poly<Cyclotomic>::constant(Cyclotomic(Rational(1))));
}

inline Tower ScalarField::from_cyclotomic(const Cyclotomic& c) const {
    return Tower(shared_from_this(), Poly<Cyclotomic>::constant(c),
                 Poly<Cyclotomic>::constant(Cyclotomic(Rational(1))));
}

inline Tower ScalarField::zeta(long long power) const {
    return from_cyclotomic(Cyclotomic::zeta_power(cyclo_, power));
}

inline Tower ScalarField::tau() const {
    return Tower(shared_from_this(), Poly<Cyclotomic>::monomial(Cyclotomic(Rational(1)), 1),
                 Poly<Cyclotomic>::constant(Cyclotomic(Rational(1))));
}

inline Tower ScalarField::exp_two_pi_i(const Rational& q) const {
    Integer n(cyclotomic_order());
    Rational scaled = q * Rational(n);
    if (!is_integer(scaled))
        throw std::invalid_argument("exponent denominator does not divide the cyclotomic order");
    return zeta(to_long(numerator(scaled)));
}

// --- scalar expression parser ------------------------------------------
//
// Grammar for CLI scalar entries: rationals, "zeta", "tau", + - * / ^ and
// parentheses.  "^" takes a non-negative integer exponent.
class ScalarParser {
public:
    ScalarParser(ScalarFieldPtr field, std::string text)
        : field_(std::move(field)), s_(std::move(text)) {}

    Tower parse() {
        Tower v = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return v;
    }

private:
    Tower expr() {
        skip_ws();
        bool neg = false;
        while (peek() == '+' || peek() == '-') {
            if (get() == '-') neg = !neg;
            skip_ws();
        }
        Tower v = term();
        if (neg) v = -v;
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '+' || c == '-') {
                get();
                Tower rhs = term();
                v = (c == '+') ? v + rhs : v - rhs;
            } else {
                return v;
            }
        }
    }
    Tower term() {
        Tower v = factor();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '*' || c == '/') {
                get();
                Tower rhs = factor();
                v = (c == '*') ? v * rhs : v / rhs;
            } else {
                return v;
            }
        }
    }
    Tower factor() {
        Tower base = atom();
        skip_ws();
        if (peek() == '^') {
            get();
            skip_ws();
            std::string digits;
            while (std::isdigit(static_cast<unsigned char>(peek()))) digits += get();
            if (digits.empty()) fail("exponent expected");
            long long e = std::stoll(digits);
            Tower v = field_ ? field_->from_rational(Rational(1)) : Tower(Rational(1));
            for (long long i = 0; i < e; ++i) v *= base;
            return v;
        }
        return base;
    }
    Tower atom() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            get();
            Tower v = expr();
            skip_ws();
            if (get() != ')') fail("expected ')'");
            return v;
        }
        if (c == '-') {
            get();
            return -atom();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (std::isdigit(static_cast<unsigned char>(peek()))) digits += get();
            Rational q{Integer(digits)};
            return field_ ? field_->from_rational(q) : Tower(q);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string name;
            while (std::isalpha(static_cast<unsigned char>(peek()))) name += get();
            if (name == "zeta") {
                if (!field_) fail("zeta requires a scalar field");
                return field_->zeta(1);
            }
            if (name == "tau") {
                if (!field_) fail("tau requires a scalar field");
                return field_->tau();
            }
            fail("unknown symbol \"" + name + "\"");
        }
        fail("unexpected character");
        return Tower();
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("scalar parse error at position " + std::to_string(pos_) +
                                    ": " + msg + " in \"" + s_ + "\"");
    }

    ScalarFieldPtr field_;
    std::string s_;
    std::size_t pos_ = 0;
};

inline Tower parse_scalar(const ScalarFieldPtr& field, const std::string& text) {
    return ScalarParser(field, text).parse();
}

}  // namespace vmulti
