#pragma once

#include "vmulti/polynomial.hpp"
#include "vmulti/rational.hpp"

#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmulti {

// Q(zeta_N) realized as Q[x] modulo the N-th cyclotomic polynomial.
class CyclotomicField {
public:
    explicit CyclotomicField(long long order) : order_(order) {
        if (order <= 0) throw std::invalid_argument("cyclotomic order must be positive");
        modulus_ = cyclotomic_polynomial(order);
        degree_ = static_cast<std::size_t>(modulus_.degree());
    }

    long long order() const { return order_; }
    std::size_t degree() const { return degree_; }
    const QPoly& modulus() const { return modulus_; }

    QPoly reduce(const QPoly& p) const { return QPoly::divmod(p, modulus_).second; }

    // Phi_N(x) = (x^N - 1) / prod_{d | N, d < N} Phi_d(x)
    static QPoly cyclotomic_polynomial(long long n) {
        std::vector<Rational> xn(static_cast<std::size_t>(n) + 1, Rational(0));
        xn[0] = Rational(-1);
        xn.back() = Rational(1);
        QPoly p{std::move(xn)};
        for (long long d = 1; d < n; ++d) {
            if (n % d != 0) continue;
            auto [q, r] = QPoly::divmod(p, cyclotomic_polynomial(d));
            if (!r.is_zero()) throw std::logic_error("cyclotomic division not exact");
            p = q;
        }
        return p;
    }

private:
    long long order_;
    std::size_t degree_;
    QPoly modulus_;
};

using CycloFieldPtr = std::shared_ptr<const CyclotomicField>;

// Element of Q(zeta_N): a polynomial in zeta of degree < phi(N).
class Cyclotomic {
public:
    Cyclotomic() : Cyclotomic(Rational(0)) {}
    Cyclotomic(int v) : Cyclotomic(Rational(v)) {}
    explicit Cyclotomic(const Rational& v)
        : field_(nullptr), rep_(v == Rational(0) ? QPoly() : QPoly::constant(v)) {}
    Cyclotomic(CycloFieldPtr field, QPoly rep) : field_(std::move(field)), rep_(std::move(rep)) {
        if (field_) rep_ = field_->reduce(rep_);
    }

    static Cyclotomic zeta_power(const CycloFieldPtr& field, long long k) {
        long long n = field->order();
        k %= n;
        if (k < 0) k += n;
        return Cyclotomic(field, QPoly::monomial(Rational(1), static_cast<std::size_t>(k)));
    }

    bool is_zero() const { return rep_.is_zero(); }
    bool is_rational() const { return rep_.degree() <= 0; }
    Rational rational_part() const { return rep_.coeff(0); }
    const QPoly& rep() const { return rep_; }
    const CycloFieldPtr& field() const { return field_; }

    friend bool operator==(const Cyclotomic& a, const Cyclotomic& b) { return a.rep_ == b.rep_; }
    friend bool operator!=(const Cyclotomic& a, const Cyclotomic& b) { return !(a == b); }

    friend Cyclotomic operator+(const Cyclotomic& a, const Cyclotomic& b) {
        return Cyclotomic(merge_field(a, b), a.rep_ + b.rep_);
    }
    friend Cyclotomic operator-(const Cyclotomic& a, const Cyclotomic& b) {
        return Cyclotomic(merge_field(a, b), a.rep_ - b.rep_);
    }
    Cyclotomic operator-() const { return Cyclotomic(field_, -rep_); }
    friend Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b) {
        auto f = merge_field(a, b);
        QPoly prod = a.rep_ * b.rep_;
        return Cyclotomic(f, f ? f->reduce(prod) : prod);
    }
    Cyclotomic inverse() const {
        if (is_zero()) throw std::domain_error("inverse of zero");
        if (!field_ || rep_.degree() <= 0)
            return Cyclotomic(field_, QPoly::constant(Rational(1) / rep_.coeff(0)));
        auto [g, u, v] = poly_ext_gcd(rep_, field_->modulus());
        if (g.degree() != 0) throw std::logic_error("cyclotomic element not invertible");
        return Cyclotomic(field_, field_->reduce((Rational(1) / g.coeff(0)) * u));
    }
    friend Cyclotomic operator/(const Cyclotomic& a, const Cyclotomic& b) { return a * b.inverse(); }

    Cyclotomic& operator+=(const Cyclotomic& o) { return *this = *this + o; }
    Cyclotomic& operator-=(const Cyclotomic& o) { return *this = *this - o; }
    Cyclotomic& operator*=(const Cyclotomic& o) { return *this = *this * o; }
    Cyclotomic& operator/=(const Cyclotomic& o) { return *this = *this / o; }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        for (int i = rep_.degree(); i >= 0; --i) {
            Rational c = rep_.coeff(static_cast<std::size_t>(i));
            if (c == Rational(0)) continue;
            if (!first) os << (c > Rational(0) ? " + " : " - ");
            else if (c < Rational(0)) os << "-";
            Rational ab = c < Rational(0) ? Rational(-c) : c;
            first = false;
            if (i == 0) {
                os << rational_to_string(ab);
            } else {
                if (ab != Rational(1)) os << rational_to_string(ab) << "*";
                os << "zeta";
                if (i > 1) os << "^" << i;
            }
        }
        return os.str();
    }

private:
    static CycloFieldPtr merge_field(const Cyclotomic& a, const Cyclotomic& b) {
        if (a.field_ && b.field_ && a.field_->order() != b.field_->order())
            throw std::invalid_argument("cyclotomic field mismatch");
        return a.field_ ? a.field_ : b.field_;
    }
    CycloFieldPtr field_;
    QPoly rep_;
};

}  // namespace vmulti
