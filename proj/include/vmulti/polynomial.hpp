#pragma once

#include "vmulti/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace vmulti {

// Dense univariate polynomial over an exact field T.  Coefficient 0 is the
// constant term; the representation is kept normalized (no trailing zeros).
template <typename T>
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Poly constant(const T& v) { return Poly(std::vector<T>{v}); }
    static Poly monomial(const T& v, std::size_t deg) {
        std::vector<T> c(deg + 1, T(0));
        c[deg] = v;
        return Poly(std::move(c));
    }

    bool is_zero() const { return c_.empty(); }
    // degree of 0 is -1 by convention
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<T>& coeffs() const { return c_; }
    T coeff(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
    T leading() const {
        if (is_zero()) throw std::logic_error("leading coefficient of zero polynomial");
        return c_.back();
    }

    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
        return Poly(std::move(c));
    }
    Poly operator-() const {
        std::vector<T> c(c_);
        for (auto& x : c) x = -x;
        return Poly(std::move(c));
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<T> c(a.c_.size() + b.c_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(c));
    }
    friend Poly operator*(const T& s, const Poly& a) {
        std::vector<T> c(a.c_);
        for (auto& x : c) x = s * x;
        return Poly(std::move(c));
    }

    T eval(const T& x) const {
        T acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    // Euclidean division; requires b != 0 and invertible leading coefficient.
    static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
        if (b.is_zero()) throw std::invalid_argument("polynomial division by zero");
        Poly r = a;
        std::vector<T> q(a.c_.size() > b.c_.size() ? a.c_.size() - b.c_.size() + 1 : 1, T(0));
        T inv_lead = T(1) / b.leading();
        while (!r.is_zero() && r.degree() >= b.degree()) {
            std::size_t shift = static_cast<std::size_t>(r.degree() - b.degree());
            T f = r.leading() * inv_lead;
            q[shift] += f;
            r = r - Poly::monomial(f, shift) * b;
        }
        return {Poly(std::move(q)), r};
    }

    Poly monic() const {
        if (is_zero()) return *this;
        return (T(1) / leading()) * (*this);
    }

    Poly derivative() const {
        if (c_.size() <= 1) return Poly();
        std::vector<T> c(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) c[i - 1] = T(static_cast<int>(i)) * c_[i];
        return Poly(std::move(c));
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
    }
    std::vector<T> c_;
};

// Monic gcd via Euclid's algorithm.
template <typename T>
Poly<T> poly_gcd(Poly<T> a, Poly<T> b) {
    while (!b.is_zero()) {
        auto [q, r] = Poly<T>::divmod(a, b);
        a = b;
        b = r;
    }
    return a.monic();
}

// Extended Euclid: returns (g, u, v) with u*a + v*b = g, g monic.
template <typename T>
std::tuple<Poly<T>, Poly<T>, Poly<T>> poly_ext_gcd(const Poly<T>& a, const Poly<T>& b) {
    Poly<T> r0 = a, r1 = b;
    Poly<T> u0 = Poly<T>::constant(T(1)), u1;
    Poly<T> v0, v1 = Poly<T>::constant(T(1));
    while (!r1.is_zero()) {
        auto [q, r] = Poly<T>::divmod(r0, r1);
        r0 = r1;
        r1 = r;
        Poly<T> u = u0 - q * u1;
        u0 = u1;
        u1 = u;
        Poly<T> v = v0 - q * v1;
        v0 = v1;
        v1 = v;
    }
    if (r0.is_zero()) return {r0, u0, v0};
    T inv = T(1) / r0.leading();
    return {inv * r0, inv * u0, inv * v0};
}

using QPoly = Poly<Rational>;

// Monic polynomial with prescribed rational roots and multiplicities.
inline QPoly poly_from_roots(const std::map<Rational, int>& roots) {
    QPoly p = QPoly::constant(Rational(1));
    for (const auto& [r, mult] : roots) {
        QPoly lin(std::vector<Rational>{-r, Rational(1)});
        for (int i = 0; i < mult; ++i) p = p * lin;
    }
    return p;
}

namespace detail {
inline std::vector<Integer> positive_divisors(Integer n, std::size_t cap = 1u << 20) {
    if (n < 0) n = -n;
    std::vector<Integer> divs;
    if (n == 0) return divs;
    for (Integer d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            divs.push_back(d);
            if (d * d != n) divs.push_back(n / d);
        }
        if (divs.size() > cap) throw std::runtime_error("divisor enumeration overflow");
    }
    return divs;
}
}  // namespace detail

// All rational roots of p with multiplicities, found by the rational root
// theorem and synthetic deflation.  Returns std::nullopt if the deflated
// polynomial has positive degree (i.e. p does not split over Q).
inline std::optional<std::map<Rational, int>> rational_roots(const QPoly& p_in) {
    if (p_in.is_zero()) throw std::invalid_argument("roots of the zero polynomial");
    std::map<Rational, int> roots;
    QPoly p = p_in.monic();
    // strip x^k
    while (!p.is_zero() && p.coeff(0) == Rational(0) && p.degree() > 0) {
        auto [q, r] = QPoly::divmod(p, QPoly(std::vector<Rational>{Rational(0), Rational(1)}));
        p = q;
        roots[Rational(0)] += 1;
    }
    if (p.degree() <= 0) return roots;
    // clear denominators: P(x) = sum a_i x^i with a_i integers
    Integer den = 1;
    for (const auto& c : p.coeffs()) den = integer_lcm(den, denominator(c));
    std::vector<Integer> a;
    for (const auto& c : p.coeffs()) a.push_back(numerator(c) * (den / denominator(c)));
    Integer a0 = a.front(), an = a.back();
    std::vector<Rational> candidates;
    for (const auto& num : detail::positive_divisors(a0))
        for (const auto& d : detail::positive_divisors(an)) {
            candidates.push_back(Rational(num, d));
            candidates.push_back(Rational(-num, d));
        }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const auto& r : candidates) {
        while (p.degree() > 0 && p.eval(r) == Rational(0)) {
            QPoly lin(std::vector<Rational>{-r, Rational(1)});
            auto [q, rem] = QPoly::divmod(p, lin);
            p = q;
            roots[r] += 1;
        }
    }
    if (p.degree() > 0) return std::nullopt;
    return roots;
}

}  // namespace vmulti
