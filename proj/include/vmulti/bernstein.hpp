#pragma once

#include "vmulti/errors.hpp"
#include "vmulti/lattice_module.hpp"
#include "vmulti/polynomial.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace vmulti {

// Bernstein polynomial of a section for one index: the minimal monic b with
// b(E_i) m inside V_{-1_i}(D) . m.
struct BPoly {
    int index = 0;  // 0-based hypersurface index
    std::map<Rational, int> roots;
    QPoly poly = QPoly::constant(Rational(1));
    bool certified_minimal = true;
    int window_used = 0;

    int degree() const { return poly.degree(); }
};

namespace detail {

// Finite-dimensional coordinate chart for sections supported on a fixed
// degree set.
class SectionChart {
public:
    SectionChart(std::vector<Lattice> degrees, std::size_t rank)
        : degrees_(std::move(degrees)), rank_(rank) {
        for (std::size_t i = 0; i < degrees_.size(); ++i) pos_[degrees_[i]] = i;
    }
    std::size_t dim() const { return degrees_.size() * rank_; }
    std::vector<Rational> coords(const Section& s) const {
        std::vector<Rational> out(dim(), Rational(0));
        for (const auto& [v, x] : s.terms) {
            auto it = pos_.find(v);
            if (it == pos_.end()) throw std::logic_error("section leaves the chart");
            for (std::size_t j = 0; j < rank_; ++j) out[it->second * rank_ + j] = x[j];
        }
        return out;
    }

private:
    std::vector<Lattice> degrees_;
    std::size_t rank_;
    std::map<Lattice, std::size_t> pos_;
};

// Smallest subspace containing m and stable under every E_j.  E_j preserves
// lattice degrees, so every element stays supported on supp(m).
inline std::vector<Section> e_closure(const LatticeModule& m, const Section& s) {
    std::vector<Lattice> degrees;
    for (const auto& [v, x] : s.terms) degrees.push_back(v);
    SectionChart chart(degrees, m.rank());
    std::vector<Section> basis;
    QMatrix span(chart.dim(), 0);
    auto try_add = [&](const Section& cand) {
        if (cand.is_zero()) return false;
        auto co = chart.coords(cand);
        if (span.cols() > 0 && span_contains(span, co)) return false;
        QMatrix col(chart.dim(), 1);
        for (std::size_t i = 0; i < co.size(); ++i) col.at(i, 0) = co[i];
        span = span_canonical(QMatrix::hstack(span, col));
        basis.push_back(cand);
        return true;
    };
    try_add(s);
    for (std::size_t head = 0; head < basis.size(); ++head)
        for (int j = 0; j < m.p(); ++j) try_add(apply_E(m, j, basis[head]));
    return basis;
}

struct MembershipSpace {
    SectionChart chart;
    QMatrix generators;  // columns: coordinates of t^a w over the chart
};

// Generators t^a w of V_{-1_i}(D) . m restricted to shifts |a|_inf <= window,
// a_i >= 1, coordinatized over supp(m) + shifts.
inline MembershipSpace membership_space(const LatticeModule& m, const Section& s, int index,
                                        int window) {
    std::vector<Section> krylov = e_closure(m, s);
    std::vector<Lattice> shifts;
    Lattice a(static_cast<std::size_t>(m.p()), 0);
    a[static_cast<std::size_t>(index)] = 1;
    for (;;) {
        shifts.push_back(a);
        int i = 0;
        while (i < m.p() && a[static_cast<std::size_t>(i)] == window) {
            a[static_cast<std::size_t>(i)] = (i == index) ? 1 : 0;
            ++i;
        }
        if (i == m.p()) break;
        ++a[static_cast<std::size_t>(i)];
    }
    std::set<Lattice> degree_set;
    for (const auto& [v, x] : s.terms) {
        degree_set.insert(v);
        for (const auto& sh : shifts) {
            Lattice w = v;
            for (int i = 0; i < m.p(); ++i) w[static_cast<std::size_t>(i)] += sh[static_cast<std::size_t>(i)];
            degree_set.insert(w);
        }
    }
    SectionChart chart(std::vector<Lattice>(degree_set.begin(), degree_set.end()), m.rank());
    QMatrix gens(chart.dim(), shifts.size() * krylov.size());
    std::size_t col = 0;
    for (const auto& sh : shifts)
        for (const auto& w : krylov) {
            Section shifted = w;
            {
                Section tmp;
                for (const auto& [v, x] : w.terms) {
                    Lattice u = v;
                    for (int i = 0; i < m.p(); ++i)
                        u[static_cast<std::size_t>(i)] += sh[static_cast<std::size_t>(i)];
                    tmp.terms[u] = x;
                }
                shifted = tmp;
            }
            auto co = chart.coords(shifted);
            for (std::size_t i = 0; i < co.size(); ++i) gens.at(i, col) = co[i];
            ++col;
        }
    return MembershipSpace{std::move(chart), std::move(gens)};
}

// Minimal monic b with b(E_index) m in the span of the windowed generators.
inline QPoly minimal_b_at_window(const LatticeModule& m, const Section& s, int index,
                                 int window) {
    MembershipSpace ms = membership_space(m, s, index, window);
    std::vector<Section> powers{s};
    QMatrix lhs = ms.generators;
    std::size_t bound = 0;
    for (const auto& [v, x] : s.terms) bound += x.size();
    for (std::size_t d = 0;; ++d) {
        Section next = apply_E(m, index, powers.back());
        auto target = ms.chart.coords(powers[d]);
        // does E^d m lie in span(previous powers, generators)?
        std::vector<Rational> rhs = target;
        if (d == 0) {
            if (ms.generators.cols() > 0 && span_contains(ms.generators, rhs))
                throw std::logic_error("nonzero section inside V_{-1_i}(D).m");
        } else {
            QMatrix sys(ms.chart.dim(), d + ms.generators.cols());
            for (std::size_t j = 0; j < d; ++j) {
                auto co = ms.chart.coords(powers[j]);
                for (std::size_t i = 0; i < co.size(); ++i) sys.at(i, j) = co[i];
            }
            for (std::size_t i = 0; i < ms.chart.dim(); ++i)
                for (std::size_t j = 0; j < ms.generators.cols(); ++j)
                    sys.at(i, d + j) = ms.generators.at(i, j);
            auto sol = sys.solve(rhs);
            if (sol) {
                std::vector<Rational> coeffs(d + 1, Rational(0));
                coeffs[d] = Rational(1);
                for (std::size_t j = 0; j < d; ++j) coeffs[j] = -(*sol)[j];
                return QPoly(std::move(coeffs));
            }
        }
        powers.push_back(next);
        if (d > bound + 1) throw std::logic_error("bernstein degree exceeds the dimension bound");
    }
}

inline bool b_membership(const LatticeModule& m, const Section& s, int index, int window,
                         const QPoly& b) {
    MembershipSpace ms = membership_space(m, s, index, window);
    // b(E) m
    Section acc;
    Section power = s;
    for (int d = 0; d <= b.degree(); ++d) {
        acc = section_add(acc, section_scale(b.coeff(static_cast<std::size_t>(d)), power));
        power = apply_E(m, index, power);
    }
    if (acc.is_zero()) return true;
    if (ms.generators.cols() == 0) return false;
    return span_contains(ms.generators, ms.chart.coords(acc));
}

}  // namespace detail

// Oracle: minimal b via per-degree linear algebra, accepted only when windows
// W and W+1 agree; minimality certified by re-testing every one-root-dropped
// divisor.
inline BPoly bernstein_poly(const LatticeModule& m, const Section& s, int index, int window = 3) {
    if (index < 0 || index >= m.p()) throw std::invalid_argument("index out of range");
    BPoly out;
    out.index = index;
    out.window_used = window;
    if (s.is_zero()) return out;
    QPoly b = detail::minimal_b_at_window(m, s, index, window);
    QPoly b_next = detail::minimal_b_at_window(m, s, index, window + 1);
    if (!(b == b_next))
        throw WindowTooSmall("bernstein polynomial changed between windows " +
                             std::to_string(window) + " and " + std::to_string(window + 1));
    auto roots = rational_roots(b);
    if (!roots) throw IrrationalSpectrum("bernstein polynomial does not split over Q");
    out.roots = *roots;
    out.poly = b;
    for (const auto& [r, mult] : out.roots) {
        QPoly lin(std::vector<Rational>{-r, Rational(1)});
        QPoly reduced = QPoly::divmod(b, lin).first;
        if (detail::b_membership(m, s, index, window, reduced))
            throw std::logic_error("divisor certification failed: smaller b works");
    }
    out.certified_minimal = true;
    return out;
}

// The per-section slope-free condition: every index admits a one-variable
// Bernstein relation.  Returns the witness polynomials.
struct SansPenteReport {
    bool holds = false;
    std::vector<BPoly> witnesses;
};

inline SansPenteReport check_sans_pente(const LatticeModule& m, const Section& s,
                                        int window = 3) {
    SansPenteReport rep;
    for (int i = 0; i < m.p(); ++i) rep.witnesses.push_back(bernstein_poly(m, s, i, window));
    rep.holds = true;
    return rep;
}

}  // namespace vmulti
