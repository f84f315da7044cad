#pragma once

#include "vmulti/errors.hpp"
#include "vmulti/hypercomplex.hpp"
#include "vmulti/matrix.hpp"
#include "vmulti/rational.hpp"
#include "vmulti/spectrum.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vmulti {

// Localized Nilsson-class module over p hypersurfaces: a rank-r fiber L with
// commuting rational-spectrum residue endomorphisms C_1..C_p.  Elements are
// finite combinations of symbols v(x)b (v in Z^p, b in L) with
//
//   t_i (v(x)b) = (v+1_i)(x)b
//   E_i (v(x)b) = v(x)(v_i b + C_i b)          (E_i = t_i d_i)
//   d_i = t_i^{-1} E_i.
//
// A support floor of 0 at index i marks the non-localized sub-lattice
// (degrees v_i >= 0); it requires C_i = 0 so the sub-lattice is stable under
// the operator action.
class LatticeModule {
public:
    LatticeModule(int p, std::vector<QMatrix> residues, std::vector<std::string> labels = {},
                  std::string name = "module",
                  std::vector<std::optional<int>> support_floor = {})
        : p_(p), residues_(std::move(residues)), labels_(std::move(labels)),
          name_(std::move(name)), floor_(std::move(support_floor)) {
        if (p_ <= 0) throw std::invalid_argument("module needs at least one hypersurface");
        if (static_cast<int>(residues_.size()) != p_)
            throw std::invalid_argument("one residue matrix per hypersurface required");
        rank_ = residues_[0].rows();
        if (rank_ == 0) throw std::invalid_argument("zero-rank module");
        for (const auto& c : residues_)
            if (c.rows() != rank_ || c.cols() != rank_)
                throw std::invalid_argument("residue size mismatch");
        if (labels_.empty())
            for (std::size_t i = 0; i < rank_; ++i) labels_.push_back("b" + std::to_string(i));
        if (labels_.size() != rank_) throw std::invalid_argument("fiber label count mismatch");
        if (floor_.empty()) floor_.assign(static_cast<std::size_t>(p_), std::nullopt);
        if (static_cast<int>(floor_.size()) != p_)
            throw std::invalid_argument("support floor arity mismatch");
        for (int i = 0; i < p_; ++i)
            if (floor_[static_cast<std::size_t>(i)] &&
                (!residues_[static_cast<std::size_t>(i)].is_zero() ||
                 *floor_[static_cast<std::size_t>(i)] != 0))
                throw std::invalid_argument(
                    "support floor requires a zero residue and floor 0 at that index");
        spectrum_ = joint_spectrum(residues_);
    }

    int p() const { return p_; }
    std::size_t rank() const { return rank_; }
    const std::string& name() const { return name_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const QMatrix& residue(int i) const { return residues_[static_cast<std::size_t>(i)]; }
    const std::vector<QMatrix>& residues() const { return residues_; }
    const JointSpectrum& spectrum() const { return spectrum_; }
    bool is_localized() const {
        for (const auto& f : floor_)
            if (f) return false;
        return true;
    }
    const std::vector<std::optional<int>>& support_floor() const { return floor_; }
    bool degree_in_support(const Lattice& v) const {
        for (int i = 0; i < p_; ++i)
            if (floor_[static_cast<std::size_t>(i)] && v[static_cast<std::size_t>(i)] < 0)
                return false;
        return true;
    }

    LatticeModule localized(std::string name = "") const {
        return LatticeModule(p_, residues_, labels_, name.empty() ? name_ + "_loc" : name, {});
    }

    // Rational exponents that determine the session's cyclotomic order.
    std::vector<Rational> spectral_exponents() const {
        std::vector<Rational> out;
        for (const auto& b : spectrum_.blocks)
            for (const auto& mu : b.mu) out.push_back(mu);
        return out;
    }

    // --- named constructors -------------------------------------------

    // O_X[1/t_1...t_p]: rank 1, all residues zero.
    static LatticeModule o_localized(int p) {
        std::vector<QMatrix> cs(static_cast<std::size_t>(p), QMatrix(1, 1));
        return LatticeModule(p, std::move(cs), {"1"}, "O_loc(p=" + std::to_string(p) + ")");
    }

    // O_X as the sub-lattice v >= 0 of O_X[1/t].
    static LatticeModule o_polynomial(int p) {
        std::vector<QMatrix> cs(static_cast<std::size_t>(p), QMatrix(1, 1));
        std::vector<std::optional<int>> fl(static_cast<std::size_t>(p), 0);
        return LatticeModule(p, std::move(cs), {"1"}, "O(p=" + std::to_string(p) + ")",
                             std::move(fl));
    }

    // Multivalued-function model: basis e_l for 0 <= l <= k with
    // E_i e_l = (alpha_i + 1) e_l + e_{l - 1_i}; residues (alpha_i+1)Id + S_i.
    static LatticeModule nilsson(const std::vector<Rational>& alpha, const std::vector<int>& k) {
        int p = static_cast<int>(alpha.size());
        if (static_cast<int>(k.size()) != p) throw std::invalid_argument("nilsson arity mismatch");
        for (const auto& a : alpha)
            if (a < Rational(-1) || a >= Rational(0))
                throw std::invalid_argument("nilsson exponent out of [-1,0)");
        for (int ki : k)
            if (ki < 0) throw std::invalid_argument("negative log depth");
        std::vector<Lattice> ells;
        Lattice ell(static_cast<std::size_t>(p), 0);
        for (;;) {
            ells.push_back(ell);
            int i = 0;
            while (i < p && ell[static_cast<std::size_t>(i)] ==
                                k[static_cast<std::size_t>(i)])
                ell[static_cast<std::size_t>(i++)] = 0;
            if (i == p) break;
            ++ell[static_cast<std::size_t>(i)];
        }
        std::map<Lattice, std::size_t> pos;
        for (std::size_t j = 0; j < ells.size(); ++j) pos[ells[j]] = j;
        std::size_t r = ells.size();
        std::vector<QMatrix> cs;
        for (int i = 0; i < p; ++i) {
            QMatrix c(r, r);
            for (std::size_t j = 0; j < r; ++j) {
                c.at(j, j) = alpha[static_cast<std::size_t>(i)] + Rational(1);
                Lattice down = ells[j];
                if (down[static_cast<std::size_t>(i)] > 0) {
                    --down[static_cast<std::size_t>(i)];
                    c.at(pos[down], j) = Rational(1);
                }
            }
            cs.push_back(std::move(c));
        }
        std::vector<std::string> labels;
        for (const auto& l : ells) labels.push_back("e" + lattice_to_string(l));
        std::string name = "nilsson(alpha=(";
        for (int i = 0; i < p; ++i)
            name += (i ? "," : "") + rational_to_string(alpha[static_cast<std::size_t>(i)]);
        name += "),k=(";
        for (int i = 0; i < p; ++i)
            name += (i ? "," : "") + std::to_string(k[static_cast<std::size_t>(i)]);
        return LatticeModule(p, std::move(cs), std::move(labels), name + "))");
    }

    // M (x) N_{alpha,k}: fiber L (x) L', residues C_i (x) Id + Id (x) C'_i.
    static LatticeModule tensor_nilsson(const LatticeModule& m, const std::vector<Rational>& alpha,
                                        const std::vector<int>& k) {
        if (!m.is_localized())
            throw std::invalid_argument("tensor requires the localized module");
        LatticeModule n = nilsson(alpha, k);
        if (n.p() != m.p()) throw std::invalid_argument("tensor arity mismatch");
        std::size_t r1 = m.rank(), r2 = n.rank();
        std::vector<QMatrix> cs;
        for (int i = 0; i < m.p(); ++i) {
            QMatrix c(r1 * r2, r1 * r2);
            const QMatrix& a = m.residue(i);
            const QMatrix& b = n.residue(i);
            for (std::size_t x = 0; x < r1; ++x)
                for (std::size_t y = 0; y < r2; ++y) {
                    for (std::size_t x2 = 0; x2 < r1; ++x2)
                        c.at(x2 * r2 + y, x * r2 + y) += a.at(x2, x);
                    for (std::size_t y2 = 0; y2 < r2; ++y2)
                        c.at(x * r2 + y2, x * r2 + y) += b.at(y2, y);
                }
            cs.push_back(std::move(c));
        }
        std::vector<std::string> labels;
        for (std::size_t x = 0; x < r1; ++x)
            for (std::size_t y = 0; y < r2; ++y)
                labels.push_back(m.labels()[x] + "*" + n.labels()[y]);
        return LatticeModule(m.p(), std::move(cs), std::move(labels),
                             m.name() + "(x)" + n.name());
    }

    static LatticeModule direct_sum(const LatticeModule& a, const LatticeModule& b) {
        if (a.p() != b.p()) throw std::invalid_argument("direct sum arity mismatch");
        if (!a.is_localized() || !b.is_localized())
            throw std::invalid_argument("direct sum of floored modules not supported");
        std::size_t r = a.rank() + b.rank();
        std::vector<QMatrix> cs;
        for (int i = 0; i < a.p(); ++i) {
            QMatrix c(r, r);
            for (std::size_t x = 0; x < a.rank(); ++x)
                for (std::size_t y = 0; y < a.rank(); ++y) c.at(x, y) = a.residue(i).at(x, y);
            for (std::size_t x = 0; x < b.rank(); ++x)
                for (std::size_t y = 0; y < b.rank(); ++y)
                    c.at(a.rank() + x, a.rank() + y) = b.residue(i).at(x, y);
            cs.push_back(std::move(c));
        }
        std::vector<std::string> labels;
        for (const auto& l : a.labels()) labels.push_back("L." + l);
        for (const auto& l : b.labels()) labels.push_back("R." + l);
        return LatticeModule(a.p(), std::move(cs), std::move(labels),
                             a.name() + "(+)" + b.name());
    }

private:
    int p_;
    std::size_t rank_ = 0;
    std::vector<QMatrix> residues_;
    std::vector<std::string> labels_;
    std::string name_;
    std::vector<std::optional<int>> floor_;
    JointSpectrum spectrum_;
};

// Finite combination of symbols v(x)b, reduced: no zero fiber vectors.
struct Section {
    std::map<Lattice, std::vector<Rational>> terms;

    bool is_zero() const { return terms.empty(); }
    void reduce() {
        for (auto it = terms.begin(); it != terms.end();) {
            bool zero = true;
            for (const auto& c : it->second)
                if (c != Rational(0)) {
                    zero = false;
                    break;
                }
            it = zero ? terms.erase(it) : std::next(it);
        }
    }
    static Section monomial(const Lattice& v, std::size_t rank, std::size_t basis_index,
                            const Rational& coeff = Rational(1)) {
        Section s;
        std::vector<Rational> x(rank, Rational(0));
        x[basis_index] = coeff;
        s.terms[v] = std::move(x);
        s.reduce();
        return s;
    }
    static Section from_fiber(const Lattice& v, const std::vector<Rational>& fiber) {
        Section s;
        s.terms[v] = fiber;
        s.reduce();
        return s;
    }
};

inline Section section_add(const Section& a, const Section& b) {
    Section s = a;
    for (const auto& [v, x] : b.terms) {
        auto it = s.terms.find(v);
        if (it == s.terms.end()) {
            s.terms[v] = x;
        } else {
            for (std::size_t i = 0; i < x.size(); ++i) it->second[i] += x[i];
        }
    }
    s.reduce();
    return s;
}

inline Section section_scale(const Rational& c, const Section& a) {
    Section s = a;
    for (auto& [v, x] : s.terms)
        for (auto& e : x) e *= c;
    s.reduce();
    return s;
}

inline Section apply_t(const LatticeModule& m, int i, const Section& a, int power = 1) {
    Section s;
    for (const auto& [v, x] : a.terms) {
        Lattice w = lattice_shift(v, i, power);
        if (!m.degree_in_support(w))
            throw std::invalid_argument("section leaves the module support");
        s.terms[w] = x;
    }
    s.reduce();
    return s;
}

inline Section apply_E(const LatticeModule& m, int i, const Section& a) {
    Section s;
    for (const auto& [v, x] : a.terms) {
        std::vector<Rational> y = m.residue(i) * x;
        for (std::size_t j = 0; j < y.size(); ++j)
            y[j] += Rational(v[static_cast<std::size_t>(i)]) * x[j];
        s.terms[v] = std::move(y);
    }
    s.reduce();
    return s;
}

// d_i = t_i^{-1} E_i; on the floored sub-lattice the boundary coefficient
// vanishes (zero residue), so the result stays inside the support.
inline Section apply_del(const LatticeModule& m, int i, const Section& a) {
    Section e = apply_E(m, i, a);
    Section s;
    for (const auto& [v, x] : e.terms) {
        Lattice w = lattice_shift(v, i, -1);
        if (!m.degree_in_support(w))
            throw std::invalid_argument("derivative leaves the module support");
        s.terms[w] = x;
    }
    s.reduce();
    return s;
}

inline std::string section_to_string(const Section& s, const LatticeModule& m) {
    if (s.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [v, x] : s.terms)
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] == Rational(0)) continue;
            if (!first) out += " + ";
            first = false;
            out += "(" + rational_to_string(x[j]) + ")t^" + lattice_to_string(v) + "." +
                   m.labels()[j];
        }
    return out;
}

}  // namespace vmulti
