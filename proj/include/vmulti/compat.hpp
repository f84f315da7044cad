#pragma once

#include "vmulti/hypercomplex.hpp"
#include "vmulti/matrix.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vmulti {

// ---- compatible sub-objects ----------------------------------------------
//
// Given subspaces A_1..A_n of K^d, the candidate compatibility hypercomplex
// lives on {-1,0,1}^n.  With I = {i : k_i = -1} and J = {j : k_j = 1},
//
//   X^k = (cap_{i in I} A_i) / (cap_{i in I} A_i  cap  sum_{j in J} A_j),
//
// with maps induced by the identity of K^d.  The family is compatible iff
// every 3-term sequence with middle coordinate 0 is short exact; absence of
// compatibility is a normal result.

template <typename T>
struct CompatibilityResult {
    bool compatible = false;
    std::string failure;  // names the first failing sequence when incompatible
    Hypercomplex<T> hc{1};
    std::map<Lattice, Subquotient<T>> pieces;
};

template <typename T>
CompatibilityResult<T> compatibility_hypercomplex(std::size_t ambient,
                                                  const std::vector<Matrix<T>>& subs) {
    int n = static_cast<int>(subs.size());
    if (n == 0) throw std::invalid_argument("no sub-objects given");
    for (const auto& s : subs)
        if (s.rows() != ambient) throw std::invalid_argument("sub-object ambient mismatch");

    CompatibilityResult<T> out;
    out.hc = Hypercomplex<T>(n);

    // enumerate {-1,0,1}^n
    std::vector<Lattice> points;
    Lattice k(static_cast<std::size_t>(n), -1);
    for (;;) {
        points.push_back(k);
        int i = 0;
        while (i < n && k[i] == 1) k[i++] = -1;
        if (i == n) break;
        ++k[i];
    }

    Matrix<T> full = Matrix<T>::identity(ambient);
    Matrix<T> zero(ambient, 0);
    for (const auto& pt : points) {
        Matrix<T> top = full;
        for (int i = 0; i < n; ++i)
            if (pt[i] == -1) top = span_intersect(top, subs[i]);
        Matrix<T> added = zero;
        bool any = false;
        for (int j = 0; j < n; ++j)
            if (pt[j] == 1) {
                added = any ? span_sum(added, subs[j]) : subs[j];
                any = true;
            }
        Matrix<T> bottom = any ? span_intersect(top, added) : zero;
        Subquotient<T> sq(ambient, top, bottom);
        if (sq.dim() > 0) out.hc.set_object(pt, sq.dim());
        out.pieces.emplace(pt, std::move(sq));
    }
    for (const auto& pt : points) {
        for (int i = 0; i < n; ++i) {
            if (pt[i] == 1) continue;
            const auto& src = out.pieces.at(pt);
            const auto& tgt = out.pieces.at(lattice_shift(pt, i));
            if (src.dim() == 0 || tgt.dim() == 0) continue;
            out.hc.set_diff(i, pt, src.induced_identity(tgt));
        }
    }
    // exactness of every 0 -> X^{k-1_i} -> X^k -> X^{k+1_i} -> 0 with k_i = 0
    for (const auto& pt : points) {
        for (int i = 0; i < n; ++i) {
            if (pt[i] != 0) continue;
            Lattice prev = lattice_shift(pt, i, -1);
            const auto& a = out.pieces.at(prev);
            const auto& b = out.pieces.at(pt);
            const auto& c = out.pieces.at(lattice_shift(pt, i));
            Matrix<T> f1 = a.dim() && b.dim() ? a.induced_identity(b) : Matrix<T>(b.dim(), a.dim());
            Matrix<T> f2 = b.dim() && c.dim() ? b.induced_identity(c) : Matrix<T>(c.dim(), b.dim());
            std::size_t r1 = f1.rank(), r2 = f2.rank();
            bool exact = (r1 == a.dim()) && (r2 == c.dim()) && (r1 + r2 == b.dim()) &&
                         (f2 * f1).is_zero();
            if (!exact) {
                out.compatible = false;
                out.failure = "sequence in direction " + std::to_string(i + 1) + " through " +
                              lattice_to_string(pt) + " is not short exact";
                return out;
            }
        }
    }
    out.compatible = true;
    return out;
}

// ---- filtrations ----------------------------------------------------------

// Increasing Z-indexed filtration with finitely many jumps, bounded below by 0
// and exhausting the ambient space.  `steps` maps a jump level to the
// canonical basis of the subspace from that level on.
template <typename T>
class Filtration {
public:
    Filtration(std::size_t ambient, std::map<int, Matrix<T>> steps)
        : ambient_(ambient), steps_(std::move(steps)) {
        Matrix<T> prev(ambient_, 0);
        for (auto& [level, basis] : steps_) {
            basis = span_canonical(basis);
            if (!span_contains_all(basis, prev))
                throw std::invalid_argument("filtration is not increasing");
            prev = basis;
        }
        if (steps_.empty() || steps_.rbegin()->second.cols() != ambient_)
            throw std::invalid_argument("filtration is not exhaustive");
    }

    std::size_t ambient() const { return ambient_; }
    const std::map<int, Matrix<T>>& steps() const { return steps_; }
    std::vector<int> jump_levels() const {
        std::vector<int> ls;
        for (const auto& [l, b] : steps_) ls.push_back(l);
        return ls;
    }
    Matrix<T> at(int level) const {
        Matrix<T> cur(ambient_, 0);
        for (const auto& [l, b] : steps_) {
            if (l > level) break;
            cur = b;
        }
        return cur;
    }

private:
    std::size_t ambient_;
    std::map<int, Matrix<T>> steps_;
};

// Compatible iff the level subspaces are compatible for every tuple of jump
// levels (levels between jumps repeat subspaces and add nothing).
template <typename T>
Verdict are_filtrations_compatible(const std::vector<Filtration<T>>& filts) {
    if (filts.empty()) return Verdict::pass();
    std::size_t ambient = filts[0].ambient();
    for (const auto& f : filts)
        if (f.ambient() != ambient) throw std::invalid_argument("filtration ambient mismatch");
    std::vector<std::vector<int>> levels;
    for (const auto& f : filts) levels.push_back(f.jump_levels());
    std::vector<std::size_t> idx(filts.size(), 0);
    for (;;) {
        std::vector<Matrix<T>> subs;
        for (std::size_t i = 0; i < filts.size(); ++i) subs.push_back(filts[i].at(levels[i][idx[i]]));
        auto res = compatibility_hypercomplex<T>(ambient, subs);
        if (!res.compatible) {
            std::string tuple = "(";
            for (std::size_t i = 0; i < idx.size(); ++i)
                tuple += (i ? "," : "") + std::to_string(levels[i][idx[i]]);
            return Verdict::fail("levels " + tuple + "): " + res.failure);
        }
        std::size_t i = 0;
        while (i < idx.size() && idx[i] + 1 == levels[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
        ++idx[i];
    }
    return Verdict::pass();
}

// ---- multigraded pieces ----------------------------------------------------

template <typename T>
struct MultigradedResult {
    Subquotient<T> iterated;
    Subquotient<T> closed_formula;
    Matrix<T> canonical_map;  // closed formula -> iterated, induced by identity
    bool agree = false;
};

// gr^{F_sigma(n)} ... gr^{F_sigma(1)} at multi-level `levels`, via successive
// induced filtrations, against the closed formula
//   (cap_j F^j_{l_j}) / sum_j (... cap F^j_{l_j - 1} cap ...).
template <typename T>
MultigradedResult<T> multigraded(const std::vector<Filtration<T>>& filts,
                                 const std::vector<int>& levels, const std::vector<int>& sigma) {
    std::size_t n = filts.size();
    if (levels.size() != n || sigma.size() != n)
        throw std::invalid_argument("multigraded arity mismatch");
    std::size_t ambient = filts[0].ambient();

    Matrix<T> top = Matrix<T>::identity(ambient);
    Matrix<T> bottom(ambient, 0);
    for (std::size_t step = 0; step < n; ++step) {
        int i = sigma[step];
        Matrix<T> hi = filts[i].at(levels[i]);
        Matrix<T> lo = filts[i].at(levels[i] - 1);
        Matrix<T> new_top = span_sum(span_intersect(hi, top), bottom);
        Matrix<T> new_bottom = span_sum(span_intersect(lo, top), bottom);
        top = new_top;
        bottom = new_bottom;
    }
    Subquotient<T> iterated(ambient, top, bottom);

    Matrix<T> cf_top = Matrix<T>::identity(ambient);
    for (std::size_t j = 0; j < n; ++j) cf_top = span_intersect(cf_top, filts[j].at(levels[j]));
    Matrix<T> cf_bottom(ambient, 0);
    for (std::size_t j = 0; j < n; ++j) {
        Matrix<T> term = Matrix<T>::identity(ambient);
        for (std::size_t j2 = 0; j2 < n; ++j2)
            term = span_intersect(term, filts[j2].at(levels[j2] - (j2 == j ? 1 : 0)));
        cf_bottom = span_sum(cf_bottom, term);
    }
    cf_bottom = span_intersect(cf_top, cf_bottom);
    Subquotient<T> closed(ambient, cf_top, cf_bottom);

    MultigradedResult<T> out{iterated, closed, Matrix<T>(0, 0), false};
    if (iterated.dim() != closed.dim()) return out;
    if (closed.dim() == 0) {
        out.agree = true;
        return out;
    }
    out.canonical_map = closed.induced_identity(iterated);
    out.agree = out.canonical_map.is_invertible();
    return out;
}

}  // namespace vmulti
