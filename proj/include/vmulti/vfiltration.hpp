#pragma once

#include "vmulti/bernstein.hpp"
#include "vmulti/compat.hpp"
#include "vmulti/errors.hpp"
#include "vmulti/lattice_module.hpp"
#include "vmulti/tower.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vmulti {

// ---- canonical V-multifiltration on the lattice class ---------------------
//
// On a joint eigenblock with eigenvalues mu, the section v(x)b has
// b_{i}-root v_i + mu_i, so the canonical filtration is described degreewise
// by the threshold rule v_i >= ceil(-alpha_i - 1 - mu_i).

inline long long v_threshold(const Rational& mu_i, const Rational& alpha_i) {
    return to_long(rational_ceil(-alpha_i - Rational(1) - mu_i));
}

// Per-block threshold corner describing V_alpha degreewise.
struct FiltrationLattice {
    std::vector<Rational> alpha;
    std::vector<Lattice> corners;          // one per spectrum block
    std::vector<bool> integral;            // alpha_i+1+mu_i integral for all i
};

inline FiltrationLattice filtration_lattice(const LatticeModule& m,
                                            const std::vector<Rational>& alpha) {
    if (static_cast<int>(alpha.size()) != m.p())
        throw std::invalid_argument("alpha arity mismatch");
    FiltrationLattice fl;
    fl.alpha = alpha;
    for (const auto& blk : m.spectrum().blocks) {
        Lattice corner(static_cast<std::size_t>(m.p()));
        bool integral = true;
        for (int i = 0; i < m.p(); ++i) {
            Rational x = -alpha[static_cast<std::size_t>(i)] - Rational(1) -
                         blk.mu[static_cast<std::size_t>(i)];
            corner[static_cast<std::size_t>(i)] = static_cast<int>(to_long(rational_ceil(x)));
            if (!is_integer(x)) integral = false;
        }
        fl.corners.push_back(std::move(corner));
        fl.integral.push_back(integral);
    }
    return fl;
}

// The slice of V_alpha at lattice degree v, as a subspace of the fiber.
// `only` restricts the threshold conditions to a subset of indices (the
// partial filtration V^{H_S}); an empty `only` means all indices.
inline QMatrix v_slice(const LatticeModule& m, const std::vector<Rational>& alpha,
                       const Lattice& v, const std::vector<int>& only = {}) {
    std::vector<int> idx = only;
    if (idx.empty())
        for (int i = 0; i < m.p(); ++i) idx.push_back(i);
    QMatrix out(m.rank(), 0);
    if (!m.degree_in_support(v)) return out;
    for (const auto& blk : m.spectrum().blocks) {
        bool in = true;
        for (int i : idx)
            if (v[static_cast<std::size_t>(i)] <
                v_threshold(blk.mu[static_cast<std::size_t>(i)], alpha[static_cast<std::size_t>(i)])) {
                in = false;
                break;
            }
        if (in) out = QMatrix::hstack(out, blk.basis);
    }
    return out;
}

// The slice of V_{<alpha} at degree v: inside V_alpha, with at least one
// index strictly below its next jump.
inline QMatrix v_slice_below(const LatticeModule& m, const std::vector<Rational>& alpha,
                             const Lattice& v) {
    QMatrix out(m.rank(), 0);
    if (!m.degree_in_support(v)) return out;
    auto fl = filtration_lattice(m, alpha);
    const auto& blocks = m.spectrum().blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        bool in_valpha = true;
        bool strict = false;
        for (int i = 0; i < m.p(); ++i) {
            long long t = fl.corners[b][static_cast<std::size_t>(i)];
            long long vi = v[static_cast<std::size_t>(i)];
            if (vi < t) {
                in_valpha = false;
                break;
            }
            Rational x = -alpha[static_cast<std::size_t>(i)] - Rational(1) -
                         blocks[b].mu[static_cast<std::size_t>(i)];
            long long t_strict = is_integer(x) ? t + 1 : t;
            if (vi >= t_strict) strict = true;
        }
        if (in_valpha && strict) out = QMatrix::hstack(out, blocks[b].basis);
    }
    return out;
}

// Degreewise basis of V_alpha on the window [-W, W]^p.
inline std::map<Lattice, QMatrix> v_basis(const LatticeModule& m,
                                          const std::vector<Rational>& alpha, int window) {
    std::map<Lattice, QMatrix> out;
    Lattice v(static_cast<std::size_t>(m.p()), -window);
    for (;;) {
        QMatrix s = v_slice(m, alpha, v);
        if (s.cols() > 0) out[v] = std::move(s);
        int i = 0;
        while (i < m.p() && v[static_cast<std::size_t>(i)] == window)
            v[static_cast<std::size_t>(i++)] = -window;
        if (i == m.p()) break;
        ++v[static_cast<std::size_t>(i)];
    }
    return out;
}

// Membership of a section decided by the root condition on its Bernstein
// polynomials (the oracle route, independent of the threshold rule).
inline bool v_membership(const LatticeModule& m, const Section& s,
                         const std::vector<Rational>& alpha, int window = 3) {
    if (s.is_zero()) return true;
    for (int i = 0; i < m.p(); ++i) {
        BPoly b = bernstein_poly(m, s, i, window);
        for (const auto& [root, mult] : b.roots)
            if (root < -alpha[static_cast<std::size_t>(i)] - Rational(1)) return false;
    }
    return true;
}

// ---- graded pieces ---------------------------------------------------------

struct GrPiece {
    std::vector<Rational> alpha;
    struct Block {
        std::size_t spectrum_index = 0;
        std::vector<Rational> mu;
        Lattice degree;   // the pinned lattice degree
        QMatrix basis;    // block basis, columns in fiber coordinates
    };
    std::vector<Block> blocks;
    std::size_t dim = 0;
    std::vector<QMatrix> E;          // action of E_i on the piece
    std::vector<QMatrix> nilpotent;  // E_i + alpha_i + 1
    std::vector<std::string> labels;

    bool is_zero() const { return dim == 0; }

    // T_i = exp(-2 pi i E_i): the scalar exp(2 pi i (alpha_i+1)) times the
    // terminating series exp_nilpotent(E_i + alpha_i + 1, -tau).
    std::vector<Matrix<Tower>> monodromy(const ScalarFieldPtr& field) const {
        std::vector<Matrix<Tower>> out;
        for (std::size_t i = 0; i < E.size(); ++i) {
            Matrix<Tower> n(dim, dim);
            for (std::size_t r = 0; r < dim; ++r)
                for (std::size_t c = 0; c < dim; ++c)
                    n.at(r, c) = field->from_rational(nilpotent[i].at(r, c));
            Tower scalar = field->exp_two_pi_i(alpha[i] + Rational(1));
            out.push_back(scalar * exp_nilpotent(n, -field->tau()));
        }
        return out;
    }
};

inline GrPiece gr_piece(const LatticeModule& m, const std::vector<Rational>& alpha) {
    GrPiece piece;
    piece.alpha = alpha;
    auto fl = filtration_lattice(m, alpha);
    const auto& blocks = m.spectrum().blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (!fl.integral[b]) continue;
        Lattice v = fl.corners[b];
        if (!m.degree_in_support(v)) continue;
        GrPiece::Block gb{b, blocks[b].mu, v, blocks[b].basis};
        piece.blocks.push_back(std::move(gb));
    }
    for (const auto& gb : piece.blocks) piece.dim += gb.basis.cols();
    for (int i = 0; i < m.p(); ++i) {
        QMatrix e(piece.dim, piece.dim);
        std::size_t off = 0;
        for (const auto& gb : piece.blocks) {
            QMatrix r = restrict_to_invariant(m.residue(i), gb.basis);
            for (std::size_t d = 0; d < r.rows(); ++d)
                r.at(d, d) += Rational(gb.degree[static_cast<std::size_t>(i)]);
            for (std::size_t x = 0; x < r.rows(); ++x)
                for (std::size_t y = 0; y < r.cols(); ++y) e.at(off + x, off + y) = r.at(x, y);
            off += r.rows();
        }
        piece.E.push_back(e);
        QMatrix n = e;
        for (std::size_t d = 0; d < piece.dim; ++d)
            n.at(d, d) += alpha[static_cast<std::size_t>(i)] + Rational(1);
        piece.nilpotent.push_back(std::move(n));
    }
    for (const auto& gb : piece.blocks)
        for (std::size_t c = 0; c < gb.basis.cols(); ++c) {
            std::string mu = "(";
            for (std::size_t i = 0; i < gb.mu.size(); ++i)
                mu += (i ? "," : "") + rational_to_string(gb.mu[i]);
            piece.labels.push_back("mu=" + mu + ")@v=" + lattice_to_string(gb.degree) + ":" +
                                   std::to_string(c));
        }
    return piece;
}

// The exponents alpha in [-1,0)^p whose graded piece a block contributes to.
inline std::vector<Rational> fundamental_alpha(const std::vector<Rational>& mu) {
    std::vector<Rational> alpha;
    for (const auto& mui : mu) {
        Rational x = -mui;  // alpha_i + 1 = frac(-mu_i)
        Rational frac = x - Rational(rational_floor(x));
        alpha.push_back(frac - Rational(1));
    }
    return alpha;
}

// Algebraic nearby cycles: the nonzero graded pieces over the fundamental
// domain [-1,0)^p, each carrying its monodromy data.
inline std::vector<GrPiece> psi_alg(const LatticeModule& m) {
    std::set<std::vector<Rational>> alphas;
    for (const auto& blk : m.spectrum().blocks) alphas.insert(fundamental_alpha(blk.mu));
    std::vector<GrPiece> out;
    for (const auto& a : alphas) {
        GrPiece piece = gr_piece(m, a);
        if (!piece.is_zero()) out.push_back(std::move(piece));
    }
    return out;
}

// (E_i + alpha_i + 1)^dim = 0 on the graded piece, every index.
inline Verdict check_nilpotency(const LatticeModule& m, const std::vector<Rational>& alpha) {
    GrPiece piece = gr_piece(m, alpha);
    if (piece.is_zero()) return Verdict::pass();
    for (int i = 0; i < m.p(); ++i) {
        QMatrix power = QMatrix::identity(piece.dim);
        for (std::size_t d = 0; d < piece.dim; ++d) power = power * piece.nilpotent[static_cast<std::size_t>(i)];
        if (!power.is_zero())
            return Verdict::fail("(E_" + std::to_string(i + 1) + " + alpha_" +
                                 std::to_string(i + 1) + " + 1) is not nilpotent");
    }
    return Verdict::pass();
}

// ---- dual-route agreement checks -------------------------------------------

// Threshold slices versus the Bernstein-root oracle, degreewise on a window.
inline Verdict check_v_routes(const LatticeModule& m, const std::vector<Rational>& alpha,
                              int window, int oracle_window = 2) {
    const auto& blocks = m.spectrum().blocks;
    Lattice v(static_cast<std::size_t>(m.p()), -window);
    for (;;) {
        if (m.degree_in_support(v)) {
            for (const auto& blk : blocks) {
                for (std::size_t c = 0; c < blk.basis.cols(); ++c) {
                    Section s = Section::from_fiber(v, blk.basis.column_vector(c));
                    bool oracle = v_membership(m, s, alpha, oracle_window);
                    bool thresh = true;
                    for (int i = 0; i < m.p(); ++i)
                        if (v[static_cast<std::size_t>(i)] <
                            v_threshold(blk.mu[static_cast<std::size_t>(i)],
                                        alpha[static_cast<std::size_t>(i)])) {
                            thresh = false;
                            break;
                        }
                    if (oracle != thresh)
                        return Verdict::fail("routes disagree at degree " + lattice_to_string(v) +
                                             " (oracle=" + (oracle ? "in" : "out") +
                                             ", threshold=" + (thresh ? "in" : "out") + ")");
                }
            }
        }
        int i = 0;
        while (i < m.p() && v[static_cast<std::size_t>(i)] == window)
            v[static_cast<std::size_t>(i++)] = -window;
        if (i == m.p()) break;
        ++v[static_cast<std::size_t>(i)];
    }
    return Verdict::pass();
}

// Bernstein roots of the block columns at the origin; translation
// equivariance b_{i, t^v x}(s) = b_{i, x}(s - v_i) gives every other degree.
struct OriginRoots {
    // per spectrum block, per index: the set of roots at degree 0
    std::vector<std::vector<std::set<Rational>>> roots;
};

inline OriginRoots origin_roots(const LatticeModule& m, int oracle_window = 2) {
    OriginRoots out;
    Lattice origin(static_cast<std::size_t>(m.p()), 0);
    for (const auto& blk : m.spectrum().blocks) {
        std::vector<std::set<Rational>> per_index(static_cast<std::size_t>(m.p()));
        for (std::size_t c = 0; c < blk.basis.cols(); ++c) {
            Section s = Section::from_fiber(origin, blk.basis.column_vector(c));
            for (int i = 0; i < m.p(); ++i) {
                BPoly b = bernstein_poly(m, s, i, oracle_window);
                for (const auto& [root, mult] : b.roots)
                    per_index[static_cast<std::size_t>(i)].insert(root);
            }
        }
        out.roots.push_back(std::move(per_index));
    }
    return out;
}

// Oracle-route slice of the partial filtration V^{H_S}_{alpha_S} at degree v,
// using origin roots shifted by v.
inline QMatrix v_slice_oracle(const LatticeModule& m, const OriginRoots& roots,
                              const std::vector<Rational>& alpha, const Lattice& v,
                              const std::vector<int>& only) {
    QMatrix out(m.rank(), 0);
    if (!m.degree_in_support(v)) return out;
    const auto& blocks = m.spectrum().blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        bool in = true;
        for (int i : only) {
            for (const auto& r : roots.roots[b][static_cast<std::size_t>(i)]) {
                Rational shifted = r + Rational(v[static_cast<std::size_t>(i)]);
                if (shifted < -alpha[static_cast<std::size_t>(i)] - Rational(1)) {
                    in = false;
                    break;
                }
            }
            if (!in) break;
        }
        if (in) out = QMatrix::hstack(out, blocks[b].basis);
    }
    return out;
}

// V_alpha(M) -> V_alpha(M(*H_i)) comparison for a floored module and its
// localization, degreewise on the window.
struct LocalizeReport {
    bool applicable = false;  // alpha_i < 0
    bool equal = false;
    bool included = false;  // sub-model V inside localized V (always expected)
};

inline LocalizeReport localize_check(const LatticeModule& sub, int index,
                                     const std::vector<Rational>& alpha, int window) {
    if (!sub.support_floor()[static_cast<std::size_t>(index)])
        throw std::invalid_argument("localize_check needs a floored index");
    LatticeModule loc = sub.localized();
    LocalizeReport rep;
    rep.applicable = alpha[static_cast<std::size_t>(index)] < Rational(0);
    rep.equal = true;
    rep.included = true;
    for (int w = window; w <= window + 1; ++w) {
        Lattice v(static_cast<std::size_t>(sub.p()), -w);
        for (;;) {
            QMatrix a = v_slice(sub, alpha, v);
            QMatrix b = v_slice(loc, alpha, v);
            if (a.cols() > b.cols() || (a.cols() && !span_contains_all(b, a))) rep.included = false;
            if (!span_equal(a, b)) rep.equal = false;
            int i = 0;
            while (i < sub.p() && v[static_cast<std::size_t>(i)] == w)
                v[static_cast<std::size_t>(i++)] = -w;
            if (i == sub.p()) break;
            ++v[static_cast<std::size_t>(i)];
        }
    }
    return rep;
}

// Equality of the three descriptions of V over a disjoint pair of index sets:
// simultaneous thresholds, intersection of oracle-route partial filtrations,
// iterated thresholds.  Degreewise on the window, stable at W and W+1.
inline Verdict check_compomult(const LatticeModule& m, const std::vector<int>& I,
                               const std::vector<int>& J, const std::vector<Rational>& alpha,
                               int window, int oracle_window = 2) {
    for (int i : I)
        for (int j : J)
            if (i == j) throw std::invalid_argument("index sets must be disjoint");
    std::vector<int> un = I;
    un.insert(un.end(), J.begin(), J.end());
    std::sort(un.begin(), un.end());
    if (un.empty()) return Verdict::pass();
    OriginRoots roots = origin_roots(m, oracle_window);
    for (int w = window; w <= window + 1; ++w) {
        Lattice v(static_cast<std::size_t>(m.p()), -w);
        for (;;) {
            QMatrix simultaneous = v_slice(m, alpha, v, un);
            QMatrix oracle_i = v_slice_oracle(m, roots, alpha, v, I);
            QMatrix oracle_j = v_slice_oracle(m, roots, alpha, v, J);
            QMatrix intersected = I.empty() ? oracle_j
                                 : J.empty() ? oracle_i
                                             : span_intersect(oracle_i, oracle_j);
            // iterated: J-thresholds first, then I-thresholds on the result
            QMatrix after_j = v_slice(m, alpha, v, J.empty() ? I : J);
            QMatrix iterated = (I.empty() || J.empty())
                                   ? after_j
                                   : span_intersect(after_j, v_slice(m, alpha, v, I));
            if (!span_equal(simultaneous, intersected))
                return Verdict::fail("threshold and oracle routes disagree at " +
                                     lattice_to_string(v));
            if (!span_equal(simultaneous, iterated))
                return Verdict::fail("simultaneous and iterated routes disagree at " +
                                     lattice_to_string(v));
            int i = 0;
            while (i < m.p() && v[static_cast<std::size_t>(i)] == w)
                v[static_cast<std::size_t>(i++)] = -w;
            if (i == m.p()) break;
            ++v[static_cast<std::size_t>(i)];
        }
    }
    return Verdict::pass();
}

// The p single-index canonical filtrations, extracted degreewise, are
// compatible in the sense of the subspace hypercube.
inline Verdict check_v_compatibility(const LatticeModule& m, int window) {
    if (m.p() == 1) return Verdict::pass();
    Lattice v(static_cast<std::size_t>(m.p()), -window);
    for (;;) {
        if (m.degree_in_support(v)) {
            // jump value of block b in index i is -v_i - 1 - mu_i
            std::vector<Filtration<Rational>> filts;
            for (int i = 0; i < m.p(); ++i) {
                std::vector<Rational> jumps;
                for (const auto& blk : m.spectrum().blocks)
                    jumps.push_back(-Rational(v[static_cast<std::size_t>(i)]) - Rational(1) -
                                    blk.mu[static_cast<std::size_t>(i)]);
                std::sort(jumps.begin(), jumps.end());
                jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
                std::map<int, QMatrix> steps;
                for (std::size_t s = 0; s < jumps.size(); ++s) {
                    QMatrix space(m.rank(), 0);
                    for (const auto& blk : m.spectrum().blocks) {
                        Rational jump = -Rational(v[static_cast<std::size_t>(i)]) - Rational(1) -
                                        blk.mu[static_cast<std::size_t>(i)];
                        if (jump <= jumps[s]) space = QMatrix::hstack(space, blk.basis);
                    }
                    steps[static_cast<int>(s)] = std::move(space);
                }
                filts.emplace_back(m.rank(), std::move(steps));
            }
            Verdict vd = are_filtrations_compatible(filts);
            if (!vd.ok)
                return Verdict::fail("at degree " + lattice_to_string(v) + ": " + vd.detail);
        }
        int i = 0;
        while (i < m.p() && v[static_cast<std::size_t>(i)] == window)
            v[static_cast<std::size_t>(i++)] = -window;
        if (i == m.p()) break;
        ++v[static_cast<std::size_t>(i)];
    }
    return Verdict::pass();
}

// V_beta(M (x) N_{alpha,k}) = (+)_{0<=l<=k} V_{alpha+beta+1}(M) e_l,
// degreewise on the window, stable at W and W+1.
inline Verdict check_vnilsson(const LatticeModule& m, const std::vector<Rational>& alpha,
                              const std::vector<int>& k, const std::vector<Rational>& beta,
                              int window) {
    if (!m.is_localized()) throw std::invalid_argument("check_vnilsson needs a localized module");
    LatticeModule mt = LatticeModule::tensor_nilsson(m, alpha, k);
    std::size_t nil_rank = mt.rank() / m.rank();
    std::vector<Rational> shifted;
    for (int i = 0; i < m.p(); ++i)
        shifted.push_back(alpha[static_cast<std::size_t>(i)] + beta[static_cast<std::size_t>(i)] +
                          Rational(1));
    for (int w = window; w <= window + 1; ++w) {
        Lattice v(static_cast<std::size_t>(m.p()), -w);
        for (;;) {
            QMatrix lhs = v_slice(mt, beta, v);
            // rhs: slice of V_{alpha+beta+1}(M) tensored with every e_l
            QMatrix base = v_slice(m, shifted, v);
            QMatrix rhs(mt.rank(), base.cols() * nil_rank);
            for (std::size_t c = 0; c < base.cols(); ++c)
                for (std::size_t l = 0; l < nil_rank; ++l)
                    for (std::size_t r = 0; r < m.rank(); ++r)
                        rhs.at(r * nil_rank + l, c * nil_rank + l) = base.at(r, c);
            if (!span_equal(lhs, rhs))
                return Verdict::fail("sides differ at degree " + lattice_to_string(v) +
                                     " (window " + std::to_string(w) + ")");
            int i = 0;
            while (i < m.p() && v[static_cast<std::size_t>(i)] == w)
                v[static_cast<std::size_t>(i++)] = -w;
            if (i == m.p()) break;
            ++v[static_cast<std::size_t>(i)];
        }
    }
    return Verdict::pass();
}

// ---- partial graded pieces and nearby-cycle iteration ----------------------

// gr^{H_S}_{alpha_S}(M): a lattice module over the complementary indices,
// together with the frozen E_i action (i in S) and the embedding of its fiber
// into the fiber of M.
struct PartialGr {
    LatticeModule module;
    std::vector<int> kept;            // original indices kept, ascending
    std::vector<int> graded_out;      // S
    std::vector<Rational> alpha_s;    // exponents used for S
    QMatrix embedding;                // new fiber basis, columns in L
    std::vector<QMatrix> frozen_e;    // E_i on the new fiber, one per S entry
    std::map<std::size_t, Lattice> pinned_by_source;  // source block -> pinned S-degrees
    std::vector<std::size_t> provenance;              // per new-fiber column: source block
};

inline std::optional<PartialGr> partial_gr(const LatticeModule& m, const std::vector<int>& S,
                                           const std::vector<Rational>& alpha_s) {
    if (S.size() != alpha_s.size()) throw std::invalid_argument("partial_gr arity mismatch");
    std::vector<int> kept;
    for (int i = 0; i < m.p(); ++i)
        if (std::find(S.begin(), S.end(), i) == S.end()) kept.push_back(i);
    if (kept.empty() || S.empty())
        throw std::invalid_argument("partial_gr needs a proper nonempty index subset");

    const auto& blocks = m.spectrum().blocks;
    QMatrix embedding(m.rank(), 0);
    std::map<std::size_t, Lattice> pinned_by_source;
    std::vector<std::size_t> provenance;
    std::vector<std::pair<std::size_t, Lattice>> used;  // (block, pinned S-degree)
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        bool ok = true;
        Lattice pin(S.size());
        for (std::size_t si = 0; si < S.size(); ++si) {
            Rational x = -alpha_s[si] - Rational(1) - blocks[b].mu[static_cast<std::size_t>(S[si])];
            if (!is_integer(x)) {
                ok = false;
                break;
            }
            pin[si] = static_cast<int>(to_long(numerator(x)));
            auto fl = m.support_floor()[static_cast<std::size_t>(S[si])];
            if (fl && pin[si] < *fl) ok = false;
        }
        if (!ok) continue;
        embedding = QMatrix::hstack(embedding, blocks[b].basis);
        for (std::size_t c = 0; c < blocks[b].basis.cols(); ++c) provenance.push_back(b);
        used.push_back({b, pin});
        pinned_by_source[b] = pin;
    }
    if (embedding.cols() == 0) return std::nullopt;

    std::size_t new_rank = embedding.cols();
    auto restrict_blockwise = [&](const QMatrix& op, bool add_pin, std::size_t s_pos) {
        QMatrix out(new_rank, new_rank);
        std::size_t off = 0;
        for (const auto& [b, pin] : used) {
            QMatrix r = restrict_to_invariant(op, blocks[b].basis);
            if (add_pin)
                for (std::size_t d = 0; d < r.rows(); ++d) r.at(d, d) += Rational(pin[s_pos]);
            for (std::size_t x = 0; x < r.rows(); ++x)
                for (std::size_t y = 0; y < r.cols(); ++y) out.at(off + x, off + y) = r.at(x, y);
            off += r.rows();
        }
        return out;
    };

    std::vector<QMatrix> new_residues;
    for (int j : kept) new_residues.push_back(restrict_blockwise(m.residue(j), false, 0));
    std::vector<std::optional<int>> new_floor;
    for (int j : kept) new_floor.push_back(m.support_floor()[static_cast<std::size_t>(j)]);
    std::vector<std::string> new_labels;
    for (std::size_t c = 0; c < new_rank; ++c)
        new_labels.push_back("g" + std::to_string(provenance[c]) + "_" + std::to_string(c));

    PartialGr pg{LatticeModule(static_cast<int>(kept.size()), std::move(new_residues),
                               std::move(new_labels), m.name() + ".gr", std::move(new_floor)),
                 kept,
                 S,
                 alpha_s,
                 embedding,
                 {},
                 pinned_by_source,
                 provenance};
    for (std::size_t si = 0; si < S.size(); ++si)
        pg.frozen_e.push_back(restrict_blockwise(m.residue(S[si]), true, si));
    return pg;
}

// ---- Jordan data ------------------------------------------------------------

// Similarity data of a commuting tuple of nilpotent endomorphisms: per-index
// power ranks (the Jordan partition) plus ranks of small mixed products.
struct JordanData {
    std::size_t dim = 0;
    std::vector<std::vector<std::size_t>> power_ranks;  // per index
    std::map<Lattice, std::size_t> joint_ranks;         // exponent tuple -> rank

    friend bool operator==(const JordanData& a, const JordanData& b) {
        return a.dim == b.dim && a.power_ranks == b.power_ranks && a.joint_ranks == b.joint_ranks;
    }
    friend bool operator!=(const JordanData& a, const JordanData& b) { return !(a == b); }
};

inline JordanData jordan_data(const std::vector<QMatrix>& nilpotents) {
    JordanData jd;
    if (nilpotents.empty()) return jd;
    jd.dim = nilpotents[0].rows();
    for (const auto& n : nilpotents) {
        std::vector<std::size_t> ranks;
        QMatrix power = n;
        while (!power.is_zero()) {
            ranks.push_back(power.rank());
            power = power * n;
        }
        jd.power_ranks.push_back(std::move(ranks));
    }
    if (nilpotents.size() > 1) {
        Lattice a(nilpotents.size(), 0);
        for (;;) {
            int i = 0;
            while (i < static_cast<int>(a.size()) && a[static_cast<std::size_t>(i)] == 2)
                a[static_cast<std::size_t>(i++)] = 0;
            if (i == static_cast<int>(a.size())) break;
            ++a[static_cast<std::size_t>(i)];
            QMatrix prod = QMatrix::identity(jd.dim);
            for (std::size_t j = 0; j < a.size(); ++j)
                for (int e = 0; e < a[j]; ++e) prod = prod * nilpotents[j];
            jd.joint_ranks[a] = prod.rank();
        }
    }
    return jd;
}

inline JordanData gr_jordan_data(const GrPiece& piece) { return jordan_data(piece.nilpotent); }

// ---- nearby-cycle iteration --------------------------------------------------

// A fully graded piece produced by iterating single-index graded functors.
struct ChainPiece {
    std::vector<Rational> alpha;       // indexed by original hypersurface
    std::size_t dim = 0;
    std::vector<QMatrix> nilpotent;    // per original index, on the piece
    QMatrix embedding;                 // piece basis, columns in the fiber of M
};

namespace detail {

struct ChainState {
    LatticeModule module;
    QMatrix embedding;                  // current fiber -> fiber of M
    std::vector<int> kept;              // original indices of the current module
    std::vector<std::pair<int, QMatrix>> frozen;  // (original index, E on current fiber)
    std::vector<std::pair<int, Rational>> alpha_so_far;
};

inline void psi_chain_rec(const ChainState& st, const std::vector<int>& order,
                          std::size_t step, std::vector<ChainPiece>& out, int total_p) {
    int orig = order[step];
    int pos = -1;
    for (std::size_t i = 0; i < st.kept.size(); ++i)
        if (st.kept[i] == orig) pos = static_cast<int>(i);
    if (pos < 0) throw std::logic_error("chain order names an index already graded out");

    std::set<Rational> values;
    for (const auto& blk : st.module.spectrum().blocks)
        values.insert(fundamental_alpha({blk.mu[static_cast<std::size_t>(pos)]})[0]);

    for (const auto& a : values) {
        if (st.module.p() == 1) {
            GrPiece piece = gr_piece(st.module, {a});
            if (piece.is_zero()) continue;
            QMatrix piece_embed(st.module.rank(), 0);
            for (const auto& gb : piece.blocks) piece_embed = QMatrix::hstack(piece_embed, gb.basis);
            ChainPiece cp;
            cp.alpha.assign(static_cast<std::size_t>(total_p), Rational(0));
            cp.nilpotent.assign(static_cast<std::size_t>(total_p), QMatrix());
            for (const auto& [idx, val] : st.alpha_so_far) cp.alpha[static_cast<std::size_t>(idx)] = val;
            cp.alpha[static_cast<std::size_t>(orig)] = a;
            cp.dim = piece.dim;
            cp.embedding = st.embedding * piece_embed;
            cp.nilpotent[static_cast<std::size_t>(orig)] = piece.nilpotent[0];
            for (const auto& [idx, fe] : st.frozen) {
                QMatrix r = restrict_to_invariant(fe, piece_embed);
                Rational shift = cp.alpha[static_cast<std::size_t>(idx)] + Rational(1);
                for (std::size_t d = 0; d < r.rows(); ++d) r.at(d, d) += shift;
                cp.nilpotent[static_cast<std::size_t>(idx)] = std::move(r);
            }
            out.push_back(std::move(cp));
        } else {
            auto pg = partial_gr(st.module, {pos}, {a});
            if (!pg) continue;
            ChainState next{pg->module, st.embedding * pg->embedding, {}, {}, st.alpha_so_far};
            for (int j : pg->kept) next.kept.push_back(st.kept[static_cast<std::size_t>(j)]);
            for (const auto& [idx, fe] : st.frozen)
                next.frozen.push_back({idx, restrict_to_invariant(fe, pg->embedding)});
            next.frozen.push_back({orig, pg->frozen_e[0]});
            next.alpha_so_far.push_back({orig, a});
            psi_chain_rec(next, order, step + 1, out, total_p);
        }
    }
}

}  // namespace detail

// All fully graded pieces obtained by applying the single-index graded
// functors in the given order; alpha runs over the fundamental domain.
inline std::vector<ChainPiece> psi_chain(const LatticeModule& m, const std::vector<int>& order) {
    if (static_cast<int>(order.size()) != m.p())
        throw std::invalid_argument("order must list every index once");
    std::vector<ChainPiece> out;
    if (m.p() == 1) {
        for (const auto& piece : psi_alg(m)) {
            ChainPiece cp;
            cp.alpha = piece.alpha;
            cp.dim = piece.dim;
            cp.nilpotent = piece.nilpotent;
            QMatrix embed(m.rank(), 0);
            for (const auto& gb : piece.blocks) embed = QMatrix::hstack(embed, gb.basis);
            cp.embedding = embed;
            out.push_back(std::move(cp));
        }
    } else {
        std::vector<int> kept;
        for (int i = 0; i < m.p(); ++i) kept.push_back(i);
        detail::ChainState st{m, QMatrix::identity(m.rank()), kept, {}, {}};
        detail::psi_chain_rec(st, order, 0, out, m.p());
    }
    std::sort(out.begin(), out.end(),
              [](const ChainPiece& a, const ChainPiece& b) { return a.alpha < b.alpha; });
    return out;
}

struct PsiIterationReport {
    bool ok = false;
    std::string detail;
    std::size_t total_dim = 0;
};

// One-step nearby cycles versus the iterated route for a given order of the
// single-index functors: equal exponents, equal dimensions, equal subspaces
// of the fiber, and identical joint Jordan data.  The per-piece matrices are
// verified against the fiber model (v_i + C_i restricted to the embedded
// subspace), which is the canonical common frame.
inline PsiIterationReport check_psi_iteration(const LatticeModule& m,
                                              const std::vector<int>& order) {
    PsiIterationReport rep;
    std::vector<GrPiece> one = psi_alg(m);
    std::vector<ChainPiece> chain = psi_chain(m, order);
    if (one.size() != chain.size()) {
        rep.detail = "piece counts differ";
        return rep;
    }
    std::sort(one.begin(), one.end(),
              [](const GrPiece& a, const GrPiece& b) { return a.alpha < b.alpha; });
    for (std::size_t t = 0; t < one.size(); ++t) {
        const GrPiece& p1 = one[t];
        const ChainPiece& p2 = chain[t];
        if (p1.alpha != p2.alpha || p1.dim != p2.dim) {
            rep.detail = "piece " + std::to_string(t) + ": exponent or dimension mismatch";
            return rep;
        }
        QMatrix embed1(m.rank(), 0);
        for (const auto& gb : p1.blocks) embed1 = QMatrix::hstack(embed1, gb.basis);
        if (!span_equal(embed1, p2.embedding)) {
            rep.detail = "piece " + std::to_string(t) + ": fiber subspaces differ";
            return rep;
        }
        // On the piece, E_i + alpha_i + 1 is (C_i - mu_i)|_block; both routes
        // must realize that operator on their own embedded bases.  This is
        // the canonical identification: equality through the fiber frame.
        for (int i = 0; i < m.p(); ++i) {
            QMatrix lhs = p2.embedding * p2.nilpotent[static_cast<std::size_t>(i)];
            QMatrix rhs(m.rank(), p2.dim);
            for (std::size_t c = 0; c < p2.dim; ++c) {
                auto col = p2.embedding.column_vector(c);
                const SpectralBlock* home = nullptr;
                for (const auto& blk : m.spectrum().blocks)
                    if (span_contains(blk.basis, col)) {
                        home = &blk;
                        break;
                    }
                if (!home) {
                    rep.detail = "piece " + std::to_string(t) +
                                 ": basis vector mixes spectral blocks";
                    return rep;
                }
                auto img = m.residue(i) * col;
                for (std::size_t r = 0; r < m.rank(); ++r)
                    rhs.at(r, c) = img[r] - home->mu[static_cast<std::size_t>(i)] * col[r];
            }
            if (!(lhs == rhs)) {
                rep.detail = "piece " + std::to_string(t) + ", index " + std::to_string(i + 1) +
                             ": iterated matrices do not realize the fiber model";
                return rep;
            }
        }
        JordanData j1 = jordan_data(p1.nilpotent);
        JordanData j2 = jordan_data(p2.nilpotent);
        if (j1 != j2) {
            rep.detail = "piece " + std::to_string(t) + ": joint Jordan data differs";
            return rep;
        }
        rep.total_dim += p1.dim;
    }
    rep.ok = true;
    return rep;
}

}  // namespace vmulti

