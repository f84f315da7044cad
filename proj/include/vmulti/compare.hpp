#pragma once

#include "vmulti/complex.hpp"
#include "vmulti/errors.hpp"
#include "vmulti/hypercomplex.hpp"
#include "vmulti/lattice_module.hpp"
#include "vmulti/vfiltration.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vmulti {

// ---- unit-cube complexes ----------------------------------------------------
//
// The corner c of {0,1}^p carries gr_{c-1}(M), V_{c-1}(M) or M itself, and the
// maps are the partial derivatives d_i.  Everything is graded by w = v + c
// (lattice degree plus corner), which every d_i preserves, so the complexes
// split into finite slices indexed by w and all cohomology is computed
// slicewise.

enum class CornerKind { Graded, Filtration, Module };

inline std::string corner_kind_name(CornerKind k) {
    switch (k) {
        case CornerKind::Graded: return "i_dagger";
        case CornerKind::Filtration: return "i_sharp";
        case CornerKind::Module: return "relative_de_rham";
    }
    return "?";
}

struct CubeAtom {
    std::size_t block = 0;   // spectrum block index
    std::size_t offset = 0;  // offset inside the corner space
    std::size_t dim = 0;
};

struct CornerSpace {
    Lattice degree;  // common lattice degree of all atoms: v = w - c
    std::vector<CubeAtom> atoms;
    std::size_t dim = 0;
    std::optional<std::size_t> atom_of_block(std::size_t b) const {
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i].block == b) return i;
        return std::nullopt;
    }
};

namespace detail {

inline bool block_in_corner(const LatticeModule& m, CornerKind kind, const SpectralBlock& blk,
                            const Lattice& corner, const Lattice& v) {
    if (!m.degree_in_support(v)) return false;
    switch (kind) {
        case CornerKind::Module: return true;
        case CornerKind::Filtration:
            for (int i = 0; i < m.p(); ++i) {
                Rational alpha_i = Rational(corner[static_cast<std::size_t>(i)] - 1);
                if (v[static_cast<std::size_t>(i)] <
                    v_threshold(blk.mu[static_cast<std::size_t>(i)], alpha_i))
                    return false;
            }
            return true;
        case CornerKind::Graded:
            for (int i = 0; i < m.p(); ++i) {
                Rational pin = -Rational(corner[static_cast<std::size_t>(i)]) -
                               blk.mu[static_cast<std::size_t>(i)];
                if (!is_integer(pin) ||
                    Rational(v[static_cast<std::size_t>(i)]) != pin)
                    return false;
            }
            return true;
    }
    return false;
}

inline std::vector<Lattice> unit_cube_corners(int p) {
    std::vector<Lattice> corners;
    Lattice c(static_cast<std::size_t>(p), 0);
    for (;;) {
        corners.push_back(c);
        int i = 0;
        while (i < p && c[static_cast<std::size_t>(i)] == 1) c[static_cast<std::size_t>(i++)] = 0;
        if (i == p) break;
        ++c[static_cast<std::size_t>(i)];
    }
    return corners;
}

}  // namespace detail

struct SliceData {
    std::map<Lattice, CornerSpace> corners;
    Hypercomplex<Rational> cube{1};
    TotalComplexData<Rational> total;
};

struct CubeComplex {
    CornerKind kind = CornerKind::Module;
    int window = 0;
    std::map<Lattice, SliceData> slices;  // keyed by w

    std::map<int, std::size_t> cohomology_dims() const {
        std::map<int, std::size_t> out;
        for (const auto& [w, slice] : slices)
            for (const auto& [deg, d] : slice.total.complex.cohomology_dims()) out[deg] += d;
        return out;
    }
};

// Restrictions of the residues to the spectrum blocks, reused by every corner.
inline std::vector<std::vector<QMatrix>> block_residues(const LatticeModule& m) {
    std::vector<std::vector<QMatrix>> out;
    for (const auto& blk : m.spectrum().blocks) {
        std::vector<QMatrix> per_index;
        for (int i = 0; i < m.p(); ++i)
            per_index.push_back(restrict_to_invariant(m.residue(i), blk.basis));
        out.push_back(std::move(per_index));
    }
    return out;
}

inline SliceData build_slice(const LatticeModule& m, CornerKind kind, const Lattice& w,
                             const std::vector<std::vector<QMatrix>>& rblocks) {
    SliceData slice;
    const auto& blocks = m.spectrum().blocks;
    for (const auto& c : detail::unit_cube_corners(m.p())) {
        CornerSpace cs;
        Lattice v(static_cast<std::size_t>(m.p()));
        for (int i = 0; i < m.p(); ++i)
            v[static_cast<std::size_t>(i)] =
                w[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)];
        cs.degree = v;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (!detail::block_in_corner(m, kind, blocks[b], c, v)) continue;
            CubeAtom atom{b, cs.dim, blocks[b].dim()};
            cs.dim += atom.dim;
            cs.atoms.push_back(atom);
        }
        slice.corners[c] = std::move(cs);
    }

    Hypercomplex<Rational> cube(m.p());
    for (const auto& [c, cs] : slice.corners)
        if (cs.dim > 0) cube.set_object(c, cs.dim);
    for (const auto& [c, cs] : slice.corners) {
        for (int i = 0; i < m.p(); ++i) {
            if (c[static_cast<std::size_t>(i)] == 1) continue;
            const CornerSpace& tgt = slice.corners.at(lattice_shift(c, i));
            QMatrix d(tgt.dim, cs.dim);
            for (const auto& atom : cs.atoms) {
                QMatrix blockmat = rblocks[atom.block][static_cast<std::size_t>(i)];
                for (std::size_t r = 0; r < blockmat.rows(); ++r)
                    blockmat.at(r, r) += Rational(cs.degree[static_cast<std::size_t>(i)]);
                auto tindex = tgt.atom_of_block(atom.block);
                if (!tindex) {
                    if (!blockmat.is_zero())
                        throw std::logic_error("differential leaves the corner lattice");
                    continue;
                }
                std::size_t roff = tgt.atoms[*tindex].offset;
                for (std::size_t r = 0; r < blockmat.rows(); ++r)
                    for (std::size_t cc = 0; cc < blockmat.cols(); ++cc)
                        d.at(roff + r, atom.offset + cc) = blockmat.at(r, cc);
            }
            if (cs.dim && tgt.dim) cube.set_diff(i, c, std::move(d));
        }
    }
    slice.cube = cube;
    slice.total = total_complex_data(cube);
    return slice;
}

inline CubeComplex build_cube_complex(const LatticeModule& m, CornerKind kind, int window) {
    CubeComplex out;
    out.kind = kind;
    out.window = window;
    if (window < 1) return out;
    auto rblocks = block_residues(m);
    Lattice w(static_cast<std::size_t>(m.p()), -window + 1);
    for (;;) {
        SliceData slice = build_slice(m, kind, w, rblocks);
        bool nonzero = false;
        for (const auto& [c, cs] : slice.corners) nonzero = nonzero || cs.dim > 0;
        if (nonzero) out.slices[w] = std::move(slice);
        int i = 0;
        while (i < m.p() && w[static_cast<std::size_t>(i)] == window)
            w[static_cast<std::size_t>(i++)] = -window + 1;
        if (i == m.p()) break;
        ++w[static_cast<std::size_t>(i)];
    }
    return out;
}

// Windowed operation with the W / W+1 stabilization contract on cohomology.
inline CubeComplex windowed_cube_complex(const LatticeModule& m, CornerKind kind, int window) {
    CubeComplex at_w = build_cube_complex(m, kind, window);
    CubeComplex at_w1 = build_cube_complex(m, kind, window + 1);
    if (at_w.cohomology_dims() != at_w1.cohomology_dims())
        throw WindowTooSmall(corner_kind_name(kind) + " cohomology changed between windows " +
                             std::to_string(window) + " and " + std::to_string(window + 1));
    return at_w;
}

inline CubeComplex i_dagger(const LatticeModule& m, int window) {
    return windowed_cube_complex(m, CornerKind::Graded, window);
}
inline CubeComplex i_sharp(const LatticeModule& m, int window) {
    return windowed_cube_complex(m, CornerKind::Filtration, window);
}
inline CubeComplex relative_de_rham(const LatticeModule& m, int window) {
    return windowed_cube_complex(m, CornerKind::Module, window);
}

// Sensible default window: two beyond the largest threshold in sight.
inline int default_window(const LatticeModule& m) {
    long long best = 0;
    for (const auto& blk : m.spectrum().blocks)
        for (const auto& mu : blk.mu) {
            for (int c = -1; c <= 1; ++c) {
                long long t = v_threshold(mu, Rational(c));
                best = std::max(best, t < 0 ? -t : t);
            }
        }
    return static_cast<int>(best) + 2;
}

// ---- the natural arrows -----------------------------------------------------

// Per-corner map between two cube complexes over the same module: identity on
// matching (block, degree) atoms.  Covers V -> gr (projection) and V -> M
// (inclusion).
struct CubeArrow {
    std::map<Lattice, ChainMap<Rational>> slices;  // keyed by w
    bool chain_maps_ok = true;
    bool quasi_iso = true;
};

inline CubeArrow build_cube_arrow(const LatticeModule& m, const CubeComplex& src,
                                  const CubeComplex& tgt) {
    CubeArrow arrow;
    std::set<Lattice> keys;
    for (const auto& [w, s] : src.slices) keys.insert(w);
    for (const auto& [w, s] : tgt.slices) keys.insert(w);
    static const SliceData empty_slice;
    for (const auto& w : keys) {
        const SliceData& s = src.slices.count(w) ? src.slices.at(w) : empty_slice;
        const SliceData& t = tgt.slices.count(w) ? tgt.slices.at(w) : empty_slice;
        HyperMap<Rational> f{s.cube, t.cube, {}};
        if (!s.corners.empty() && !t.corners.empty()) {
            for (const auto& [c, cs] : s.corners) {
                const CornerSpace& ct = t.corners.at(c);
                if (cs.dim == 0 || ct.dim == 0) continue;
                QMatrix comp(ct.dim, cs.dim);
                for (const auto& atom : cs.atoms) {
                    auto tindex = ct.atom_of_block(atom.block);
                    if (!tindex) continue;
                    std::size_t roff = ct.atoms[*tindex].offset;
                    for (std::size_t r = 0; r < atom.dim; ++r)
                        comp.at(roff + r, atom.offset + r) = Rational(1);
                }
                f.set_comp(c, std::move(comp));
            }
        }
        if (!f.validate().ok) arrow.chain_maps_ok = false;
        ChainMap<Rational> total = total_map(f);
        if (!is_quasi_iso(total)) arrow.quasi_iso = false;
        arrow.slices[w] = std::move(total);
    }
    return arrow;
}

struct CompgradReport {
    std::map<int, std::size_t> dagger_dims, sharp_dims, dr_dims;
    bool sharp_to_dagger_chain = false, sharp_to_dagger_qis = false;
    bool sharp_to_dr_chain = false, sharp_to_dr_qis = false;
    int window = 0;
};

inline CompgradReport compgrad_arrows(const LatticeModule& m, int window) {
    CompgradReport rep;
    rep.window = window;
    CubeComplex dag = i_dagger(m, window);
    CubeComplex sha = i_sharp(m, window);
    CubeComplex dr = relative_de_rham(m, window);
    rep.dagger_dims = dag.cohomology_dims();
    rep.sharp_dims = sha.cohomology_dims();
    rep.dr_dims = dr.cohomology_dims();
    CubeArrow to_dagger = build_cube_arrow(m, sha, dag);
    CubeArrow to_dr = build_cube_arrow(m, sha, dr);
    rep.sharp_to_dagger_chain = to_dagger.chain_maps_ok;
    rep.sharp_to_dagger_qis = to_dagger.quasi_iso;
    rep.sharp_to_dr_chain = to_dr.chain_maps_ok;
    rep.sharp_to_dr_qis = to_dr.quasi_iso;
    return rep;
}

// ---- the Nils chain map -----------------------------------------------------

inline std::vector<Lattice> enumerate_log_indices(const std::vector<int>& k) {
    std::vector<Lattice> ells;
    Lattice ell(k.size(), 0);
    for (;;) {
        ells.push_back(ell);
        std::size_t i = 0;
        while (i < k.size() && ell[i] == k[i]) ell[i++] = 0;
        if (i == k.size()) break;
        ++ell[i];
    }
    return ells;
}

// gr_alpha(M) -> i_dagger(M (x) N_{alpha,k}), concentrated in degree 0:
//   m |-> sum_l (-1)^|l| (E + alpha + 1)^l m (x) e_l.
struct NilsMap {
    LatticeModule twisted;
    std::map<Lattice, ChainMap<Rational>> slices;  // keyed by w
    bool chain_map_ok = true;
    bool injective = true;
    int k_used = 0;
};

inline NilsMap nils_map(const LatticeModule& m, const std::vector<Rational>& alpha,
                        const std::vector<int>& k, const CubeComplex& dagger_mt,
                        const LatticeModule& mt) {
    NilsMap out{mt, {}, true, true, 0};
    for (int ki : k) out.k_used = std::max(out.k_used, ki);
    GrPiece piece = gr_piece(m, alpha);
    std::vector<Lattice> ells = enumerate_log_indices(k);
    std::size_t nil_rank = ells.size();
    const auto& mt_blocks = mt.spectrum().blocks;

    for (const auto& gb : piece.blocks) {
        Lattice w = gb.degree;  // slice key: corner (0,...,0), so w = degree
        if (!dagger_mt.slices.count(w)) {
            out.chain_map_ok = false;
            continue;
        }
        const SliceData& slice = dagger_mt.slices.at(w);
        Lattice corner0(static_cast<std::size_t>(m.p()), 0);
        const CornerSpace& target = slice.corners.at(corner0);

        // nilpotent parts on the fiber: N_i = C_i - mu_i
        std::vector<QMatrix> nilp;
        for (int i = 0; i < m.p(); ++i) {
            QMatrix n = m.residue(i);
            for (std::size_t d = 0; d < n.rows(); ++d)
                n.at(d, d) -= gb.mu[static_cast<std::size_t>(i)];
            nilp.push_back(std::move(n));
        }

        Complex<Rational> source;
        source.set_object(0, gb.basis.cols());
        QMatrix phi(target.dim, gb.basis.cols());
        // the twisted block carrying this image has eigenvalues mu + alpha + 1
        std::vector<Rational> nu;
        for (int i = 0; i < m.p(); ++i)
            nu.push_back(gb.mu[static_cast<std::size_t>(i)] + alpha[static_cast<std::size_t>(i)] +
                         Rational(1));
        std::optional<std::size_t> nu_block;
        for (std::size_t b = 0; b < mt_blocks.size(); ++b)
            if (mt_blocks[b].mu == nu) nu_block = b;
        auto atom_index = nu_block ? target.atom_of_block(*nu_block) : std::nullopt;
        if (!atom_index) {
            out.chain_map_ok = false;
            continue;
        }
        const CubeAtom& atom = target.atoms[*atom_index];
        const QMatrix& atom_basis = mt_blocks[atom.block].basis;

        for (std::size_t col = 0; col < gb.basis.cols(); ++col) {
            std::vector<Rational> image(mt.rank(), Rational(0));
            for (std::size_t li = 0; li < ells.size(); ++li) {
                std::vector<Rational> term = gb.basis.column_vector(col);
                int parity = 0;
                for (int i = 0; i < m.p(); ++i) {
                    for (int e = 0; e < ells[li][static_cast<std::size_t>(i)]; ++e)
                        term = nilp[static_cast<std::size_t>(i)] * term;
                    parity += ells[li][static_cast<std::size_t>(i)];
                }
                Rational sign = (parity % 2 == 0) ? Rational(1) : Rational(-1);
                for (std::size_t r = 0; r < term.size(); ++r)
                    image[r * nil_rank + li] += sign * term[r];
            }
            auto coords = atom_basis.solve(image);
            if (!coords) throw std::logic_error("nils image leaves its twisted block");
            for (std::size_t r = 0; r < coords->size(); ++r)
                phi.at(atom.offset + r, col) = (*coords)[r];
        }
        auto [deg0, off] = slice.total.placement.at(corner0);
        if (deg0 != 0) throw std::logic_error("cube bottom corner not at degree 0");
        QMatrix comp(slice.total.complex.dim(0), gb.basis.cols());
        for (std::size_t r = 0; r < phi.rows(); ++r)
            for (std::size_t c = 0; c < phi.cols(); ++c) comp.at(off + r, c) = phi.at(r, c);
        if (comp.rank() != gb.basis.cols()) out.injective = false;

        ChainMap<Rational> f{source, slice.total.complex, {}};
        f.set_comp(0, std::move(comp));
        if (!f.validate().ok) out.chain_map_ok = false;
        out.slices[w] = std::move(f);
    }
    return out;
}

inline NilsMap nils_map(const LatticeModule& m, const std::vector<Rational>& alpha,
                        const std::vector<int>& k, int window) {
    LatticeModule mt = LatticeModule::tensor_nilsson(m, alpha, k);
    CubeComplex dag = i_dagger(mt, window);
    return nils_map(m, alpha, k, dag, mt);
}

// Transition i_dagger(M_{alpha,k}) -> i_dagger(M_{alpha,k'}) induced by the
// inclusion of twist bases.
inline std::map<Lattice, ChainMap<Rational>> nils_transition(
    const LatticeModule& m, const std::vector<Rational>& alpha, const std::vector<int>& k_lo,
    const std::vector<int>& k_hi, const CubeComplex& dag_lo, const CubeComplex& dag_hi,
    const LatticeModule& mt_lo, const LatticeModule& mt_hi) {
    auto ells_lo = enumerate_log_indices(k_lo);
    auto ells_hi = enumerate_log_indices(k_hi);
    std::map<Lattice, std::size_t> pos_hi;
    for (std::size_t i = 0; i < ells_hi.size(); ++i) pos_hi[ells_hi[i]] = i;
    std::size_t r = m.rank();
    QMatrix incl(mt_hi.rank(), mt_lo.rank());
    for (std::size_t x = 0; x < r; ++x)
        for (std::size_t li = 0; li < ells_lo.size(); ++li)
            incl.at(x * ells_hi.size() + pos_hi.at(ells_lo[li]), x * ells_lo.size() + li) =
                Rational(1);

    std::map<Lattice, ChainMap<Rational>> out;
    std::set<Lattice> keys;
    for (const auto& [w, s] : dag_lo.slices) keys.insert(w);
    for (const auto& [w, s] : dag_hi.slices) keys.insert(w);
    static const SliceData empty_slice;
    for (const auto& w : keys) {
        const SliceData& lo = dag_lo.slices.count(w) ? dag_lo.slices.at(w) : empty_slice;
        const SliceData& hi = dag_hi.slices.count(w) ? dag_hi.slices.at(w) : empty_slice;
        HyperMap<Rational> f{lo.cube, hi.cube, {}};
        for (const auto& [c, cs] : lo.corners) {
            if (cs.dim == 0 || hi.corners.empty()) continue;
            const CornerSpace& ct = hi.corners.at(c);
            if (ct.dim == 0) continue;
            QMatrix comp(ct.dim, cs.dim);
            for (const auto& atom : cs.atoms) {
                // image of each basis column under the twist inclusion
                const QMatrix& basis = mt_lo.spectrum().blocks[atom.block].basis;
                QMatrix shifted = incl * basis;
                for (std::size_t col = 0; col < shifted.cols(); ++col) {
                    auto v = shifted.column_vector(col);
                    bool placed = false;
                    for (const auto& tatom : ct.atoms) {
                        const QMatrix& tbasis = mt_hi.spectrum().blocks[tatom.block].basis;
                        auto coords = tbasis.solve(v);
                        if (coords) {
                            for (std::size_t rr = 0; rr < coords->size(); ++rr)
                                comp.at(tatom.offset + rr, atom.offset + col) = (*coords)[rr];
                            placed = true;
                            break;
                        }
                    }
                    if (!placed) throw std::logic_error("twist inclusion misses the target corner");
                }
            }
            f.set_comp(c, std::move(comp));
        }
        Verdict v = f.validate();
        if (!v.ok) throw std::logic_error("twist transition is not a map of cubes: " + v.detail);
        out[w] = total_map(f);
    }
    return out;
}

// Stabilized (inductive-limit) target of the Nils map.  At finite twist depth
// the cone need not be acyclic; the limit cohomology is the eventual image of
// the transition maps, and the map must identify gr_alpha with it.
struct NilsReport {
    bool chain_map_ok = false;
    bool injective = false;
    bool stabilized = false;
    bool quasi_iso_onto_limit = false;
    int stabilizing_k = -1;
    std::map<int, std::size_t> limit_dims;
    int window = 0;
};

namespace detail {

struct HLevelData {
    // per w, per degree: induced matrix of the transition on cohomology
    std::map<Lattice, std::map<int, QMatrix>> trans;
    std::map<Lattice, std::map<int, QMatrix>> phi;  // induced by the nils map
};

}  // namespace detail

inline NilsReport nils_stabilize(const LatticeModule& m, const std::vector<Rational>& alpha,
                                 int window, int k_max = 5) {
    NilsReport rep;
    rep.window = window;
    auto uniform = [&](int k) {
        return std::vector<int>(static_cast<std::size_t>(m.p()), k);
    };
    for (int k = 0; k + 2 <= k_max + 2; ++k) {
        std::vector<LatticeModule> mts;
        std::vector<CubeComplex> dags;
        for (int j = 0; j < 3; ++j) {
            mts.push_back(LatticeModule::tensor_nilsson(m, alpha, uniform(k + j)));
            dags.push_back(i_dagger(mts.back(), window));
        }
        NilsMap phi0 = nils_map(m, alpha, uniform(k), dags[0], mts[0]);
        NilsMap phi1 = nils_map(m, alpha, uniform(k + 1), dags[1], mts[1]);
        auto t01 = nils_transition(m, alpha, uniform(k), uniform(k + 1), dags[0], dags[1], mts[0],
                                   mts[1]);
        auto t12 = nils_transition(m, alpha, uniform(k + 1), uniform(k + 2), dags[1], dags[2],
                                   mts[1], mts[2]);
        rep.chain_map_ok = phi0.chain_map_ok && phi1.chain_map_ok;
        rep.injective = phi0.injective && phi1.injective;
        if (!rep.chain_map_ok) return rep;

        bool stable = true;
        bool qis = true;
        std::map<int, std::size_t> limit_dims;
        std::set<Lattice> keys;
        for (const auto& [w, f] : t01) keys.insert(w);
        for (const auto& w : keys) {
            auto h01 = induced_on_cohomology(t01.at(w));
            auto h12 = induced_on_cohomology(t12.at(w));
            std::map<int, QMatrix> hphi0, hphi1;
            if (phi0.slices.count(w)) hphi0 = induced_on_cohomology(phi0.slices.at(w));
            if (phi1.slices.count(w)) hphi1 = induced_on_cohomology(phi1.slices.at(w));
            std::set<int> degrees;
            for (const auto& [d, mm] : h01) degrees.insert(d);
            for (const auto& [d, mm] : h12) degrees.insert(d);
            for (int d : degrees) {
                std::size_t r01 = h01.count(d) ? h01.at(d).rank() : 0;
                std::size_t r12 = h12.count(d) ? h12.at(d).rank() : 0;
                if (r01 != r12) stable = false;
                if (r01) limit_dims[d] += r01;
                // the map into the limit: transition composed with the nils map
                QMatrix into_limit01 =
                    (h01.count(d) && hphi0.count(d))
                        ? h01.at(d) * hphi0.at(d)
                        : QMatrix(h01.count(d) ? h01.at(d).rows() : 0,
                                  hphi0.count(d) ? hphi0.at(d).cols() : 0);
                std::size_t source_dim = into_limit01.cols();
                if (d == 0) {
                    if (into_limit01.rank() != source_dim) qis = false;
                    if (h01.count(d) && !span_equal(into_limit01, h01.at(d))) qis = false;
                    if (!h01.count(d) && source_dim > 0) qis = false;
                } else if (r01 != 0) {
                    qis = false;
                }
            }
        }
        // also require the source to be fully accounted for in degree 0
        if (stable && qis) {
            rep.stabilized = true;
            rep.quasi_iso_onto_limit = true;
            rep.stabilizing_k = k;
            rep.limit_dims = limit_dims;
            return rep;
        }
    }
    return rep;
}

// ---- permutation independence ------------------------------------------------

struct PermutationReport {
    bool ok = false;
    std::string detail;
    bool corners_match = true;       // two-step corner spaces equal the direct ones
    bool model_match = true;         // two-step differentials realize the fiber model
    bool totalization_match = true;  // iterated totalization equals direct up to eps
    bool chi_match = true;           // composite comparison isomorphisms agree
    bool psi_match = true;           // iterated nearby cycles agree
};

namespace detail {

// eps-conjugated iterated total must equal the direct total.
inline bool check_iterated_totalization(const Hypercomplex<Rational>& X,
                                        const std::vector<int>& inner) {
    auto direct = total_complex_data(X);
    auto two = total_complex_iterated(X, inner);
    // build the diagonal sign map in the shared placement
    std::map<int, QMatrix> eps;
    for (const auto& [deg, dim] : direct.complex.objects()) eps[deg] = QMatrix(dim, dim);
    for (const auto& [k, place] : direct.placement) {
        auto [deg, off] = place;
        int s = iterated_total_sign(k, inner, X.n());
        for (std::size_t i = 0; i < X.obj_dim(k); ++i)
            eps[deg].at(off + i, off + i) = Rational(s);
    }
    for (const auto& [deg, dim] : direct.complex.objects()) {
        if (direct.complex.dim(deg + 1) == 0) continue;
        QMatrix lhs = eps.at(deg + 1) * two.complex.diff(deg);
        QMatrix rhs = direct.complex.diff(deg) * eps.at(deg);
        if (!(lhs == rhs)) return false;
    }
    return true;
}

}  // namespace detail

// Two-step corner data: for each corner c of the unit cube, the subspace of
// the fiber obtained by grading along I first and then along I^c (for the
// graded corners), or by intersecting the two partial filtrations (for the
// filtration corners).  Everything is compared inside the fiber of M.
inline PermutationReport check_permutation_independence(const LatticeModule& m,
                                                        const std::vector<int>& I, int window) {
    PermutationReport rep;
    std::vector<int> Ic;
    for (int i = 0; i < m.p(); ++i)
        if (std::find(I.begin(), I.end(), i) == I.end()) Ic.push_back(i);

    // psi-level independence (gr along I^c first, then along I)
    if (!I.empty() && !Ic.empty()) {
        std::vector<int> order = Ic;
        order.insert(order.end(), I.begin(), I.end());
        auto psi_rep = check_psi_iteration(m, order);
        rep.psi_match = psi_rep.ok;
        if (!psi_rep.ok) rep.detail = "psi: " + psi_rep.detail;
    }

    auto rblocks = block_residues(m);
    CubeComplex dag = build_cube_complex(m, CornerKind::Graded, window);
    CubeComplex sha = build_cube_complex(m, CornerKind::Filtration, window);
    CubeComplex dr = build_cube_complex(m, CornerKind::Module, window);

    // totalization (Koszul sign) identification on every slice cube
    if (!I.empty() && !Ic.empty()) {
        for (const CubeComplex* cc : {&dag, &sha, &dr})
            for (const auto& [w, slice] : cc->slices)
                if (!detail::check_iterated_totalization(slice.cube, I))
                    rep.totalization_match = false;
    }

    // two-step graded corners via partial_gr, compared blockwise in the fiber
    if (!I.empty() && !Ic.empty()) {
        for (const auto& c : detail::unit_cube_corners(m.p())) {
            std::vector<Rational> alpha_I;
            for (int i : I) alpha_I.push_back(Rational(c[static_cast<std::size_t>(i)] - 1));
            auto pg = partial_gr(m, I, alpha_I);
            for (const auto& [w, slice] : dag.slices) {
                const CornerSpace& direct_corner = slice.corners.at(c);
                // iterated: gr along I at alpha_I, then gr along I^c
                QMatrix iterated(m.rank(), 0);
                if (pg) {
                    std::vector<Rational> alpha_Ic;
                    for (int i : Ic) alpha_Ic.push_back(Rational(c[static_cast<std::size_t>(i)] - 1));
                    GrPiece second = gr_piece(pg->module, alpha_Ic);
                    QMatrix second_embed(pg->module.rank(), 0);
                    for (const auto& gb : second.blocks) {
                        // keep only blocks whose pinned degrees match this w
                        bool match = true;
                        Lattice expect_kept;
                        for (std::size_t pos = 0; pos < pg->kept.size(); ++pos) {
                            int i = pg->kept[pos];
                            expect_kept.push_back(w[static_cast<std::size_t>(i)] -
                                                  c[static_cast<std::size_t>(i)]);
                        }
                        if (gb.degree != expect_kept) match = false;
                        if (match) second_embed = QMatrix::hstack(second_embed, gb.basis);
                    }
                    QMatrix embedded = pg->embedding * second_embed;
                    // restrict to columns whose I-pins also agree with w
                    for (std::size_t col = 0; col < embedded.cols(); ++col) {
                        auto colv = embedded.column_vector(col);
                        // provenance block determines the I-pin
                        bool keep = false;
                        for (std::size_t b = 0; b < m.spectrum().blocks.size(); ++b) {
                            if (!span_contains(m.spectrum().blocks[b].basis, colv)) continue;
                            auto it = pg->pinned_by_source.find(b);
                            if (it == pg->pinned_by_source.end()) break;
                            keep = true;
                            for (std::size_t si = 0; si < I.size(); ++si) {
                                int i = I[si];
                                if (it->second[si] != w[static_cast<std::size_t>(i)] -
                                                          c[static_cast<std::size_t>(i)])
                                    keep = false;
                            }
                            break;
                        }
                        if (keep) {
                            QMatrix one(m.rank(), 1);
                            for (std::size_t r = 0; r < m.rank(); ++r) one.at(r, 0) = colv[r];
                            iterated = QMatrix::hstack(iterated, one);
                        }
                    }
                }
                QMatrix direct(m.rank(), 0);
                for (const auto& atom : direct_corner.atoms)
                    direct = QMatrix::hstack(direct, m.spectrum().blocks[atom.block].basis);
                if (!span_equal(iterated, direct)) {
                    rep.corners_match = false;
                    rep.detail = "graded corner " + lattice_to_string(c) + " at w=" +
                                 lattice_to_string(w) + " differs";
                }
            }
        }

        // two-step filtration corners: intersection of the two partial slices
        for (const auto& [w, slice] : sha.slices) {
            for (const auto& c : detail::unit_cube_corners(m.p())) {
                const CornerSpace& direct_corner = slice.corners.at(c);
                std::vector<Rational> alpha_full;
                for (int i = 0; i < m.p(); ++i)
                    alpha_full.push_back(Rational(c[static_cast<std::size_t>(i)] - 1));
                QMatrix a = v_slice(m, alpha_full, direct_corner.degree, I);
                QMatrix b = v_slice(m, alpha_full, direct_corner.degree, Ic);
                QMatrix iterated = span_intersect(a, b);
                QMatrix direct(m.rank(), 0);
                for (const auto& atom : direct_corner.atoms)
                    direct = QMatrix::hstack(direct, m.spectrum().blocks[atom.block].basis);
                if (!span_equal(iterated, direct)) {
                    rep.corners_match = false;
                    rep.detail = "filtration corner " + lattice_to_string(c) + " at w=" +
                                 lattice_to_string(w) + " differs";
                }
            }
        }
    }

    // composite comparison isomorphism chi: H(i_dagger) -> H(relative dR)
    // through H(i_sharp), computed once on the direct totalization and once
    // on the two-step totalization, identified by the diagonal sign iso.
    if (!I.empty() && !Ic.empty()) {
        CubeArrow to_dagger = build_cube_arrow(m, sha, dag);
        CubeArrow to_dr = build_cube_arrow(m, sha, dr);
        if (!to_dagger.quasi_iso || !to_dr.quasi_iso) {
            rep.chi_match = false;
            rep.detail = "comparison arrows are not quasi-isomorphisms";
        } else {
            static const SliceData empty_slice;
            std::set<Lattice> keys;
            for (const auto& [w, f] : to_dagger.slices) keys.insert(w);
            for (const auto& w : keys) {
                const SliceData& ssha = sha.slices.count(w) ? sha.slices.at(w) : empty_slice;
                const SliceData& sdag = dag.slices.count(w) ? dag.slices.at(w) : empty_slice;
                const SliceData& sdr = dr.slices.count(w) ? dr.slices.at(w) : empty_slice;

                auto two_sha = total_complex_iterated(ssha.cube, I);
                auto two_dag = total_complex_iterated(sdag.cube, I);
                auto two_dr = total_complex_iterated(sdr.cube, I);

                // eps: two-step -> direct, the diagonal sign identification
                auto eps_map = [&](const TotalComplexData<Rational>& two,
                                   const TotalComplexData<Rational>& direct,
                                   const Hypercomplex<Rational>& cube_hc) {
                    ChainMap<Rational> f{two.complex, direct.complex, {}};
                    for (const auto& [deg, dim] : direct.complex.objects()) {
                        QMatrix e(dim, dim);
                        for (const auto& [kk, place] : direct.placement) {
                            if (place.first != deg) continue;
                            int s = iterated_total_sign(kk, I, cube_hc.n());
                            for (std::size_t i = 0; i < cube_hc.obj_dim(kk); ++i)
                                e.at(place.second + i, place.second + i) = Rational(s);
                        }
                        f.set_comp(deg, std::move(e));
                    }
                    return f;
                };
                ChainMap<Rational> eps_sha = eps_map(two_sha, ssha.total, ssha.cube);
                ChainMap<Rational> eps_dag = eps_map(two_dag, sdag.total, sdag.cube);
                ChainMap<Rational> eps_dr = eps_map(two_dr, sdr.total, sdr.cube);
                if (!eps_sha.validate().ok || !eps_dag.validate().ok || !eps_dr.validate().ok) {
                    rep.chi_match = false;
                    rep.detail = "sign identification fails at w=" + lattice_to_string(w);
                    continue;
                }

                // the per-corner arrow components are degree-preserving, so
                // they define chain maps for the iterated signs as well
                ChainMap<Rational> a1_two{two_sha.complex, two_dag.complex,
                                          to_dagger.slices.at(w).comps};
                ChainMap<Rational> a2_two{two_sha.complex, two_dr.complex,
                                          to_dr.slices.count(w) ? to_dr.slices.at(w).comps
                                                                : std::map<int, QMatrix>{}};
                if (!a1_two.validate().ok || !a2_two.validate().ok) {
                    rep.chi_match = false;
                    rep.detail = "two-step arrows are not chain maps at w=" + lattice_to_string(w);
                    continue;
                }

                auto h1 = induced_on_cohomology(to_dagger.slices.at(w));
                auto h2 = induced_on_cohomology(
                    to_dr.slices.count(w)
                        ? to_dr.slices.at(w)
                        : ChainMap<Rational>{ssha.total.complex, sdr.total.complex, {}});
                auto h1_two = induced_on_cohomology(a1_two);
                auto h2_two = induced_on_cohomology(a2_two);
                auto he_dag = induced_on_cohomology(eps_dag);
                auto he_dr = induced_on_cohomology(eps_dr);

                for (const auto& [d, m1] : h1) {
                    if (m1.rows() != m1.cols() || m1.rows() == 0) continue;
                    auto inv = m1.inverse();
                    if (!inv) {
                        rep.chi_match = false;
                        continue;
                    }
                    QMatrix chi_direct = (h2.count(d) ? h2.at(d) : QMatrix(0, m1.cols())) * *inv;
                    if (!h1_two.count(d)) {
                        rep.chi_match = false;
                        continue;
                    }
                    auto inv_two = h1_two.at(d).inverse();
                    if (!inv_two) {
                        rep.chi_match = false;
                        continue;
                    }
                    QMatrix chi_two =
                        (h2_two.count(d) ? h2_two.at(d) : QMatrix(0, inv_two->rows())) * *inv_two;
                    // transport: chi_direct . H(eps_dag) == H(eps_dr) . chi_two
                    QMatrix lhs = chi_direct * (he_dag.count(d) ? he_dag.at(d)
                                                                : QMatrix(chi_direct.cols(), 0));
                    QMatrix rhs = (he_dr.count(d) ? he_dr.at(d) : QMatrix(0, chi_two.rows())) *
                                  chi_two;
                    if (!(lhs == rhs)) {
                        rep.chi_match = false;
                        rep.detail = "chi differs at w=" + lattice_to_string(w) + ", degree " +
                                     std::to_string(d);
                    }
                }
            }
        }
    }

    rep.ok = rep.corners_match && rep.model_match && rep.totalization_match && rep.chi_match &&
             rep.psi_match;
    return rep;
}

}  // namespace vmulti
