#pragma once

#include "vmulti/compare.hpp"
#include "vmulti/tower.hpp"
#include "vmulti/vfiltration.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace vmulti {

// ---- lifts into the scalar tower -------------------------------------------

inline Matrix<Tower> lift_matrix(const QMatrix& m, const ScalarFieldPtr& field) {
    Matrix<Tower> out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.at(r, c) != Rational(0)) out.at(r, c) = field->from_rational(m.at(r, c));
    return out;
}

inline Complex<Tower> lift_complex(const Complex<Rational>& c, const ScalarFieldPtr& field) {
    Complex<Tower> out;
    for (const auto& [deg, dim] : c.objects()) out.set_object(deg, dim, c.labels(deg));
    for (const auto& [deg, dim] : c.objects())
        if (c.dim(deg + 1)) out.set_diff(deg, lift_matrix(c.diff(deg), field));
    return out;
}

inline ChainMap<Tower> lift_chain_map(const ChainMap<Rational>& f, const ScalarFieldPtr& field) {
    ChainMap<Tower> out{lift_complex(f.src, field), lift_complex(f.tgt, field), {}};
    for (const auto& [deg, comp] : f.comps) out.set_comp(deg, lift_matrix(comp, field));
    return out;
}

// The smallest cyclotomic order making every monodromy scalar of the module
// (and of the twists in play) exact.
inline long long cyclotomic_order_for(const std::vector<LatticeModule>& modules) {
    std::vector<Rational> exps;
    for (const auto& m : modules)
        for (const auto& e : m.spectral_exponents()) exps.push_back(e);
    return to_long(denominator_lcm(exps));
}

// ---- monodromy endomorphisms on cube complexes ------------------------------

// T_i = exp(-2 pi i E_i) on a slice: per corner atom (block b at degree v),
// the scalar exp(-2 pi i (v_i + mu_i)) times exp_nilpotent(C_i - mu_i, -tau).
inline std::map<int, Matrix<Tower>> algebraic_monodromy(const LatticeModule& m,
                                                        const SliceData& slice, int index,
                                                        const ScalarFieldPtr& field) {
    std::map<int, Matrix<Tower>> comps;
    for (const auto& [deg, dim] : slice.total.complex.objects())
        comps[deg] = Matrix<Tower>(dim, dim);
    const auto& blocks = m.spectrum().blocks;
    for (const auto& [c, cs] : slice.corners) {
        if (cs.dim == 0) continue;
        auto [deg, off] = slice.total.placement.at(c);
        for (const auto& atom : cs.atoms) {
            const auto& blk = blocks[atom.block];
            QMatrix nilp = restrict_to_invariant(m.residue(index), blk.basis);
            for (std::size_t d = 0; d < nilp.rows(); ++d)
                nilp.at(d, d) -= blk.mu[static_cast<std::size_t>(index)];
            Rational scalar_exp = -(Rational(cs.degree[static_cast<std::size_t>(index)]) +
                                    blk.mu[static_cast<std::size_t>(index)]);
            Matrix<Tower> t = field->exp_two_pi_i(scalar_exp) *
                              exp_nilpotent(lift_matrix(nilp, field), -field->tau());
            for (std::size_t r = 0; r < atom.dim; ++r)
                for (std::size_t cc = 0; cc < atom.dim; ++cc)
                    comps[deg].at(off + atom.offset + r, off + atom.offset + cc) = t.at(r, cc);
        }
    }
    return comps;
}

// The twist monodromy on M (x) N_{alpha,k}: identity on the module factor,
// the explicit formula exp(2 pi i (alpha_i+1)) sum_s tau^s/s! shift_i^s on
// the twist factor.
inline Matrix<Tower> twist_fiber_monodromy(const LatticeModule& mt, std::size_t module_rank,
                                           const std::vector<Rational>& alpha,
                                           const std::vector<int>& k, int index,
                                           const ScalarFieldPtr& field) {
    auto ells = enumerate_log_indices(k);
    std::size_t nr = ells.size();
    std::map<Lattice, std::size_t> pos;
    for (std::size_t i = 0; i < nr; ++i) pos[ells[i]] = i;
    Matrix<Tower> shift(nr, nr);
    for (std::size_t i = 0; i < nr; ++i) {
        Lattice down = ells[i];
        if (down[static_cast<std::size_t>(index)] > 0) {
            --down[static_cast<std::size_t>(index)];
            shift.at(pos.at(down), i) = Tower(Rational(1));
        }
    }
    Matrix<Tower> tf = field->exp_two_pi_i(alpha[static_cast<std::size_t>(index)] + Rational(1)) *
                       exp_nilpotent(shift, field->tau());
    Matrix<Tower> full(mt.rank(), mt.rank());
    for (std::size_t x = 0; x < module_rank; ++x)
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nr; ++j)
                full.at(x * nr + i, x * nr + j) = tf.at(i, j);
    return full;
}

// Transport a fiber endomorphism (over the tower) to a slice complex: the
// endo must preserve every corner space.
inline std::map<int, Matrix<Tower>> fiber_endo_on_slice(const LatticeModule& m,
                                                        const SliceData& slice,
                                                        const Matrix<Tower>& fiber_endo,
                                                        const ScalarFieldPtr& field) {
    std::map<int, Matrix<Tower>> comps;
    for (const auto& [deg, dim] : slice.total.complex.objects())
        comps[deg] = Matrix<Tower>(dim, dim);
    const auto& blocks = m.spectrum().blocks;
    for (const auto& [c, cs] : slice.corners) {
        if (cs.dim == 0) continue;
        auto [deg, off] = slice.total.placement.at(c);
        for (const auto& atom : cs.atoms) {
            Matrix<Tower> basis = lift_matrix(blocks[atom.block].basis, field);
            auto coords = basis.solve_matrix(fiber_endo * basis);
            if (!coords) throw std::logic_error("fiber endo does not preserve the corner block");
            for (std::size_t r = 0; r < atom.dim; ++r)
                for (std::size_t cc = 0; cc < atom.dim; ++cc)
                    comps[deg].at(off + atom.offset + r, off + atom.offset + cc) =
                        coords->at(r, cc);
        }
    }
    return comps;
}

inline bool is_chain_endo(const Complex<Tower>& c, const std::map<int, Matrix<Tower>>& comps) {
    ChainMap<Tower> f{c, c, {}};
    for (const auto& [deg, mm] : comps)
        if (!mm.is_zero()) f.set_comp(deg, mm);
    return f.validate().ok;
}

inline std::map<int, Matrix<Tower>> endo_on_cohomology(const Complex<Tower>& c,
                                                       const std::map<int, Matrix<Tower>>& comps) {
    ChainMap<Tower> f{c, c, {}};
    for (const auto& [deg, mm] : comps)
        if (!mm.is_zero()) f.set_comp(deg, mm);
    return induced_on_cohomology(f);
}

// ---- local system model ------------------------------------------------------

// Finite monodromy-representation stand-in for the transcendental side: the
// fiber L with commuting monodromies exp(sign * 2 pi i C_i).  The sign is
// fixed once by calibration, never assumed.
struct LocalSystemModel {
    std::size_t dim = 0;
    std::vector<Matrix<Tower>> monodromy;
};

inline LocalSystemModel local_system_model(const LatticeModule& m, const ScalarFieldPtr& field,
                                           int sign) {
    LocalSystemModel out;
    out.dim = m.rank();
    const auto& blocks = m.spectrum().blocks;
    QMatrix basis(m.rank(), 0);
    for (const auto& blk : blocks) basis = QMatrix::hstack(basis, blk.basis);
    Matrix<Tower> B = lift_matrix(basis, field);
    auto Binv = B.inverse();
    if (!Binv) throw std::logic_error("spectral basis is singular");
    for (int i = 0; i < m.p(); ++i) {
        Matrix<Tower> diag(m.rank(), m.rank());
        std::size_t off = 0;
        for (const auto& blk : blocks) {
            QMatrix nilp = restrict_to_invariant(m.residue(i), blk.basis);
            for (std::size_t d = 0; d < nilp.rows(); ++d)
                nilp.at(d, d) -= blk.mu[static_cast<std::size_t>(i)];
            Tower scalar =
                field->exp_two_pi_i(Rational(sign) * blk.mu[static_cast<std::size_t>(i)]);
            Matrix<Tower> t =
                scalar * exp_nilpotent(lift_matrix(nilp, field),
                                       Rational(sign) == Rational(1) ? field->tau()
                                                                     : -field->tau());
            for (std::size_t r = 0; r < blk.dim(); ++r)
                for (std::size_t c = 0; c < blk.dim(); ++c)
                    diag.at(off + r, off + c) = t.at(r, c);
            off += blk.dim();
        }
        out.monodromy.push_back(B * diag * *Binv);
    }
    return out;
}

// Calibration of the local-system sign: the half-integer case only pins the
// classical value -1 (both signs satisfy it), so a cube-root case is used to
// separate the two candidates against the algebraic side.
struct CalibrationReport {
    int sign = 0;
    bool classical_minus_one_ok = false;
    std::string note;
};

inline CalibrationReport calibrate_monodromy_sign() {
    CalibrationReport rep;
    auto field = ScalarField::make(6);
    auto half = LatticeModule::nilsson({make_rational(-1, 2)}, {0});
    auto third = LatticeModule::nilsson({make_rational(-1, 3)}, {0});
    // the graded side of the cube-root case: exp(2 pi i (alpha+1)) with
    // alpha = -2/3, i.e. a primitive cube root of unity
    Tower psi_third_value = field->exp_two_pi_i(psi_alg(third)[0].alpha[0] + Rational(1));
    for (int sign : {-1, +1}) {
        Tower classical = local_system_model(half, field, sign).monodromy[0].at(0, 0);
        bool minus_one = classical == field->from_rational(Rational(-1));
        Tower third_value = local_system_model(third, field, sign).monodromy[0].at(0, 0);
        if (minus_one && third_value == psi_third_value) {
            rep.sign = sign;
            rep.classical_minus_one_ok = true;
            rep.note = "sign " + std::to_string(sign) +
                       ": z^(1/2) monodromy is -1 and the cube-root case matches the graded side";
            return rep;
        }
    }
    rep.note = "no sign reproduces the classical calibration";
    return rep;
}

// ---- monodromy commutation ----------------------------------------------------

struct MonodromyReport {
    bool arrows_commute = true;   // T_i vs both comparison arrows on M
    bool nils_commutes = true;    // T_i vs the Nils map, chain level
    bool twisted_arrows_commute = true;  // T_i vs arrows on the twisted module
    bool jordan_match = true;     // nearby cycles vs the local system model
    int calibration_sign = 0;
    bool tformula_reconciled = false;
    std::string tformula_note;
    std::string detail;
    bool ok() const {
        return arrows_commute && nils_commutes && twisted_arrows_commute && jordan_match;
    }
};

namespace detail {

inline bool commutes_through(const ChainMap<Rational>& arrow,
                             const std::map<int, Matrix<Tower>>& t_src,
                             const std::map<int, Matrix<Tower>>& t_tgt,
                             const ScalarFieldPtr& field) {
    ChainMap<Tower> lifted = lift_chain_map(arrow, field);
    if (!is_chain_endo(lifted.src, t_src) || !is_chain_endo(lifted.tgt, t_tgt)) return false;
    auto h_arrow = induced_on_cohomology(lifted);
    auto h_src = endo_on_cohomology(lifted.src, t_src);
    auto h_tgt = endo_on_cohomology(lifted.tgt, t_tgt);
    for (const auto& [deg, hm] : h_arrow) {
        Matrix<Tower> lhs = (h_tgt.count(deg) ? h_tgt.at(deg)
                                              : Matrix<Tower>::identity(hm.rows())) *
                            hm;
        Matrix<Tower> rhs =
            hm * (h_src.count(deg) ? h_src.at(deg) : Matrix<Tower>::identity(hm.cols()));
        if (!(lhs == rhs)) return false;
    }
    return true;
}

}  // namespace detail

inline MonodromyReport monodromy_commutation(const LatticeModule& m, int window,
                                             const ScalarFieldPtr& field) {
    MonodromyReport rep;
    CalibrationReport cal = calibrate_monodromy_sign();
    rep.calibration_sign = cal.sign;

    CubeComplex dag = build_cube_complex(m, CornerKind::Graded, window);
    CubeComplex sha = build_cube_complex(m, CornerKind::Filtration, window);
    CubeComplex dr = build_cube_complex(m, CornerKind::Module, window);
    CubeArrow to_dagger = build_cube_arrow(m, sha, dag);
    CubeArrow to_dr = build_cube_arrow(m, sha, dr);

    // (a) intrinsic arrows on M
    static const SliceData empty_slice;
    for (const auto& [w, arrow] : to_dagger.slices) {
        const SliceData& s = sha.slices.count(w) ? sha.slices.at(w) : empty_slice;
        const SliceData& t = dag.slices.count(w) ? dag.slices.at(w) : empty_slice;
        bool interesting = !arrow.src.cohomology_dims().empty() ||
                           !arrow.tgt.cohomology_dims().empty();
        if (!interesting) continue;
        for (int i = 0; i < m.p(); ++i) {
            auto t_src = s.corners.empty() ? std::map<int, Matrix<Tower>>{}
                                           : algebraic_monodromy(m, s, i, field);
            auto t_tgt = t.corners.empty() ? std::map<int, Matrix<Tower>>{}
                                           : algebraic_monodromy(m, t, i, field);
            if (!detail::commutes_through(arrow, t_src, t_tgt, field)) {
                rep.arrows_commute = false;
                rep.detail = "sharp->dagger monodromy fails at w=" + lattice_to_string(w);
            }
        }
    }
    for (const auto& [w, arrow] : to_dr.slices) {
        const SliceData& s = sha.slices.count(w) ? sha.slices.at(w) : empty_slice;
        const SliceData& t = dr.slices.count(w) ? dr.slices.at(w) : empty_slice;
        bool interesting = !arrow.src.cohomology_dims().empty() ||
                           !arrow.tgt.cohomology_dims().empty();
        if (!interesting) continue;
        for (int i = 0; i < m.p(); ++i) {
            auto t_src = s.corners.empty() ? std::map<int, Matrix<Tower>>{}
                                           : algebraic_monodromy(m, s, i, field);
            auto t_tgt = t.corners.empty() ? std::map<int, Matrix<Tower>>{}
                                           : algebraic_monodromy(m, t, i, field);
            if (!detail::commutes_through(arrow, t_src, t_tgt, field)) {
                rep.arrows_commute = false;
                rep.detail = "sharp->dR monodromy fails at w=" + lattice_to_string(w);
            }
        }
    }

    // (b) Nils: exp(-2 pi i E) on gr_alpha(M) against the induced twist
    // monodromy id (x) T on i_dagger of the twisted module, chain level.
    std::vector<int> ones(static_cast<std::size_t>(m.p()), 1);
    for (const auto& piece : psi_alg(m)) {
        LatticeModule mt = LatticeModule::tensor_nilsson(m, piece.alpha, ones);
        CubeComplex dag_mt = build_cube_complex(mt, CornerKind::Graded, window);
        NilsMap nils = nils_map(m, piece.alpha, ones, dag_mt, mt);
        if (!nils.chain_map_ok || !nils.injective) {
            rep.nils_commutes = false;
            continue;
        }
        auto piece_T = piece.monodromy(field);
        for (int i = 0; i < m.p(); ++i) {
            Matrix<Tower> fiber_t =
                twist_fiber_monodromy(mt, m.rank(), piece.alpha, ones, i, field);
            for (const auto& [w, f] : nils.slices) {
                // source: the gr piece blocks pinned at w
                std::size_t src_dim = f.src.dim(0);
                Matrix<Tower> t_src(src_dim, src_dim);
                std::size_t off = 0;
                for (std::size_t b = 0; b < piece.blocks.size(); ++b) {
                    if (piece.blocks[b].degree != w) continue;
                    std::size_t bdim = piece.blocks[b].basis.cols();
                    std::size_t poff = 0;
                    for (std::size_t bb = 0; bb < b; ++bb)
                        poff += piece.blocks[bb].basis.cols();
                    for (std::size_t r = 0; r < bdim; ++r)
                        for (std::size_t c = 0; c < bdim; ++c)
                            t_src.at(off + r, off + c) = piece_T[static_cast<std::size_t>(i)].at(
                                poff + r, poff + c);
                    off += bdim;
                }
                const SliceData& tslice = dag_mt.slices.at(w);
                auto t_tgt = fiber_endo_on_slice(mt, tslice, fiber_t, field);
                ChainMap<Tower> lifted = lift_chain_map(f, field);
                if (!is_chain_endo(lifted.tgt, t_tgt)) {
                    rep.nils_commutes = false;
                    continue;
                }
                Matrix<Tower> phi = lifted.comp(0);
                Matrix<Tower> lhs = t_tgt.at(0) * phi;
                Matrix<Tower> rhs = phi * t_src;
                if (!(lhs == rhs)) {
                    rep.nils_commutes = false;
                    rep.detail = "nils monodromy fails at w=" + lattice_to_string(w);
                }
            }
        }

        // (b') twisted arrows carry the same twist monodromy
        CubeComplex sha_mt = build_cube_complex(mt, CornerKind::Filtration, window);
        CubeArrow tw_arrow = build_cube_arrow(mt, sha_mt, dag_mt);
        for (const auto& [w, arrow] : tw_arrow.slices) {
            bool interesting = !arrow.src.cohomology_dims().empty() ||
                               !arrow.tgt.cohomology_dims().empty();
            if (!interesting) continue;
            const SliceData& s = sha_mt.slices.count(w) ? sha_mt.slices.at(w) : empty_slice;
            const SliceData& t = dag_mt.slices.count(w) ? dag_mt.slices.at(w) : empty_slice;
            for (int i = 0; i < m.p(); ++i) {
                Matrix<Tower> fiber_t =
                    twist_fiber_monodromy(mt, m.rank(), piece.alpha, ones, i, field);
                auto t_src = s.corners.empty() ? std::map<int, Matrix<Tower>>{}
                                               : fiber_endo_on_slice(mt, s, fiber_t, field);
                auto t_tgt = t.corners.empty() ? std::map<int, Matrix<Tower>>{}
                                               : fiber_endo_on_slice(mt, t, fiber_t, field);
                if (!detail::commutes_through(arrow, t_src, t_tgt, field))
                    rep.twisted_arrows_commute = false;
            }
        }
    }

    // (c) Jordan data of the nearby cycles versus the local system model
    if (cal.sign == 0) {
        rep.jordan_match = false;
    } else {
        auto pieces = psi_alg(m);
        const auto& blocks = m.spectrum().blocks;
        for (const auto& piece : pieces) {
            // the model blocks grouped at this exponent
            std::vector<QMatrix> nilps;
            for (int i = 0; i < m.p(); ++i) {
                QMatrix n(0, 0);
                std::size_t dim = 0;
                for (const auto& blk : blocks)
                    if (fundamental_alpha(blk.mu) == piece.alpha) dim += blk.dim();
                n = QMatrix(dim, dim);
                std::size_t off = 0;
                for (const auto& blk : blocks) {
                    if (fundamental_alpha(blk.mu) != piece.alpha) continue;
                    QMatrix r = restrict_to_invariant(m.residue(i), blk.basis);
                    for (std::size_t d = 0; d < r.rows(); ++d)
                        r.at(d, d) -= blk.mu[static_cast<std::size_t>(i)];
                    for (std::size_t x = 0; x < r.rows(); ++x)
                        for (std::size_t y = 0; y < r.cols(); ++y)
                            n.at(off + x, off + y) = r.at(x, y);
                    off += r.rows();
                }
                nilps.push_back(std::move(n));
            }
            if (jordan_data(nilps) != gr_jordan_data(piece)) rep.jordan_match = false;
            // exact scalar agreement of the semisimple parts
            for (int i = 0; i < m.p(); ++i) {
                Tower lhs = field->exp_two_pi_i(piece.alpha[static_cast<std::size_t>(i)] +
                                                Rational(1));
                for (const auto& blk : blocks) {
                    if (fundamental_alpha(blk.mu) != piece.alpha) continue;
                    Tower rhs = field->exp_two_pi_i(Rational(cal.sign) *
                                                    blk.mu[static_cast<std::size_t>(i)]);
                    if (!(lhs == rhs)) rep.jordan_match = false;
                }
            }
        }
    }

    // (d) reconciliation of the twist formula with exp(-2 pi i E) on the
    // graded side of a pure twist: they agree after tau -> -tau.
    {
        auto n = LatticeModule::nilsson({make_rational(-1, 2)}, {1});
        auto piece = psi_alg(n)[0];
        auto t_alg = piece.monodromy(field)[0];
        Matrix<Tower> formula =
            twist_fiber_monodromy(n, 1, {make_rational(-1, 2)}, {1}, 0, field);
        // tau -> -tau on the formula: recompute with the opposite series sign
        auto ells = enumerate_log_indices({1});
        Matrix<Tower> shift(ells.size(), ells.size());
        shift.at(0, 1) = Tower(Rational(1));
        Matrix<Tower> formula_neg = field->exp_two_pi_i(make_rational(1, 2)) *
                                    exp_nilpotent(shift, -field->tau());
        rep.tformula_reconciled = (t_alg == formula_neg) && !(t_alg == formula);
        rep.tformula_note =
            "exp(-2 pi i E) on the graded piece equals the twist-formula monodromy after "
            "tau -> -tau; the twisted comparison complexes carry the formula as stated";
    }
    return rep;
}

// ---- jordan comparison used by the acceptance suite -------------------------

inline bool psi_matches_local_system(const LatticeModule& m, const ScalarFieldPtr& field) {
    CalibrationReport cal = calibrate_monodromy_sign();
    if (cal.sign == 0) return false;
    auto pieces = psi_alg(m);
    std::size_t total = 0;
    for (const auto& piece : pieces) total += piece.dim;
    if (total != m.rank()) return false;
    const auto& blocks = m.spectrum().blocks;
    for (const auto& piece : pieces) {
        std::vector<QMatrix> nilps;
        std::size_t dim = 0;
        for (const auto& blk : blocks)
            if (fundamental_alpha(blk.mu) == piece.alpha) dim += blk.dim();
        if (dim != piece.dim) return false;
        for (int i = 0; i < m.p(); ++i) {
            QMatrix n(dim, dim);
            std::size_t off = 0;
            for (const auto& blk : blocks) {
                if (fundamental_alpha(blk.mu) != piece.alpha) continue;
                QMatrix r = restrict_to_invariant(m.residue(i), blk.basis);
                for (std::size_t d = 0; d < r.rows(); ++d)
                    r.at(d, d) -= blk.mu[static_cast<std::size_t>(i)];
                for (std::size_t x = 0; x < r.rows(); ++x)
                    for (std::size_t y = 0; y < r.cols(); ++y) n.at(off + x, off + y) = r.at(x, y);
                off += r.rows();
            }
            nilps.push_back(std::move(n));
        }
        if (jordan_data(nilps) != gr_jordan_data(piece)) return false;
        for (int i = 0; i < m.p(); ++i) {
            Tower lhs =
                field->exp_two_pi_i(piece.alpha[static_cast<std::size_t>(i)] + Rational(1));
            for (const auto& blk : blocks) {
                if (fundamental_alpha(blk.mu) != piece.alpha) continue;
                Tower rhs = field->exp_two_pi_i(Rational(cal.sign) *
                                                blk.mu[static_cast<std::size_t>(i)]);
                if (!(lhs == rhs)) return false;
            }
        }
    }
    return true;
}

}  // namespace vmulti
