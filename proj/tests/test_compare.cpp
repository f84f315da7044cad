#include <catch2/catch_amalgamated.hpp>

#include "vmulti/compare.hpp"
#include "vmulti/monodromy.hpp"

using namespace vmulti;

namespace {
Rational q(long long n, long long d = 1) { return make_rational(n, d); }

std::vector<LatticeModule> small_corpus() {
    return {
        LatticeModule::o_localized(1),
        LatticeModule::nilsson({q(-1, 2)}, {0}),
        LatticeModule::nilsson({q(-1)}, {1}),
        LatticeModule::o_localized(2),
        LatticeModule::nilsson({q(-1, 2), q(-1, 3)}, {1, 0}),
        LatticeModule::direct_sum(LatticeModule::o_localized(2),
                                  LatticeModule::nilsson({q(-2, 3), q(-1)}, {0, 1})),
    };
}
}  // namespace

TEST_CASE("worked example: the three complexes of O[1/t]") {
    auto m = LatticeModule::o_localized(1);
    int w = default_window(m);
    SECTION("i_dagger is [gr_{-1} -> gr_0] with zero differential, dims (1,1)") {
        auto dag = i_dagger(m, w);
        auto dims = dag.cohomology_dims();
        REQUIRE(dims.size() == 2);
        CHECK(dims.at(0) == 1);
        CHECK(dims.at(1) == 1);
        // the whole complex lives in the single slice w = -1
        CHECK(dag.slices.size() == 1);
        CHECK(dag.slices.begin()->first == Lattice{-1});
        const auto& slice = dag.slices.begin()->second;
        CHECK(slice.total.complex.diff(0).is_zero());
    }
    SECTION("i_sharp is [K[t] -> t^{-1}K[t]] with dims (1,1)") {
        auto sha = i_sharp(m, w);
        auto dims = sha.cohomology_dims();
        REQUIRE(dims.size() == 2);
        CHECK(dims.at(0) == 1);
        CHECK(dims.at(1) == 1);
    }
    SECTION("relative de Rham has dims (1,1)") {
        auto dr = relative_de_rham(m, w);
        auto dims = dr.cohomology_dims();
        REQUIRE(dims.size() == 2);
        CHECK(dims.at(0) == 1);
        CHECK(dims.at(1) == 1);
    }
    SECTION("both arrows are exact quasi-isomorphisms") {
        auto rep = compgrad_arrows(m, w);
        CHECK(rep.sharp_to_dagger_chain);
        CHECK(rep.sharp_to_dagger_qis);
        CHECK(rep.sharp_to_dr_chain);
        CHECK(rep.sharp_to_dr_qis);
    }
}

TEST_CASE("half-integer twist: all three complexes are acyclic") {
    auto m = LatticeModule::nilsson({q(-1, 2)}, {0});
    int w = default_window(m);
    CHECK(i_dagger(m, w).cohomology_dims().empty());
    CHECK(i_sharp(m, w).cohomology_dims().empty());
    CHECK(relative_de_rham(m, w).cohomology_dims().empty());
    auto rep = compgrad_arrows(m, w);
    CHECK(rep.sharp_to_dagger_qis);
    CHECK(rep.sharp_to_dr_qis);
}

TEST_CASE("zero-rank corner case: empty window") {
    auto m = LatticeModule::o_localized(1);
    auto cc = build_cube_complex(m, CornerKind::Graded, 0);
    CHECK(cc.cohomology_dims().empty());
}

TEST_CASE("comparison arrows are quasi-isomorphisms across the corpus") {
    for (const auto& m : small_corpus()) {
        int w = default_window(m);
        auto rep = compgrad_arrows(m, w);
        INFO(m.name());
        CHECK(rep.sharp_to_dagger_chain);
        CHECK(rep.sharp_to_dr_chain);
        CHECK(rep.sharp_to_dagger_qis);
        CHECK(rep.sharp_to_dr_qis);
    }
}

TEST_CASE("nils map: explicit small cases") {
    SECTION("k=0 sends m to m (x) e_0") {
        auto m = LatticeModule::o_localized(1);
        auto nm = nils_map(m, {q(-1)}, {0}, default_window(m));
        CHECK(nm.chain_map_ok);
        CHECK(nm.injective);
        REQUIRE(nm.slices.size() == 1);
        const auto& f = nm.slices.begin()->second;
        CHECK(f.comp(0).rank() == 1);
    }
    SECTION("p=1, alpha=-1, k=1: Phi(m) = m(x)e_0 - (Em)(x)e_1") {
        auto m = LatticeModule::o_localized(1);
        auto nm = nils_map(m, {q(-1)}, {1}, default_window(m));
        CHECK(nm.chain_map_ok);
        CHECK(nm.injective);
        const auto& f = nm.slices.at(Lattice{0});
        // on the graded piece E m = 0, so the image is exactly m (x) e_0
        auto col = f.comp(0).column_vector(0);
        int nonzero = 0;
        for (const auto& c : col) nonzero += (c != Rational(0));
        CHECK(nonzero == 1);
    }
    SECTION("log module: the Phi formula needs the nilpotent correction") {
        auto m = LatticeModule::nilsson({q(-1)}, {1});
        auto nm = nils_map(m, {q(-1)}, {1}, default_window(m));
        CHECK(nm.chain_map_ok);
        CHECK(nm.injective);
    }
}

TEST_CASE("nils map stabilizes onto the limit cohomology") {
    for (const auto& m : small_corpus()) {
        if (m.p() > 1 && m.rank() > 2) continue;  // keep the suite quick
        for (const auto& piece : psi_alg(m)) {
            auto rep = nils_stabilize(m, piece.alpha, default_window(m));
            INFO(m.name());
            CHECK(rep.chain_map_ok);
            CHECK(rep.injective);
            CHECK(rep.stabilized);
            CHECK(rep.quasi_iso_onto_limit);
            CHECK(rep.stabilizing_k >= 0);
            // the limit is the graded piece itself, concentrated in degree 0
            std::size_t expect = gr_piece(m, piece.alpha).dim;
            CHECK(rep.limit_dims[0] == expect);
            std::size_t total = 0;
            for (const auto& [d, n] : rep.limit_dims) total += n;
            CHECK(total == expect);
        }
    }
}

TEST_CASE("monodromy calibration") {
    auto cal = calibrate_monodromy_sign();
    CHECK(cal.sign == -1);
    CHECK(cal.classical_minus_one_ok);
}

TEST_CASE("local system model examples") {
    auto field = ScalarField::make(6);
    SECTION("trivial local system for O[1/t]") {
        auto model = local_system_model(LatticeModule::o_localized(1), field, -1);
        CHECK(model.dim == 1);
        CHECK(model.monodromy[0] == Matrix<Tower>::identity(1));
    }
    SECTION("square root: monodromy -1") {
        auto model = local_system_model(LatticeModule::nilsson({q(-1, 2)}, {0}), field, -1);
        CHECK(model.monodromy[0].at(0, 0) == field->from_rational(q(-1)));
    }
    SECTION("log module: unipotent 2-block") {
        auto model = local_system_model(LatticeModule::nilsson({q(-1)}, {1}), field, -1);
        CHECK(model.dim == 2);
        Matrix<Tower> u = model.monodromy[0];
        CHECK(u.at(0, 0) == field->from_rational(q(1)));
        CHECK(u.at(1, 1) == field->from_rational(q(1)));
        CHECK_FALSE((u - Matrix<Tower>::identity(2)).is_zero());
    }
}

TEST_CASE("monodromy commutes with the comparison maps") {
    for (const auto& m : small_corpus()) {
        if (m.p() > 1 && m.rank() > 2) continue;
        auto field = ScalarField::make(cyclotomic_order_for({m}));
        auto rep = monodromy_commutation(m, default_window(m), field);
        INFO(m.name() << ": " << rep.detail);
        CHECK(rep.arrows_commute);
        CHECK(rep.nils_commutes);
        CHECK(rep.twisted_arrows_commute);
        CHECK(rep.jordan_match);
        CHECK(rep.calibration_sign == -1);
        CHECK(rep.tformula_reconciled);
    }
}

TEST_CASE("nearby cycles match the local system model across the corpus") {
    for (const auto& m : small_corpus()) {
        auto field = ScalarField::make(cyclotomic_order_for({m}));
        INFO(m.name());
        CHECK(psi_matches_local_system(m, field));
    }
}

TEST_CASE("iterated totalization has the diagonal sign identification") {
    auto m = LatticeModule::nilsson({q(-1, 2), q(-1, 3)}, {1, 0});
    auto cc = build_cube_complex(m, CornerKind::Filtration, 2);
    for (const auto& [w, slice] : cc.slices) {
        CHECK(vmulti::detail::check_iterated_totalization(slice.cube, {0}));
        CHECK(vmulti::detail::check_iterated_totalization(slice.cube, {1}));
    }
}

TEST_CASE("permutation independence") {
    SECTION("p=2: both splits") {
        auto m = LatticeModule::nilsson({q(-1, 2), q(-1, 3)}, {1, 1});
        for (auto I : std::vector<std::vector<int>>{{0}, {1}}) {
            auto rep = check_permutation_independence(m, I, default_window(m));
            INFO(rep.detail);
            CHECK(rep.ok);
        }
    }
    SECTION("identity route I = empty set") {
        auto m = LatticeModule::o_localized(2);
        auto rep = check_permutation_independence(m, {}, default_window(m));
        CHECK(rep.ok);
    }
    SECTION("p=3: every nontrivial split") {
        auto m = LatticeModule::tensor_nilsson(LatticeModule::o_localized(3),
                                               {q(-1, 2), q(-1), q(-1, 3)}, {0, 1, 0});
        for (auto I : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
            auto rep = check_permutation_independence(m, I, default_window(m));
            INFO(rep.detail);
            CHECK(rep.ok);
        }
    }
}
