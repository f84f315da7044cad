#include <catch2/catch_amalgamated.hpp>

#include "vmulti/complex.hpp"
#include "vmulti/hypercomplex.hpp"

#include "generators.hpp"

#include <random>

using namespace vmulti;
using namespace vmulti::testgen;

namespace {

// The square with objects K at the corners of {0,1}^2, horizontal and
// vertical maps all identity.
Hypercomplex<Rational> identity_square() {
    Hypercomplex<Rational> X(2);
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b) X.set_object({a, b}, 1);
    QMatrix one = QMatrix::identity(1);
    X.set_diff(0, {0, 0}, one);
    X.set_diff(0, {0, 1}, one);
    X.set_diff(1, {0, 0}, one);
    X.set_diff(1, {1, 0}, one);
    return X;
}

}  // namespace

TEST_CASE("validate accepts lawful squares and names violations") {
    SECTION("single object, zero differentials") {
        Hypercomplex<Rational> X(3);
        X.set_object({0, 0, 0}, 2);
        CHECK(X.validate().ok);
    }
    SECTION("identity square is valid") { CHECK(identity_square().validate().ok); }
    SECTION("broken commuting square is reported") {
        auto X = identity_square();
        X.set_diff(1, {1, 0}, Rational(2) * QMatrix::identity(1));
        auto v = X.validate();
        CHECK_FALSE(v.ok);
        CHECK(v.detail.find("(1,2)") != std::string::npos);
    }
}

TEST_CASE("section complex") {
    SECTION("n=1 returns the complex itself layer by layer") {
        std::mt19937_64 rng(5);
        auto c = random_complex(rng, 0, 3, 3);
        Hypercomplex<Rational> X(1);
        for (const auto& [m, d] : c.objects()) X.set_object({m}, d);
        for (const auto& [m, d] : c.objects())
            if (c.dim(m + 1)) X.set_diff(0, {m}, c.diff(m));
        auto sc = section_complex(X, 0);
        for (const auto& [m, d] : c.objects()) CHECK(sc.layers.at(m).obj_dim({0}) == d);
    }
    SECTION("n=2 square has two layers of vertical complexes") {
        auto sc = section_complex(identity_square(), 0);
        REQUIRE(sc.layers.size() == 2);
        CHECK(sc.layers.at(0).obj_dim({0}) == 1);
        CHECK(sc.layers.at(0).obj_dim({1}) == 1);
        CHECK(sc.layer_maps.at(0).validate().ok);
    }
    SECTION("direction out of range") {
        CHECK_THROWS_AS(section_complex(identity_square(), 2), std::invalid_argument);
    }
}

TEST_CASE("direction cohomology") {
    SECTION("identity square has exact columns") {
        auto X = identity_square();
        for (int p = 0; p <= 1; ++p) CHECK(direction_cohomology(X, 1, p).objects().empty());
    }
    SECTION("single object, p = 0 returns the object") {
        Hypercomplex<Rational> X(2);
        X.set_object({0, 0}, 3);
        CHECK(direction_cohomology(X, 0, 0).obj_dim({0}) == 3);
    }
    SECTION("zero rows: both layers carry the column complex") {
        // rows K -> K with the zero map, columns identity
        Hypercomplex<Rational> X(2);
        for (int a = 0; a <= 1; ++a)
            for (int b = 0; b <= 1; ++b) X.set_object({a, b}, 1);
        X.set_diff(1, {0, 0}, QMatrix::identity(1));
        X.set_diff(1, {1, 0}, QMatrix::identity(1));
        REQUIRE(X.validate().ok);
        for (int p = 0; p <= 1; ++p) {
            auto H = direction_cohomology(X, 0, p);
            CHECK(H.obj_dim({0}) == 1);
            CHECK(H.obj_dim({1}) == 1);
            CHECK_FALSE(H.diff(0, {0}).is_zero());
        }
    }
}

TEST_CASE("total complex of the identity square") {
    auto total = total_complex(identity_square());
    REQUIRE(total.validate().ok);
    CHECK(total.dim(0) == 1);
    CHECK(total.dim(1) == 2);
    CHECK(total.dim(2) == 1);
    // d0 = (id, id)^T; d1 sends (x at (0,1), y at (1,0)) to x - y: the
    // direction-2 component leaving (1,0) picks up (-1)^(k_1) = -1.
    CHECK(total.diff(0).at(0, 0) == Rational(1));
    CHECK(total.diff(0).at(1, 0) == Rational(1));
    CHECK(total.diff(1).at(0, 0) == Rational(1));
    CHECK(total.diff(1).at(0, 1) == Rational(-1));
    CHECK(total.is_acyclic());
}

TEST_CASE("total complex of the zero hypercomplex") {
    Hypercomplex<Rational> X(2);
    CHECK(total_complex(X).is_zero());
}

TEST_CASE("cube functor") {
    SECTION("single map gives the two-term complex") {
        std::map<Lattice, HObject> corners{{{0}, {2, {}}}, {{1}, {1, {}}}};
        QMatrix f(1, 2);
        f.at(0, 0) = Rational(1);
        std::map<std::pair<int, Lattice>, QMatrix> maps{{{0, {0}}, f}};
        auto X = cube(1, corners, maps);
        auto total = total_complex(X);
        CHECK(total.dim(0) == 2);
        CHECK(total.dim(1) == 1);
        CHECK(total.cohomology_dims().at(0) == 1);
    }
    SECTION("n=3 cube places the bottom corner at degree 0") {
        std::map<Lattice, HObject> corners;
        std::map<std::pair<int, Lattice>, QMatrix> maps;
        for (int a = 0; a <= 1; ++a)
            for (int b = 0; b <= 1; ++b)
                for (int c = 0; c <= 1; ++c) corners[{a, b, c}] = HObject{1, {}};
        for (const auto& [k, o] : corners)
            for (int i = 0; i < 3; ++i)
                if (k[i] == 0) maps[{i, k}] = QMatrix::identity(1);
        auto X = cube(3, corners, maps);
        REQUIRE(X.validate().ok);
        auto total = total_complex(X);
        CHECK(total.dim(0) == 1);
        CHECK(total.dim(1) == 3);
        CHECK(total.dim(2) == 3);
        CHECK(total.dim(3) == 1);
        CHECK(total.validate().ok);
        CHECK(total.is_acyclic());
    }
    SECTION("non-commuting face is rejected") {
        std::map<Lattice, HObject> corners;
        for (int a = 0; a <= 1; ++a)
            for (int b = 0; b <= 1; ++b) corners[{a, b}] = HObject{1, {}};
        std::map<std::pair<int, Lattice>, QMatrix> maps;
        maps[{0, {0, 0}}] = QMatrix::identity(1);
        maps[{0, {0, 1}}] = QMatrix::identity(1);
        maps[{1, {0, 0}}] = QMatrix::identity(1);
        maps[{1, {1, 0}}] = Rational(2) * QMatrix::identity(1);
        CHECK_THROWS_AS(cube(2, corners, maps), std::invalid_argument);
    }
}

TEST_CASE("complex cohomology basics") {
    SECTION("identity two-term complex is acyclic") {
        Complex<Rational> c;
        c.set_object(0, 1);
        c.set_object(1, 1);
        c.set_diff(0, QMatrix::identity(1));
        CHECK(c.is_acyclic());
    }
    SECTION("lone object") {
        Complex<Rational> c;
        c.set_object(2, 1);
        CHECK(c.cohomology_dims() == std::map<int, std::size_t>{{2, 1}});
    }
}

TEST_CASE("quasi-isomorphism checks") {
    std::mt19937_64 rng(11);
    SECTION("identity map") {
        auto c = random_complex(rng, 0, 3, 3);
        CHECK(is_quasi_iso(ChainMap<Rational>::identity(c)));
    }
    SECTION("zero map between acyclic complexes") {
        auto a = random_exact_complex(rng, 3);
        auto b = random_exact_complex(rng, 3);
        ChainMap<Rational> f{a, b, {}};
        REQUIRE(f.validate().ok);
        CHECK(is_quasi_iso(f));
    }
    SECTION("zero map K -> K in degree 0") {
        Complex<Rational> k;
        k.set_object(0, 1);
        ChainMap<Rational> f{k, k, {}};
        CHECK_FALSE(is_quasi_iso(f));
    }
    SECTION("non chain map is rejected") {
        Complex<Rational> a;
        a.set_object(0, 1);
        a.set_object(1, 1);
        a.set_diff(0, QMatrix::identity(1));
        ChainMap<Rational> g{a, a, {}};
        g.set_comp(0, QMatrix::identity(1));
        g.set_comp(1, Rational(2) * QMatrix::identity(1));
        CHECK_FALSE(g.validate().ok);
        CHECK_THROWS_AS(is_quasi_iso(g), std::invalid_argument);
    }
}

TEST_CASE("check_quasihyp") {
    std::mt19937_64 rng(23);
    SECTION("identity map reports (true, true)") {
        auto X = random_hypercomplex(rng, 2, 2, 2);
        REQUIRE(X.validate().ok);
        HyperMap<Rational> f{X, X, {}};
        for (const auto& [k, o] : X.objects()) f.set_comp(k, QMatrix::identity(o.dim));
        auto rep = check_quasihyp(f);
        CHECK(rep.hypothesis_holds);
        CHECK(rep.conclusion_holds);
    }
    SECTION("inclusion into sum with last-direction-exact complement") {
        auto X = random_hypercomplex(rng, 2, 2, 2);
        // C = (anything) box (exact): exact in direction 2, so H_2(C) = 0
        auto C = box_product({random_complex(rng, 0, 1, 2), random_exact_complex(rng, 2)});
        auto sum = Hypercomplex<Rational>::direct_sum(X, C);
        HyperMap<Rational> inc{X, sum, {}};
        for (const auto& [k, o] : X.objects()) {
            QMatrix m(sum.obj_dim(k), o.dim);
            for (std::size_t i = 0; i < o.dim; ++i) m.at(i, i) = Rational(1);
            inc.set_comp(k, m);
        }
        REQUIRE(inc.validate().ok);
        auto rep = check_quasihyp(inc);
        CHECK(rep.hypothesis_holds);
        CHECK(rep.conclusion_holds);
    }
    SECTION("zero endomorphism of K at the origin fails both") {
        Hypercomplex<Rational> X(2);
        X.set_object({0, 0}, 1);
        HyperMap<Rational> f{X, X, {}};
        auto rep = check_quasihyp(f);
        CHECK_FALSE(rep.hypothesis_holds);
        CHECK_FALSE(rep.conclusion_holds);
    }
}

TEST_CASE("check_acyclic_direction") {
    std::mt19937_64 rng(31);
    SECTION("identity square is acyclic with an exact direction") {
        Hypercomplex<Rational> X(2);
        for (int a = 0; a <= 1; ++a)
            for (int b = 0; b <= 1; ++b) X.set_object({a, b}, 1);
        X.set_diff(0, {0, 0}, QMatrix::identity(1));
        X.set_diff(0, {0, 1}, QMatrix::identity(1));
        X.set_diff(1, {0, 0}, QMatrix::identity(1));
        X.set_diff(1, {1, 0}, QMatrix::identity(1));
        auto rep = check_acyclic_direction(X);
        CHECK(rep.has_exact_direction);
        CHECK(rep.total_acyclic);
    }
    SECTION("exact box arbitrary is always acyclic") {
        for (int trial = 0; trial < 20; ++trial) {
            auto X = box_product({random_exact_complex(rng, 3), random_complex(rng, 0, 2, 2)});
            REQUIRE(X.validate().ok);
            auto rep = check_acyclic_direction(X);
            CHECK(rep.has_exact_direction);
            CHECK(rep.direction == 0);
            CHECK(rep.total_acyclic);
        }
    }
    SECTION("no exact direction: no assertion made") {
        Hypercomplex<Rational> X(2);
        X.set_object({0, 0}, 1);
        auto rep = check_acyclic_direction(X);
        CHECK_FALSE(rep.has_exact_direction);
        CHECK(rep.consistent());
    }
}

TEST_CASE("property: total_complex squares to zero and theorem implication holds") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 1 + static_cast<int>(rng() % 3);
        auto X = random_hypercomplex(rng, n, 2, 2);
        REQUIRE(X.validate().ok);
        auto total = total_complex(X);
        REQUIRE(total.validate().ok);
    }
}

TEST_CASE("property: total complex commutes with direct sums and permutations") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 15; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        auto X = random_hypercomplex(rng, n, 2, 2);
        auto Y = random_hypercomplex(rng, n, 2, 2);
        auto sum_dims = total_complex(Hypercomplex<Rational>::direct_sum(X, Y)).cohomology_dims();
        auto x_dims = total_complex(X).cohomology_dims();
        for (const auto& [m, d] : total_complex(Y).cohomology_dims()) x_dims[m] += d;
        for (auto it = x_dims.begin(); it != x_dims.end();)
            it = it->second == 0 ? x_dims.erase(it) : std::next(it);
        CHECK(sum_dims == x_dims);

        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        auto P = X.permute_directions(perm);
        REQUIRE(P.validate().ok);
        CHECK(total_complex(P).cohomology_dims() == total_complex(X).cohomology_dims());
    }
}
