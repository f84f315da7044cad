#include <catch2/catch_amalgamated.hpp>

#include "vmulti/compat.hpp"

#include "generators.hpp"

#include <random>

using namespace vmulti;
using namespace vmulti::testgen;

namespace {

QMatrix col(std::size_t n, std::vector<long long> v) {
    QMatrix m(n, 1);
    for (std::size_t i = 0; i < n; ++i) m.at(i, 0) = Rational(v[i]);
    return m;
}

QMatrix random_subspace(std::mt19937_64& rng, std::size_t ambient) {
    std::size_t cols = rng() % (ambient + 1);
    return span_canonical(random_matrix(rng, ambient, cols, 2));
}

}  // namespace

TEST_CASE("one sub-object gives the short exact sequence") {
    QMatrix a1 = col(3, {1, 2, 0});
    auto res = compatibility_hypercomplex<Rational>(3, {a1});
    REQUIRE(res.compatible);
    CHECK(res.hc.obj_dim({-1}) == 1);
    CHECK(res.hc.obj_dim({0}) == 3);
    CHECK(res.hc.obj_dim({1}) == 2);
    CHECK(res.hc.validate().ok);
}

TEST_CASE("two sub-objects are always compatible (3x3 grid)") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t ambient = 2 + rng() % 4;
        auto a1 = random_subspace(rng, ambient);
        auto a2 = random_subspace(rng, ambient);
        auto res = compatibility_hypercomplex<Rational>(ambient, {a1, a2});
        REQUIRE(res.compatible);
        REQUIRE(res.hc.validate().ok);
        // spot-check the displayed grid objects
        CHECK(res.pieces.at({-1, -1}).dim() == span_intersect(a1, a2).cols());
        CHECK(res.pieces.at({0, 0}).dim() == ambient);
        CHECK(res.pieces.at({1, 1}).dim() == ambient - span_sum(a1, a2).cols());
        // restriction to the first direction is the n=1 hypercomplex of A_1
        auto res1 = compatibility_hypercomplex<Rational>(ambient, {a1});
        for (int k = -1; k <= 1; ++k)
            CHECK(res.pieces.at({k, 0}).dim() == res1.pieces.at({k}).dim());
    }
}

TEST_CASE("three distinct lines in the plane are incompatible") {
    QMatrix a1 = col(2, {1, 0});
    QMatrix a2 = col(2, {0, 1});
    QMatrix a3 = col(2, {1, 1});
    auto res = compatibility_hypercomplex<Rational>(2, {a1, a2, a3});
    CHECK_FALSE(res.compatible);
    CHECK_FALSE(res.failure.empty());
}

TEST_CASE("compatibility hypercomplex restricted to a subset stays compatible") {
    std::mt19937_64 rng(4242);
    // n=3 compatible example: coordinate subspaces are always compatible
    QMatrix e1 = col(3, {1, 0, 0});
    QMatrix e12 = QMatrix::hstack(col(3, {1, 0, 0}), col(3, {0, 1, 0}));
    QMatrix e3 = col(3, {0, 0, 1});
    auto res = compatibility_hypercomplex<Rational>(3, {e1, e12, e3});
    REQUIRE(res.compatible);
    CHECK(res.hc.validate().ok);
    (void)rng;
}

TEST_CASE("filtration construction enforces monotonicity and exhaustion") {
    std::map<int, QMatrix> steps;
    steps[0] = col(2, {1, 0});
    steps[1] = QMatrix::identity(2);
    Filtration<Rational> f(2, steps);
    CHECK(f.at(-1).cols() == 0);
    CHECK(f.at(0).cols() == 1);
    CHECK(f.at(5).cols() == 2);
    std::map<int, QMatrix> bad;
    bad[0] = col(2, {1, 0});
    CHECK_THROWS_AS(Filtration<Rational>(2, bad), std::invalid_argument);
}

namespace {

Filtration<Rational> random_filtration(std::mt19937_64& rng, std::size_t ambient) {
    // increasing chain built from a random flag
    QMatrix basis = random_invertible(rng, ambient);
    std::map<int, QMatrix> steps;
    std::size_t cols = 1 + rng() % ambient;
    int level = static_cast<int>(rng() % 3) - 1;
    while (true) {
        QMatrix step(ambient, cols);
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t i = 0; i < ambient; ++i) step.at(i, j) = basis.at(i, j);
        steps[level] = step;
        if (cols == ambient) break;
        cols = std::min(ambient, cols + 1 + rng() % 2);
        level += 1 + static_cast<int>(rng() % 2);
    }
    return Filtration<Rational>(ambient, steps);
}

}  // namespace

TEST_CASE("pairs of filtrations are always compatible") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t ambient = 2 + rng() % 3;
        auto f1 = random_filtration(rng, ambient);
        auto f2 = random_filtration(rng, ambient);
        CHECK(are_filtrations_compatible<Rational>({f1, f2}).ok);
    }
}

TEST_CASE("three-lines filtrations are incompatible") {
    auto line_filtration = [](QMatrix line) {
        std::map<int, QMatrix> steps;
        steps[0] = line;
        steps[1] = QMatrix::identity(2);
        return Filtration<Rational>(2, steps);
    };
    auto f1 = line_filtration(col(2, {1, 0}));
    auto f2 = line_filtration(col(2, {0, 1}));
    auto f3 = line_filtration(col(2, {1, 1}));
    CHECK_FALSE(are_filtrations_compatible<Rational>({f1, f2, f3}).ok);
    CHECK(are_filtrations_compatible<Rational>({f1, f1, f1}).ok);
}

TEST_CASE("multigraded: ordinary graded piece for n=1") {
    std::map<int, QMatrix> steps;
    steps[0] = col(2, {1, 0});
    steps[2] = QMatrix::identity(2);
    Filtration<Rational> f(2, steps);
    auto res = multigraded<Rational>({f}, {0}, {0});
    CHECK(res.agree);
    CHECK(res.iterated.dim() == 1);
    auto res2 = multigraded<Rational>({f}, {1}, {0});
    CHECK(res2.agree);
    CHECK(res2.iterated.dim() == 0);
    auto res3 = multigraded<Rational>({f}, {2}, {0});
    CHECK(res3.agree);
    CHECK(res3.iterated.dim() == 1);
}

TEST_CASE("multigraded: transverse lines at level (0,0)") {
    auto line_filtration = [](QMatrix line) {
        std::map<int, QMatrix> steps;
        steps[0] = line;
        steps[1] = QMatrix::identity(2);
        return Filtration<Rational>(2, steps);
    };
    auto f1 = line_filtration(col(2, {1, 0}));
    auto f2 = line_filtration(col(2, {0, 1}));
    for (auto sigma : std::vector<std::vector<int>>{{0, 1}, {1, 0}}) {
        auto res = multigraded<Rational>({f1, f2}, {0, 0}, sigma);
        CHECK(res.agree);
        CHECK(res.iterated.dim() == 0);
    }
    for (auto sigma : std::vector<std::vector<int>>{{0, 1}, {1, 0}}) {
        auto res = multigraded<Rational>({f1, f2}, {0, 1}, sigma);
        CHECK(res.agree);
        CHECK(res.iterated.dim() == 1);
    }
}

TEST_CASE("multigraded permutation independence on random compatible triples") {
    std::mt19937_64 rng(90210);
    const std::vector<std::vector<int>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    int done = 0;
    while (done < 25) {
        std::size_t ambient = 2 + rng() % 3;
        std::vector<Filtration<Rational>> filts{random_filtration(rng, ambient),
                                                random_filtration(rng, ambient),
                                                random_filtration(rng, ambient)};
        if (!are_filtrations_compatible<Rational>(filts).ok) continue;
        ++done;
        std::vector<int> levels;
        for (const auto& f : filts) {
            auto js = f.jump_levels();
            levels.push_back(js[rng() % js.size()]);
        }
        std::optional<std::size_t> expected;
        std::size_t total = 0;
        for (const auto& sigma : perms) {
            auto res = multigraded<Rational>(filts, levels, sigma);
            CHECK(res.agree);
            if (!expected) expected = res.iterated.dim();
            CHECK(res.iterated.dim() == *expected);
            total = res.iterated.dim();
        }
        (void)total;
    }
}

TEST_CASE("multigraded dimensions sum to the ambient dimension") {
    std::mt19937_64 rng(5150);
    int done = 0;
    while (done < 10) {
        std::size_t ambient = 2 + rng() % 3;
        std::vector<Filtration<Rational>> filts{random_filtration(rng, ambient),
                                                random_filtration(rng, ambient)};
        if (!are_filtrations_compatible<Rational>(filts).ok) continue;
        ++done;
        std::size_t sum = 0;
        auto j1 = filts[0].jump_levels();
        auto j2 = filts[1].jump_levels();
        for (int l1 : j1)
            for (int l2 : j2) sum += multigraded<Rational>(filts, {l1, l2}, {0, 1}).iterated.dim();
        CHECK(sum == ambient);
    }
}
