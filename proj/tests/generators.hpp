#pragma once

// Randomized constructions shared by the property tests and the acceptance
// suite.  Everything is driven by a caller-owned engine so runs are
// reproducible.

#include "vmulti/complex.hpp"
#include "vmulti/hypercomplex.hpp"
#include "vmulti/matrix.hpp"
#include "vmulti/rational.hpp"

#include <random>
#include <string>
#include <vector>

namespace vmulti::testgen {

inline Rational small_rational(std::mt19937_64& rng, int span = 3) {
    return Rational(static_cast<int>(rng() % (2 * span + 1)) - span);
}

inline QMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                             int span = 2) {
    QMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = small_rational(rng, span);
    return m;
}

inline QMatrix random_invertible(std::mt19937_64& rng, std::size_t n) {
    for (;;) {
        QMatrix m = random_matrix(rng, n, n, 2);
        if (m.is_invertible()) return m;
    }
}

// Random bounded complex with honest d.d = 0: built as a sum of elementary
// two-term complexes glued through a change of basis.
inline Complex<Rational> random_complex(std::mt19937_64& rng, int min_deg, int length,
                                        std::size_t max_dim) {
    Complex<Rational> c;
    std::vector<std::size_t> dims(static_cast<std::size_t>(length) + 1);
    for (auto& d : dims) d = 1 + rng() % max_dim;
    for (int i = 0; i <= length; ++i) c.set_object(min_deg + i, dims[static_cast<std::size_t>(i)]);
    // d_i = B_{i+1} P_i B_i^{-1} where P_i reads the last r_i coordinates of
    // level i and writes the first r_i of level i+1.  Choosing
    // r_i <= dims[i] - r_{i-1} keeps reads and writes disjoint, so
    // P_{i+1} P_i = 0 and hence d.d = 0 after conjugation.
    std::vector<QMatrix> basis;
    for (auto d : dims) basis.push_back(random_invertible(rng, d));
    std::size_t prev_r = 0;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        std::size_t cap = std::min(dims[i] - prev_r, dims[i + 1]);
        std::size_t r = cap == 0 ? 0 : rng() % (cap + 1);
        QMatrix p(dims[i + 1], dims[i]);
        for (std::size_t t = 0; t < r; ++t) p.at(t, dims[i] - 1 - t) = Rational(1);
        QMatrix inv = *basis[i].inverse();
        c.set_diff(min_deg + static_cast<int>(i), basis[i + 1] * p * inv);
        prev_r = r;
    }
    if (!c.validate().ok) throw std::logic_error("random_complex generator broke d.d = 0");
    return c;
}

// Box (external tensor) product of 1-complexes: the canonical source of valid
// n-hypercomplexes.  Differentials per direction are id (x) d (x) id; they
// commute and square to zero by construction.
inline Hypercomplex<Rational> box_product(const std::vector<Complex<Rational>>& factors) {
    int n = static_cast<int>(factors.size());
    Hypercomplex<Rational> X(n);
    std::vector<std::vector<int>> degs(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i)
        for (const auto& [m, d] : factors[i].objects()) degs[i].push_back(m);
    std::vector<std::size_t> idx(factors.size(), 0);
    if (factors.empty()) return X;
    for (const auto& d : degs)
        if (d.empty()) return X;
    for (;;) {
        Lattice k(factors.size());
        std::size_t dim = 1;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            k[i] = degs[i][idx[i]];
            dim *= factors[i].dim(k[i]);
        }
        X.set_object(k, dim);
        std::size_t i = 0;
        while (i < idx.size() && idx[i] + 1 == degs[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
        ++idx[i];
    }
    for (const auto& [k, obj] : X.objects()) {
        for (int dir = 0; dir < n; ++dir) {
            Lattice k2 = lattice_shift(k, dir);
            if (X.obj_dim(k2) == 0) continue;
            // Kronecker block id (x) ... (x) d_dir (x) ... (x) id with
            // row-major mixed-radix ordering of the factor bases.
            std::vector<std::size_t> sdims(factors.size()), tdims(factors.size());
            for (std::size_t i = 0; i < factors.size(); ++i) {
                sdims[i] = factors[i].dim(k[i]);
                tdims[i] = factors[i].dim(k2[i]);
            }
            QMatrix d = factors[static_cast<std::size_t>(dir)].diff(k[dir]);
            QMatrix big(X.obj_dim(k2), X.obj_dim(k));
            std::vector<std::size_t> sidx(factors.size(), 0);
            for (std::size_t col = 0; col < X.obj_dim(k); ++col) {
                for (std::size_t r = 0; r < d.rows(); ++r) {
                    if (d.at(r, sidx[static_cast<std::size_t>(dir)]) == Rational(0)) continue;
                    std::size_t row = 0;
                    for (std::size_t i = 0; i < factors.size(); ++i) {
                        std::size_t digit = (static_cast<int>(i) == dir) ? r : sidx[i];
                        row = row * tdims[i] + digit;
                    }
                    big.at(row, col) = d.at(r, sidx[static_cast<std::size_t>(dir)]);
                }
                for (std::size_t i = factors.size(); i-- > 0;) {
                    if (++sidx[i] < sdims[i]) break;
                    sidx[i] = 0;
                }
            }
            X.set_diff(dir, k, big);
        }
    }
    return X;
}

inline Hypercomplex<Rational> random_hypercomplex(std::mt19937_64& rng, int n, int max_len,
                                                  std::size_t max_dim) {
    std::vector<Complex<Rational>> factors;
    for (int i = 0; i < n; ++i)
        factors.push_back(random_complex(rng, -(static_cast<int>(rng() % 2)),
                                         1 + static_cast<int>(rng() % max_len), max_dim));
    Hypercomplex<Rational> X = box_product(factors);
    if (rng() % 2) {
        std::vector<Complex<Rational>> f2;
        for (int i = 0; i < n; ++i) f2.push_back(random_complex(rng, 0, 1, 2));
        X = Hypercomplex<Rational>::direct_sum(X, box_product(f2));
    }
    return X;
}

// An exact complex: cone of the identity of a random complex.
inline Complex<Rational> random_exact_complex(std::mt19937_64& rng, std::size_t max_dim) {
    Complex<Rational> base = random_complex(rng, 0, 1 + static_cast<int>(rng() % 2), max_dim);
    return mapping_cone(ChainMap<Rational>::identity(base));
}

}  // namespace vmulti::testgen
