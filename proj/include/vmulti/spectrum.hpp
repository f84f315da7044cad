#pragma once

#include "vmulti/errors.hpp"
#include "vmulti/matrix.hpp"
#include "vmulti/polynomial.hpp"
#include "vmulti/rational.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace vmulti {

// Characteristic polynomial det(xI - A) by the Faddeev-LeVerrier recursion.
inline QPoly char_poly(const QMatrix& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("char_poly of non-square matrix");
    std::size_t n = A.rows();
    std::vector<Rational> c(n + 1, Rational(0));
    c[n] = Rational(1);
    QMatrix M = QMatrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        M = A * M;
        Rational tr(0);
        for (std::size_t i = 0; i < n; ++i) tr += M.at(i, i);
        Rational ck = -tr / Rational(static_cast<int>(k));
        c[n - k] = ck;
        for (std::size_t i = 0; i < n; ++i) M.at(i, i) += ck;
    }
    return QPoly(std::move(c));
}

// Rank over the fraction field.
inline std::size_t rank(const QMatrix& m) { return m.rank(); }

inline QMatrix commutator(const QMatrix& a, const QMatrix& b) { return a * b - b * a; }

// Restriction of A to an invariant subspace with basis B (columns):
// solves B * R = A * B.
template <typename T>
Matrix<T> restrict_to_invariant(const Matrix<T>& A, const Matrix<T>& B) {
    auto R = B.solve_matrix(A * B);
    if (!R) throw std::invalid_argument("subspace not invariant");
    return *R;
}

// One block of a joint generalized-eigenspace decomposition: on span(basis),
// C_i - mu_i is nilpotent of degree exactly nilp_degree[i].
struct SpectralBlock {
    std::vector<Rational> mu;
    QMatrix basis;
    std::vector<int> nilp_degree;
    std::size_t dim() const { return basis.cols(); }
};

struct JointSpectrum {
    std::size_t ambient = 0;
    std::vector<SpectralBlock> blocks;
    std::size_t total_dim() const {
        std::size_t d = 0;
        for (const auto& b : blocks) d += b.dim();
        return d;
    }
};

// Distinct eigenvalues of a rational matrix; requires the characteristic
// polynomial to split over Q.
inline std::vector<Rational> rational_eigenvalues(const QMatrix& A) {
    auto roots = rational_roots(char_poly(A));
    if (!roots) throw IrrationalSpectrum("characteristic polynomial does not split over Q");
    std::vector<Rational> vals;
    for (const auto& [r, m] : *roots) vals.push_back(r);
    return vals;
}

// Generalized eigenspace ker (A - lambda)^n.
inline QMatrix generalized_eigenspace(const QMatrix& A, const Rational& lambda) {
    std::size_t n = A.rows();
    QMatrix shifted = A;
    for (std::size_t i = 0; i < n; ++i) shifted.at(i, i) -= lambda;
    QMatrix power = QMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) power = power * shifted;
    return span_canonical(power.kernel());
}

// Joint generalized-eigenspace decomposition of a commuting family of
// rational matrices with rational spectra.  Blocks are ordered by their
// eigenvalue tuples (lexicographically).
inline JointSpectrum joint_spectrum(const std::vector<QMatrix>& C) {
    if (C.empty()) throw std::invalid_argument("joint_spectrum of empty family");
    std::size_t n = C[0].rows();
    for (std::size_t i = 0; i < C.size(); ++i) {
        if (C[i].rows() != n || C[i].cols() != n)
            throw std::invalid_argument("joint_spectrum: size mismatch");
        for (std::size_t j = i + 1; j < C.size(); ++j)
            if (!commutator(C[i], C[j]).is_zero())
                throw NonCommuting("matrices " + std::to_string(i + 1) + " and " +
                                   std::to_string(j + 1) + " do not commute");
    }

    // Intersect generalized eigenspaces index by index.
    std::vector<std::pair<std::vector<Rational>, QMatrix>> pieces;
    pieces.push_back({{}, QMatrix::identity(n)});
    for (const auto& Ci : C) {
        std::vector<std::pair<std::vector<Rational>, QMatrix>> next;
        auto eigs = rational_eigenvalues(Ci);
        for (const auto& [mu, space] : pieces) {
            for (const auto& lambda : eigs) {
                QMatrix sect = span_intersect(space, generalized_eigenspace(Ci, lambda));
                if (sect.cols() == 0) continue;
                auto mu2 = mu;
                mu2.push_back(lambda);
                next.push_back({std::move(mu2), std::move(sect)});
            }
        }
        pieces = std::move(next);
    }

    JointSpectrum js;
    js.ambient = n;
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t covered = 0;
    for (auto& [mu, basis] : pieces) {
        SpectralBlock blk;
        blk.mu = mu;
        blk.basis = basis;
        for (std::size_t i = 0; i < C.size(); ++i) {
            QMatrix R = restrict_to_invariant(C[i], basis);
            for (std::size_t d = 0; d < R.rows(); ++d) R.at(d, d) -= mu[i];
            int deg = 0;
            QMatrix power = QMatrix::identity(R.rows());
            while (!power.is_zero()) {
                power = power * R;
                ++deg;
                if (static_cast<std::size_t>(deg) > R.rows() + 1)
                    throw IrrationalSpectrum("block restriction not nilpotent");
            }
            blk.nilp_degree.push_back(deg == 0 ? 1 : deg);
        }
        covered += blk.dim();
        js.blocks.push_back(std::move(blk));
    }
    if (covered != n)
        throw IrrationalSpectrum("joint eigenspaces do not fill the ambient space");
    return js;
}

// sum_{m >= 0} scale^m N^m / m! for nilpotent N; throws if N^dim != 0.
template <typename T>
Matrix<T> exp_nilpotent(const Matrix<T>& N, const T& scale) {
    if (N.rows() != N.cols()) throw std::invalid_argument("exp_nilpotent of non-square matrix");
    std::size_t n = N.rows();
    Matrix<T> result = Matrix<T>::identity(n);
    Matrix<T> term = Matrix<T>::identity(n);
    T factor(1);
    for (std::size_t m = 1; m <= n; ++m) {
        term = term * N;
        if (term.is_zero()) return result;
        factor = factor * scale / T(static_cast<int>(m));
        result = result + factor * term;
    }
    throw NotNilpotent("matrix power N^dim is nonzero");
}

}  // namespace vmulti
