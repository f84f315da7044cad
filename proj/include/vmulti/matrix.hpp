#pragma once

#include "vmulti/rational.hpp"

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmulti {

// Dense matrix over an exact field T.  Maps act on column vectors, so a
// matrix taking V -> W has rows() == dim W and cols() == dim V.
template <typename T>
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, T(0)) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
        : rows_(rows), cols_(cols), a_(std::move(entries)) {
        if (a_.size() != rows * cols) throw std::invalid_argument("matrix entry count mismatch");
    }
    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = T(1);
        return m;
    }
    static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
        std::size_t r = rows.size();
        std::size_t c = r == 0 ? 0 : rows[0].size();
        Matrix m(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
            for (std::size_t j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const T& at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    bool is_zero() const {
        for (const auto& x : a_)
            if (!(x == T(0))) return false;
        return true;
    }
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        a.check_same_shape(b);
        Matrix m(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) m.a_[i] = a.a_[i] + b.a_[i];
        return m;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        a.check_same_shape(b);
        Matrix m(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) m.a_[i] = a.a_[i] - b.a_[i];
        return m;
    }
    Matrix operator-() const {
        Matrix m(rows_, cols_);
        for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] = -a_[i];
        return m;
    }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
        Matrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a.at(i, k);
                if (aik == T(0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) m.at(i, j) += aik * b.at(k, j);
            }
        return m;
    }
    friend Matrix operator*(const T& s, const Matrix& a) {
        Matrix m(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) m.a_[i] = s * a.a_[i];
        return m;
    }
    friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v) {
        if (a.cols_ != v.size()) throw std::invalid_argument("matrix-vector shape mismatch");
        std::vector<T> w(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j)
                if (!(a.at(i, j) == T(0))) w[i] += a.at(i, j) * v[j];
        return w;
    }

    Matrix transpose() const {
        Matrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m.at(j, i) = at(i, j);
        return m;
    }

    Matrix column(std::size_t c) const {
        Matrix m(rows_, 1);
        for (std::size_t i = 0; i < rows_; ++i) m.at(i, 0) = at(i, c);
        return m;
    }
    std::vector<T> column_vector(std::size_t c) const {
        std::vector<T> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = at(i, c);
        return v;
    }
    void set_column(std::size_t c, const std::vector<T>& v) {
        for (std::size_t i = 0; i < rows_; ++i) at(i, c) = v[i];
    }

    static Matrix hstack(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_) throw std::invalid_argument("hstack row mismatch");
        Matrix m(a.rows_, a.cols_ + b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t j = 0; j < a.cols_; ++j) m.at(i, j) = a.at(i, j);
            for (std::size_t j = 0; j < b.cols_; ++j) m.at(i, a.cols_ + j) = b.at(i, j);
        }
        return m;
    }
    static Matrix vstack(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.cols_) throw std::invalid_argument("vstack column mismatch");
        Matrix m(a.rows_ + b.rows_, a.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) m.at(i, j) = a.at(i, j);
        for (std::size_t i = 0; i < b.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) m.at(a.rows_ + i, j) = b.at(i, j);
        return m;
    }

    // Reduced row echelon form; returns pivot column indices.
    std::pair<Matrix, std::vector<std::size_t>> rref() const {
        Matrix m = *this;
        std::vector<std::size_t> pivots;
        std::size_t row = 0;
        for (std::size_t col = 0; col < cols_ && row < rows_; ++col) {
            std::size_t sel = row;
            while (sel < rows_ && m.at(sel, col) == T(0)) ++sel;
            if (sel == rows_) continue;
            if (sel != row)
                for (std::size_t j = 0; j < cols_; ++j) std::swap(m.at(sel, j), m.at(row, j));
            T inv = T(1) / m.at(row, col);
            for (std::size_t j = col; j < cols_; ++j) m.at(row, j) = inv * m.at(row, j);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i == row) continue;
                T f = m.at(i, col);
                if (f == T(0)) continue;
                for (std::size_t j = col; j < cols_; ++j) m.at(i, j) -= f * m.at(row, j);
            }
            pivots.push_back(col);
            ++row;
        }
        return {m, pivots};
    }

    std::size_t rank() const { return rref().second.size(); }

    // Columns form a basis of ker(this).
    Matrix kernel() const {
        auto [r, pivots] = rref();
        std::vector<bool> is_pivot(cols_, false);
        for (auto p : pivots) is_pivot[p] = true;
        std::vector<std::size_t> free_cols;
        for (std::size_t c = 0; c < cols_; ++c)
            if (!is_pivot[c]) free_cols.push_back(c);
        Matrix k(cols_, free_cols.size());
        for (std::size_t fi = 0; fi < free_cols.size(); ++fi) {
            std::size_t fc = free_cols[fi];
            k.at(fc, fi) = T(1);
            for (std::size_t pi = 0; pi < pivots.size(); ++pi) k.at(pivots[pi], fi) = -r.at(pi, fc);
        }
        return k;
    }

    // Columns form a basis of the column space (original pivot columns).
    Matrix image() const {
        auto pivots = rref().second;
        Matrix im(rows_, pivots.size());
        for (std::size_t j = 0; j < pivots.size(); ++j)
            for (std::size_t i = 0; i < rows_; ++i) im.at(i, j) = at(i, pivots[j]);
        return im;
    }

    // One solution of (this) * x = b, if consistent.
    std::optional<std::vector<T>> solve(const std::vector<T>& b) const {
        auto sols = solve_matrix(Matrix(rows_, 1, std::vector<T>(b)));
        if (!sols) return std::nullopt;
        return sols->column_vector(0);
    }

    // One solution X of (this) * X = B, if consistent.
    std::optional<Matrix> solve_matrix(const Matrix& B) const {
        if (B.rows() != rows_) throw std::invalid_argument("solve shape mismatch");
        auto [r, pivots] = hstack(*this, B).rref();
        for (auto p : pivots)
            if (p >= cols_) return std::nullopt;  // inconsistent row
        Matrix X(cols_, B.cols());
        for (std::size_t pi = 0; pi < pivots.size(); ++pi)
            for (std::size_t j = 0; j < B.cols(); ++j) X.at(pivots[pi], j) = r.at(pi, cols_ + j);
        return X;
    }

    std::optional<Matrix> inverse() const {
        if (rows_ != cols_) return std::nullopt;
        auto [r, pivots] = hstack(*this, identity(rows_)).rref();
        if (pivots.size() != rows_) return std::nullopt;
        for (std::size_t i = 0; i < rows_; ++i)
            if (pivots[i] != i) return std::nullopt;
        Matrix inv(rows_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < rows_; ++j) inv.at(i, j) = r.at(i, cols_ + j);
        return inv;
    }

    bool is_invertible() const { return rows_ == cols_ && rank() == rows_; }

    std::string to_string() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < rows_; ++i) {
            os << (i ? "; " : "");
            for (std::size_t j = 0; j < cols_; ++j) {
                if (j) os << ", ";
                os << at(i, j);
            }
        }
        os << "]";
        return os.str();
    }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    }
    std::size_t rows_, cols_;
    std::vector<T> a_;
};

// ---- subspace utilities -------------------------------------------------
//
// A subspace of K^n is a matrix whose columns span it.  The canonical basis
// of a span is the column-echelon basis (rref of the transpose, transposed
// back), which makes equality of subspaces a structural matrix equality.

template <typename T>
Matrix<T> span_canonical(const Matrix<T>& gens) {
    auto [r, pivots] = gens.transpose().rref();
    Matrix<T> b(gens.rows(), pivots.size());
    for (std::size_t i = 0; i < pivots.size(); ++i)
        for (std::size_t j = 0; j < gens.rows(); ++j) b.at(j, i) = r.at(i, j);
    return b;
}

template <typename T>
Matrix<T> span_sum(const Matrix<T>& a, const Matrix<T>& b) {
    return span_canonical(Matrix<T>::hstack(a, b));
}

// span(a) intersect span(b) via the kernel of [a | -b].
template <typename T>
Matrix<T> span_intersect(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() == 0 || b.cols() == 0) return Matrix<T>(a.rows(), 0);
    Matrix<T> k = Matrix<T>::hstack(a, -b).kernel();
    Matrix<T> coeff_a(a.cols(), k.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
        for (std::size_t j = 0; j < k.cols(); ++j) coeff_a.at(i, j) = k.at(i, j);
    return span_canonical(a * coeff_a);
}

template <typename T>
bool span_contains(const Matrix<T>& space, const std::vector<T>& v) {
    return space.solve(v).has_value();
}

template <typename T>
bool span_contains_all(const Matrix<T>& space, const Matrix<T>& vs) {
    return space.solve_matrix(vs).has_value();
}

template <typename T>
bool span_equal(const Matrix<T>& a, const Matrix<T>& b) {
    return span_canonical(a) == span_canonical(b);
}

// ---- subquotients -------------------------------------------------------
//
// A subquotient top/bottom of the ambient space K^n, with bottom <= top.
// Representatives are columns of `top` chosen greedily against the bottom,
// in column order, so coordinates are reproducible.
template <typename T>
class Subquotient {
public:
    Subquotient() : ambient_(0) {}
    Subquotient(std::size_t ambient, const Matrix<T>& top, const Matrix<T>& bottom)
        : ambient_(ambient), top_(span_canonical(top)), bottom_(span_canonical(bottom)) {
        if (!span_contains_all(top_, bottom_))
            throw std::invalid_argument("subquotient: bottom not contained in top");
        Matrix<T> grown = bottom_;
        std::vector<std::size_t> rep_cols;
        for (std::size_t c = 0; c < top_.cols(); ++c) {
            auto col = top_.column(c);
            if (grown.cols() == 0 || !span_contains_all(grown, col)) {
                rep_cols.push_back(c);
                grown = Matrix<T>::hstack(grown, col);
            }
        }
        reps_ = Matrix<T>(ambient_, rep_cols.size());
        for (std::size_t j = 0; j < rep_cols.size(); ++j)
            for (std::size_t i = 0; i < ambient_; ++i) reps_.at(i, j) = top_.at(i, rep_cols[j]);
        solver_ = Matrix<T>::hstack(reps_, bottom_);
    }

    static Subquotient whole(std::size_t ambient) {
        return Subquotient(ambient, Matrix<T>::identity(ambient), Matrix<T>(ambient, 0));
    }

    std::size_t ambient() const { return ambient_; }
    std::size_t dim() const { return reps_.cols(); }
    const Matrix<T>& top() const { return top_; }
    const Matrix<T>& bottom() const { return bottom_; }
    const Matrix<T>& representatives() const { return reps_; }

    bool contains(const std::vector<T>& v) const { return span_contains(top_, v); }

    // Coordinates of an ambient vector (must lie in top) in the quotient.
    std::vector<T> coords(const std::vector<T>& v) const {
        auto sol = solver_.solve(v);
        if (!sol) throw std::invalid_argument("vector not in subquotient top");
        return std::vector<T>(sol->begin(), sol->begin() + dim());
    }

    // Matrix of the map induced on quotients by the ambient map f, which must
    // send top->top' and bottom->bottom' (checked by the coords() solve).
    Matrix<T> induced(const Matrix<T>& f, const Subquotient& target) const {
        Matrix<T> m(target.dim(), dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            std::vector<T> img = f * reps_.column_vector(j);
            m.set_column(j, target.coords(img));
        }
        return m;
    }

    // Same as induced() with f the identity inclusion of ambients.
    Matrix<T> induced_identity(const Subquotient& target) const {
        Matrix<T> m(target.dim(), dim());
        for (std::size_t j = 0; j < dim(); ++j) m.set_column(j, target.coords(reps_.column_vector(j)));
        return m;
    }

private:
    std::size_t ambient_;
    Matrix<T> top_, bottom_, reps_, solver_;
};

using QMatrix = Matrix<Rational>;

}  // namespace vmulti
