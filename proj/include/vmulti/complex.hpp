#pragma once

#include "vmulti/errors.hpp"
#include "vmulti/matrix.hpp"

#include <map>
#include <string>
#include <vector>

namespace vmulti {

// Bounded cochain complex over T.  Only nonzero objects are stored; the
// differential d[m] maps degree m to degree m+1 and must satisfy d.d = 0.
template <typename T>
class Complex {
public:
    Complex() = default;

    void set_object(int degree, std::size_t dim, std::vector<std::string> labels = {}) {
        if (dim == 0) return;
        dims_[degree] = dim;
        if (labels.empty()) {
            labels.reserve(dim);
            for (std::size_t i = 0; i < dim; ++i)
                labels.push_back("e" + std::to_string(degree) + "_" + std::to_string(i));
        }
        if (labels.size() != dim) throw std::invalid_argument("label count mismatch");
        labels_[degree] = std::move(labels);
    }

    void set_diff(int degree, Matrix<T> d) {
        if (d.rows() != dim(degree + 1) || d.cols() != dim(degree))
            throw std::invalid_argument("differential shape mismatch at degree " +
                                        std::to_string(degree));
        if (d.is_zero()) return;
        d_[degree] = std::move(d);
    }

    std::size_t dim(int degree) const {
        auto it = dims_.find(degree);
        return it == dims_.end() ? 0 : it->second;
    }
    const std::vector<std::string>& labels(int degree) const {
        static const std::vector<std::string> none;
        auto it = labels_.find(degree);
        return it == labels_.end() ? none : it->second;
    }
    Matrix<T> diff(int degree) const {
        auto it = d_.find(degree);
        if (it != d_.end()) return it->second;
        return Matrix<T>(dim(degree + 1), dim(degree));
    }
    const std::map<int, std::size_t>& objects() const { return dims_; }
    bool is_zero() const { return dims_.empty(); }

    int min_degree() const { return dims_.empty() ? 0 : dims_.begin()->first; }
    int max_degree() const { return dims_.empty() ? 0 : dims_.rbegin()->first; }

    Verdict validate() const {
        for (const auto& [m, dm] : d_) {
            Matrix<T> comp = diff(m + 1) * dm;
            if (!comp.is_zero())
                return Verdict::fail("d.d != 0 between degrees " + std::to_string(m) + " and " +
                                     std::to_string(m + 2));
        }
        return Verdict::pass();
    }

    // Cohomology at every degree carrying a nonzero object, as subquotients
    // ker(d_m) / im(d_{m-1}) of the degree-m space.
    std::map<int, Subquotient<T>> cohomology() const {
        std::map<int, Subquotient<T>> h;
        for (const auto& [m, dm] : dims_) {
            Matrix<T> z = diff(m).kernel();
            Matrix<T> b = diff(m - 1).image();
            h.emplace(m, Subquotient<T>(dm, z, b));
        }
        return h;
    }

    std::map<int, std::size_t> cohomology_dims() const {
        std::map<int, std::size_t> out;
        for (const auto& [m, sq] : cohomology())
            if (sq.dim() > 0) out[m] = sq.dim();
        return out;
    }

    bool is_acyclic() const { return cohomology_dims().empty(); }

    static Complex direct_sum(const Complex& a, const Complex& b) {
        Complex s;
        int lo = std::min(a.is_zero() ? 0 : a.min_degree(), b.is_zero() ? 0 : b.min_degree());
        int hi = std::max(a.is_zero() ? 0 : a.max_degree(), b.is_zero() ? 0 : b.max_degree());
        for (int m = lo; m <= hi; ++m) {
            std::size_t da = a.dim(m), db = b.dim(m);
            if (da + db == 0) continue;
            std::vector<std::string> labels;
            for (const auto& l : a.labels(m)) labels.push_back("L." + l);
            for (const auto& l : b.labels(m)) labels.push_back("R." + l);
            s.set_object(m, da + db, std::move(labels));
        }
        for (int m = lo; m <= hi; ++m) {
            if (s.dim(m) == 0 || s.dim(m + 1) == 0) continue;
            Matrix<T> d(s.dim(m + 1), s.dim(m));
            Matrix<T> daM = a.diff(m), dbM = b.diff(m);
            for (std::size_t i = 0; i < daM.rows(); ++i)
                for (std::size_t j = 0; j < daM.cols(); ++j) d.at(i, j) = daM.at(i, j);
            for (std::size_t i = 0; i < dbM.rows(); ++i)
                for (std::size_t j = 0; j < dbM.cols(); ++j)
                    d.at(a.dim(m + 1) + i, a.dim(m) + j) = dbM.at(i, j);
            s.set_diff(m, std::move(d));
        }
        return s;
    }

private:
    std::map<int, std::size_t> dims_;
    std::map<int, std::vector<std::string>> labels_;
    std::map<int, Matrix<T>> d_;
};

// Map of complexes; components default to zero where omitted.
template <typename T>
struct ChainMap {
    Complex<T> src, tgt;
    std::map<int, Matrix<T>> comps;

    Matrix<T> comp(int degree) const {
        auto it = comps.find(degree);
        if (it != comps.end()) return it->second;
        return Matrix<T>(tgt.dim(degree), src.dim(degree));
    }

    void set_comp(int degree, Matrix<T> m) {
        if (m.rows() != tgt.dim(degree) || m.cols() != src.dim(degree))
            throw std::invalid_argument("chain map component shape mismatch");
        if (m.is_zero()) return;
        comps[degree] = std::move(m);
    }

    Verdict validate() const {
        int lo = std::min(src.is_zero() ? 0 : src.min_degree(), tgt.is_zero() ? 0 : tgt.min_degree());
        int hi = std::max(src.is_zero() ? 0 : src.max_degree(), tgt.is_zero() ? 0 : tgt.max_degree());
        for (int m = lo; m <= hi; ++m) {
            Matrix<T> lhs = tgt.diff(m) * comp(m);
            Matrix<T> rhs = comp(m + 1) * src.diff(m);
            if (!(lhs == rhs))
                return Verdict::fail("does not commute with d at degree " + std::to_string(m));
        }
        return Verdict::pass();
    }

    static ChainMap identity(const Complex<T>& c) {
        ChainMap f{c, c, {}};
        for (const auto& [m, dm] : c.objects()) f.comps[m] = Matrix<T>::identity(dm);
        return f;
    }
};

// Mapping cone: Cone(f)^m = X^{m+1} (+) Y^m with d(x, y) = (-dx, fx + dy).
template <typename T>
Complex<T> mapping_cone(const ChainMap<T>& f) {
    Complex<T> cone;
    int lo = std::min(f.src.is_zero() ? 0 : f.src.min_degree() - 1,
                      f.tgt.is_zero() ? 0 : f.tgt.min_degree());
    int hi = std::max(f.src.is_zero() ? 0 : f.src.max_degree() - 1,
                      f.tgt.is_zero() ? 0 : f.tgt.max_degree());
    for (int m = lo; m <= hi; ++m) {
        std::size_t dx = f.src.dim(m + 1), dy = f.tgt.dim(m);
        if (dx + dy == 0) continue;
        cone.set_object(m, dx + dy);
    }
    for (int m = lo; m <= hi; ++m) {
        std::size_t rows = cone.dim(m + 1), cols = cone.dim(m);
        if (rows == 0 || cols == 0) continue;
        Matrix<T> d(rows, cols);
        Matrix<T> dX = f.src.diff(m + 1);
        Matrix<T> dY = f.tgt.diff(m);
        Matrix<T> fm = f.comp(m + 1);
        std::size_t sx = f.src.dim(m + 2);
        for (std::size_t i = 0; i < dX.rows(); ++i)
            for (std::size_t j = 0; j < dX.cols(); ++j) d.at(i, j) = -dX.at(i, j);
        for (std::size_t i = 0; i < fm.rows(); ++i)
            for (std::size_t j = 0; j < fm.cols(); ++j) d.at(sx + i, j) = fm.at(i, j);
        for (std::size_t i = 0; i < dY.rows(); ++i)
            for (std::size_t j = 0; j < dY.cols(); ++j) d.at(sx + i, f.src.dim(m + 1) + j) = dY.at(i, j);
        cone.set_diff(m, std::move(d));
    }
    return cone;
}

template <typename T>
bool is_quasi_iso(const ChainMap<T>& f) {
    Verdict v = f.validate();
    if (!v.ok) throw std::invalid_argument("is_quasi_iso: not a chain map: " + v.detail);
    return mapping_cone(f).is_acyclic();
}

// Matrices induced by a chain map on cohomology, degree by degree.
template <typename T>
std::map<int, Matrix<T>> induced_on_cohomology(const ChainMap<T>& f) {
    auto hs = f.src.cohomology();
    auto ht = f.tgt.cohomology();
    std::map<int, Matrix<T>> out;
    for (const auto& [m, sq] : hs) {
        Subquotient<T> target = (ht.count(m)) ? ht.at(m) : Subquotient<T>::whole(0);
        if (target.ambient() == 0 && f.tgt.dim(m) > 0)
            target = Subquotient<T>(f.tgt.dim(m), Matrix<T>(f.tgt.dim(m), 0), Matrix<T>(f.tgt.dim(m), 0));
        if (sq.dim() == 0 && target.dim() == 0) continue;
        if (f.tgt.dim(m) == 0) {
            out[m] = Matrix<T>(0, sq.dim());
            continue;
        }
        out[m] = sq.induced(f.comp(m), ht.at(m));
    }
    for (const auto& [m, sq] : ht) {
        if (!out.count(m) && sq.dim() > 0) out[m] = Matrix<T>(sq.dim(), hs.count(m) ? hs.at(m).dim() : 0);
    }
    return out;
}

}  // namespace vmulti
