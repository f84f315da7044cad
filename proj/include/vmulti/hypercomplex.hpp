#pragma once

#include "vmulti/complex.hpp"
#include "vmulti/errors.hpp"
#include "vmulti/matrix.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace vmulti {

using Lattice = std::vector<int>;

inline Lattice lattice_shift(Lattice k, std::size_t dir, int amount = 1) {
    k[dir] += amount;
    return k;
}

inline int lattice_total(const Lattice& k) {
    int s = 0;
    for (int v : k) s += v;
    return s;
}

inline std::string lattice_to_string(const Lattice& k) {
    std::string s = "(";
    for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
    return s + ")";
}

struct HObject {
    std::size_t dim = 0;
    std::vector<std::string> labels;
};

// n-dimensional hypercomplex: a finite-support assignment Z^n -> spaces with
// one square-zero differential family per direction, all pairwise commuting.
// Directions are 0-based.  Signs appear only in total_complex().
template <typename T>
class Hypercomplex {
public:
    explicit Hypercomplex(int n = 1) : n_(n) {
        if (n <= 0) throw std::invalid_argument("hypercomplex dimension must be positive");
    }

    int n() const { return n_; }
    const std::map<Lattice, HObject>& objects() const { return objects_; }
    const std::map<std::pair<int, Lattice>, Matrix<T>>& diffs() const { return diffs_; }

    void set_object(const Lattice& k, std::size_t dim, std::vector<std::string> labels = {}) {
        check_point(k);
        if (dim == 0) return;
        if (labels.empty())
            for (std::size_t i = 0; i < dim; ++i)
                labels.push_back("x" + lattice_to_string(k) + "_" + std::to_string(i));
        if (labels.size() != dim) throw std::invalid_argument("label count mismatch");
        objects_[k] = HObject{dim, std::move(labels)};
    }

    std::size_t obj_dim(const Lattice& k) const {
        auto it = objects_.find(k);
        return it == objects_.end() ? 0 : it->second.dim;
    }
    const std::vector<std::string>& obj_labels(const Lattice& k) const {
        static const std::vector<std::string> none;
        auto it = objects_.find(k);
        return it == objects_.end() ? none : it->second.labels;
    }

    void set_diff(int dir, const Lattice& k, Matrix<T> d) {
        check_point(k);
        if (dir < 0 || dir >= n_) throw std::invalid_argument("direction out of range");
        if (d.rows() != obj_dim(lattice_shift(k, dir)) || d.cols() != obj_dim(k))
            throw std::invalid_argument("differential shape mismatch at " + lattice_to_string(k));
        if (d.is_zero()) return;
        diffs_[{dir, k}] = std::move(d);
    }

    Matrix<T> diff(int dir, const Lattice& k) const {
        auto it = diffs_.find({dir, k});
        if (it != diffs_.end()) return it->second;
        return Matrix<T>(obj_dim(lattice_shift(k, dir)), obj_dim(k));
    }

    // Square-zero in each direction, commutation across directions.
    Verdict validate() const {
        for (const auto& [k, obj] : objects_) {
            for (int i = 0; i < n_; ++i) {
                Matrix<T> dd = diff(i, lattice_shift(k, i)) * diff(i, k);
                if (!dd.is_zero())
                    return Verdict::fail("d(" + std::to_string(i + 1) + ").d(" +
                                         std::to_string(i + 1) + ") != 0 at " + lattice_to_string(k));
                for (int j = i + 1; j < n_; ++j) {
                    Matrix<T> ij = diff(j, lattice_shift(k, i)) * diff(i, k);
                    Matrix<T> ji = diff(i, lattice_shift(k, j)) * diff(j, k);
                    if (!(ij == ji))
                        return Verdict::fail("square (" + std::to_string(i + 1) + "," +
                                             std::to_string(j + 1) + ") does not commute at " +
                                             lattice_to_string(k));
                }
            }
        }
        return Verdict::pass();
    }

    static Hypercomplex direct_sum(const Hypercomplex& a, const Hypercomplex& b) {
        if (a.n_ != b.n_) throw std::invalid_argument("direct sum dimension mismatch");
        Hypercomplex s(a.n_);
        std::vector<Lattice> points;
        for (const auto& [k, o] : a.objects_) points.push_back(k);
        for (const auto& [k, o] : b.objects_) points.push_back(k);
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        for (const auto& k : points) {
            std::vector<std::string> labels;
            for (const auto& l : a.obj_labels(k)) labels.push_back("L." + l);
            for (const auto& l : b.obj_labels(k)) labels.push_back("R." + l);
            s.set_object(k, a.obj_dim(k) + b.obj_dim(k), std::move(labels));
        }
        for (const auto& k : points) {
            for (int dir = 0; dir < a.n_; ++dir) {
                Lattice k2 = lattice_shift(k, dir);
                std::size_t rows = s.obj_dim(k2), cols = s.obj_dim(k);
                if (rows == 0 || cols == 0) continue;
                Matrix<T> d(rows, cols);
                Matrix<T> da = a.diff(dir, k), db = b.diff(dir, k);
                for (std::size_t i = 0; i < da.rows(); ++i)
                    for (std::size_t j = 0; j < da.cols(); ++j) d.at(i, j) = da.at(i, j);
                for (std::size_t i = 0; i < db.rows(); ++i)
                    for (std::size_t j = 0; j < db.cols(); ++j)
                        d.at(a.obj_dim(k2) + i, a.obj_dim(k) + j) = db.at(i, j);
                s.set_diff(dir, k, std::move(d));
            }
        }
        return s;
    }

    // Relabel direction axes by a permutation: new coordinate p[i] carries
    // what direction i carried before.
    Hypercomplex permute_directions(const std::vector<int>& p) const {
        Hypercomplex out(n_);
        auto apply = [&](const Lattice& k) {
            Lattice r(static_cast<std::size_t>(n_));
            for (int i = 0; i < n_; ++i) r[static_cast<std::size_t>(p[i])] = k[i];
            return r;
        };
        for (const auto& [k, obj] : objects_) out.set_object(apply(k), obj.dim, obj.labels);
        for (const auto& [key, d] : diffs_) out.set_diff(p[key.first], apply(key.second), d);
        return out;
    }

private:
    void check_point(const Lattice& k) const {
        if (static_cast<int>(k.size()) != n_)
            throw std::invalid_argument("lattice point dimension mismatch");
    }

    int n_;
    std::map<Lattice, HObject> objects_;
    std::map<std::pair<int, Lattice>, Matrix<T>> diffs_;
};

// Morphism of hypercomplexes of equal dimension; must commute with every
// differential of source and target.
template <typename T>
struct HyperMap {
    Hypercomplex<T> src, tgt;
    std::map<Lattice, Matrix<T>> comps;

    Matrix<T> comp(const Lattice& k) const {
        auto it = comps.find(k);
        if (it != comps.end()) return it->second;
        return Matrix<T>(tgt.obj_dim(k), src.obj_dim(k));
    }
    void set_comp(const Lattice& k, Matrix<T> m) {
        if (m.rows() != tgt.obj_dim(k) || m.cols() != src.obj_dim(k))
            throw std::invalid_argument("hyper map component shape mismatch");
        if (m.is_zero()) return;
        comps[k] = std::move(m);
    }

    Verdict validate() const {
        if (src.n() != tgt.n()) return Verdict::fail("source/target dimension mismatch");
        std::vector<Lattice> points;
        for (const auto& [k, o] : src.objects()) points.push_back(k);
        for (const auto& [k, o] : tgt.objects()) points.push_back(k);
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        for (const auto& k : points)
            for (int dir = 0; dir < src.n(); ++dir) {
                Matrix<T> lhs = tgt.diff(dir, k) * comp(k);
                Matrix<T> rhs = comp(lattice_shift(k, dir)) * src.diff(dir, k);
                if (!(lhs == rhs))
                    return Verdict::fail("does not commute with d(" + std::to_string(dir + 1) +
                                         ") at " + lattice_to_string(k));
            }
        return Verdict::pass();
    }
};

// ---- total complex ------------------------------------------------------

template <typename T>
struct TotalComplexData {
    Complex<T> complex;
    // lattice point -> (total degree, basis offset of the summand)
    std::map<Lattice, std::pair<int, std::size_t>> placement;
};

// Simple complex s(X)^m = (+)_{k1+...+kn = m} X^k.  The component of the
// differential leaving X^k in direction j carries the sign
// (-1)^(k_1 + ... + k_{j-1}).  Summands are ordered lexicographically in k.
template <typename T>
TotalComplexData<T> total_complex_data(const Hypercomplex<T>& X) {
    TotalComplexData<T> out;
    std::map<int, std::size_t> degree_dims;
    for (const auto& [k, obj] : X.objects()) {
        int m = lattice_total(k);
        out.placement[k] = {m, degree_dims[m]};
        degree_dims[m] += obj.dim;
    }
    for (const auto& [m, dim] : degree_dims) {
        std::vector<std::string> labels;
        for (const auto& [k, obj] : X.objects())
            if (lattice_total(k) == m)
                for (const auto& l : obj.labels) labels.push_back(lattice_to_string(k) + ":" + l);
        out.complex.set_object(m, dim, std::move(labels));
    }
    std::map<int, Matrix<T>> d;
    for (const auto& [m, dim] : degree_dims)
        if (degree_dims.count(m + 1)) d.emplace(m, Matrix<T>(degree_dims[m + 1], dim));
    for (const auto& [key, dk] : X.diffs()) {
        const auto& [dir, k] = key;
        Lattice k2 = lattice_shift(k, dir);
        if (X.obj_dim(k2) == 0) continue;
        int m = lattice_total(k);
        auto it = d.find(m);
        if (it == d.end()) continue;
        int sign_exp = 0;
        for (int i = 0; i < dir; ++i) sign_exp += k[i];
        T sign = (sign_exp % 2 == 0) ? T(1) : T(-1);
        std::size_t roff = out.placement[k2].second, coff = out.placement[k].second;
        for (std::size_t i = 0; i < dk.rows(); ++i)
            for (std::size_t j = 0; j < dk.cols(); ++j)
                it->second.at(roff + i, coff + j) += sign * dk.at(i, j);
    }
    for (auto& [m, dm] : d) out.complex.set_diff(m, std::move(dm));
    return out;
}

template <typename T>
Complex<T> total_complex(const Hypercomplex<T>& X) {
    return total_complex_data(X).complex;
}

// Totalization through a two-step route: directions in `inner` are summed
// first, the remaining directions afterwards with the inner total degree
// counted in front.  Same summands and placements as total_complex_data.
template <typename T>
TotalComplexData<T> total_complex_iterated(const Hypercomplex<T>& X,
                                           const std::vector<int>& inner) {
    std::vector<bool> is_inner(static_cast<std::size_t>(X.n()), false);
    for (int i : inner) is_inner[static_cast<std::size_t>(i)] = true;
    TotalComplexData<T> out;
    std::map<int, std::size_t> degree_dims;
    for (const auto& [k, obj] : X.objects()) {
        int m = lattice_total(k);
        out.placement[k] = {m, degree_dims[m]};
        degree_dims[m] += obj.dim;
    }
    for (const auto& [m, dim] : degree_dims) {
        std::vector<std::string> labels;
        for (const auto& [k, obj] : X.objects())
            if (lattice_total(k) == m)
                for (const auto& l : obj.labels) labels.push_back(lattice_to_string(k) + ":" + l);
        out.complex.set_object(m, dim, std::move(labels));
    }
    std::map<int, Matrix<T>> d;
    for (const auto& [m, dim] : degree_dims)
        if (degree_dims.count(m + 1)) d.emplace(m, Matrix<T>(degree_dims[m + 1], dim));
    for (const auto& [key, dk] : X.diffs()) {
        const auto& [dir, k] = key;
        Lattice k2 = lattice_shift(k, dir);
        if (X.obj_dim(k2) == 0) continue;
        int m = lattice_total(k);
        auto it = d.find(m);
        if (it == d.end()) continue;
        int sign_exp = 0;
        if (is_inner[static_cast<std::size_t>(dir)]) {
            for (int i = 0; i < dir; ++i)
                if (is_inner[static_cast<std::size_t>(i)]) sign_exp += k[static_cast<std::size_t>(i)];
        } else {
            for (int i = 0; i < X.n(); ++i)
                if (is_inner[static_cast<std::size_t>(i)]) sign_exp += k[static_cast<std::size_t>(i)];
            for (int i = 0; i < dir; ++i)
                if (!is_inner[static_cast<std::size_t>(i)]) sign_exp += k[static_cast<std::size_t>(i)];
        }
        T sign = (sign_exp % 2 == 0) ? T(1) : T(-1);
        std::size_t roff = out.placement[k2].second, coff = out.placement[k].second;
        for (std::size_t i = 0; i < dk.rows(); ++i)
            for (std::size_t j = 0; j < dk.cols(); ++j)
                it->second.at(roff + i, coff + j) += sign * dk.at(i, j);
    }
    for (auto& [m, dm] : d) out.complex.set_diff(m, std::move(dm));
    return out;
}

// Diagonal sign identifying the two-step totalization with the direct one:
// eps(k) = (-1)^(sum over inner i, outer j with j < i of k_i k_j).
inline int iterated_total_sign(const Lattice& k, const std::vector<int>& inner, int n) {
    std::vector<bool> is_inner(static_cast<std::size_t>(n), false);
    for (int i : inner) is_inner[static_cast<std::size_t>(i)] = true;
    long long e = 0;
    for (int i = 0; i < n; ++i)
        if (is_inner[static_cast<std::size_t>(i)])
            for (int j = 0; j < i; ++j)
                if (!is_inner[static_cast<std::size_t>(j)])
                    e += static_cast<long long>(k[static_cast<std::size_t>(i)]) *
                         k[static_cast<std::size_t>(j)];
    return (e % 2 == 0) ? 1 : -1;
}

template <typename T>
ChainMap<T> total_map(const HyperMap<T>& f) {
    auto src = total_complex_data(f.src);
    auto tgt = total_complex_data(f.tgt);
    ChainMap<T> out{src.complex, tgt.complex, {}};
    std::map<int, Matrix<T>> comps;
    for (const auto& [k, fk] : f.comps) {
        auto [m, coff] = src.placement.at(k);
        auto [m2, roff] = tgt.placement.at(k);
        if (m != m2) throw std::logic_error("total_map degree mismatch");
        auto it = comps.find(m);
        if (it == comps.end())
            it = comps.emplace(m, Matrix<T>(tgt.complex.dim(m), src.complex.dim(m))).first;
        for (std::size_t i = 0; i < fk.rows(); ++i)
            for (std::size_t j = 0; j < fk.cols(); ++j) it->second.at(roff + i, coff + j) = fk.at(i, j);
    }
    for (auto& [m, c] : comps) out.set_comp(m, std::move(c));
    return out;
}

// ---- section functor and direction cohomology ---------------------------

inline Lattice lattice_drop(const Lattice& k, int dir) {
    Lattice r;
    for (std::size_t i = 0; i < k.size(); ++i)
        if (static_cast<int>(i) != dir) r.push_back(k[i]);
    return r;
}

inline Lattice lattice_insert(const Lattice& k, int dir, int value) {
    Lattice r;
    for (std::size_t i = 0; i <= k.size(); ++i) {
        if (static_cast<int>(i) == dir) r.push_back(value);
        if (i < k.size()) r.push_back(k[i]);
    }
    return r;
}

// The complex of (n-1)-hypercomplexes {X_i^m, d_i^m} in direction `dir`.
template <typename T>
struct SectionComplex {
    int direction = 0;
    std::map<int, Hypercomplex<T>> layers;
    std::map<int, HyperMap<T>> layer_maps;  // layer m -> layer m+1
};

template <typename T>
SectionComplex<T> section_complex(const Hypercomplex<T>& X, int dir) {
    if (dir < 0 || dir >= X.n()) throw std::invalid_argument("direction out of range");
    SectionComplex<T> out;
    out.direction = dir;
    int reduced_n = X.n() == 1 ? 1 : X.n() - 1;
    auto reduced = [&](const Lattice& k) {
        return X.n() == 1 ? Lattice{0} : lattice_drop(k, dir);
    };
    for (const auto& [k, obj] : X.objects()) {
        int m = k[dir];
        auto [it, ins] = out.layers.try_emplace(m, Hypercomplex<T>(reduced_n));
        it->second.set_object(reduced(k), obj.dim, obj.labels);
    }
    for (const auto& [key, d] : X.diffs()) {
        const auto& [ddir, k] = key;
        if (ddir == dir || X.n() == 1) continue;
        int rd = ddir < dir ? ddir : ddir - 1;
        out.layers.at(k[dir]).set_diff(rd, reduced(k), d);
    }
    for (auto it = out.layers.begin(); it != out.layers.end(); ++it) {
        auto next = out.layers.find(it->first + 1);
        if (next == out.layers.end()) continue;
        HyperMap<T> f{it->second, next->second, {}};
        for (const auto& [k, obj] : X.objects()) {
            if (k[dir] != it->first) continue;
            Matrix<T> d = X.diff(dir, k);
            if (!d.is_zero()) f.set_comp(reduced(k), d);
        }
        out.layer_maps.emplace(it->first, std::move(f));
    }
    return out;
}

// Objectwise cohomology of F_dir(X) at layer p, with induced differentials in
// the surviving directions: the (n-1)-hypercomplex H_dir^p(X).
template <typename T>
struct DirectionHomologyLayer {
    Hypercomplex<T> hc;
    std::map<Lattice, Subquotient<T>> sq;  // keyed by the original lattice point
};

template <typename T>
DirectionHomologyLayer<T> direction_cohomology_layer(const Hypercomplex<T>& X, int dir, int p) {
    int reduced_n = X.n() == 1 ? 1 : X.n() - 1;
    DirectionHomologyLayer<T> out{Hypercomplex<T>(reduced_n), {}};
    auto reduced = [&](const Lattice& k) {
        return X.n() == 1 ? Lattice{0} : lattice_drop(k, dir);
    };
    for (const auto& [k, obj] : X.objects()) {
        if (k[dir] != p) continue;
        Matrix<T> z = X.diff(dir, k).kernel();
        Matrix<T> b = X.diff(dir, lattice_shift(k, dir, -1)).image();
        Subquotient<T> sq(obj.dim, z, b);
        if (sq.dim() > 0) {
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < sq.dim(); ++i)
                labels.push_back("h" + lattice_to_string(k) + "_" + std::to_string(i));
            out.hc.set_object(reduced(k), sq.dim(), std::move(labels));
        }
        out.sq.emplace(k, std::move(sq));
    }
    for (const auto& [k, sq] : out.sq) {
        if (sq.dim() == 0) continue;
        for (int j = 0; j < X.n(); ++j) {
            if (j == dir) continue;
            Lattice k2 = lattice_shift(k, j);
            auto it = out.sq.find(k2);
            if (it == out.sq.end() || it->second.dim() == 0) continue;
            int rj = j < dir ? j : j - 1;
            if (X.n() == 1) rj = 0;
            out.hc.set_diff(rj, reduced(k), sq.induced(X.diff(j, k), it->second));
        }
    }
    return out;
}

template <typename T>
Hypercomplex<T> direction_cohomology(const Hypercomplex<T>& X, int dir, int p) {
    return direction_cohomology_layer(X, dir, p).hc;
}

// H_dir(X): same dimension n, all differentials in `dir` replaced by zero,
// objects replaced by the direction-dir cohomology at their own layer.
template <typename T>
struct DirectionHomology {
    Hypercomplex<T> hc;
    std::map<Lattice, Subquotient<T>> sq;
};

template <typename T>
DirectionHomology<T> direction_homology(const Hypercomplex<T>& X, int dir) {
    DirectionHomology<T> out{Hypercomplex<T>(X.n()), {}};
    for (const auto& [k, obj] : X.objects()) {
        Matrix<T> z = X.diff(dir, k).kernel();
        Matrix<T> b = X.diff(dir, lattice_shift(k, dir, -1)).image();
        Subquotient<T> sq(obj.dim, z, b);
        if (sq.dim() > 0) {
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < sq.dim(); ++i)
                labels.push_back("h" + lattice_to_string(k) + "_" + std::to_string(i));
            out.hc.set_object(k, sq.dim(), std::move(labels));
        }
        out.sq.emplace(k, std::move(sq));
    }
    for (const auto& [k, sq] : out.sq) {
        if (sq.dim() == 0) continue;
        for (int j = 0; j < X.n(); ++j) {
            if (j == dir) continue;
            Lattice k2 = lattice_shift(k, j);
            auto it = out.sq.find(k2);
            if (it == out.sq.end() || it->second.dim() == 0) continue;
            out.hc.set_diff(j, k, sq.induced(X.diff(j, k), it->second));
        }
    }
    return out;
}

// f : X -> Y transported through H_dir on both sides.
template <typename T>
HyperMap<T> induced_on_direction_homology(const HyperMap<T>& f, const DirectionHomology<T>& hx,
                                          const DirectionHomology<T>& hy) {
    HyperMap<T> g{hx.hc, hy.hc, {}};
    for (const auto& [k, sq] : hx.sq) {
        if (sq.dim() == 0) continue;
        auto it = hy.sq.find(k);
        if (it == hy.sq.end() || it->second.dim() == 0) continue;
        g.set_comp(k, sq.induced(f.comp(k), it->second));
    }
    return g;
}

// H_1(H_2(... H_n(X) ...)) together with the transported map of f.
template <typename T>
HyperMap<T> iterated_direction_homology_map(const HyperMap<T>& f) {
    HyperMap<T> cur = f;
    for (int dir = cur.src.n() - 1; dir >= 0; --dir) {
        auto hx = direction_homology(cur.src, dir);
        auto hy = direction_homology(cur.tgt, dir);
        cur = induced_on_direction_homology(cur, hx, hy);
    }
    return cur;
}

// ---- cube ---------------------------------------------------------------

// Unit-cube hypercomplex from corner data on {0,1}^n; corner (0,...,0) sits
// at total degree 0.  Maps must commute on every 2-face.
template <typename T>
Hypercomplex<T> cube(int n, const std::map<Lattice, HObject>& corners,
                     const std::map<std::pair<int, Lattice>, Matrix<T>>& maps) {
    Hypercomplex<T> X(n);
    for (const auto& [k, obj] : corners) {
        for (int v : k)
            if (v != 0 && v != 1) throw std::invalid_argument("cube corner outside {0,1}^n");
        X.set_object(k, obj.dim, obj.labels);
    }
    for (const auto& [key, m] : maps) X.set_diff(key.first, key.second, m);
    for (const auto& [k, obj] : corners)
        for (int i = 0; i < n; ++i) {
            if (k[i] != 0) continue;
            for (int j = i + 1; j < n; ++j) {
                if (k[j] != 0) continue;
                Matrix<T> ij = X.diff(j, lattice_shift(k, i)) * X.diff(i, k);
                Matrix<T> ji = X.diff(i, lattice_shift(k, j)) * X.diff(j, k);
                if (!(ij == ji))
                    throw std::invalid_argument("cube face (" + std::to_string(i + 1) + "," +
                                                std::to_string(j + 1) + ") at " +
                                                lattice_to_string(k) + " does not commute");
            }
        }
    return X;
}

// ---- theorem-shaped checkers --------------------------------------------

struct QuasiHypReport {
    bool hypothesis_holds = false;
    bool conclusion_holds = false;
    // hypothesis => conclusion is the asserted implication
    bool implication_holds() const { return !hypothesis_holds || conclusion_holds; }
};

// hypothesis: f induces isomorphisms H_1(H_2(...H_n(.))) objectwise.
// conclusion: the total map is a quasi-isomorphism.
template <typename T>
QuasiHypReport check_quasihyp(const HyperMap<T>& f) {
    Verdict v = f.validate();
    if (!v.ok) throw std::invalid_argument("check_quasihyp: " + v.detail);
    QuasiHypReport rep;
    HyperMap<T> h = iterated_direction_homology_map(f);
    bool iso = true;
    std::vector<Lattice> points;
    for (const auto& [k, o] : h.src.objects()) points.push_back(k);
    for (const auto& [k, o] : h.tgt.objects()) points.push_back(k);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (const auto& k : points) {
        Matrix<T> m = h.comp(k);
        if (m.rows() != m.cols() || !m.is_invertible()) {
            iso = false;
            break;
        }
    }
    rep.hypothesis_holds = iso;
    rep.conclusion_holds = is_quasi_iso(total_map(f));
    return rep;
}

struct AcyclicDirectionReport {
    bool has_exact_direction = false;
    int direction = -1;  // 0-based, first exact direction found
    bool total_acyclic = false;
    // with an exact direction present, the total complex must be acyclic
    bool consistent() const { return !has_exact_direction || total_acyclic; }
};

template <typename T>
AcyclicDirectionReport check_acyclic_direction(const Hypercomplex<T>& X) {
    AcyclicDirectionReport rep;
    for (int dir = 0; dir < X.n() && !rep.has_exact_direction; ++dir) {
        bool exact = true;
        for (const auto& [k, obj] : X.objects()) {
            Matrix<T> z = X.diff(dir, k).kernel();
            Matrix<T> b = X.diff(dir, lattice_shift(k, dir, -1)).image();
            if (Subquotient<T>(obj.dim, z, b).dim() > 0) {
                exact = false;
                break;
            }
        }
        if (exact) {
            rep.has_exact_direction = true;
            rep.direction = dir;
        }
    }
    rep.total_acyclic = total_complex(X).is_acyclic();
    return rep;
}

}  // namespace vmulti
