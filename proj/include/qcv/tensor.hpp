#pragma once

#include <functional>
#include <vector>

#include "qcv/ratfun.hpp"

namespace qcv {

// Square matrix over a commutative-ring element type.  T needs +, -, *,
// is_zero(), and an eq(a,b) free function; products keep left-to-right
// operand order so operator-valued entries work too.
template <typename T>
class RingMatrix {
public:
    RingMatrix(int dim, const T& fill) : dim_(dim), e_(static_cast<size_t>(dim) * dim, fill) {}

    int dim() const { return dim_; }
    T& at(int i, int j) { return e_[static_cast<size_t>(i) * dim_ + j]; }
    const T& at(int i, int j) const { return e_[static_cast<size_t>(i) * dim_ + j]; }

    static RingMatrix identity(int dim, const T& zero, const T& one) {
        RingMatrix m(dim, zero);
        for (int i = 0; i < dim; ++i) m.at(i, i) = one;
        return m;
    }

    RingMatrix operator+(const RingMatrix& o) const {
        RingMatrix r = *this;
        for (size_t k = 0; k < e_.size(); ++k) r.e_[k] = r.e_[k] + o.e_[k];
        return r;
    }
    RingMatrix operator-(const RingMatrix& o) const {
        RingMatrix r = *this;
        for (size_t k = 0; k < e_.size(); ++k) r.e_[k] = r.e_[k] - o.e_[k];
        return r;
    }

    RingMatrix mul(const RingMatrix& o, const T& zero) const {
        RingMatrix r(dim_, zero);
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < dim_; ++k) {
                const T& a = at(i, k);
                if (a.is_zero()) continue;
                for (int j = 0; j < dim_; ++j) {
                    const T& b = o.at(k, j);
                    if (b.is_zero()) continue;
                    r.at(i, j) = r.at(i, j) + a * b;
                }
            }
        return r;
    }

    RingMatrix scale(const T& c) const {
        RingMatrix r = *this;
        for (auto& x : r.e_) x = x * c;
        return r;
    }

    template <typename F>
    RingMatrix map(F&& f) const {
        RingMatrix r = *this;
        for (auto& x : r.e_) x = f(x);
        return r;
    }

private:
    int dim_;
    std::vector<T> e_;
};

// Flattening convention: legs are row-major with the first leg most
// significant; a two-leg index (a,b) on legs of size n is a*n+b.
template <typename T>
RingMatrix<T> kron(const RingMatrix<T>& A, const RingMatrix<T>& B, const T& zero) {
    int da = A.dim(), db = B.dim();
    RingMatrix<T> r(da * db, zero);
    for (int ia = 0; ia < da; ++ia)
        for (int ja = 0; ja < da; ++ja) {
            if (A.at(ia, ja).is_zero()) continue;
            for (int ib = 0; ib < db; ++ib)
                for (int jb = 0; jb < db; ++jb) {
                    if (B.at(ib, jb).is_zero()) continue;
                    r.at(ia * db + ib, ja * db + jb) = A.at(ia, ja) * B.at(ib, jb);
                }
        }
    return r;
}

// Embed a two-leg operator R (legs of size n) into legs (li,lj) of an m-leg
// space, identity elsewhere.  Legs are numbered from 1.
template <typename T>
RingMatrix<T> embed(const RingMatrix<T>& R, int n, int li, int lj, int m, const T& zero,
                    const T& one) {
    if (!(1 <= li && li < lj && lj <= m)) throw QcvError("leg index out of range");
    int dim = 1;
    for (int k = 0; k < m; ++k) dim *= n;
    RingMatrix<T> r(dim, zero);
    std::vector<int> row(static_cast<size_t>(m)), col(static_cast<size_t>(m));
    for (int I = 0; I < dim; ++I) {
        int x = I;
        for (int k = m - 1; k >= 0; --k) {
            row[static_cast<size_t>(k)] = x % n;
            x /= n;
        }
        for (int J = 0; J < dim; ++J) {
            int y = J;
            for (int k = m - 1; k >= 0; --k) {
                col[static_cast<size_t>(k)] = y % n;
                y /= n;
            }
            bool diag = true;
            for (int k = 0; k < m; ++k) {
                if (k == li - 1 || k == lj - 1) continue;
                if (row[static_cast<size_t>(k)] != col[static_cast<size_t>(k)]) {
                    diag = false;
                    break;
                }
            }
            if (!diag) continue;
            int ra = row[static_cast<size_t>(li - 1)], rb = row[static_cast<size_t>(lj - 1)];
            int ca = col[static_cast<size_t>(li - 1)], cb = col[static_cast<size_t>(lj - 1)];
            const T& v = R.at(ra * n + rb, ca * n + cb);
            if (!v.is_zero()) r.at(I, J) = v;
        }
    }
    return r;
}

// P R P with P the flip of two equal legs of size n.
template <typename T>
RingMatrix<T> swap_legs(const RingMatrix<T>& R, int n) {
    RingMatrix<T> r = R;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    r.at(b * n + a, d * n + c) = R.at(a * n + b, c * n + d);
    return r;
}

template <typename T, typename Eq>
bool mat_eq(const RingMatrix<T>& A, const RingMatrix<T>& B, Eq&& eq) {
    if (A.dim() != B.dim()) return false;
    for (int i = 0; i < A.dim(); ++i)
        for (int j = 0; j < A.dim(); ++j)
            if (!eq(A.at(i, j), B.at(i, j))) return false;
    return true;
}

template <typename T, typename IsZero>
bool is_diagonal(const RingMatrix<T>& A, IsZero&& zero) {
    for (int i = 0; i < A.dim(); ++i)
        for (int j = 0; j < A.dim(); ++j)
            if (i != j && !zero(A.at(i, j))) return false;
    return true;
}

template <typename T, typename IsZero, typename IsOne>
bool is_unit_lower(const RingMatrix<T>& A, IsZero&& zero, IsOne&& one) {
    for (int i = 0; i < A.dim(); ++i)
        for (int j = 0; j < A.dim(); ++j) {
            if (i == j && !one(A.at(i, j))) return false;
            if (i < j && !zero(A.at(i, j))) return false;
        }
    return true;
}

template <typename T, typename IsZero, typename IsOne>
bool is_unit_upper(const RingMatrix<T>& A, IsZero&& zero, IsOne&& one) {
    for (int i = 0; i < A.dim(); ++i)
        for (int j = 0; j < A.dim(); ++j) {
            if (i == j && !one(A.at(i, j))) return false;
            if (i > j && !zero(A.at(i, j))) return false;
        }
    return true;
}

enum class GaussOrder { LDU, UDL };

template <typename T>
struct GaussFactors {
    RingMatrix<T> lower, diag, upper;
    GaussOrder order;

    RingMatrix<T> recombine(const T& zero) const {
        if (order == GaussOrder::LDU) return lower.mul(diag, zero).mul(upper, zero);
        return upper.mul(diag, zero).mul(lower, zero);
    }
};

// Triangular decomposition by elimination.  `invert` must return the
// reciprocal of a pivot or throw SingularPivot.
template <typename T, typename Invert>
GaussFactors<T> gauss_decompose(const RingMatrix<T>& M, GaussOrder order, const T& zero,
                                const T& one, Invert&& invert) {
    int n = M.dim();
    RingMatrix<T> A = M;
    RingMatrix<T> L = RingMatrix<T>::identity(n, zero, one);
    RingMatrix<T> U = RingMatrix<T>::identity(n, zero, one);
    RingMatrix<T> D = RingMatrix<T>::identity(n, zero, one);
    if (order == GaussOrder::LDU) {
        for (int k = 0; k < n; ++k) {
            T piv = A.at(k, k);
            if (piv.is_zero()) throw SingularPivot("zero pivot at " + std::to_string(k));
            T pinv = invert(piv);
            for (int i = k + 1; i < n; ++i) {
                if (A.at(i, k).is_zero()) continue;
                T f = A.at(i, k) * pinv;
                L.at(i, k) = f;
                for (int j = k; j < n; ++j) A.at(i, j) = A.at(i, j) - f * A.at(k, j);
            }
        }
        for (int k = 0; k < n; ++k) {
            D.at(k, k) = A.at(k, k);
            T pinv = invert(A.at(k, k));
            for (int j = k + 1; j < n; ++j) U.at(k, j) = pinv * A.at(k, j);
        }
    } else {
        for (int k = n - 1; k >= 0; --k) {
            T piv = A.at(k, k);
            if (piv.is_zero()) throw SingularPivot("zero pivot at " + std::to_string(k));
            T pinv = invert(piv);
            for (int i = k - 1; i >= 0; --i) {
                if (A.at(i, k).is_zero()) continue;
                T f = A.at(i, k) * pinv;
                U.at(i, k) = f;
                for (int j = 0; j <= k; ++j) A.at(i, j) = A.at(i, j) - f * A.at(k, j);
            }
        }
        for (int k = 0; k < n; ++k) {
            D.at(k, k) = A.at(k, k);
            T pinv = invert(A.at(k, k));
            for (int j = 0; j < k; ++j) L.at(k, j) = pinv * A.at(k, j);
        }
    }
    return GaussFactors<T>{std::move(L), std::move(D), std::move(U), order};
}

} // namespace qcv
