#pragma once

// Exact phase-one simplex over GMP rationals. Used only to decide whether a
// point lies in the convex hull of a finite point set, so the problem sizes
// stay tiny (a few dozen rows, at most a few thousand columns).

#include "szego/exact.hpp"

#include <vector>

namespace szego::lp {

/// Decides feasibility of { x >= 0 : A x = b } exactly (Bland's rule, so no cycling).
/// On success `solution` (if given) receives one feasible x.
inline bool feasible(const std::vector<std::vector<BigRational>>& A, const std::vector<BigRational>& b,
                     std::vector<BigRational>* solution = nullptr) {
    const std::size_t m = A.size();
    const std::size_t n = m == 0 ? 0 : A.front().size();
    if (b.size() != m) throw std::invalid_argument("lp::feasible: dimension mismatch");
    // Tableau columns: n structural, m artificial, then the right-hand side.
    const std::size_t width = n + m + 1;
    std::vector<std::vector<BigRational>> t(m + 1, std::vector<BigRational>(width));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const bool flip = b[i] < 0;
        for (std::size_t j = 0; j < n; ++j) t[i][j] = flip ? BigRational(-A[i][j]) : A[i][j];
        t[i][n + i] = 1;
        t[i][width - 1] = flip ? BigRational(-b[i]) : b[i];
        basis[i] = n + i;
    }
    // Objective row: minimise the sum of artificials, expressed in reduced form.
    for (std::size_t j = 0; j < width; ++j) {
        if (j >= n && j < n + m) continue;
        BigRational s = 0;
        for (std::size_t i = 0; i < m; ++i) s += t[i][j];
        t[m][j] = -s;
    }
    while (true) {
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j)
            if (t[m][j] < 0) {
                enter = j;
                break;
            }
        if (enter == width) break;
        std::size_t leave = m;
        BigRational best;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= 0) continue;
            BigRational ratio = t[i][width - 1] / t[i][enter];
            if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave == m) break;  // unbounded direction cannot occur in phase one
        const BigRational piv = t[leave][enter];
        for (auto& v : t[leave]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave || t[i][enter] == 0) continue;
            const BigRational f = t[i][enter];
            for (std::size_t j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
    const bool ok = t[m][width - 1] == 0;
    if (ok && solution) {
        solution->assign(n, BigRational(0));
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] < n) (*solution)[basis[i]] = t[i][width - 1];
    }
    return ok;
}

/// True iff `point` is a convex combination of `vertices`.
inline bool in_convex_hull(const std::vector<std::vector<Rational>>& vertices, const std::vector<Rational>& point) {
    if (vertices.empty()) return false;
    const std::size_t dim = point.size();
    std::vector<std::vector<BigRational>> A(dim + 1, std::vector<BigRational>(vertices.size()));
    std::vector<BigRational> b(dim + 1);
    for (std::size_t j = 0; j < vertices.size(); ++j) {
        if (vertices[j].size() != dim) throw std::invalid_argument("in_convex_hull: dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i)
            A[i][j] = BigRational(vertices[j][i].numerator(), vertices[j][i].denominator());
        A[dim][j] = 1;
    }
    for (std::size_t i = 0; i < dim; ++i) b[i] = BigRational(point[i].numerator(), point[i].denominator());
    b[dim] = 1;
    return feasible(A, b);
}

}  // namespace szego::lp
