#pragma once

/** @file
 * Matrices viewed as matroids: rank and dual rank, the dual (circuit)
 * matrix, the graph-breaking exponent, power counting polytope membership
 * and vertices, Hoelder constants, unimodularity and lattice counting.
 *
 * Column subsets are passed as index vectors at the public boundary and
 * handled internally as bit masks, which caps exhaustive searches at
 * E <= 20 columns (kMaxSubsetColumns).
 */

#include "szego/exact.hpp"
#include "szego/lp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace szego {

inline constexpr std::size_t kMaxSubsetColumns = 20;

using ColumnSet = std::vector<std::size_t>;
using ExponentVector = std::vector<Rational>;

enum class MatrixKind { graph_incidence, general };
enum class PcpCase { C1_torus, C2_counting, C3_lebesgue };

inline std::string to_string(PcpCase c) {
    switch (c) {
        case PcpCase::C1_torus: return "C1";
        case PcpCase::C2_counting: return "C2";
        case PcpCase::C3_lebesgue: return "C3";
    }
    return "?";
}

inline PcpCase parse_pcp_case(const std::string& s) {
    if (s == "C1" || s == "torus" || s == "C1-torus") return PcpCase::C1_torus;
    if (s == "C2" || s == "counting" || s == "C2-counting") return PcpCase::C2_counting;
    if (s == "C3" || s == "lebesgue" || s == "C3-lebesgue") return PcpCase::C3_lebesgue;
    throw std::invalid_argument("unknown PCP case: " + s);
}

/// Integer V x E matrix with its matroid tag. Graph incidence columns hold
/// +1 at the tail and -1 at the head of a directed, loop-free edge.
class IncidenceLikeMatrix {
public:
    IncidenceLikeMatrix() = default;
    IncidenceLikeMatrix(IntMatrix entries, MatrixKind kind) : a_(std::move(entries)), kind_(kind) {
        if (kind_ == MatrixKind::graph_incidence) {
            for (std::size_t e = 0; e < a_.cols(); ++e) {
                int plus = 0, minus = 0;
                for (std::size_t v = 0; v < a_.rows(); ++v) {
                    const auto x = a_(v, e);
                    if (x == 1) ++plus;
                    else if (x == -1) ++minus;
                    else if (x != 0) throw std::invalid_argument("incidence entry outside {-1,0,1}");
                }
                if (plus != 1 || minus != 1)
                    throw std::invalid_argument("incidence column " + std::to_string(e) +
                                                " must hold exactly one +1 and one -1");
            }
        }
    }

    static IncidenceLikeMatrix general(const std::vector<std::vector<std::int64_t>>& rows) {
        return {IntMatrix::from_rows(rows), MatrixKind::general};
    }

    /// Incidence matrix of a directed multigraph; loops are rejected.
    static IncidenceLikeMatrix from_edges(std::size_t V, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        IntMatrix a(V, edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [u, v] = edges[e];
            if (u >= V || v >= V) throw std::out_of_range("edge endpoint out of range");
            if (u == v) throw std::invalid_argument("loops are not allowed");
            a(u, e) = 1;
            a(v, e) = -1;
        }
        return {std::move(a), MatrixKind::graph_incidence};
    }

    std::size_t V() const noexcept { return a_.rows(); }
    std::size_t E() const noexcept { return a_.cols(); }
    MatrixKind kind() const noexcept { return kind_; }
    const IntMatrix& entries() const noexcept { return a_; }

    /// Endpoints (tail, head) of column e; graph kind only.
    std::pair<std::size_t, std::size_t> endpoints(std::size_t e) const {
        std::size_t tail = 0, head = 0;
        for (std::size_t v = 0; v < V(); ++v) {
            if (a_(v, e) == 1) tail = v;
            if (a_(v, e) == -1) head = v;
        }
        return {tail, head};
    }

private:
    IntMatrix a_;
    MatrixKind kind_ = MatrixKind::general;
};

// ---------------------------------------------------------------------------
// subsets and ranks

namespace detail {

using Mask = std::uint32_t;

inline Mask to_mask(const ColumnSet& A, std::size_t E) {
    if (E > 32) throw std::length_error("too many columns for mask arithmetic");
    Mask m = 0;
    for (auto j : A) {
        if (j >= E) throw std::out_of_range("column index " + std::to_string(j) + " out of range");
        m |= Mask(1) << j;
    }
    return m;
}

inline ColumnSet from_mask(Mask m, std::size_t E) {
    ColumnSet out;
    for (std::size_t j = 0; j < E; ++j)
        if (m >> j & 1U) out.push_back(j);
    return out;
}

inline Mask full_mask(std::size_t E) { return E >= 32 ? ~Mask(0) : (Mask(1) << E) - 1; }

struct UnionFind {
    std::vector<std::size_t> p;
    std::size_t components;
    explicit UnionFind(std::size_t n) : p(n), components(n) { std::iota(p.begin(), p.end(), 0); }
    std::size_t find(std::size_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        --components;
        return true;
    }
};

inline std::size_t rank_mask(const IncidenceLikeMatrix& M, Mask A) {
    if (M.kind() == MatrixKind::graph_incidence) {
        UnionFind uf(M.V());
        for (std::size_t e = 0; e < M.E(); ++e)
            if (A >> e & 1U) {
                const auto [u, v] = M.endpoints(e);
                uf.unite(u, v);
            }
        return M.V() - uf.components;
    }
    return rank(M.entries().select_columns(from_mask(A, M.E())));
}

/// Table of r(A) for every mask A (2^E entries).
inline std::vector<std::uint8_t> rank_table(const IncidenceLikeMatrix& M) {
    const std::size_t E = M.E();
    if (E > kMaxSubsetColumns) throw std::length_error("exhaustive subset search capped at E <= 20");
    std::vector<std::uint8_t> r(std::size_t(1) << E);
    if (M.kind() == MatrixKind::graph_incidence) {
        std::vector<std::pair<std::size_t, std::size_t>> ends(E);
        for (std::size_t e = 0; e < E; ++e) ends[e] = M.endpoints(e);
        for (Mask A = 0; A < r.size(); ++A) {
            UnionFind uf(M.V());
            for (std::size_t e = 0; e < E; ++e)
                if (A >> e & 1U) uf.unite(ends[e].first, ends[e].second);
            r[A] = static_cast<std::uint8_t>(M.V() - uf.components);
        }
    } else {
        for (Mask A = 0; A < r.size(); ++A) r[A] = static_cast<std::uint8_t>(rank_mask(M, A));
    }
    return r;
}

inline Rational sum_over(const ExponentVector& z, Mask A, bool complement_values) {
    Rational s = 0;
    for (std::size_t j = 0; j < z.size(); ++j)
        if (A >> j & 1U) s += complement_values ? Rational(1) - z[j] : z[j];
    return s;
}

inline void validate_z(const IncidenceLikeMatrix& M, const ExponentVector& z) {
    if (z.size() != M.E()) throw std::invalid_argument("exponent vector length differs from column count");
    for (const auto& v : z)
        if (v < 0 || v > 1) throw std::invalid_argument("exponent entries must lie in [0,1]");
}

}  // namespace detail

/// Rank over the rationals of the columns in A.
inline std::size_t rank(const IncidenceLikeMatrix& M, const ColumnSet& A) {
    return detail::rank_mask(M, detail::to_mask(A, M.E()));
}

inline std::size_t full_rank(const IncidenceLikeMatrix& M) { return rank(M.entries()); }

/// co(M) = V - r(M); the number of weakly connected components for graphs.
inline std::size_t corank(const IncidenceLikeMatrix& M) { return M.V() - full_rank(M); }

/// Dual rank r*(A) = |A| - r(M) + r(complement of A).
inline std::size_t dual_rank(const IncidenceLikeMatrix& M, const ColumnSet& A) {
    const auto mask = detail::to_mask(A, M.E());
    const auto comp = detail::full_mask(M.E()) & ~mask;
    return std::popcount(mask) + detail::rank_mask(M, comp) - full_rank(M);
}

/// co(M - A) = V - r(columns outside A).
inline std::size_t components_after_removal(const IncidenceLikeMatrix& M, const ColumnSet& A) {
    const auto mask = detail::to_mask(A, M.E());
    return M.V() - detail::rank_mask(M, detail::full_mask(M.E()) & ~mask);
}

// ---------------------------------------------------------------------------
// dual matrix

/// Circuit matrix together with the complementary rows used by the change
/// of variables lambda = y * Mstar + u * N.
struct DualMatrix {
    RationalMatrix Mstar;              ///< C x E, rows span the orthogonal complement of the rows of M
    RationalMatrix N;                  ///< r(M) x E, with Mtilde * N^T = identity
    IntMatrix integer;                 ///< Mstar with each row scaled to a primitive integer vector
    std::vector<std::size_t> rows;     ///< independent rows of M used (Mtilde)
    std::vector<std::size_t> basis;    ///< column basis of Mtilde
    std::vector<std::size_t> nonbasis; ///< the C remaining columns; Mstar restricted to them is the identity
    std::size_t C() const noexcept { return Mstar.rows(); }
    bool is_integral() const {
        for (std::size_t i = 0; i < Mstar.rows(); ++i)
            for (std::size_t j = 0; j < Mstar.cols(); ++j)
                if (Mstar(i, j).denominator() != 1) return false;
        return true;
    }
};

/// Greedy maximal set of independent rows of M, in index order.
inline std::vector<std::size_t> independent_rows(const IntMatrix& a) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto trial = chosen;
        trial.push_back(i);
        if (rank(a.select_rows(trial)) == trial.size()) chosen = std::move(trial);
    }
    return chosen;
}

/// Greedy column basis in index order (a Kruskal spanning forest for graphs).
inline std::vector<std::size_t> greedy_column_basis(const IntMatrix& a) {
    std::vector<std::size_t> chosen;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        auto trial = chosen;
        trial.push_back(j);
        if (rank(a.select_columns(trial)) == trial.size()) chosen = std::move(trial);
    }
    return chosen;
}

inline DualMatrix dual_matrix(const IncidenceLikeMatrix& M) {
    DualMatrix D;
    const std::size_t E = M.E();
    D.rows = independent_rows(M.entries());
    const IntMatrix Mt = M.entries().select_rows(D.rows);
    const std::size_t r = D.rows.size();
    D.basis = greedy_column_basis(Mt);
    for (std::size_t j = 0, b = 0; j < E; ++j) {
        if (b < D.basis.size() && D.basis[b] == j) ++b;
        else D.nonbasis.push_back(j);
    }
    const std::size_t C = D.nonbasis.size();
    // B = [P; Mtilde] where P selects the nonbasis coordinates; G = B^{-1}.
    RationalMatrix B(E, E);
    for (std::size_t c = 0; c < C; ++c) B(c, D.nonbasis[c]) = 1;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < E; ++j) B(C + i, j) = Mt(i, j);
    const RationalMatrix G = E == 0 ? RationalMatrix() : inverse(B);
    D.Mstar = RationalMatrix(C, E);
    D.N = RationalMatrix(r, E);
    for (std::size_t j = 0; j < E; ++j) {
        for (std::size_t c = 0; c < C; ++c) D.Mstar(c, j) = G(j, c);
        for (std::size_t i = 0; i < r; ++i) D.N(i, j) = G(j, C + i);
    }
    D.integer = IntMatrix(C, E);
    for (std::size_t c = 0; c < C; ++c) {
        const auto row = primitive_integer_row(D.Mstar.row(c));
        for (std::size_t j = 0; j < E; ++j) D.integer(c, j) = row[j];
    }
    return D;
}

/// The dual matroid as a matrix in its own right (general kind).
inline IncidenceLikeMatrix dual_as_matrix(const IncidenceLikeMatrix& M) {
    return {dual_matrix(M).integer, MatrixKind::general};
}

// ---------------------------------------------------------------------------
// graph-breaking exponent

struct AlphaReport {
    Rational alpha;                ///< the exponent (discrete: both formulations agree)
    Rational alpha_removal_form;   ///< max_A [co(M-A) - sum_A (1 - z)] (discrete only)
    ColumnSet maximiser;           ///< an optimal removal set (discrete only)
    bool discrete = true;
};

/// Discrete case (C1 torus): co(M) + max_A [sum_A z - r*(A)], cross-checked
/// against max_A [co(M-A) - sum_A (1-z)]. Continuous case (C3 Lebesgue):
/// co(M) + (sum z - C)_+. C2 has no exponent of its own and is rejected.
inline AlphaReport alpha_exponent_report(const IncidenceLikeMatrix& M, const ExponentVector& z, PcpCase pcase) {
    detail::validate_z(M, z);
    const std::size_t E = M.E();
    const std::size_t rM = full_rank(M);
    const auto co = static_cast<std::int64_t>(M.V() - rM);
    AlphaReport rep;
    if (pcase == PcpCase::C2_counting)
        throw std::invalid_argument("alpha_exponent is defined for the torus (C1) and Lebesgue (C3) cases");
    if (pcase == PcpCase::C3_lebesgue) {
        const auto C = static_cast<std::int64_t>(E - rM);
        Rational s = detail::sum_over(z, detail::full_mask(E), false) - C;
        rep.alpha = Rational(co) + (s > 0 ? s : Rational(0));
        rep.alpha_removal_form = rep.alpha;
        rep.discrete = false;
        return rep;
    }
    if (E > kMaxSubsetColumns)
        throw std::length_error("alpha_exponent: exhaustive search capped at E <= 20; use the continuous lower bound");
    const auto r = detail::rank_table(M);
    const detail::Mask full = detail::full_mask(E);
    std::optional<Rational> best1, best2;
    detail::Mask arg = 0;
    for (detail::Mask A = 0; A <= full; ++A) {
        const auto comp = full & ~A;
        const auto rstar = static_cast<std::int64_t>(std::popcount(A)) - static_cast<std::int64_t>(rM) + r[comp];
        const Rational v1 = detail::sum_over(z, A, false) - rstar;
        if (!best1 || v1 > *best1) {
            best1 = v1;
            arg = A;
        }
        const Rational v2 = Rational(static_cast<std::int64_t>(M.V()) - r[comp]) - detail::sum_over(z, A, true);
        if (!best2 || v2 > *best2) best2 = v2;
        if (A == full) break;
    }
    rep.alpha = Rational(co) + *best1;
    rep.alpha_removal_form = *best2;
    rep.maximiser = detail::from_mask(arg, E);
    if (rep.alpha != rep.alpha_removal_form)
        throw std::logic_error("alpha formulations disagree: " + to_string(rep.alpha) + " vs " +
                               to_string(rep.alpha_removal_form));
    return rep;
}

inline Rational alpha_exponent(const IncidenceLikeMatrix& M, const ExponentVector& z, PcpCase pcase) {
    return alpha_exponent_report(M, z, pcase).alpha;
}

// ---------------------------------------------------------------------------
// power counting polytope

struct PcpResult {
    bool member = true;
    std::optional<ColumnSet> witness;  ///< a violating subset when member == false
    std::string violated;              ///< "c1", "c2" or "sum"
};

inline PcpResult pcp_membership(const IncidenceLikeMatrix& M, const ExponentVector& z, PcpCase pcase) {
    detail::validate_z(M, z);
    const std::size_t E = M.E();
    if (E > kMaxSubsetColumns) throw std::length_error("pcp_membership: capped at E <= 20");
    const auto r = detail::rank_table(M);
    const detail::Mask full = detail::full_mask(E);
    const std::int64_t rM = r[full];
    PcpResult res;
    if (pcase == PcpCase::C3_lebesgue && detail::sum_over(z, full, false) != Rational(rM)) {
        res.member = false;
        res.witness = detail::from_mask(full, E);
        res.violated = "sum";
        return res;
    }
    for (detail::Mask A = 0;; ++A) {
        bool bad = false;
        if (pcase == PcpCase::C2_counting) {
            const std::int64_t rstar = std::popcount(A) - rM + r[full & ~A];
            bad = detail::sum_over(z, A, true) > rstar;
        } else {
            bad = detail::sum_over(z, A, false) > std::int64_t(r[A]);
        }
        if (bad) {
            res.member = false;
            res.witness = detail::from_mask(A, E);
            res.violated = pcase == PcpCase::C2_counting ? "c2" : "c1";
            return res;
        }
        if (A == full) break;
    }
    return res;
}

/// The condition under which J_T / T^{d co(M)} has a finite nonzero limit:
/// sum_A z <= r*(A) for all A (discrete) or sum z <= C (continuous).
inline bool szego_condition(const IncidenceLikeMatrix& M, const ExponentVector& z, bool discrete) {
    detail::validate_z(M, z);
    const std::size_t E = M.E();
    const std::int64_t rM = full_rank(M);
    if (!discrete) return detail::sum_over(z, detail::full_mask(E), false) <= std::int64_t(E) - rM;
    const auto r = detail::rank_table(M);
    const detail::Mask full = detail::full_mask(E);
    for (detail::Mask A = 0;; ++A) {
        const std::int64_t rstar = std::popcount(A) - rM + r[full & ~A];
        if (detail::sum_over(z, A, false) > rstar) return false;
        if (A == full) break;
    }
    return true;
}

/// 0/1 vertices: independent sets (C1), spanning sets (C2), bases (C3).
inline std::vector<ExponentVector> pcp_vertices(const IncidenceLikeMatrix& M, PcpCase pcase) {
    const std::size_t E = M.E();
    if (E > kMaxSubsetColumns) throw std::length_error("pcp_vertices: capped at E <= 20");
    const auto r = detail::rank_table(M);
    const detail::Mask full = detail::full_mask(E);
    const std::size_t rM = r[full];
    std::vector<ExponentVector> out;
    for (detail::Mask A = 0;; ++A) {
        const std::size_t k = std::popcount(A);
        bool take = false;
        switch (pcase) {
            case PcpCase::C1_torus: take = r[A] == k; break;
            case PcpCase::C2_counting: take = r[A] == rM; break;
            case PcpCase::C3_lebesgue: take = r[A] == k && k == rM; break;
        }
        if (take) {
            ExponentVector z(E, Rational(0));
            for (std::size_t j = 0; j < E; ++j)
                if (A >> j & 1U) z[j] = 1;
            out.push_back(std::move(z));
        }
        if (A == full) break;
    }
    return out;
}

/// Convex-hull (vertex LP) route to membership, independent of the rank inequalities.
inline bool pcp_membership_lp(const IncidenceLikeMatrix& M, const ExponentVector& z, PcpCase pcase) {
    return lp::in_convex_hull(pcp_vertices(M, pcase), z);
}

/// K_A = det(A A^T)^{-1/2} for the square submatrix on the basis columns A,
/// taken over a maximal independent row set of M; equals 1/|det|.
inline double holder_constant_at_vertex(const IncidenceLikeMatrix& M, const ColumnSet& A) {
    const auto rows = independent_rows(M.entries());
    if (A.size() != rows.size() || rank(M, A) != rows.size())
        throw std::invalid_argument("holder_constant_at_vertex: A is not a column basis");
    const IntMatrix sub = M.entries().select_rows(rows).select_columns(A);
    const auto det = determinant(sub);
    return 1.0 / std::sqrt(static_cast<double>(det) * static_cast<double>(det));
}

namespace detail {
inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}
}  // namespace detail

/// True iff every nonsingular r(M) x r(M) minor has determinant +-1.
inline bool is_unimodular(const IncidenceLikeMatrix& M) {
    const std::size_t r = full_rank(M);
    if (M.V() > 16 || M.E() > kMaxSubsetColumns) throw std::length_error("is_unimodular: size cap exceeded");
    if (r == 0) return true;
    std::vector<std::size_t> rows(r), cols(r);
    std::iota(rows.begin(), rows.end(), 0);
    do {
        const IntMatrix Mr = M.entries().select_rows(rows);
        std::iota(cols.begin(), cols.end(), 0);
        do {
            const auto d = determinant(Mr.select_columns(cols));
            if (d != 0 && d != 1 && d != -1) return false;
        } while (detail::next_combination(cols, M.E()));
    } while (detail::next_combination(rows, M.V()));
    return true;
}

// ---------------------------------------------------------------------------
// lattice counting

struct LatticeCount {
    std::vector<std::int64_t> T;
    std::vector<std::int64_t> count;
    double k_M = 0;       ///< fitted leading coefficient
    std::size_t dim = 0;  ///< exponent of T in the leading term, V - r(M)
};

/// Counts s in Z^V with entries in [-T/2, T/2] and s M = b, for each T, and
/// fits E(T) ~ k_M T^dim + c T^(dim-1) by least squares.
inline LatticeCount lattice_count_kM(const IncidenceLikeMatrix& M, const std::vector<std::int64_t>& b,
                                     const std::vector<std::int64_t>& T_list) {
    if (b.size() != M.E()) throw std::invalid_argument("lattice_count_kM: b must have one entry per column");
    const IntMatrix& a = M.entries();
    const std::size_t V = M.V(), E = M.E();
    const auto R = independent_rows(a);
    const std::size_t r = R.size();
    std::vector<std::size_t> F;
    for (std::size_t v = 0, i = 0; v < V; ++v) {
        if (i < r && R[i] == v) ++i;
        else F.push_back(v);
    }
    const IntMatrix Mr = a.select_rows(R);
    const auto J = greedy_column_basis(Mr);
    // s_R = (b_J - s_F M_{F,J}) Minv where Minv = (M_{R,J})^{-1}.
    const RationalMatrix Minv = r == 0 ? RationalMatrix() : inverse(to_rational(Mr.select_columns(J)));

    LatticeCount out;
    out.dim = F.size();
    for (auto T : T_list) {
        if (T < 0 || T % 2 != 0) throw std::invalid_argument("lattice_count_kM: T must be even and nonnegative");
        const std::int64_t h = T / 2;
        std::int64_t count = 0;
        std::vector<std::int64_t> sF(F.size(), -h);
        std::vector<std::int64_t> s(V);
        while (true) {
            for (std::size_t i = 0; i < F.size(); ++i) s[F[i]] = sF[i];
            bool ok = true;
            for (std::size_t jj = 0; jj < r && ok; ++jj) {
                Rational acc = 0;
                for (std::size_t k = 0; k < r; ++k) {
                    std::int64_t rhs = b[J[k]];
                    for (std::size_t i = 0; i < F.size(); ++i) rhs -= sF[i] * a(F[i], J[k]);
                    acc += Rational(rhs) * Minv(k, jj);
                }
                if (acc.denominator() != 1 || acc.numerator() < -h || acc.numerator() > h) ok = false;
                else s[R[jj]] = acc.numerator();
            }
            if (ok) {
                for (std::size_t e = 0; e < E && ok; ++e) {
                    std::int64_t v = 0;
                    for (std::size_t i = 0; i < V; ++i) v += s[i] * a(i, e);
                    ok = v == b[e];
                }
                if (ok) ++count;
            }
            std::size_t i = 0;
            for (; i < sF.size(); ++i) {
                if (++sF[i] <= h) break;
                sF[i] = -h;
            }
            if (i == sF.size()) break;
        }
        out.T.push_back(T);
        out.count.push_back(count);
    }
    // Least squares on E(T) = k T^dim + c T^(dim-1) (plain ratio when dim = 0 or one point).
    const double p = static_cast<double>(out.dim);
    if (out.T.size() == 1 || out.dim == 0) {
        out.k_M = out.T.empty() ? 0.0 : double(out.count.back()) / std::pow(double(out.T.back()), p);
    } else {
        double s11 = 0, s12 = 0, s22 = 0, y1 = 0, y2 = 0;
        for (std::size_t i = 0; i < out.T.size(); ++i) {
            const double x1 = std::pow(double(out.T[i]), p), x2 = std::pow(double(out.T[i]), p - 1);
            s11 += x1 * x1;
            s12 += x1 * x2;
            s22 += x2 * x2;
            y1 += x1 * double(out.count[i]);
            y2 += x2 * double(out.count[i]);
        }
        const double det = s11 * s22 - s12 * s12;
        out.k_M = (y1 * s22 - y2 * s12) / det;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gamma families and cumulant inequalities

/// Undirected multigraph with per-edge tags ('f' correlation edge, 'b' kernel edge).
struct TaggedGraph {
    std::size_t V = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<char> tags;

    IncidenceLikeMatrix incidence() const { return IncidenceLikeMatrix::from_edges(V, edges); }
    std::size_t components() const {
        detail::UnionFind uf(V);
        for (auto [u, v] : edges) uf.unite(u, v);
        return uf.components;
    }
    std::vector<std::size_t> degrees(char tag = 0) const {
        std::vector<std::size_t> d(V, 0);
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (tag == 0 || tags[e] == tag) {
                ++d[edges[e].first];
                ++d[edges[e].second];
            }
        return d;
    }
};

namespace detail {

// Multiplicity vector over vertex pairs (i<j) -> canonical string under a vertex relabelling.
inline std::vector<int> relabel(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const std::vector<int>& mult,
                                const std::vector<std::size_t>& perm, std::size_t V) {
    std::vector<int> out(V * V, 0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (!mult[p]) continue;
        auto a = perm[pairs[p].first], b = perm[pairs[p].second];
        if (a > b) std::swap(a, b);
        out[a * V + b] += mult[p];
    }
    return out;
}

inline std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

template <class Emit>
void enumerate_multiplicities(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::vector<int>& rem,
                              std::vector<int>& mult, std::size_t pi, const Emit& emit) {
    if (pi == pairs.size()) {
        for (int x : rem)
            if (x) return;
        emit(mult);
        return;
    }
    const auto [i, j] = pairs[pi];
    // Prune: vertex i never appears in a later pair once all pairs (i,*) are passed.
    bool i_later = false;
    for (std::size_t q = pi + 1; q < pairs.size() && !i_later; ++q) i_later = pairs[q].first == i || pairs[q].second == i;
    const int hi = std::min(rem[i], rem[j]);
    const int lo = i_later ? 0 : rem[i];
    for (int c = hi; c >= lo; --c) {
        rem[i] -= c;
        rem[j] -= c;
        mult[pi] = c;
        enumerate_multiplicities(pairs, rem, mult, pi + 1, emit);
        rem[i] += c;
        rem[j] += c;
    }
    mult[pi] = 0;
}

}  // namespace detail

inline constexpr std::size_t kMaxFamilyRows = 6;

/// Gamma(m,k): connected loop-free multigraphs on k vertices, every vertex of
/// degree m, one representative per isomorphism class.
inline std::vector<TaggedGraph> generate_sum_family(std::size_t m, std::size_t k) {
    if (k > kMaxFamilyRows) throw std::length_error("generate_sum_family: k <= 6");
    if (m == 0 || k < 2) throw std::invalid_argument("generate_sum_family: m >= 1 and k >= 2 required");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    std::vector<int> rem(k, static_cast<int>(m)), mult(pairs.size(), 0);
    std::set<std::vector<int>> seen;
    std::vector<TaggedGraph> out;
    std::vector<std::size_t> perm(k);
    detail::enumerate_multiplicities(pairs, rem, mult, 0, [&](const std::vector<int>& mu) {
        TaggedGraph g;
        g.V = k;
        for (std::size_t p = 0; p < pairs.size(); ++p)
            for (int c = 0; c < mu[p]; ++c) {
                g.edges.push_back(pairs[p]);
                g.tags.push_back('f');
            }
        if (g.components() != 1) return;
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<int> canon;
        do {
            auto c = detail::relabel(pairs, mu, perm, k);
            if (canon.empty() || c < canon) canon = std::move(c);
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (seen.insert(canon).second) out.push_back(std::move(g));
    });
    return out;
}

/// Gamma(m,n,k): k rows, row r holding vertices 2r (f-degree m) and 2r+1
/// (f-degree n) joined by a kernel edge 'b'; correlation edges 'f' join
/// vertices of different rows; connected; one representative per class
/// under row permutations.
inline std::vector<TaggedGraph> generate_bilinear_family(std::size_t m, std::size_t n, std::size_t k) {
    if (k > kMaxFamilyRows) throw std::length_error("generate_bilinear_family: k <= 6");
    if (m == 0 || n == 0 || k < 2) throw std::invalid_argument("generate_bilinear_family: m,n >= 1 and k >= 2 required");
    const std::size_t V = 2 * k;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < V; ++i)
        for (std::size_t j = i + 1; j < V; ++j)
            if (i / 2 != j / 2) pairs.emplace_back(i, j);
    std::vector<int> rem(V), mult(pairs.size(), 0);
    for (std::size_t v = 0; v < V; ++v) rem[v] = static_cast<int>(v % 2 == 0 ? m : n);
    std::set<std::vector<int>> seen;
    std::vector<TaggedGraph> out;
    std::vector<std::size_t> rowperm(k), perm(V);
    detail::enumerate_multiplicities(pairs, rem, mult, 0, [&](const std::vector<int>& mu) {
        TaggedGraph g;
        g.V = V;
        for (std::size_t r = 0; r < k; ++r) {
            g.edges.emplace_back(2 * r, 2 * r + 1);
            g.tags.push_back('b');
        }
        for (std::size_t p = 0; p < pairs.size(); ++p)
            for (int c = 0; c < mu[p]; ++c) {
                g.edges.push_back(pairs[p]);
                g.tags.push_back('f');
            }
        if (g.components() != 1) return;
        std::iota(rowperm.begin(), rowperm.end(), 0);
        std::vector<int> canon;
        do {
            for (std::size_t r = 0; r < k; ++r) {
                perm[2 * r] = 2 * rowperm[r];
                perm[2 * r + 1] = 2 * rowperm[r] + 1;
            }
            auto c = detail::relabel(pairs, mu, perm, V);
            if (canon.empty() || c < canon) canon = std::move(c);
        } while (std::next_permutation(rowperm.begin(), rowperm.end()));
        if (seen.insert(canon).second) out.push_back(std::move(g));
    });
    return out;
}

/// One breaking constraint co(G - A) - n_f (1 - z_f) - n_b (1 - z_b) <= k/2
/// contributed by removing n_f correlation and n_b kernel edges.
struct BreakingTerm {
    std::int64_t co, n_f, n_b, k;
    auto operator<=>(const BreakingTerm&) const = default;
};

/// All (co, n_f, n_b) combinations realised by removing whole parallel
/// classes (partial removal of a class never raises co and only adds cost).
inline std::set<BreakingTerm> breaking_terms(const TaggedGraph& g, std::int64_t k) {
    std::map<std::tuple<std::size_t, std::size_t, char>, std::int64_t> classes;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [u, v] = g.edges[e];
        if (u > v) std::swap(u, v);
        ++classes[{u, v, g.tags[e]}];
    }
    std::vector<std::tuple<std::size_t, std::size_t, char, std::int64_t>> cl;
    for (const auto& [key, c] : classes) cl.emplace_back(std::get<0>(key), std::get<1>(key), std::get<2>(key), c);
    if (cl.size() > 24) throw std::length_error("breaking_terms: too many edge classes");
    std::set<BreakingTerm> out;
    const std::uint32_t full = (std::uint32_t(1) << cl.size()) - 1;
    for (std::uint32_t A = 0;; ++A) {
        detail::UnionFind uf(g.V);
        std::int64_t nf = 0, nb = 0;
        for (std::size_t c = 0; c < cl.size(); ++c) {
            const auto& [u, v, tag, mult] = cl[c];
            if (A >> c & 1U) (tag == 'b' ? nb : nf) += mult;
            else uf.unite(u, v);
        }
        out.insert({static_cast<std::int64_t>(uf.components), nf, nb, k});
        if (A == full) break;
    }
    return out;
}

/// Family selector for the cumulant inequality checks.
struct FamilySpec {
    enum class Kind { sum, bilinear } kind = Kind::sum;
    std::size_t m = 1, n = 1;
};

inline std::vector<TaggedGraph> generate_family(const FamilySpec& fam, std::size_t k) {
    return fam.kind == FamilySpec::Kind::sum ? generate_sum_family(fam.m, k) : generate_bilinear_family(fam.m, fam.n, k);
}

struct CumulantCheck {
    Rational alpha_k;           ///< max over the generated graphs of alpha(z)
    Rational half_k;            ///< k/2
    bool holds = false;         ///< alpha_k <= k/2
    bool strict = false;        ///< alpha_k < k/2
    std::size_t graphs = 0;
    std::vector<std::pair<std::string, bool>> facets;  ///< closed-form facet predicates
    bool closed_form_member = false;
};

/// Closed-form boundary predicates. Sum family: 1/m <= 1 - z. Bilinear
/// family (m <= n): (m+n)/2 (1-z1) + (1-z2) >= 3/2, (m/2)(1-z1) + (1-z2) >= 1 and z2 <= 1/2.
inline std::vector<std::pair<std::string, bool>> closed_form_facets(const FamilySpec& fam, const ExponentVector& z) {
    std::vector<std::pair<std::string, bool>> out;
    const Rational one(1);
    if (fam.kind == FamilySpec::Kind::sum) {
        out.emplace_back("1/m <= 1-z", Rational(1, fam.m) <= one - z.at(0));
        return out;
    }
    const auto m = static_cast<std::int64_t>(std::min(fam.m, fam.n));
    const auto n = static_cast<std::int64_t>(std::max(fam.m, fam.n));
    const Rational z1 = z.at(0), z2 = z.at(1);
    out.emplace_back("AB: (m+n)/2 (1-z1) + (1-z2) >= 3/2", Rational(m + n, 2) * (one - z1) + (one - z2) >= Rational(3, 2));
    out.emplace_back("BC: (m/2)(1-z1) + (1-z2) >= 1", Rational(m, 2) * (one - z1) + (one - z2) >= one);
    out.emplace_back("CD: z2 <= 1/2", z2 <= Rational(1, 2));
    return out;
}

inline CumulantCheck cumulant_inequality_check(const FamilySpec& fam, const ExponentVector& z, std::size_t k) {
    const bool bil = fam.kind == FamilySpec::Kind::bilinear;
    if (z.size() != (bil ? 2u : 1u)) throw std::invalid_argument("cumulant_inequality_check: z has the wrong length");
    for (const auto& v : z)
        if (v < 0 || v > 1) throw std::invalid_argument("cumulant_inequality_check: z outside [0,1]");
    CumulantCheck out;
    out.half_k = Rational(static_cast<std::int64_t>(k), 2);
    const auto graphs = generate_family(fam, k);
    out.graphs = graphs.size();
    std::optional<Rational> best;
    const Rational zf = z[0], zb = bil ? z[1] : Rational(0);
    for (const auto& g : graphs)
        for (const auto& t : breaking_terms(g, static_cast<std::int64_t>(k))) {
            const Rational v = Rational(t.co) - Rational(t.n_f) * (Rational(1) - zf) - Rational(t.n_b) * (Rational(1) - zb);
            if (!best || v > *best) best = v;
        }
    out.alpha_k = best.value_or(Rational(0));
    out.holds = graphs.empty() || out.alpha_k <= out.half_k;
    out.strict = graphs.empty() || out.alpha_k < out.half_k;
    out.facets = closed_form_facets(fam, z);
    out.closed_form_member = std::all_of(out.facets.begin(), out.facets.end(), [](const auto& f) { return f.second; });
    return out;
}

/// Half-plane a1 x + a2 y <= c in exact arithmetic.
struct HalfPlane {
    Rational a1, a2, c;
    friend bool operator<(const HalfPlane& x, const HalfPlane& y) {
        if (x.a1 != y.a1) return x.a1 < y.a1;
        if (x.a2 != y.a2) return x.a2 < y.a2;
        return x.c < y.c;
    }
    friend bool operator==(const HalfPlane& x, const HalfPlane& y) { return x.a1 == y.a1 && x.a2 == y.a2 && x.c == y.c; }
};

/// Vertices of a bounded 2-d polygon given as an intersection of half-planes.
inline std::vector<std::pair<Rational, Rational>> polygon_vertices(const std::vector<HalfPlane>& hs) {
    std::set<std::pair<Rational, Rational>> pts;
    for (std::size_t i = 0; i < hs.size(); ++i)
        for (std::size_t j = i + 1; j < hs.size(); ++j) {
            const Rational d = hs[i].a1 * hs[j].a2 - hs[j].a1 * hs[i].a2;
            if (d == 0) continue;
            const Rational x = (hs[i].c * hs[j].a2 - hs[j].c * hs[i].a2) / d;
            const Rational y = (hs[i].a1 * hs[j].c - hs[j].a1 * hs[i].c) / d;
            bool inside = true;
            for (const auto& h : hs)
                if (h.a1 * x + h.a2 * y > h.c) {
                    inside = false;
                    break;
                }
            if (inside) pts.emplace(x, y);
        }
    return {pts.begin(), pts.end()};
}

/// Region of (z_f, z_b) in [0,1]^2 where alpha_k <= k/2 for every k in
/// [2, kmax] over the generated bilinear graphs, and its vertices.
struct BilinearRegion {
    std::vector<HalfPlane> constraints;
    std::vector<std::pair<Rational, Rational>> vertices;
};

inline BilinearRegion bilinear_cumulant_region(std::size_t m, std::size_t n, std::size_t kmax) {
    std::set<HalfPlane> hs;
    for (std::size_t k = 2; k <= kmax; ++k) {
        if ((k * (m + n)) % 2) continue;
        std::set<BreakingTerm> terms;
        for (const auto& g : generate_bilinear_family(m, n, k)) {
            auto t = breaking_terms(g, static_cast<std::int64_t>(k));
            terms.insert(t.begin(), t.end());
        }
        // co - nf(1-z1) - nb(1-z2) <= k/2  <=>  nf z1 + nb z2 <= k/2 - co + nf + nb
        for (const auto& t : terms) {
            if (t.n_f == 0 && t.n_b == 0) continue;
            hs.insert({Rational(t.n_f), Rational(t.n_b), Rational(t.k, 2) - t.co + t.n_f + t.n_b});
        }
    }
    hs.insert({Rational(-1), Rational(0), Rational(0)});
    hs.insert({Rational(0), Rational(-1), Rational(0)});
    hs.insert({Rational(1), Rational(0), Rational(1)});
    hs.insert({Rational(0), Rational(1), Rational(1)});
    BilinearRegion out;
    out.constraints.assign(hs.begin(), hs.end());
    out.vertices = polygon_vertices(out.constraints);
    return out;
}

/// Largest z with alpha_k(z) <= k/2 for all 2 <= k <= kmax over Gamma(m,k).
inline Rational sum_family_threshold(std::size_t m, std::size_t kmax) {
    Rational best(1);
    for (std::size_t k = 2; k <= kmax; ++k) {
        if ((k * m) % 2) continue;
        for (const auto& g : generate_sum_family(m, k))
            for (const auto& t : breaking_terms(g, static_cast<std::int64_t>(k))) {
                // co - n(1-z) <= k/2  <=>  z <= 1 - (co - k/2)/n  (binding only when co > k/2)
                const Rational excess = Rational(t.co) - Rational(t.k, 2);
                if (excess <= 0) continue;
                if (t.n_f == 0) return Rational(-1);  // infeasible for every z
                best = std::min(best, Rational(1) - excess / t.n_f);
            }
    }
    return best;
}

// ---------------------------------------------------------------------------
// edge-list I/O ("u v" per line, '#' comments, 0-based vertices)

inline IncidenceLikeMatrix read_edge_list(std::istream& in, std::size_t min_vertices = 0) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t V = min_vertices;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u)) continue;
        if (!(ls >> v) || u < 0 || v < 0)
            throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": expected two nonnegative vertex ids");
        edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
        V = std::max<std::size_t>(V, static_cast<std::size_t>(std::max(u, v)) + 1);
    }
    return IncidenceLikeMatrix::from_edges(V, edges);
}

inline void write_edge_list(std::ostream& out, const IncidenceLikeMatrix& M) {
    if (M.kind() != MatrixKind::graph_incidence) throw std::invalid_argument("write_edge_list: not a graph");
    for (std::size_t e = 0; e < M.E(); ++e) {
        const auto [u, v] = M.endpoints(e);
        out << u << ' ' << v << '\n';
    }
}

inline void write_edge_list(std::ostream& out, const TaggedGraph& g, std::ostream* tags = nullptr) {
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        out << g.edges[e].first << ' ' << g.edges[e].second << '\n';
        if (tags) *tags << g.tags[e] << '\n';
    }
}

}  // namespace szego
