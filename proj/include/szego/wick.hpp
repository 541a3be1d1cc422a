#pragma once

// Cumulant algebra on set partitions, Wick products and Appell polynomials,
// diagrams over tables, and the compilation of cumulants of sums and
// bilinear forms into tagged graphs. Exact arithmetic uses GMP rationals.

#include "szego/exact.hpp"
#include "szego/graph_core.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace szego::wick {

using Mask = std::uint32_t;

inline constexpr std::size_t kMaxFunctionalSize = 10;
inline constexpr std::size_t kMaxWickSize = 8;
inline constexpr std::size_t kMaxDiagramSlots = 12;
inline constexpr std::size_t kMaxGaussianSlots = 16;

// ---------------------------------------------------------------------------
// moments and cumulants over subsets

/// Values indexed by subset masks of {0..n-1}; entry 0 is the empty set.
template <class S>
struct SubsetFunctional {
    std::size_t n = 0;
    std::vector<S> value;
    std::vector<bool> present;

    explicit SubsetFunctional(std::size_t n_ = 0) : n(n_), value(std::size_t(1) << n_), present(std::size_t(1) << n_, false) {
        if (n_ > kMaxFunctionalSize) throw std::length_error("subset functional capped at 10 indices");
    }
    void set(Mask m, S v) {
        value[m] = std::move(v);
        present[m] = true;
    }
    const S& get(Mask m) const {
        if (!present[m]) throw std::invalid_argument("missing value for subset mask " + std::to_string(m));
        return value[m];
    }
};

namespace detail {

inline Mask lowest(Mask m) { return m & (~m + 1); }

/// Calls f(T) for every nonempty T within S containing the lowest element of S.
template <class F>
void for_each_rooted_subset(Mask S, F&& f) {
    const Mask root = lowest(S);
    const Mask rest = S & ~root;
    for (Mask sub = rest;; sub = (sub - 1) & rest) {
        f(sub | root);
        if (sub == 0) break;
    }
}

}  // namespace detail

/// Solves m(S) = sum over partitions of S of prod kappa(block) for kappa,
/// using m(S) = sum_{T ∋ min S} kappa(T) m(S \ T).
template <class S>
SubsetFunctional<S> moments_to_cumulants(const SubsetFunctional<S>& m) {
    SubsetFunctional<S> k(m.n);
    const Mask full = m.n == 0 ? 0 : static_cast<Mask>((std::size_t(1) << m.n) - 1);
    for (Mask s = 1; s <= full && full != 0; ++s) {
        S acc = m.get(s);
        detail::for_each_rooted_subset(s, [&](Mask T) {
            if (T == s) return;
            acc -= k.get(T) * m.get(s & ~T);
        });
        k.set(s, acc);
    }
    k.set(0, S(0));
    return k;
}

/// Inverse map: moments from cumulants, m(empty) = 1.
template <class S>
SubsetFunctional<S> cumulants_to_moments(const SubsetFunctional<S>& k) {
    SubsetFunctional<S> m(k.n);
    m.set(0, S(1));
    const Mask full = k.n == 0 ? 0 : static_cast<Mask>((std::size_t(1) << k.n) - 1);
    for (Mask s = 1; s <= full && full != 0; ++s) {
        S acc(0);
        detail::for_each_rooted_subset(s, [&](Mask T) { acc += k.get(T) * m.get(s & ~T); });
        m.set(s, acc);
    }
    return m;
}

/// Joint moment of centred Gaussian variables by Isserlis' theorem:
/// E[Y_{v_1} ... Y_{v_r}] as a sum over perfect matchings of the listed indices.
template <class S>
S isserlis_moment(const std::vector<std::vector<S>>& cov, const std::vector<std::size_t>& vars) {
    if (vars.size() % 2) return S(0);
    if (vars.empty()) return S(1);
    S acc(0);
    const std::size_t a = vars.front();
    for (std::size_t j = 1; j < vars.size(); ++j) {
        const S& c = cov.at(a).at(vars[j]);
        if (c == 0) continue;
        std::vector<std::size_t> rest;
        for (std::size_t i = 1; i < vars.size(); ++i)
            if (i != j) rest.push_back(vars[i]);
        acc += c * isserlis_moment(cov, rest);
    }
    return acc;
}

/// Moment functional over subsets of slots for Gaussian variables: slot i carries variable var[i].
template <class S>
SubsetFunctional<S> gaussian_moment_functional(const std::vector<std::vector<S>>& cov, const std::vector<std::size_t>& var) {
    SubsetFunctional<S> m(var.size());
    for (Mask s = 0; s < (Mask(1) << var.size()); ++s) {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < var.size(); ++i)
            if (s >> i & 1U) v.push_back(var[i]);
        m.set(s, isserlis_moment(cov, v));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Wick products

/// Coefficients c[U] with :Y^W: = sum_U c[U] Y^U for W = {0..n-1}, from the
/// recursion Y^W = sum_{U ⊆ W} :Y^U: E[Y^{W \ U}]. Input: the moment functional.
template <class S>
std::vector<S> wick_coefficients_from_moments(const SubsetFunctional<S>& m) {
    const std::size_t n = m.n;
    if (n > kMaxWickSize) throw std::length_error("wick_coefficients: |W| <= 8");
    const Mask full = static_cast<Mask>((std::size_t(1) << n) - 1);
    // coef[W][U] for each sub-index-set W (by mask), U ⊆ W.
    std::vector<std::map<Mask, S>> coef(std::size_t(1) << n);
    coef[0][0] = S(1);
    for (Mask W = 1; W <= full; ++W) {
        std::map<Mask, S> c;
        c[W] = S(1);
        for (Mask U = (W - 1) & W;; U = (U - 1) & W) {
            const S& e = m.get(W & ~U);
            if (e != 0)
                for (const auto& [mono, v] : coef[U]) c[mono] -= v * e;
            if (U == 0) break;
        }
        coef[W] = std::move(c);
    }
    std::vector<S> out(std::size_t(1) << n, S(0));
    for (const auto& [mono, v] : coef[full]) out[mono] = v;
    return out;
}

/// Same expansion from the cumulant functional.
template <class S>
std::vector<S> wick_coefficients(const SubsetFunctional<S>& cumulants) {
    return wick_coefficients_from_moments(cumulants_to_moments(cumulants));
}

/// E of a subset-indexed linear combination under a moment functional.
template <class S>
S expectation(const std::vector<S>& coef, const SubsetFunctional<S>& m) {
    S acc(0);
    for (Mask U = 0; U < coef.size(); ++U)
        if (coef[U] != 0) acc += coef[U] * m.get(U);
    return acc;
}

// ---------------------------------------------------------------------------
// Appell polynomials

/// Multivariate polynomial: exponent vector -> coefficient.
using Polynomial = std::map<std::vector<int>, BigRational>;

/// Joint moment oracle: exponent vector -> E[prod X_j^{e_j}].
using JointMoments = std::function<BigRational(const std::vector<int>&)>;

/// P_n with dP/dx_j = n_j P_{n - e_j} and E P_n(X) = 0, built as the Wick
/// power of the multiset that repeats variable j exactly n_j times.
inline Polynomial appell_polynomial(const std::vector<int>& n, const JointMoments& moments) {
    std::vector<std::size_t> var;
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] < 0) throw std::invalid_argument("appell_polynomial: negative order");
        for (int r = 0; r < n[j]; ++r) var.push_back(j);
    }
    if (var.size() > kMaxWickSize) throw std::length_error("appell_polynomial: total order <= 8");
    auto exps = [&](Mask U) {
        std::vector<int> e(n.size(), 0);
        for (std::size_t i = 0; i < var.size(); ++i)
            if (U >> i & 1U) ++e[var[i]];
        return e;
    };
    SubsetFunctional<BigRational> m(var.size());
    for (Mask U = 0; U < (Mask(1) << var.size()); ++U) m.set(U, moments(exps(U)));
    const auto c = wick_coefficients_from_moments(m);
    Polynomial p;
    for (Mask U = 0; U < c.size(); ++U)
        if (c[U] != 0) p[exps(U)] += c[U];
    for (auto it = p.begin(); it != p.end();) it = it->second == 0 ? p.erase(it) : std::next(it);
    return p;
}

/// Moments of one variable from its cumulants kappa[1..], via partitions.
inline std::vector<BigRational> univariate_moments(const std::vector<BigRational>& kappa, std::size_t order) {
    // m_r = sum_{j=1}^{r} C(r-1, j-1) kappa_j m_{r-j}
    std::vector<BigRational> m(order + 1, BigRational(0));
    m[0] = 1;
    for (std::size_t r = 1; r <= order; ++r) {
        BigRational acc = 0, binom = 1;
        for (std::size_t j = 1; j <= r; ++j) {
            const BigRational kj = j < kappa.size() ? kappa[j] : BigRational(0);
            acc += binom * kj * m[r - j];
            binom = binom * BigRational(static_cast<long>(r - j)) / BigRational(static_cast<long>(j));
        }
        m[r] = acc;
    }
    return m;
}

/// Univariate Appell polynomial from cumulants kappa[1..] (kappa[0] unused).
inline Polynomial appell_univariate(int n, const std::vector<BigRational>& kappa) {
    const auto m = univariate_moments(kappa, static_cast<std::size_t>(n));
    return appell_polynomial({n}, [&](const std::vector<int>& e) { return m.at(static_cast<std::size_t>(e[0])); });
}

/// Joint moments of centred Gaussian variables with covariance matrix cov.
inline JointMoments gaussian_joint_moments(const std::vector<std::vector<BigRational>>& cov) {
    return [cov](const std::vector<int>& e) {
        std::vector<std::size_t> vars;
        for (std::size_t j = 0; j < e.size(); ++j)
            for (int r = 0; r < e[j]; ++r) vars.push_back(j);
        return isserlis_moment(cov, vars);
    };
}

inline double evaluate(const Polynomial& p, const std::vector<double>& x) {
    double acc = 0;
    for (const auto& [e, c] : p) {
        double t = c.convert_to<double>();
        for (std::size_t j = 0; j < e.size(); ++j) t *= std::pow(x[j], e[j]);
        acc += t;
    }
    return acc;
}

inline Polynomial derivative(const Polynomial& p, std::size_t j) {
    Polynomial d;
    for (const auto& [e, c] : p) {
        if (e[j] == 0) continue;
        auto f = e;
        --f[j];
        d[f] += c * BigRational(e[j]);
    }
    return d;
}

inline BigRational expectation(const Polynomial& p, const JointMoments& moments) {
    BigRational acc = 0;
    for (const auto& [e, c] : p) acc += c * moments(e);
    return acc;
}

// ---------------------------------------------------------------------------
// diagrams

struct DiagramTable {
    std::vector<std::size_t> row_sizes;

    std::size_t K() const { return std::accumulate(row_sizes.begin(), row_sizes.end(), std::size_t(0)); }
    std::size_t rows() const { return row_sizes.size(); }
    /// Row of each flat slot index (slots numbered row by row).
    std::vector<std::size_t> slot_rows() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < row_sizes.size(); ++i) out.insert(out.end(), row_sizes[i], i);
        return out;
    }
    void validate() const {
        if (row_sizes.empty()) throw std::invalid_argument("DiagramTable: at least one row");
        for (auto n : row_sizes)
            if (n == 0) throw std::invalid_argument("DiagramTable: rows must be nonempty");
    }
};

/// A partition of the slots; blocks hold flat slot indices in increasing order.
struct Diagram {
    std::vector<std::vector<std::size_t>> blocks;
};

struct DiagramConstraints {
    bool connected = false;
    bool no_flat = false;
    bool gaussian = false;
    bool no_singletons = false;
};

inline bool is_flat_block(const std::vector<std::size_t>& block, const std::vector<std::size_t>& row) {
    for (auto s : block)
        if (row[s] != row[block.front()]) return false;
    return true;
}

inline bool is_connected(const Diagram& g, const DiagramTable& t) {
    const auto row = t.slot_rows();
    std::vector<std::size_t> parent(t.rows());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::size_t comps = t.rows();
    for (const auto& b : g.blocks)
        for (auto s : b) {
            const auto a = find(row[b.front()]), c = find(row[s]);
            if (a != c) {
                parent[a] = c;
                --comps;
            }
        }
    return comps == 1;
}

inline bool satisfies(const Diagram& g, const DiagramTable& t, const DiagramConstraints& c) {
    const auto row = t.slot_rows();
    for (const auto& b : g.blocks) {
        if (c.gaussian && b.size() != 2) return false;
        if (c.no_singletons && b.size() == 1) return false;
        if (c.no_flat && is_flat_block(b, row)) return false;
    }
    return !c.connected || is_connected(g, t);
}

/// Exhaustive list of diagrams meeting the constraints, in the order of the
/// restricted-growth strings (perfect matchings in lexicographic order when
/// the gaussian constraint is set).
inline std::vector<Diagram> enumerate_diagrams(const DiagramTable& t, const DiagramConstraints& c) {
    t.validate();
    const std::size_t K = t.K();
    const auto row = t.slot_rows();
    std::vector<Diagram> out;
    if (c.gaussian) {
        if (K > kMaxGaussianSlots) throw std::length_error("enumerate_diagrams: gaussian tables capped at 16 slots");
        if (K % 2) return out;
        std::vector<bool> used(K, false);
        Diagram cur;
        std::function<void()> rec = [&]() {
            std::size_t a = 0;
            while (a < K && used[a]) ++a;
            if (a == K) {
                if (satisfies(cur, t, c)) out.push_back(cur);
                return;
            }
            used[a] = true;
            for (std::size_t b = a + 1; b < K; ++b) {
                if (used[b]) continue;
                if (c.no_flat && row[a] == row[b]) continue;
                used[b] = true;
                cur.blocks.push_back({a, b});
                rec();
                cur.blocks.pop_back();
                used[b] = false;
            }
            used[a] = false;
        };
        rec();
        return out;
    }
    if (K > kMaxDiagramSlots) throw std::length_error("enumerate_diagrams: tables capped at 12 slots");
    std::vector<std::size_t> rgs(K, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t nblocks) {
        if (i == K) {
            Diagram g;
            g.blocks.assign(nblocks, {});
            for (std::size_t s = 0; s < K; ++s) g.blocks[rgs[s]].push_back(s);
            if (satisfies(g, t, c)) out.push_back(std::move(g));
            return;
        }
        for (std::size_t b = 0; b <= nblocks; ++b) {
            rgs[i] = b;
            rec(i + 1, std::max(nblocks, b + 1));
        }
    };
    if (K > 0) {
        rgs[0] = 0;
        rec(1, 1);
    }
    return out;
}

enum class DiagramMode { moment, wick_moment, cumulant, wick_cumulant };

inline DiagramConstraints constraints_for(DiagramMode mode) {
    DiagramConstraints c;
    c.no_flat = mode == DiagramMode::wick_moment || mode == DiagramMode::wick_cumulant;
    c.connected = mode == DiagramMode::cumulant || mode == DiagramMode::wick_cumulant;
    return c;
}

/// sum over the diagrams of the mode's class of prod_j chi(Y^{V_j}); the
/// oracle receives each block as a list of flat slot indices.
template <class S>
S diagram_cumulant(const DiagramTable& t, const std::function<S(const std::vector<std::size_t>&)>& chi, DiagramMode mode,
                   bool gaussian_only = false) {
    auto c = constraints_for(mode);
    c.gaussian = gaussian_only;
    S acc(0);
    std::map<std::vector<std::size_t>, S> cache;
    for (const auto& g : enumerate_diagrams(t, c)) {
        S p(1);
        for (const auto& b : g.blocks) {
            auto it = cache.find(b);
            if (it == cache.end()) it = cache.emplace(b, chi(b)).first;
            p *= it->second;
            if (p == 0) break;
        }
        acc += p;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// compilation into graphs

/// Innovation cumulants d_k, k = 0..kmax (entries 0 and 1 unused).
struct CumulantSequence {
    std::vector<double> d;
    double operator[](std::size_t k) const { return k < d.size() ? d[k] : 0.0; }
    bool gaussian() const {
        for (std::size_t k = 3; k < d.size(); ++k)
            if (d[k] != 0) return false;
        return true;
    }
};

struct CumulantGraphKind {
    enum class Type { sum, bilinear } type = Type::sum;
    std::size_t m = 1, n = 1, k = 2;

    DiagramTable table() const {
        DiagramTable t;
        t.row_sizes.assign(k, type == Type::sum ? m : m + n);
        return t;
    }
    /// Graph vertex of a flat slot: the row for sums, the half-row for bilinear forms.
    std::size_t vertex_of(std::size_t slot) const {
        if (type == Type::sum) return slot / m;
        const std::size_t r = slot / (m + n), j = slot % (m + n);
        return 2 * r + (j < m ? 0 : 1);
    }
    std::size_t vertices() const { return type == Type::sum ? k : 2 * k; }
};

struct HyperEdge {
    std::vector<std::size_t> vertices;  ///< one entry per slot of the block (repeats allowed)
};

/// One connected, flat-free diagram turned into graph data.
struct CompiledDiagram {
    Diagram diagram;
    TaggedGraph graph;                    ///< pair blocks as 'f' edges, kernel edges as 'b'
    std::vector<HyperEdge> higher;        ///< blocks of size >= 3, joined through a delta constraint
    std::map<std::size_t, std::size_t> orders;  ///< block size -> count (the symbolic weight prod d_|V|)
    double weight = 0;                    ///< the weight bound to the model's cumulants

    std::string weight_symbol() const {
        std::string s;
        for (auto [k, c] : orders) {
            if (!s.empty()) s += "*";
            s += "d" + std::to_string(k);
            if (c > 1) s += "^" + std::to_string(c);
        }
        return s.empty() ? "1" : s;
    }
};

/// Emits every connected diagram without flat blocks (and without singletons,
/// the process being centred) whose weight is nonzero under the model.
inline std::vector<CompiledDiagram> compile_cumulant_graphs(const CumulantGraphKind& kind, const CumulantSequence& model) {
    if (kind.k < 1 || kind.k > 4 || kind.m < 1 || kind.m > 3 || (kind.type == CumulantGraphKind::Type::bilinear && (kind.n < 1 || kind.n > 3)))
        throw std::length_error("compile_cumulant_graphs: k <= 4 and m, n <= 3");
    const auto table = kind.table();
    DiagramConstraints c;
    c.connected = true;
    c.no_flat = true;
    c.no_singletons = true;
    c.gaussian = model.gaussian();
    if (!c.gaussian && table.K() > kMaxDiagramSlots) throw std::length_error("compile_cumulant_graphs: non-Gaussian tables capped at 12 slots");
    std::vector<CompiledDiagram> out;
    for (auto& g : enumerate_diagrams(table, c)) {
        CompiledDiagram cd;
        cd.graph.V = kind.vertices();
        if (kind.type == CumulantGraphKind::Type::bilinear)
            for (std::size_t r = 0; r < kind.k; ++r) {
                cd.graph.edges.emplace_back(2 * r, 2 * r + 1);
                cd.graph.tags.push_back('b');
            }
        cd.weight = 1;
        for (const auto& b : g.blocks) {
            ++cd.orders[b.size()];
            cd.weight *= model[b.size()];
            if (b.size() == 2) {
                cd.graph.edges.emplace_back(kind.vertex_of(b[0]), kind.vertex_of(b[1]));
                cd.graph.tags.push_back('f');
            } else {
                HyperEdge h;
                for (auto s : b) h.vertices.push_back(kind.vertex_of(s));
                cd.higher.push_back(std::move(h));
            }
        }
        if (cd.weight == 0) continue;
        cd.diagram = std::move(g);
        out.push_back(std::move(cd));
    }
    return out;
}

/// Canonical key of a compiled diagram up to vertex relabelling that maps
/// rows to rows (used to group equal graphs for reporting; V <= 8).
inline std::string canonical_key(const CompiledDiagram& cd) {
    const std::size_t V = cd.graph.V;
    if (V > 8) throw std::length_error("canonical_key: V <= 8");
    std::vector<std::size_t> perm(V);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    bool first = true;
    do {
        std::vector<std::string> parts;
        for (std::size_t e = 0; e < cd.graph.edges.size(); ++e) {
            auto [u, v] = cd.graph.edges[e];
            auto a = perm[u], b = perm[v];
            if (a > b) std::swap(a, b);
            parts.push_back(std::string(1, cd.graph.tags[e]) + std::to_string(a) + "-" + std::to_string(b));
        }
        for (const auto& h : cd.higher) {
            std::vector<std::size_t> vs;
            for (auto x : h.vertices) vs.push_back(perm[x]);
            std::sort(vs.begin(), vs.end());
            std::string s = "h";
            for (auto x : vs) s += std::to_string(x) + ".";
            parts.push_back(s);
        }
        std::sort(parts.begin(), parts.end());
        std::string key;
        for (const auto& p : parts) key += p + ";";
        if (first || key < best) best = key;
        first = false;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct GraphGroup {
    CompiledDiagram representative;
    std::size_t multiplicity = 0;
};

/// Groups compiled diagrams with equal canonical keys, keeping first-seen order.
inline std::vector<GraphGroup> group_by_graph(const std::vector<CompiledDiagram>& cds) {
    std::vector<GraphGroup> groups;
    std::map<std::string, std::size_t> where;
    for (const auto& cd : cds) {
        const auto key = canonical_key(cd);
        auto it = where.find(key);
        if (it == where.end()) {
            where.emplace(key, groups.size());
            groups.push_back({cd, 1});
        } else {
            ++groups[it->second].multiplicity;
        }
    }
    return groups;
}

}  // namespace szego::wick
