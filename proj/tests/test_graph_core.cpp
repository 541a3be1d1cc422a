#include "szego/graph_core.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace szego;

namespace {

// Independent rank oracle: floating point LU on the selected columns.
std::size_t eigen_rank(const IncidenceLikeMatrix& M, std::uint32_t mask) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < M.E(); ++j)
        if (mask >> j & 1U) cols.push_back(j);
    if (cols.empty()) return 0;
    Eigen::MatrixXd a(M.V(), cols.size());
    for (std::size_t i = 0; i < M.V(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) a(Eigen::Index(i), Eigen::Index(j)) = double(M.entries()(i, cols[j]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-9);
    return std::size_t(lu.rank());
}

Rational zsum(const ExponentVector& z, std::uint32_t A, bool complement) {
    Rational s = 0;
    for (std::size_t j = 0; j < z.size(); ++j)
        if (A >> j & 1U) s += complement ? Rational(1) - z[j] : z[j];
    return s;
}

// Both alpha formulations, written directly from their definitions.
std::pair<Rational, Rational> alpha_oracle(const IncidenceLikeMatrix& M, const ExponentVector& z) {
    const std::uint32_t full = (1U << M.E()) - 1;
    const auto rM = std::int64_t(eigen_rank(M, full));
    const auto co = std::int64_t(M.V()) - rM;
    std::optional<Rational> a1, a2;
    for (std::uint32_t A = 0; A <= full; ++A) {
        const auto rc = std::int64_t(eigen_rank(M, full & ~A));
        const Rational v1 = zsum(z, A, false) - (std::int64_t(std::popcount(A)) - rM + rc);
        const Rational v2 = Rational(std::int64_t(M.V()) - rc) - zsum(z, A, true);
        if (!a1 || v1 > *a1) a1 = v1;
        if (!a2 || v2 > *a2) a2 = v2;
    }
    return {Rational(co) + *a1, *a2};
}

bool c1_oracle(const IncidenceLikeMatrix& M, const ExponentVector& z) {
    const std::uint32_t full = (1U << M.E()) - 1;
    for (std::uint32_t A = 0; A <= full; ++A)
        if (zsum(z, A, false) > std::int64_t(eigen_rank(M, A))) return false;
    return true;
}

IncidenceLikeMatrix random_graph(std::mt19937_64& g) {
    std::uniform_int_distribution<std::size_t> nv(2, 6), ne(1, 10);
    const std::size_t V = nv(g), E = ne(g);
    std::uniform_int_distribution<std::size_t> pick(0, V - 1);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    while (edges.size() < E) {
        const auto u = pick(g), v = pick(g);
        if (u != v) edges.emplace_back(u, v);
    }
    return IncidenceLikeMatrix::from_edges(V, edges);
}

IncidenceLikeMatrix random_general(std::mt19937_64& g) {
    std::uniform_int_distribution<int> nr(1, 4), ne(1, 10), entry(-2, 2);
    const int R = nr(g), E = ne(g);
    std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(R), std::vector<std::int64_t>(static_cast<std::size_t>(E)));
    for (auto& r : rows)
        for (auto& x : r) x = entry(g);
    return IncidenceLikeMatrix::general(rows);
}

ExponentVector random_z(std::mt19937_64& g, std::size_t E) {
    std::uniform_int_distribution<int> num(0, 12);
    ExponentVector z;
    for (std::size_t j = 0; j < E; ++j) z.emplace_back(num(g), 12);
    return z;
}

IncidenceLikeMatrix two_by_four() { return IncidenceLikeMatrix::general({{1, 0, 1, 1}, {0, 1, 1, -1}}); }

}  // namespace

TEST(Matrix, IncidenceValidation) {
    EXPECT_THROW(IncidenceLikeMatrix::from_edges(2, {{0, 0}}), std::invalid_argument);
    EXPECT_THROW(IncidenceLikeMatrix::from_edges(2, {{0, 2}}), std::out_of_range);
    EXPECT_THROW((IncidenceLikeMatrix{IntMatrix::from_rows({{1}, {1}}), MatrixKind::graph_incidence}), std::invalid_argument);
}

TEST(Rank, CycleAndTree) {
    const auto C3 = IncidenceLikeMatrix::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
    EXPECT_EQ(full_rank(C3), 2u);
    EXPECT_EQ(corank(C3), 1u);
    EXPECT_EQ(dual_rank(C3, {0, 1, 2}), 1u);
    EXPECT_EQ(components_after_removal(C3, {0, 1}), 2u);
    const auto tree = IncidenceLikeMatrix::from_edges(4, {{0, 1}, {1, 2}, {1, 3}});
    EXPECT_EQ(full_rank(tree), 3u);
    EXPECT_EQ(corank(tree), 1u);
}

TEST(Rank, MatchesFloatingPointOracle) {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto M = trial % 2 ? random_graph(g) : random_general(g);
        for (std::uint32_t A = 0; A < (1U << M.E()); A += 3) {
            ColumnSet cols;
            for (std::size_t j = 0; j < M.E(); ++j)
                if (A >> j & 1U) cols.push_back(j);
            EXPECT_EQ(rank(M, cols), eigen_rank(M, A));
        }
    }
}

TEST(Dual, RowsAreOrthogonal) {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto M = trial % 2 ? random_graph(g) : random_general(g);
        const auto D = dual_matrix(M);
        EXPECT_EQ(D.C(), M.E() - full_rank(M));
        for (std::size_t c = 0; c < D.C(); ++c)
            for (std::size_t v = 0; v < M.V(); ++v) {
                Rational s = 0, si = 0;
                for (std::size_t e = 0; e < M.E(); ++e) {
                    s += D.Mstar(c, e) * M.entries()(v, e);
                    si += Rational(D.integer(c, e) * M.entries()(v, e));
                }
                EXPECT_EQ(s, 0);
                EXPECT_EQ(si, 0);
            }
    }
}

TEST(Alpha, TwoFormulationsAgreeWithOracle) {
    std::mt19937_64 g(20261019);
    for (int trial = 0; trial < 200; ++trial) {
        const auto M = trial % 2 ? random_graph(g) : random_general(g);
        const auto z = random_z(g, M.E());
        const auto rep = alpha_exponent_report(M, z, PcpCase::C1_torus);
        const auto [o1, o2] = alpha_oracle(M, z);
        ASSERT_EQ(o1, o2) << "oracle formulations disagree";
        EXPECT_EQ(rep.alpha, o1);
        EXPECT_EQ(rep.alpha_removal_form, o2);
    }
}

TEST(Alpha, SimpleCases) {
    const auto C2 = IncidenceLikeMatrix::from_edges(2, {{0, 1}, {1, 0}});
    // z = 0: alpha = co(M)
    EXPECT_EQ(alpha_exponent(C2, {0, 0}, PcpCase::C1_torus), 1);
    // z = (1,1): removing both edges gains 2 at dual rank 1
    EXPECT_EQ(alpha_exponent(C2, {1, 1}, PcpCase::C1_torus), 2);
    EXPECT_EQ(alpha_exponent(C2, {Rational(1, 2), Rational(1, 2)}, PcpCase::C1_torus), 1);
    EXPECT_THROW(alpha_exponent(C2, {0, 0}, PcpCase::C2_counting), std::invalid_argument);
    EXPECT_THROW(alpha_exponent(C2, {0, Rational(3, 2)}, PcpCase::C1_torus), std::invalid_argument);
}

TEST(Pcp, RankInequalitiesMatchConvexHull) {
    std::mt19937_64 g(77);
    int members = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto M = trial % 2 ? random_graph(g) : random_general(g);
        const auto z = random_z(g, M.E());
        const bool rank_form = pcp_membership(M, z, PcpCase::C1_torus).member;
        EXPECT_EQ(rank_form, c1_oracle(M, z));
        EXPECT_EQ(rank_form, pcp_membership_lp(M, z, PcpCase::C1_torus));
        members += rank_form;
        const bool c3 = pcp_membership(M, z, PcpCase::C3_lebesgue).member;
        EXPECT_EQ(c3, pcp_membership_lp(M, z, PcpCase::C3_lebesgue));
        const bool c2 = pcp_membership(M, z, PcpCase::C2_counting).member;
        EXPECT_EQ(c2, pcp_membership_lp(M, z, PcpCase::C2_counting));
    }
    // both outcomes occur, so the agreement is not vacuous
    EXPECT_GT(members, 10);
    EXPECT_LT(members, 190);
}

TEST(Pcp, WitnessViolatesInequality) {
    const auto C3 = IncidenceLikeMatrix::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
    const auto r = pcp_membership(C3, {1, 1, 1}, PcpCase::C1_torus);
    ASSERT_FALSE(r.member);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->size(), 3u);
    EXPECT_EQ(r.violated, "c1");
}

TEST(Pcp, TwoByFourExample) {
    const auto M = two_by_four();
    const ExponentVector z{0, 1, Rational(1, 2), Rational(1, 2)};
    EXPECT_TRUE(pcp_membership(M, z, PcpCase::C3_lebesgue).member);
    EXPECT_TRUE(pcp_membership_lp(M, z, PcpCase::C3_lebesgue));
    // C3 needs sum z = r(M) = 2
    EXPECT_FALSE(pcp_membership(M, {0, 1, Rational(1, 2), 0}, PcpCase::C3_lebesgue).member);
    EXPECT_FALSE(is_unimodular(M));
    EXPECT_EQ(determinant(M.entries().select_columns({2, 3})), -2);
    EXPECT_DOUBLE_EQ(holder_constant_at_vertex(M, {2, 3}), 0.5);
    EXPECT_DOUBLE_EQ(holder_constant_at_vertex(M, {0, 1}), 1.0);
    // bases of a rank-2 matrix on 4 columns with no parallel pair: all 6
    EXPECT_EQ(pcp_vertices(M, PcpCase::C3_lebesgue).size(), 6u);
}

TEST(Pcp, VerticesAreIndependentSets) {
    const auto C3 = IncidenceLikeMatrix::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
    // independent sets of a triangle: empty, 3 singletons, 3 pairs
    EXPECT_EQ(pcp_vertices(C3, PcpCase::C1_torus).size(), 7u);
    EXPECT_EQ(pcp_vertices(C3, PcpCase::C3_lebesgue).size(), 3u);
    EXPECT_EQ(pcp_vertices(C3, PcpCase::C2_counting).size(), 4u);
}

TEST(Unimodular, GraphsAreTotallyUnimodular) {
    std::mt19937_64 g(3);
    for (int trial = 0; trial < 20; ++trial) EXPECT_TRUE(is_unimodular(random_graph(g)));
    EXPECT_FALSE(is_unimodular(IncidenceLikeMatrix::general({{2}})));
}

TEST(Lattice, CycleCountsConstantVectors) {
    const auto C3 = IncidenceLikeMatrix::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
    const auto lc = lattice_count_kM(C3, {0, 0, 0}, {4, 8, 16});
    for (std::size_t i = 0; i < lc.T.size(); ++i) EXPECT_EQ(lc.count[i], lc.T[i] + 1);
    EXPECT_NEAR(lc.k_M, 1.0, 1e-12);
    // b outside the row space of a graph (column sums must vanish)
    const auto none = lattice_count_kM(C3, {1, 1, 1}, {4, 8});
    for (auto c : none.count) EXPECT_EQ(c, 0);
}

TEST(EdgeList, RoundTrip) {
    const auto M = IncidenceLikeMatrix::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}});
    std::ostringstream out;
    write_edge_list(out, M);
    std::istringstream in("# header\n" + out.str());
    const auto back = read_edge_list(in);
    EXPECT_EQ(back.entries(), M.entries());
    std::istringstream bad("0 x\n");
    EXPECT_THROW(read_edge_list(bad), std::invalid_argument);
}

TEST(Families, SumFamilyDegreesAndConnectivity) {
    for (std::size_t m = 1; m <= 3; ++m)
        for (std::size_t k = 2; k <= 4; ++k) {
            for (const auto& gr : generate_sum_family(m, k)) {
                EXPECT_EQ(gr.components(), 1u);
                for (auto d : gr.degrees()) EXPECT_EQ(d, m);
            }
        }
    // Gamma(2,k): the k-cycle is the only connected 2-regular multigraph (k >= 3); k = 2 is the double edge
    EXPECT_EQ(generate_sum_family(2, 4).size(), 1u);
    EXPECT_EQ(generate_sum_family(1, 3).size(), 0u);
}

TEST(Families, BilinearDegrees) {
    for (const auto& gr : generate_bilinear_family(1, 2, 2)) {
        const auto d = gr.degrees();
        for (std::size_t v = 0; v < gr.V; ++v) EXPECT_EQ(d[v], v % 2 == 0 ? 2u : 3u);
        EXPECT_EQ(gr.components(), 1u);
    }
}

TEST(Cumulant, SumFamilyBoundary) {
    FamilySpec fam{FamilySpec::Kind::sum, 2, 1};
    const auto at = cumulant_inequality_check(fam, {Rational(1, 2)}, 4);
    EXPECT_EQ(at.alpha_k, 2);
    EXPECT_TRUE(at.holds);
    EXPECT_FALSE(at.strict);
    const auto over = cumulant_inequality_check(fam, {Rational(3, 5)}, 4);
    EXPECT_FALSE(over.holds);
    EXPECT_FALSE(over.closed_form_member);
}

TEST(Cumulant, BilinearCornerD) {
    FamilySpec fam{FamilySpec::Kind::bilinear, 1, 1};
    const auto r = cumulant_inequality_check(fam, {0, Rational(1, 2)}, 2);
    EXPECT_TRUE(r.holds);
    EXPECT_FALSE(r.strict);
    EXPECT_TRUE(r.closed_form_member);
}

TEST(Cumulant, SumThresholdIsOneMinusInverseDegree) {
    for (std::size_t m = 1; m <= 3; ++m) EXPECT_EQ(sum_family_threshold(m, 4), Rational(1) - Rational(1, std::int64_t(m))) << m;
}

TEST(Cumulant, BilinearRegionVertices) {
    // Closed-form corners for m < n; the region also holds the box corner (0,0).
    for (auto [m, n] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {2, 3}}) {
        const auto reg = bilinear_cumulant_region(std::size_t(m), std::size_t(n), 4);
        std::set<std::pair<Rational, Rational>> got(reg.vertices.begin(), reg.vertices.end());
        std::set<std::pair<Rational, Rational>> want{{Rational(1) - Rational(1, m + n), 0},
                                                     {Rational(1) - Rational(1, n), Rational(m, 2 * n)},
                                                     {Rational(1) - Rational(1, m), Rational(1, 2)},
                                                     {0, Rational(1, 2)},
                                                     {0, 0}};
        EXPECT_EQ(got, want) << "m=" << m << " n=" << n;
    }
}
