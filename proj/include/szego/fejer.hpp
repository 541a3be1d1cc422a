#pragma once

// Toeplitz traces, Fejer matroid integrals, graph convolutions, their limits
// and the convergence check tying them together.
//
// Conventions. On the torus the window is {-T/2..T/2}^d (N = T + 1 points
// per axis) and mu is the normalised Lebesgue measure, so Toeplitz entries
// are plain Fourier coefficients. On the line mu is Lebesgue measure, the
// transform is fhat(x) = int exp(i x lambda) f(lambda) d lambda and the
// truncated operator is discretised by a midpoint Nystrom rule.

#include "szego/graph_core.hpp"
#include "szego/kernels.hpp"
#include "szego/quadrature.hpp"
#include "szego/symbols.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace szego {

inline constexpr std::size_t kMaxToeplitzSize = 4096;
inline constexpr std::size_t kMaxGridEvaluations = std::size_t(1) << 26;

// ---------------------------------------------------------------------------
// symbol checks and norms

struct SymbolCheck {
    bool even_ok = true;   ///< evenness claim holds on the sample grid
    bool finite_ok = true; ///< the declared L_p norm is finite on the grid
    double norm = 0;       ///< the declared-p norm (sup norm when z = 0)
};

/// L_p norm of f (p = inf for p <= 0). Torus: normalised grid mean with G
/// points per axis. Line (d = 1): Gauss panels on [-L, L].
inline double symbol_norm(const SpectralSymbol& f, double p, std::size_t G = 4096, double L = 40.0) {
    const bool sup = !(p > 0) || std::isinf(p);
    if (f.domain.torus()) {
        const int d = f.domain.d;
        const std::size_t Gd = d == 1 ? G : std::min<std::size_t>(G, 512);
        const double h = 2 * M_PI / double(Gd);
        double best = 0;
        quad::KahanSum s;
        const std::size_t count = d == 1 ? Gd : Gd * Gd;
        for (std::size_t i = 0; i < count; ++i) {
            // offset half a step so power-law singularities at 0 are never hit
            std::vector<double> x = d == 1 ? std::vector<double>{-M_PI + h * (double(i) + 0.5)}
                                           : std::vector<double>{-M_PI + h * (double(i / Gd) + 0.5), -M_PI + h * (double(i % Gd) + 0.5)};
            const double a = std::abs(f.eval(x));
            best = std::max(best, a);
            if (!sup) s.add(std::pow(a, p));
        }
        return sup ? best : std::pow(s.value() / double(count), 1 / p);
    }
    if (f.domain.d != 1) throw std::invalid_argument("symbol_norm: line symbols with d = 1 only");
    const auto br = quad::uniform_breaks(-L, L, 2 * L / double(std::max<std::size_t>(G / 20, 64)));
    if (sup) {
        double best = 0;
        for (std::size_t i = 0; i + 1 < br.size(); ++i)
            for (int j = 0; j <= 20; ++j) best = std::max(best, std::abs(f.eval({br[i] + (br[i + 1] - br[i]) * j / 20.0})));
        return best;
    }
    return std::pow(quad::panels([&](double x) { return std::pow(std::abs(f.eval({x})), p); }, br), 1 / p);
}

/// Checks the evenness flag and the declared integrability on a sample grid.
inline SymbolCheck check_symbol(const SpectralSymbol& f, std::size_t G = 2048) {
    SymbolCheck c;
    if (f.even && f.domain.d == 1) {
        const double span = f.domain.torus() ? M_PI : 20.0;
        for (std::size_t i = 1; i < G; ++i) {
            const double x = span * double(i) / double(G);
            const cplx a = f.eval({x}), b = f.eval({-x});
            if (std::abs(a - b) > 1e-9 * (1 + std::abs(a))) c.even_ok = false;
        }
    }
    const double p = f.z == 0 ? 0.0 : 1.0 / to_double(f.z);
    c.norm = symbol_norm(f, p, G);
    c.finite_ok = std::isfinite(c.norm);
    return c;
}

// ---------------------------------------------------------------------------
// Toeplitz matrices and traces

using ComplexMatrix = Eigen::MatrixXcd;

namespace detail {

/// fhat(m h) for m = -count..count on the line through one FFT of length
/// M >= 2 count + 1 with spectral step 2 pi / (M h).
inline std::vector<cplx> line_transform_lags(const SpectralSymbol& f, double h, std::size_t count) {
    std::size_t M = 1;
    while (M < 4 * count + 2) M <<= 1;
    M = std::max<std::size_t>(M, 1 << 14);
    const double dl = 2 * M_PI / (double(M) * h);
    std::vector<cplx> buf(M);
    for (std::size_t j = 0; j < M; ++j) buf[j] = f.eval({-M_PI / h + dl * double(j)}) * dl;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft_1d(static_cast<int>(M), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    // sum_j f(l_j) e^{i m h l_j} dl with l_j = -pi/h + dl j: phase e^{-i m pi} = (-1)^m
    std::vector<cplx> out(2 * count + 1);
    for (long long m = -static_cast<long long>(count); m <= static_cast<long long>(count); ++m) {
        const auto k = static_cast<std::size_t>((m % static_cast<long long>(M) + static_cast<long long>(M)) % static_cast<long long>(M));
        out[static_cast<std::size_t>(m + static_cast<long long>(count))] = (std::llabs(m) % 2 ? -1.0 : 1.0) * buf[k];
    }
    return out;
}

}  // namespace detail

/// Nystrom grid size used for line-domain operators.
inline std::size_t nystrom_points = 1 << 12;

/// Torus: entries fhat(t - s) over the window (multi-indices in row-major
/// order for d = 2). Line: fhat(t_j - t_k) h on the midpoint grid of
/// [-T/2, T/2] with N = nystrom_points nodes.
inline ComplexMatrix toeplitz_matrix(const SpectralSymbol& f, double T, std::size_t cap = kMaxToeplitzSize) {
    f.domain.validate();
    if (f.domain.torus()) {
        const auto Ti = std::llround(T);
        const std::size_t N = window_size(Ti);
        const int d = f.domain.d;
        const std::size_t size = d == 1 ? N : N * N;
        if (size > cap) throw std::length_error("toeplitz_matrix: size " + std::to_string(size) + " exceeds cap");
        const auto tab = fourier_coefficients(f, static_cast<long long>(N) - 1);
        ComplexMatrix A(size, size);
        if (d == 1) {
            for (std::size_t t = 0; t < N; ++t)
                for (std::size_t s = 0; s < N; ++s) A(t, s) = tab.at(static_cast<long long>(t) - static_cast<long long>(s));
        } else {
            for (std::size_t a = 0; a < size; ++a)
                for (std::size_t b = 0; b < size; ++b)
                    A(a, b) = tab.at(static_cast<long long>(a / N) - static_cast<long long>(b / N),
                                     static_cast<long long>(a % N) - static_cast<long long>(b % N));
        }
        return A;
    }
    if (f.domain.d != 1) throw std::invalid_argument("toeplitz_matrix: line operators with d = 1 only");
    const std::size_t N = nystrom_points;
    if (N > cap) throw std::length_error("toeplitz_matrix: Nystrom size exceeds cap");
    const double h = T / double(N);
    const auto lags = detail::line_transform_lags(f, h, N - 1);
    ComplexMatrix A(N, N);
    for (std::size_t t = 0; t < N; ++t)
        for (std::size_t s = 0; s < N; ++s) A(t, s) = lags[t + N - 1 - s] * h;
    return A;
}

namespace detail {

/// Smallest K with |c(k)| below tol * max|c| for all |k| > K.
inline long long effective_support(const FourierTable& t, double tol = 1e-17) {
    double mx = 0;
    for (const auto& v : t.c) mx = std::max(mx, std::abs(v));
    for (long long k = t.nmax; k > 0; --k)
        if (std::abs(t.at(k)) > tol * mx || std::abs(t.at(-k)) > tol * mx) return k;
    return 0;
}

/// Tr[T(f_1) ... T(f_n)] on the 1-d torus as a sum over lag walks
/// k_1 + ... + k_n = 0 weighted by the number of window points t for which
/// every partial position t - (k_1 + ... + k_i) stays inside the window.
inline cplx lag_walk_trace(const std::vector<FourierTable>& tabs, long long N) {
    const std::size_t n = tabs.size();
    std::vector<long long> K(n);
    for (std::size_t i = 0; i < n; ++i) K[i] = std::min(effective_support(tabs[i]), N - 1);
    quad::KahanSum re, im;
    std::function<void(std::size_t, long long, long long, long long, cplx)> walk =
        [&](std::size_t i, long long pos, long long lo, long long hi, cplx acc) {
            if (i + 1 == n) {
                const long long k = -pos;  // closes the walk
                if (std::llabs(k) > K[i]) return;
                const cplx v = acc * tabs[i].at(k) * double(N - (hi - lo));
                re.add(v.real());
                im.add(v.imag());
                return;
            }
            for (long long k = -K[i]; k <= K[i]; ++k) {
                const long long p = pos + k;
                const long long nlo = std::min(lo, p), nhi = std::max(hi, p);
                if (nhi - nlo >= N) continue;
                const cplx c = tabs[i].at(k);
                if (c == cplx(0, 0)) continue;
                walk(i + 1, p, nlo, nhi, acc * c);
            }
        };
    walk(0, 0, 0, 0, cplx(1, 0));
    return {re.value(), im.value()};
}

}  // namespace detail

enum class TraceMethod { automatic, lag_walk, dense };

/// Trace of the ordered product of Toeplitz operators (real part).
inline double trace_product(const std::vector<SpectralSymbol>& fs, double T, TraceMethod method = TraceMethod::automatic) {
    if (fs.empty()) throw std::invalid_argument("trace_product: empty symbol list");
    for (const auto& f : fs)
        if (f.domain.tag != fs.front().domain.tag || f.domain.d != fs.front().domain.d)
            throw std::invalid_argument("trace_product: symbols live on different domains");
    const auto dom = fs.front().domain;
    const bool can_walk = dom.torus() && dom.d == 1;
    if (method == TraceMethod::lag_walk && !can_walk) throw std::invalid_argument("trace_product: lag walk needs the 1-d torus");
    if (can_walk && method != TraceMethod::dense) {
        const auto N = static_cast<long long>(window_size(std::llround(T)));
        std::vector<FourierTable> tabs;
        for (const auto& f : fs) {
            FourierTable t;
            if (f.exact_coefficient) {
                t.nmax = N - 1;
                t.c.resize(static_cast<std::size_t>(2 * N - 1));
                for (long long k = -(N - 1); k <= N - 1; ++k) t.c[static_cast<std::size_t>(k + N - 1)] = f.exact_coefficient(k);
            } else {
                t = fourier_coefficients(f, N - 1);
            }
            tabs.push_back(std::move(t));
        }
        return detail::lag_walk_trace(tabs, N).real();
    }
    ComplexMatrix P = toeplitz_matrix(fs.front(), T);
    for (std::size_t i = 1; i < fs.size(); ++i) P = P * toeplitz_matrix(fs[i], T);
    return P.trace().real();
}

/// 2^{k-1} (k-1)! Tr[(T(b) T(f))^k].
inline double gaussian_qf_cumulant(int k, const SpectralSymbol& b, const SpectralSymbol& f, double T) {
    if (k < 2) throw std::invalid_argument("gaussian_qf_cumulant: k >= 2");
    std::vector<SpectralSymbol> seq;
    for (int i = 0; i < k; ++i) {
        seq.push_back(b);
        seq.push_back(f);
    }
    double fact = 1;
    for (int i = 2; i < k; ++i) fact *= i;
    return std::pow(2.0, k - 1) * fact * trace_product(seq, T);
}

// ---------------------------------------------------------------------------
// Fejer matroid integrals

struct FejerIntegralSpec {
    IncidenceLikeMatrix M;
    std::vector<SpectralSymbol> symbols;  ///< one per column
    SpectralDomain domain{};
    double T = 0;

    void validate() const {
        domain.validate();
        if (symbols.size() != M.E()) throw std::invalid_argument("FejerIntegralSpec: need one symbol per column");
        for (const auto& f : symbols)
            if (f.domain.tag != domain.tag || f.domain.d != domain.d)
                throw std::invalid_argument("FejerIntegralSpec: symbol domain differs from the spec domain");
    }
    /// Every single-row deletion keeps the rank (the rank condition recorded with each spec).
    bool row_deletion_rank_ok() const {
        const auto r = full_rank(M);
        for (std::size_t v = 0; v < M.V(); ++v) {
            std::vector<std::size_t> keep;
            for (std::size_t u = 0; u < M.V(); ++u)
                if (u != v) keep.push_back(u);
            if (rank(M.entries().select_rows(keep)) != r) return false;
        }
        return true;
    }
};

/// Spectral representation on the torus: E-dimensional uniform grid with G
/// points per axis of prod_e f_e(lambda_e) prod_v Delta_T((M lambda)_v).
/// Exact when every f_e is a trigonometric polynomial whose degree plus
/// (T/2) sum_v |M_ve| stays below G.
inline double fejer_graph_integral(const FejerIntegralSpec& spec, std::size_t G) {
    spec.validate();
    if (!spec.domain.torus() || spec.domain.d != 1) throw std::invalid_argument("fejer_graph_integral: grid quadrature on the 1-d torus only");
    const std::size_t E = spec.M.E(), V = spec.M.V();
    if (E > 6) throw std::length_error("fejer_graph_integral: E > 6");
    if (std::pow(double(G), double(E)) > double(kMaxGridEvaluations)) throw std::length_error("fejer_graph_integral: grid too large");
    const double h = 2 * M_PI / double(G);
    std::vector<std::vector<cplx>> vals(E);
    for (std::size_t e = 0; e < E; ++e) vals[e] = sample_grid(spec.symbols[e], G);
    const auto& a = spec.M.entries();
    std::vector<std::size_t> idx(E, 0);
    quad::KahanSum re;
    while (true) {
        cplx prod(1, 0);
        for (std::size_t e = 0; e < E; ++e) prod *= vals[e][idx[e]];
        if (prod != cplx(0, 0)) {
            double kern = 1;
            for (std::size_t v = 0; v < V && kern != 0; ++v) {
                double u = 0;
                for (std::size_t e = 0; e < E; ++e) u += double(a(v, e)) * (-M_PI + h * double(idx[e]));
                kern *= dirichlet(spec.T, u, spec.domain);
            }
            re.add((prod * kern).real());
        }
        std::size_t e = 0;
        for (; e < E; ++e) {
            if (++idx[e] < G) break;
            idx[e] = 0;
        }
        if (e == E) break;
    }
    return re.value() / std::pow(double(G), double(E));
}

/// Time-domain form of the same quantity: sum over t in window^V of
/// prod_e fhat_e((t M)_e), on the 1-d torus.
inline double fejer_graph_integral_time(const FejerIntegralSpec& spec) {
    spec.validate();
    if (!spec.domain.torus() || spec.domain.d != 1) throw std::invalid_argument("fejer_graph_integral_time: 1-d torus only");
    const std::size_t E = spec.M.E(), V = spec.M.V();
    const auto Ti = std::llround(spec.T);
    const auto N = static_cast<long long>(window_size(Ti));
    if (std::pow(double(N), double(V)) > double(kMaxGridEvaluations) * 4) throw std::length_error("fejer_graph_integral_time: window^V too large");
    const auto& a = spec.M.entries();
    std::vector<FourierTable> tabs;
    for (std::size_t e = 0; e < E; ++e) {
        long long colsum = 0;
        for (std::size_t v = 0; v < V; ++v) colsum += std::llabs(a(v, e));
        tabs.push_back(fourier_coefficients(spec.symbols[e], colsum * (Ti / 2)));
    }
    std::vector<long long> t(V, -Ti / 2);
    quad::KahanSum re;
    while (true) {
        cplx prod(1, 0);
        for (std::size_t e = 0; e < E && prod != cplx(0, 0); ++e) {
            long long k = 0;
            for (std::size_t v = 0; v < V; ++v) k += t[v] * a(v, e);
            prod *= tabs[e].at(k);
        }
        re.add(prod.real());
        std::size_t v = 0;
        for (; v < V; ++v) {
            if (++t[v] <= Ti / 2) break;
            t[v] = -Ti / 2;
        }
        if (v == V) break;
    }
    return re.value();
}

/// For a graph whose edges form one cycle: the edges in walk order with a
/// flag telling whether each is traversed tail to head.
inline std::optional<std::vector<std::pair<std::size_t, bool>>> cycle_walk(const IncidenceLikeMatrix& M) {
    if (M.kind() != MatrixKind::graph_incidence || M.E() != M.V() || M.E() < 2) return std::nullopt;
    std::vector<std::vector<std::size_t>> inc(M.V());
    for (std::size_t e = 0; e < M.E(); ++e) {
        auto [u, v] = M.endpoints(e);
        inc[u].push_back(e);
        inc[v].push_back(e);
    }
    for (const auto& l : inc)
        if (l.size() != 2) return std::nullopt;
    std::vector<std::pair<std::size_t, bool>> walk;
    std::vector<bool> used(M.E(), false);
    std::size_t at = 0;
    std::size_t e = inc[0][0];
    while (!used[e]) {
        used[e] = true;
        auto [u, v] = M.endpoints(e);
        const bool forward = u == at;
        walk.emplace_back(e, forward);
        at = forward ? v : u;
        e = inc[at][0] == e ? inc[at][1] : inc[at][0];
    }
    if (walk.size() != M.E()) return std::nullopt;
    return walk;
}

/// J_T: trace of the cycle product when M is a cycle graph (reversed edges
/// enter through the reflected symbol), the time-domain sum otherwise.
inline double fejer_integral_value(const FejerIntegralSpec& spec) {
    spec.validate();
    if (auto walk = cycle_walk(spec.M)) {
        std::vector<SpectralSymbol> seq;
        for (auto [e, fwd] : *walk) seq.push_back(fwd ? spec.symbols[e] : spec.symbols[e].reflected());
        return trace_product(seq, spec.T);
    }
    return fejer_graph_integral_time(spec);
}

// ---------------------------------------------------------------------------
// graph convolutions and limits

namespace detail {

/// Tensor grid: nodes and weights per axis. Torus: G uniform points with
/// weight 1/G (normalised measure). Line: Gauss-Legendre panels on [-L, L].
struct AxisRule {
    std::vector<double> x, w;
};

inline AxisRule axis_rule(const SpectralDomain& dom, std::size_t G, double L) {
    AxisRule r;
    if (dom.torus()) {
        const double h = 2 * M_PI / double(G);
        for (std::size_t i = 0; i < G; ++i) {
            r.x.push_back(-M_PI + h * double(i));
            r.w.push_back(1.0 / double(G));
        }
        return r;
    }
    using rule = boost::math::quadrature::gauss<double, 20>;
    const auto& ab = rule::abscissa();
    const auto& wt = rule::weights();
    const std::size_t panels = std::max<std::size_t>(1, G / 20);
    const double step = 2 * L / double(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = -L + step * (double(p) + 0.5), half = step / 2;
        for (std::size_t j = 0; j < ab.size(); ++j) {
            if (ab[j] == 0) {
                r.x.push_back(mid);
                r.w.push_back(wt[j] * half);
                continue;
            }
            r.x.push_back(mid - half * ab[j]);
            r.w.push_back(wt[j] * half);
            r.x.push_back(mid + half * ab[j]);
            r.w.push_back(wt[j] * half);
        }
    }
    return r;
}

inline std::size_t default_axis_points(std::size_t C, bool torus) {
    if (torus) return C <= 1 ? 4096 : C == 2 ? 256 : 96;
    return C <= 1 ? 4000 : C == 2 ? 400 : 120;
}

}  // namespace detail

struct ConvolutionOptions {
    std::size_t axis_points = 0;  ///< 0 selects a default by C
    double line_cutoff = 12.0;    ///< half-width of the line integration box
    bool use_integer_dual = true; ///< on the torus, use the primitive integer circuit rows
};

struct ConvolutionValue {
    double value = 0;
    bool reliable = true;  ///< false when the declared exponents fail the power-counting condition
    std::string note;
};

/// h(u) = int prod_e f_e(lambda_e) prod_c dmu(y_c) with lambda = y Mstar + u N.
/// On the torus the dual rows must be integral (the primitive integer rows
/// are used by default so the map is well defined on the torus).
inline ConvolutionValue graph_convolution(const IncidenceLikeMatrix& M, const std::vector<SpectralSymbol>& fs,
                                          const std::vector<double>& u, const ConvolutionOptions& opt = {}) {
    if (fs.size() != M.E()) throw std::invalid_argument("graph_convolution: need one symbol per column");
    const auto dom = fs.front().domain;
    if (dom.d != 1) throw std::invalid_argument("graph_convolution: d = 1 only");
    const DualMatrix D = dual_matrix(M);
    const std::size_t C = D.C(), E = M.E();
    if (C > 3) throw std::length_error("graph_convolution: C > 3");
    if (u.size() != D.N.rows()) throw std::invalid_argument("graph_convolution: u must have r(M) entries");
    ConvolutionValue out;
    ExponentVector z;
    for (const auto& f : fs) z.push_back(f.z);
    if (!pcp_membership(M, z, dom.torus() ? PcpCase::C1_torus : PcpCase::C3_lebesgue).member) {
        out.reliable = false;
        out.note = "declared exponents outside the power-counting polytope";
    }
    std::vector<std::vector<double>> Ms(C, std::vector<double>(E));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t e = 0; e < E; ++e)
            Ms[c][e] = dom.torus() && opt.use_integer_dual ? double(D.integer(c, e)) : to_double(D.Mstar(c, e));
    if (dom.torus() && !opt.use_integer_dual && !D.is_integral())
        throw std::invalid_argument("graph_convolution: non-integral dual rows on the torus");
    std::vector<double> base(E, 0.0);
    for (std::size_t e = 0; e < E; ++e)
        for (std::size_t i = 0; i < u.size(); ++i) base[e] += u[i] * to_double(D.N(i, e));
    if (C == 0) {
        cplx p(1, 0);
        for (std::size_t e = 0; e < E; ++e) p *= fs[e].eval({base[e]});
        out.value = p.real();
        return out;
    }
    const std::size_t G = opt.axis_points ? opt.axis_points : detail::default_axis_points(C, dom.torus());
    const auto rule = detail::axis_rule(dom, G, opt.line_cutoff);
    const std::size_t P = rule.x.size();
    if (std::pow(double(P), double(C)) > double(kMaxGridEvaluations)) throw std::length_error("graph_convolution: grid too large");
    std::vector<std::size_t> idx(C, 0);
    std::vector<double> lam(E);
    quad::KahanSum s;
    while (true) {
        double w = 1;
        lam = base;
        for (std::size_t c = 0; c < C; ++c) {
            w *= rule.w[idx[c]];
            for (std::size_t e = 0; e < E; ++e) lam[e] += rule.x[idx[c]] * Ms[c][e];
        }
        cplx p(1, 0);
        for (std::size_t e = 0; e < E && p != cplx(0, 0); ++e) p *= fs[e].eval({lam[e]});
        s.add(w * p.real());
        std::size_t c = 0;
        for (; c < C; ++c) {
            if (++idx[c] < P) break;
            idx[c] = 0;
        }
        if (c == C) break;
    }
    out.value = s.value();
    return out;
}

/// The limit integral: the graph convolution at u = 0.
inline ConvolutionValue limit_integral(const IncidenceLikeMatrix& M, const std::vector<SpectralSymbol>& fs,
                                       const ConvolutionOptions& opt = {}) {
    return graph_convolution(M, fs, std::vector<double>(full_rank(M), 0.0), opt);
}

// ---------------------------------------------------------------------------
// convergence check

struct SzegoRow {
    double T = 0, value = 0, ratio = 0, target = 0, rel_error = 0;
};

struct SzegoReport {
    std::vector<SzegoRow> rows;
    double k_M = 1, limit = 0;
    std::size_t co = 0;
    bool pcp_ok = true;
    bool tail_decreasing = true;  ///< relative errors non-increasing over the last half of the T list

    void write_csv(std::ostream& out) const {
        out.precision(17);
        out << "T,value,ratio,target,rel_error\n";
        for (const auto& r : rows) out << r.T << ',' << r.value << ',' << r.ratio << ',' << r.target << ',' << r.rel_error << '\n';
    }
};

/// J_T / T^{d co(M)} against k_M times the limit integral, for each T.
/// Torus with d = 1; k_M comes from lattice counting on a small T ladder.
inline SzegoReport szego_limit_check(const FejerIntegralSpec& spec_in, const std::vector<double>& T_list,
                                     const ConvolutionOptions& opt = {}) {
    FejerIntegralSpec spec = spec_in;
    spec.validate();
    if (!spec.domain.torus() || spec.domain.d != 1) throw std::invalid_argument("szego_limit_check: 1-d torus only");
    SzegoReport rep;
    ExponentVector z;
    for (const auto& f : spec.symbols) z.push_back(f.z);
    rep.pcp_ok = pcp_membership(spec.M, z, PcpCase::C1_torus).member;
    if (!rep.pcp_ok) throw std::invalid_argument("szego_limit_check: declared exponents outside the power-counting polytope");
    rep.co = corank(spec.M);
    if (is_unimodular(spec.M) || cycle_walk(spec.M)) {
        rep.k_M = 1;
    } else {
        const auto lc = lattice_count_kM(spec.M, std::vector<std::int64_t>(spec.M.E(), 0), {8, 16, 24, 32});
        rep.k_M = lc.k_M;
    }
    rep.limit = limit_integral(spec.M, spec.symbols, opt).value;
    const double target = rep.k_M * rep.limit;
    for (double T : T_list) {
        spec.T = T;
        SzegoRow row;
        row.T = T;
        row.value = fejer_integral_value(spec);
        row.ratio = row.value / std::pow(T, double(rep.co));
        row.target = target;
        row.rel_error = std::abs(row.ratio - target) / std::max(std::abs(target), 1e-300);
        rep.rows.push_back(row);
    }
    const std::size_t start = rep.rows.size() / 2;
    for (std::size_t i = start + 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].rel_error > rep.rows[i - 1].rel_error * (1 + 1e-9) + 1e-14) rep.tail_decreasing = false;
    return rep;
}

// ---------------------------------------------------------------------------
// Hermite-sum variance

struct ConvolutionPower {
    double value = 0;
    bool condition_ok = true;  ///< declared z <= 1 - 1/l
};

/// f^{*l}(0), the (l-1)-fold self-convolution of f evaluated at the origin.
/// Torus: sum_k c_k^l over the grid FFT coefficients (convolution theorem,
/// normalised measure). Line: zero-padded FFT convolution on [-L, L).
inline ConvolutionPower hermite_sum_variance(const SpectralSymbol& f, int l, std::size_t G = 1 << 14, double L = 40.0) {
    if (l < 1) throw std::invalid_argument("hermite_sum_variance: l >= 1");
    if (f.domain.d != 1) throw std::invalid_argument("hermite_sum_variance: d = 1 only");
    ConvolutionPower out;
    out.condition_ok = f.z <= Rational(l - 1, l);
    if (f.domain.torus()) {
        const auto tab = fourier_coefficients(f, static_cast<long long>(G / 2) - 1, G);
        quad::KahanSum re;
        for (const auto& c : tab.c) re.add(std::pow(c, l).real());
        out.value = re.value();
        return out;
    }
    // Line: samples on [-L, L) with step h; padded length keeps l-fold sums alias free.
    const double h = 2 * L / double(G);
    std::size_t M = 1;
    while (M < static_cast<std::size_t>(l) * G) M <<= 1;
    std::vector<cplx> buf(M, cplx(0, 0));
    for (std::size_t j = 0; j < G; ++j) buf[j] = f.eval({-L + h * double(j)}) * h;
    fftw_plan fwd, bwd;
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd = fftw_plan_dft_1d(static_cast<int>(M), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(M), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (auto& v : buf) v = std::pow(v, l);
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    // The l-fold sum of offsets -L sits at index j with -l L + h j = 0.
    const auto j0 = static_cast<std::size_t>(std::llround(double(l) * L / h));
    out.value = (buf[j0 % M] / double(M)).real() / h;
    return out;
}

}  // namespace szego
