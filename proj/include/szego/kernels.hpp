#pragma once

/** @file
 * Dirichlet and multivariate Fejer kernels on the torus and the line,
 * their L_p norms (quadrature and closed-form bounds), the p = 1 log
 * asymptotics, and the kernel-property convergence check.
 *
 * Discrete windows are I_T = {-T/2, ..., T/2} with T even, so the window
 * holds N(T) = T + 1 points. Norms of the discrete kernel follow the
 * [0,1) convention with the T-term sum sum_{t<T} exp(2 pi i t x).
 */

#include "szego/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace szego {

enum class DomainTag { torus, line };

struct SpectralDomain {
    DomainTag tag = DomainTag::torus;
    int d = 1;

    bool torus() const noexcept { return tag == DomainTag::torus; }
    void validate() const {
        if (d != 1 && d != 2) throw std::invalid_argument("spectral domain dimension must be 1 or 2");
    }
};

inline std::string to_string(DomainTag t) { return t == DomainTag::torus ? "torus" : "line"; }
inline DomainTag parse_domain_tag(const std::string& s) {
    if (s == "torus" || s == "discrete") return DomainTag::torus;
    if (s == "line" || s == "continuous") return DomainTag::line;
    throw std::invalid_argument("unknown spectral domain: " + s);
}

/// Reduce an angle to [-pi, pi).
inline double wrap_angle(double x) {
    const double two_pi = 2 * M_PI;
    x = std::fmod(x + M_PI, two_pi);
    if (x < 0) x += two_pi;
    return x - M_PI;
}

/// Number of points of the discrete window; rejects odd or nonpositive T.
inline std::size_t window_size(long long T) {
    if (T <= 0 || T % 2 != 0) throw std::invalid_argument("discrete windows need an even T > 0, got " + std::to_string(T));
    return static_cast<std::size_t>(T) + 1;
}

namespace detail {

inline double dirichlet_discrete_1d(long long T, double lambda) {
    const double x = wrap_angle(lambda);
    const double N = static_cast<double>(T) + 1;
    if (std::abs(x) < 1e-6) {
        // sin(N x/2)/sin(x/2) = N - N (N^2 - 1) x^2 / 24 + O(x^4)
        return N - N * (N * N - 1) * x * x / 24.0;
    }
    return std::sin(N * x / 2) / std::sin(x / 2);
}

inline double dirichlet_continuous_1d(double T, double lambda) {
    const double x = T * lambda / 2;
    if (std::abs(x) < 1e-6) return T * (1 - x * x / 6.0);
    return std::sin(x) / (lambda / 2);
}

}  // namespace detail

/// Delta_T(lambda): sum over the window of exp(i t lambda) (torus) or the
/// integral of exp(i t lambda) over [-T/2, T/2] (line); product over coordinates.
inline double dirichlet(double T, const std::vector<double>& lambda, SpectralDomain dom) {
    dom.validate();
    if (static_cast<int>(lambda.size()) != dom.d) throw std::invalid_argument("dirichlet: point dimension mismatch");
    if (T <= 0) throw std::invalid_argument("dirichlet: T must be positive");
    double out = 1;
    for (double x : lambda) {
        if (dom.torus()) {
            const auto Ti = std::llround(T);
            window_size(Ti);
            out *= detail::dirichlet_discrete_1d(Ti, x);
        } else {
            out *= detail::dirichlet_continuous_1d(T, x);
        }
    }
    return out;
}

inline double dirichlet(double T, double lambda, SpectralDomain dom = {}) { return dirichlet(T, std::vector<double>{lambda}, dom); }

/// Multivariate Fejer kernel Phi*_T(u_1..u_{n-1}) as a density with respect
/// to Lebesgue measure on S^{n-1}. Normaliser: (2 pi)^{(n-1)d} N^d with
/// N = T + 1 on the torus and N = T on the line, so it integrates to one.
inline double fejer_multi(double T, const std::vector<std::vector<double>>& u, SpectralDomain dom, std::size_t n) {
    dom.validate();
    if (n < 2) throw std::invalid_argument("fejer_multi: n >= 2 required");
    if (u.size() != n - 1) throw std::invalid_argument("fejer_multi: need n-1 points");
    std::vector<double> minus_sum(static_cast<std::size_t>(dom.d), 0.0);
    double prod = 1;
    for (const auto& ue : u) {
        prod *= dirichlet(T, ue, dom);
        for (int j = 0; j < dom.d; ++j) minus_sum[static_cast<std::size_t>(j)] -= ue.at(static_cast<std::size_t>(j));
    }
    prod *= dirichlet(T, minus_sum, dom);
    const double N = dom.torus() ? static_cast<double>(window_size(std::llround(T))) : T;
    const double norm = std::pow(2 * M_PI, static_cast<double>((n - 1) * static_cast<std::size_t>(dom.d))) * std::pow(N, dom.d);
    return prod / norm;
}

// ---------------------------------------------------------------------------
// L_p norms

enum class NormMethod { quadrature, closed_form_bound };

namespace detail {

/// Mean of |sin z|^p over a period.
inline double mean_abs_sin_pow(double p) {
    return std::tgamma((p + 1) / 2) / (std::sqrt(M_PI) * std::tgamma(p / 2 + 1));
}

/// integral over R of dz / (1 + |z|^p), p > 1.
inline double inv_one_plus_pow_integral(double p) { return 2 * (M_PI / p) / std::sin(M_PI / p); }

/// integral_0^1 |sin(pi T x)/sin(pi x)|^p dx with panels between the zeros k/T.
inline double discrete_kernel_pnorm_pow(long long T, double p) {
    if (T == 1) return 1.0;
    const double Td = static_cast<double>(T);
    auto f = [&](double x) {
        const double s = std::sin(M_PI * x);
        const double v = std::abs(s) < 1e-300 ? Td : std::sin(M_PI * Td * x) / s;
        return std::pow(std::abs(v), p);
    };
    // Symmetric about x = 1/2: integrate [0, 1/2] twice.
    quad::KahanSum s;
    const auto half_panels = static_cast<long long>(T / 2);
    for (long long k = 0; k < half_panels; ++k) s.add(quad::gauss_panel(f, k / Td, (k + 1) / Td));
    double total = 2 * s.value();
    if (T % 2 == 1) total += 2 * quad::gauss_panel(f, half_panels / Td, 0.5);
    return total;
}

/// integral over R of |sin z / z|^p dz via zero-aligned panels on [0, Z]
/// and the averaged tail <|sin|^p> Z^{1-p}/(p-1).
inline double sinc_pnorm_pow(double p) {
    const double Z = 4000 * M_PI;
    auto f = [&](double z) { return z < 1e-8 ? 1.0 : std::pow(std::abs(std::sin(z) / z), p); };
    quad::KahanSum s;
    for (int k = 0; k < 4000; ++k) s.add(quad::gauss_panel(f, k * M_PI, (k + 1) * M_PI));
    const double tail = mean_abs_sin_pow(p) * std::pow(Z, 1 - p) / (p - 1);
    return 2 * (s.value() + tail);
}

}  // namespace detail

/// ||Delta_T||_p. Torus: the T-term kernel on [0,1). Line: Lebesgue on R.
/// d = 2 is the d-th power of the one-dimensional value (product kernel).
inline double kernel_norm(double T, double p, SpectralDomain dom, NormMethod method) {
    dom.validate();
    if (T <= 0) throw std::invalid_argument("kernel_norm: T must be positive");
    if (method == NormMethod::closed_form_bound && p <= 1) throw std::invalid_argument("kernel_norm: bound needs p > 1");
    if (p < 1) throw std::invalid_argument("kernel_norm: p >= 1 required (use dirichlet_l1_asymptotic for p = 1)");
    double one_dim = 0;
    if (dom.torus()) {
        const auto Ti = std::llround(T);
        if (method == NormMethod::quadrature) {
            one_dim = std::pow(detail::discrete_kernel_pnorm_pow(Ti, p), 1 / p);
        } else {
            // |D_T(x)| <= 2 pi T / (1 + 2 pi T |x|) on [-1/2, 1/2], then (1 + y)^p >= 1 + y^p.
            const double C = 2 * M_PI;
            const double val = std::pow(C, p) * std::pow(T, p - 1) / (2 * M_PI) * detail::inv_one_plus_pow_integral(p);
            one_dim = std::pow(val, 1 / p);
        }
    } else {
        if (method == NormMethod::quadrature) {
            one_dim = std::pow(T, 1 - 1 / p) * std::pow(2 * detail::sinc_pnorm_pow(p), 1 / p);
        } else {
            // T |sinc z| <= 2T / (1 + |z|) with z = T lambda / 2.
            const double val = std::pow(2.0, p + 1) * std::pow(T, p - 1) * detail::inv_one_plus_pow_integral(p);
            one_dim = std::pow(val, 1 / p);
        }
    }
    return std::pow(one_dim, dom.d);
}

struct L1Asymptotic {
    double value = 0;  ///< integral_0^1 |sum_{t<T} exp(2 pi i t x)| dx
    double ratio = 0;  ///< value / ((4/pi^2) log T); NaN at T = 1
};

inline L1Asymptotic dirichlet_l1_asymptotic(long long T) {
    if (T < 1) throw std::invalid_argument("dirichlet_l1_asymptotic: T >= 1 required");
    L1Asymptotic out;
    out.value = detail::discrete_kernel_pnorm_pow(T, 1.0);
    out.ratio = T >= 2 ? out.value / (4 / (M_PI * M_PI) * std::log(static_cast<double>(T))) : std::nan("");
    return out;
}

// ---------------------------------------------------------------------------
// kernel property

struct KernelPropertyRow {
    double T = 0, value = 0, deviation = 0;
};

struct KernelPropertyReport {
    double target = 0;  ///< C(0,...,0)
    std::vector<KernelPropertyRow> rows;
    bool decreasing = false;  ///< |deviation| non-increasing along the T list
    std::string note;

    void write_csv(std::ostream& out) const {
        out << "T,value,deviation\n";
        out.precision(17);
        for (const auto& r : rows) out << r.T << ',' << r.value << ',' << r.deviation << '\n';
    }
};

using PointFunction = std::function<double(const std::vector<double>&)>;

/// integral of C(u) Phi*_T(u) over S^{n-1}, for each T, against C(0).
/// Torus: uniform grid with `grid` points per axis (0 selects 2T + 8, exact
/// for trigonometric C of degree below 8). Line: n = 2 and d = 1 only,
/// panels aligned with the zeros of the Fejer kernel on |u| <= cutoff, plus
/// the bounded-C tail estimate reported in `note`.
inline KernelPropertyReport verify_kernel_property(const PointFunction& C, const std::vector<double>& T_list, std::size_t n,
                                                   SpectralDomain dom, std::size_t grid = 0) {
    dom.validate();
    if (n < 2) throw std::invalid_argument("verify_kernel_property: n >= 2");
    const std::size_t dims = (n - 1) * static_cast<std::size_t>(dom.d);
    KernelPropertyReport rep;
    rep.target = C(std::vector<double>(dims, 0.0));
    for (double T : T_list) {
        KernelPropertyRow row;
        row.T = T;
        if (dom.torus()) {
            const std::size_t G = grid ? grid : static_cast<std::size_t>(2 * std::llround(T) + 8);
            if (std::pow(double(G), double(dims)) > double(1ULL << 26))
                throw std::length_error("verify_kernel_property: grid too large");
            std::vector<std::size_t> idx(dims, 0);
            std::vector<double> pt(dims);
            std::vector<std::vector<double>> u(n - 1, std::vector<double>(static_cast<std::size_t>(dom.d)));
            const double h = 2 * M_PI / double(G);
            quad::KahanSum s;
            while (true) {
                for (std::size_t j = 0; j < dims; ++j) {
                    pt[j] = -M_PI + h * double(idx[j]);
                    u[j / static_cast<std::size_t>(dom.d)][j % static_cast<std::size_t>(dom.d)] = pt[j];
                }
                s.add(C(pt) * fejer_multi(T, u, dom, n));
                std::size_t j = 0;
                for (; j < dims; ++j) {
                    if (++idx[j] < G) break;
                    idx[j] = 0;
                }
                if (j == dims) break;
            }
            row.value = s.value() * std::pow(h, double(dims));
        } else {
            if (n != 2 || dom.d != 1) throw std::invalid_argument("verify_kernel_property: line domain supports n = 2, d = 1");
            const double step = 2 * M_PI / T;  // zeros of the Fejer kernel
            const double cutoff = 2000 * step;
            auto f = [&](double x) { return C({x}) * fejer_multi(T, {{x}}, dom, 2); };
            row.value = quad::panels(f, quad::uniform_breaks(-cutoff, cutoff, step));
            // Tail of the density beyond the cutoff: int_{|u|>L} 4 sin^2/(2 pi T u^2) <= 4/(pi T L).
            rep.note = "line tail bound per T <= sup|C| * 4/(pi T L), L = 2000 * 2pi/T";
        }
        row.deviation = row.value - rep.target;
        rep.rows.push_back(row);
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (std::abs(rep.rows[i].deviation) > std::abs(rep.rows[i - 1].deviation) + 1e-15) rep.decreasing = false;
    return rep;
}

}  // namespace szego
