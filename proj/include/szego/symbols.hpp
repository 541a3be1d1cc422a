#pragma once

/** @file
 * Spectral symbols: point evaluators on the torus or the line with their
 * declared integrability exponent, built-in families, and Fourier
 * coefficient tables computed by dense-grid summation (FFTW).
 */

#include "szego/exact.hpp"
#include "szego/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace szego {

using cplx = std::complex<double>;

/// A function on the spectral domain S with its declared L_p class
/// (stored as z = 1/p) and an evenness flag.
struct SpectralSymbol {
    std::string family = "custom";
    std::map<std::string, double> params;
    SpectralDomain domain{};
    std::function<cplx(const std::vector<double>&)> eval;
    Rational z = 0;     ///< declared inverse integrability index 1/p
    bool even = true;
    bool real = true;
    /// Exact Fourier coefficient when the family knows it in closed form (d = 1 torus).
    std::function<cplx(long long)> exact_coefficient;

    cplx operator()(const std::vector<double>& x) const { return eval(x); }
    cplx operator()(double x) const { return eval(std::vector<double>{x}); }

    /// f(-lambda).
    SpectralSymbol reflected() const {
        SpectralSymbol s = *this;
        auto f = eval;
        s.eval = [f](const std::vector<double>& x) {
            std::vector<double> y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = -x[i];
            return f(y);
        };
        if (exact_coefficient) {
            auto c = exact_coefficient;
            s.exact_coefficient = [c](long long k) { return c(-k); };
        }
        s.family = family + "_reflected";
        return s;
    }
};

namespace symbols {

inline SpectralSymbol constant(double c, SpectralDomain dom = {}) {
    SpectralSymbol s;
    s.family = "constant";
    s.params = {{"c", c}};
    s.domain = dom;
    s.eval = [c](const std::vector<double>&) { return cplx(c, 0); };
    s.exact_coefficient = [c](long long k) { return k == 0 ? cplx(c, 0) : cplx(0, 0); };
    return s;
}

/// a_0 + 2 sum_k a_k cos(k lambda) on the torus (d = 1), so fhat(+-k) = a_k.
inline SpectralSymbol cosine_band(const std::vector<double>& a) {
    if (a.empty()) throw std::invalid_argument("cosine_band: need at least a_0");
    SpectralSymbol s;
    s.family = "cosine_band";
    for (std::size_t k = 0; k < a.size(); ++k) s.params["a" + std::to_string(k)] = a[k];
    s.eval = [a](const std::vector<double>& x) {
        double v = a[0];
        for (std::size_t k = 1; k < a.size(); ++k) v += 2 * a[k] * std::cos(static_cast<double>(k) * x.at(0));
        return cplx(v, 0);
    };
    s.exact_coefficient = [a](long long k) {
        const auto m = static_cast<std::size_t>(std::llabs(k));
        return m < a.size() ? cplx(a[m], 0) : cplx(0, 0);
    };
    return s;
}

/// scale / (1 - 2 phi cos lambda + phi^2): the AR(1) spectral shape (torus, d = 1).
inline SpectralSymbol ar1(double phi, double scale = 1.0) {
    if (!(std::abs(phi) < 1)) throw std::invalid_argument("ar1: |phi| < 1 required");
    SpectralSymbol s;
    s.family = "ar1";
    s.params = {{"phi", phi}, {"scale", scale}};
    s.eval = [phi, scale](const std::vector<double>& x) {
        return cplx(scale / (1 - 2 * phi * std::cos(x.at(0)) + phi * phi), 0);
    };
    s.exact_coefficient = [phi, scale](long long k) {
        return cplx(scale * std::pow(phi, static_cast<double>(std::llabs(k))) / (1 - phi * phi), 0);
    };
    return s;
}

/// c / (|lambda|^{2 alpha} (1 + lambda^2)^gamma) on the line.
inline SpectralSymbol frbm(double alpha, double gamma, double c) {
    SpectralSymbol s;
    s.family = "frbm";
    s.params = {{"alpha", alpha}, {"gamma", gamma}, {"c", c}};
    s.domain = {DomainTag::line, 1};
    s.eval = [alpha, gamma, c](const std::vector<double>& x) {
        const double l = x.at(0);
        return cplx(c / (std::pow(std::abs(l), 2 * alpha) * std::pow(1 + l * l, gamma)), 0);
    };
    return s;
}

/// amplitude * exp(-lambda^2 / (2 s^2)) per coordinate; line or torus (wrapped argument).
inline SpectralSymbol gaussian_bump(double s_width, double amplitude = 1.0, SpectralDomain dom = {DomainTag::line, 1}) {
    SpectralSymbol s;
    s.family = "gaussian";
    s.params = {{"s", s_width}, {"amplitude", amplitude}};
    s.domain = dom;
    s.eval = [s_width, amplitude, dom](const std::vector<double>& x) {
        double v = amplitude;
        for (double xi : x) {
            const double y = dom.torus() ? wrap_angle(xi) : xi;
            v *= std::exp(-y * y / (2 * s_width * s_width));
        }
        return cplx(v, 0);
    };
    return s;
}

/// |lambda|^{-beta} on the torus (d = 1): in L_p exactly for p < 1/beta.
inline SpectralSymbol power_law(double beta) {
    SpectralSymbol s;
    s.family = "power_law";
    s.params = {{"beta", beta}};
    s.eval = [beta](const std::vector<double>& x) { return cplx(std::pow(std::abs(wrap_angle(x.at(0))), -beta), 0); };
    return s;
}

/// f(x1) g(x2) on a d = 2 domain.
inline SpectralSymbol tensor(const SpectralSymbol& f, const SpectralSymbol& g) {
    SpectralSymbol s;
    s.family = "tensor(" + f.family + "," + g.family + ")";
    s.domain = {f.domain.tag, 2};
    auto fe = f.eval, ge = g.eval;
    s.eval = [fe, ge](const std::vector<double>& x) { return fe({x.at(0)}) * ge({x.at(1)}); };
    s.even = f.even && g.even;
    s.real = f.real && g.real;
    s.z = std::max(f.z, g.z);
    return s;
}

/// Builds a family member from a name and a parameter map (the JSON/config route).
inline SpectralSymbol from_name(const std::string& name, const std::map<std::string, double>& p) {
    auto get = [&](const std::string& k, std::optional<double> dflt = std::nullopt) {
        auto it = p.find(k);
        if (it != p.end()) return it->second;
        if (dflt) return *dflt;
        throw std::invalid_argument("symbol family '" + name + "' needs parameter '" + k + "'");
    };
    if (name == "constant") return constant(get("c"));
    if (name == "cosine_band" || name == "cosine-band") {
        std::vector<double> a;
        for (std::size_t k = 0;; ++k) {
            auto it = p.find("a" + std::to_string(k));
            if (it == p.end()) break;
            a.push_back(it->second);
        }
        return cosine_band(a);
    }
    if (name == "ar1" || name == "AR1") return ar1(get("phi"), get("scale", 1.0));
    if (name == "frbm" || name == "FRBM") return frbm(get("alpha"), get("gamma"), get("c", 1.0));
    if (name == "gaussian") return gaussian_bump(get("s"), get("amplitude", 1.0));
    if (name == "power_law") return power_law(get("beta"));
    throw std::invalid_argument("unknown symbol family: " + name);
}

}  // namespace symbols

// ---------------------------------------------------------------------------
// Fourier coefficients

/// fhat(k) for |k_j| <= nmax, stored densely; index with at(k) or at(k1, k2).
struct FourierTable {
    long long nmax = 0;
    int d = 1;
    std::vector<cplx> c;

    std::size_t side() const { return static_cast<std::size_t>(2 * nmax + 1); }
    cplx at(long long k) const {
        if (d != 1) throw std::logic_error("FourierTable::at(k) on a 2-d table");
        if (std::llabs(k) > nmax) return {0, 0};
        return c[static_cast<std::size_t>(k + nmax)];
    }
    cplx at(long long k1, long long k2) const {
        if (d != 2) throw std::logic_error("FourierTable::at(k1,k2) on a 1-d table");
        if (std::llabs(k1) > nmax || std::llabs(k2) > nmax) return {0, 0};
        return c[static_cast<std::size_t>(k1 + nmax) * side() + static_cast<std::size_t>(k2 + nmax)];
    }
};

namespace detail {
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// fhat(k) = integral of exp(i k . lambda) f(lambda) over the torus with the
/// normalised measure, by a G-point (per axis) Riemann sum evaluated with an
/// FFT. G = 0 picks max(4096, 8 nmax) for d = 1 and max(256, 4 nmax) for d = 2.
inline FourierTable fourier_coefficients(const SpectralSymbol& f, long long nmax, std::size_t G = 0) {
    if (!f.domain.torus()) throw std::invalid_argument("fourier_coefficients: torus symbols only (use fourier_transform_line)");
    if (nmax < 0) throw std::invalid_argument("fourier_coefficients: nmax >= 0");
    FourierTable t;
    t.nmax = nmax;
    t.d = f.domain.d;
    const int d = f.domain.d;
    if (G == 0) G = d == 1 ? std::max<std::size_t>(4096, 8 * static_cast<std::size_t>(nmax)) : std::max<std::size_t>(256, 4 * static_cast<std::size_t>(nmax));
    if (G < static_cast<std::size_t>(2 * nmax + 1)) throw std::invalid_argument("fourier_coefficients: grid smaller than 2 nmax + 1");
    const std::size_t total = d == 1 ? G : G * G;
    std::vector<cplx> buf(total);
    const double h = 2 * M_PI / static_cast<double>(G);
    if (d == 1) {
        for (std::size_t j = 0; j < G; ++j) buf[j] = f.eval({-M_PI + h * double(j)});
    } else {
        for (std::size_t i = 0; i < G; ++i)
            for (std::size_t j = 0; j < G; ++j) buf[i * G + j] = f.eval({-M_PI + h * double(i), -M_PI + h * double(j)});
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = d == 1 ? fftw_plan_dft_1d(static_cast<int>(G), p, p, FFTW_BACKWARD, FFTW_ESTIMATE)
                      : fftw_plan_dft_2d(static_cast<int>(G), static_cast<int>(G), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    // sum_j f(-pi + h j) e^{i k (-pi + h j)} = (-1)^k * FFT_backward[k mod G]
    auto idx = [G](long long k) { return static_cast<std::size_t>((k % static_cast<long long>(G) + static_cast<long long>(G)) % static_cast<long long>(G)); };
    auto sgn = [](long long k) { return (std::llabs(k) % 2 == 0) ? 1.0 : -1.0; };
    const std::size_t side = t.side();
    t.c.assign(d == 1 ? side : side * side, cplx(0, 0));
    if (d == 1) {
        for (long long k = -nmax; k <= nmax; ++k) t.c[static_cast<std::size_t>(k + nmax)] = sgn(k) * buf[idx(k)] / double(G);
    } else {
        for (long long k1 = -nmax; k1 <= nmax; ++k1)
            for (long long k2 = -nmax; k2 <= nmax; ++k2)
                t.c[static_cast<std::size_t>(k1 + nmax) * side + static_cast<std::size_t>(k2 + nmax)] =
                    sgn(k1) * sgn(k2) * buf[idx(k1) * G + idx(k2)] / double(G * G);
    }
    return t;
}

/// Truncated continuous transform fhat(x) = integral_{|lambda| <= cutoff} exp(i x lambda) f(lambda) d lambda (d = 1).
inline cplx fourier_transform_line(const SpectralSymbol& f, double x, double cutoff, std::size_t panels = 4096) {
    const double step = 2 * cutoff / static_cast<double>(panels);
    quad::KahanSum re, im;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = -cutoff + step * double(p);
        re.add(quad::gauss_panel([&](double l) { return (std::exp(cplx(0, x * l)) * f.eval({l})).real(); }, a, a + step));
        im.add(quad::gauss_panel([&](double l) { return (std::exp(cplx(0, x * l)) * f.eval({l})).imag(); }, a, a + step));
    }
    return {re.value(), im.value()};
}

/// Samples f on the uniform torus grid -pi + 2 pi j / G (d = 1).
inline std::vector<cplx> sample_grid(const SpectralSymbol& f, std::size_t G) {
    std::vector<cplx> out(G);
    const double h = 2 * M_PI / static_cast<double>(G);
    for (std::size_t j = 0; j < G; ++j) out[j] = f.eval({-M_PI + h * double(j)});
    return out;
}

}  // namespace szego
