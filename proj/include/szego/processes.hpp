#pragma once

// Linear processes on the integer lattice and the line: innovation families,
// moving-average and spectral synthesis, periodograms, quadratic forms,
// Appell sums and Monte Carlo CLT experiments.
//
// Spectral conventions. Discrete time: f(lambda) = d2 |a(lambda)|^2 with
// a(lambda) = sum_j ahat(j) e^{-i j lambda}, so r(h) = int e^{i h lambda} f dmu
// under the normalised measure; the periodogram (2 pi T)^{-1} |sum X e^{-i t lambda}|^2
// then estimates f / (2 pi). Continuous time: f is a Lebesgue density,
// r(tau) = int e^{i tau lambda} f d lambda, and the periodogram estimates f.

#include "szego/fejer.hpp"
#include "szego/special.hpp"
#include "szego/symbols.hpp"
#include "szego/wick.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace szego {

// ---------------------------------------------------------------------------
// random streams

/// Per-replica generator: mt19937_64 seeded from (master seed, replica index)
/// through seed_seq, so every replica is reproducible on its own.
inline std::mt19937_64 replica_engine(std::uint64_t master, std::uint64_t replica) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32), 0x5eed5eedU};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// innovations

struct Innovation {
    enum class Family { gaussian, gamma, two_point } family = Family::gaussian;
    double a = 1;  ///< gaussian: variance; gamma: shape; two_point: half-spacing s
    double b = 1;  ///< gamma: rate

    static Innovation gaussian(double variance = 1) { return {Family::gaussian, variance, 0}; }
    static Innovation centered_gamma(double shape, double rate) { return {Family::gamma, shape, rate}; }
    static Innovation two_point(double s) { return {Family::two_point, s, 0}; }

    std::string name() const {
        switch (family) {
            case Family::gaussian: return "gaussian";
            case Family::gamma: return "gamma";
            case Family::two_point: return "two_point";
        }
        return "?";
    }

    void validate() const {
        if (!(a > 0)) throw std::invalid_argument("innovation parameter must be positive");
        if (family == Family::gamma && !(b > 0)) throw std::invalid_argument("gamma rate must be positive");
    }

    /// d_k for k = 0..8 (d_0 = d_1 = 0: innovations are centred).
    wick::CumulantSequence cumulants() const {
        validate();
        std::vector<double> d(9, 0.0);
        switch (family) {
            case Family::gaussian: d[2] = a; break;
            case Family::gamma: {
                double fact = 1;
                for (int k = 2; k <= 8; ++k) {
                    fact *= (k - 1);  // (k-1)!
                    d[static_cast<std::size_t>(k)] = a * fact / std::pow(b, k);
                }
                break;
            }
            case Family::two_point: {
                // cumulants of a Rademacher variable times s
                const double s2 = a * a;
                d[2] = s2;
                d[4] = -2 * s2 * s2;
                d[6] = 16 * s2 * s2 * s2;
                d[8] = -272 * s2 * s2 * s2 * s2;
                break;
            }
        }
        return {d};
    }

    template <class Engine>
    double sample(Engine& eng) const {
        switch (family) {
            case Family::gaussian: return std::sqrt(a) * std::normal_distribution<double>(0, 1)(eng);
            case Family::gamma: return std::gamma_distribution<double>(a, 1 / b)(eng) - a / b;
            case Family::two_point: return (eng() >> 63) ? a : -a;
        }
        return 0;
    }
};

inline Innovation parse_innovation(const std::string& name, double p1, double p2) {
    if (name == "gaussian") return Innovation::gaussian(p1);
    if (name == "gamma" || name == "centered_gamma") return Innovation::centered_gamma(p1, p2);
    if (name == "two_point") return Innovation::two_point(p1);
    throw std::invalid_argument("unknown innovation family: " + name);
}

// ---------------------------------------------------------------------------
// models

/// X_t = sum_j ahat(j) xi(t - j) with lags j = lag_min .. lag_min + kernel.size() - 1.
struct LinearProcessModel {
    std::vector<double> kernel;
    long lag_min = 0;
    Innovation innovation{};
    std::string name = "linear";
    double truncation_mass = 0;  ///< L2 mass of the discarded kernel tail, relative

    void validate() const {
        if (kernel.empty()) throw std::invalid_argument("LinearProcessModel: empty kernel");
        for (double v : kernel)
            if (!std::isfinite(v)) throw std::invalid_argument("LinearProcessModel: non-finite kernel");
        innovation.validate();
    }

    cplx transfer(double lambda) const {
        cplx s(0, 0);
        for (std::size_t j = 0; j < kernel.size(); ++j)
            s += kernel[j] * std::exp(cplx(0, -double(lag_min + long(j)) * lambda));
        return s;
    }
    /// d2 a(lambda) a(-lambda).
    double spectral_density(double lambda) const {
        return (innovation.cumulants()[2] * transfer(lambda) * transfer(-lambda)).real();
    }
    SpectralSymbol density_symbol() const {
        SpectralSymbol s;
        s.family = "linear_density";
        auto self = *this;
        s.eval = [self](const std::vector<double>& x) { return cplx(self.spectral_density(x.at(0)), 0); };
        s.exact_coefficient = [self](long long k) { return cplx(self.autocovariance(k), 0); };
        return s;
    }
    /// r(h) = d2 sum_j ahat(j) ahat(j + h).
    double autocovariance(long long h) const {
        const auto H = static_cast<long long>(std::llabs(h));
        quad::KahanSum s;
        for (std::size_t j = 0; j + static_cast<std::size_t>(H) < kernel.size(); ++j) s.add(kernel[j] * kernel[j + static_cast<std::size_t>(H)]);
        return innovation.cumulants()[2] * s.value();
    }
    /// kappa_r(X_t) = d_r sum_j ahat(j)^r.
    double marginal_cumulant(int r) const {
        double s = 0;
        for (double v : kernel) s += std::pow(v, r);
        return innovation.cumulants()[static_cast<std::size_t>(r)] * s;
    }
};

/// ahat(j) = phi^j for j < L, truncated where the remaining L2 mass drops below tol.
inline LinearProcessModel ar1_model(double phi, Innovation xi, double tol = 1e-6) {
    if (!(std::abs(phi) < 1)) throw std::invalid_argument("ar1_model: |phi| < 1");
    LinearProcessModel m;
    m.name = "ar1";
    m.innovation = xi;
    const double total = 1 / (1 - phi * phi);
    double kept = 0, p = 1;
    while (true) {
        m.kernel.push_back(p);
        kept += p * p;
        p *= phi;
        if ((total - kept) / total < tol || m.kernel.size() > 100000) break;
    }
    m.truncation_mass = (total - kept) / total;
    return m;
}

/// Truncates the coefficients of a transfer symbol a(lambda) on the torus.
inline LinearProcessModel model_from_transfer(const SpectralSymbol& a, Innovation xi, double tol = 1e-6, long long nmax = 1 << 14) {
    const auto tab = fourier_coefficients(a, nmax);
    double total = 0;
    for (const auto& c : tab.c) total += std::norm(c);
    if (!(total > 0)) throw std::invalid_argument("model_from_transfer: zero transfer");
    // smallest symmetric window whose complement carries mass < tol * total
    long long L = 0;
    double kept = std::norm(tab.at(0));
    while (L < nmax && (total - kept) / total >= tol) {
        ++L;
        kept += std::norm(tab.at(L)) + std::norm(tab.at(-L));
    }
    if ((total - kept) / total >= tol) throw std::invalid_argument("model_from_transfer: kernel tail exceeds tolerance");
    LinearProcessModel m;
    m.name = "transfer:" + a.family;
    m.innovation = xi;
    m.lag_min = -L;
    for (long long k = -L; k <= L; ++k) {
        const cplx c = tab.at(k);
        if (std::abs(c.imag()) > 1e-9 * (1 + std::abs(c.real()))) throw std::invalid_argument("model_from_transfer: complex kernel");
        m.kernel.push_back(c.real());
    }
    m.truncation_mass = (total - kept) / total;
    return m;
}

/// d_k a(-sum lambda_i) prod a(lambda_i) for a (k-1)-tuple of frequencies.
inline cplx spectral_density_k(const LinearProcessModel& m, int k, const std::vector<double>& lambdas) {
    if (k < 2) throw std::invalid_argument("spectral_density_k: k >= 2");
    if (lambdas.size() != static_cast<std::size_t>(k - 1)) throw std::invalid_argument("spectral_density_k: need k-1 frequencies");
    const double dk = m.innovation.cumulants()[static_cast<std::size_t>(k)];
    double sum = 0;
    cplx p(1, 0);
    for (double l : lambdas) {
        sum += l;
        p *= m.transfer(l);
    }
    return dk * m.transfer(-sum) * p;
}

// ---------------------------------------------------------------------------
// series

struct SampleSeries {
    std::vector<double> values;
    double h = 1;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;

    double T() const { return h * double(values.size()); }
};

/// Moving-average synthesis of N consecutive values.
inline SampleSeries simulate_linear(const LinearProcessModel& m, std::size_t N, std::uint64_t seed, std::uint64_t replica = 0) {
    m.validate();
    if (m.truncation_mass > 1e-6)
        throw std::invalid_argument("simulate_linear: kernel truncation mass exceeds tolerance");
    const std::size_t K = m.kernel.size();
    auto eng = replica_engine(seed, replica);
    std::vector<double> xi(N + K - 1);
    for (auto& v : xi) v = m.innovation.sample(eng);
    SampleSeries s;
    s.seed = seed;
    s.replica = replica;
    s.values.assign(N, 0.0);
    // X_t = sum_j ahat(j) xi(t - j); xi index shifted so that t - j spans the buffer.
    for (std::size_t t = 0; t < N; ++t) {
        double acc = 0;
        for (std::size_t j = 0; j < K; ++j) acc += m.kernel[j] * xi[t + K - 1 - j];
        s.values[t] = acc;
    }
    return s;
}

/// I(lambda) = h^2 / (2 pi T) |sum_j X_j e^{-i j h lambda}|^2 on an arbitrary grid.
inline std::vector<double> periodogram(const SampleSeries& s, const std::vector<double>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    const double T = s.T();
    for (double l : grid) {
        quad::KahanSum re, im;
        for (std::size_t j = 0; j < s.values.size(); ++j) {
            const double ph = -double(j) * s.h * l;
            re.add(s.values[j] * std::cos(ph));
            im.add(s.values[j] * std::sin(ph));
        }
        out.push_back(s.h * s.h / (2 * M_PI * T) * (re.value() * re.value() + im.value() * im.value()));
    }
    return out;
}

struct FourierPeriodogram {
    std::vector<double> lambda;  ///< 2 pi k / T, k = 1 .. floor(N/2)
    std::vector<double> I;
    double dlambda = 0;
};

/// Periodogram at the positive Fourier frequencies via one FFT.
inline FourierPeriodogram periodogram_fourier(const SampleSeries& s) {
    const std::size_t N = s.values.size();
    if (N < 2) throw std::invalid_argument("periodogram_fourier: need at least two samples");
    std::vector<double> in(s.values);
    std::vector<cplx> out(N / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(N), in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    FourierPeriodogram p;
    const double T = s.T();
    p.dlambda = 2 * M_PI / T;
    const double scale = s.h * s.h / (2 * M_PI * T);
    for (std::size_t k = 1; k <= N / 2; ++k) {
        p.lambda.push_back(p.dlambda * double(k));
        p.I.push_back(scale * std::norm(out[k]));
    }
    return p;
}

// ---------------------------------------------------------------------------
// functionals

/// bhat(k) for k = -B..B, stored with offset B.
struct LagKernel {
    std::vector<double> values;

    long B() const { return static_cast<long>(values.size() / 2); }
    double at(long k) const { return std::labs(k) > B() ? 0.0 : values[static_cast<std::size_t>(k + B())]; }
    void validate() const {
        if (values.size() % 2 == 0) throw std::invalid_argument("LagKernel: need an odd number of lags (-B..B)");
        for (long k = 1; k <= B(); ++k)
            if (std::abs(at(k) - at(-k)) > 1e-12 * (1 + std::abs(at(k)))) throw std::invalid_argument("LagKernel: bhat must be symmetric");
    }
    /// b(lambda) = sum_k bhat(k) e^{-i k lambda}.
    double symbol(double lambda) const {
        double s = at(0);
        for (long k = 1; k <= B(); ++k) s += 2 * at(k) * std::cos(double(k) * lambda);
        return s;
    }
    static LagKernel from_symmetric(const std::vector<double>& one_sided) {
        LagKernel K;
        for (std::size_t i = one_sided.size(); i-- > 1;) K.values.push_back(one_sided[i]);
        K.values.insert(K.values.end(), one_sided.begin(), one_sided.end());
        return K;
    }
};

/// Q = h^2 sum_{t,s} (X_t X_s - r(t - s)) bhat(t - s), with r the model autocovariance.
inline double quadratic_form(const SampleSeries& s, const LagKernel& b, const std::function<double(long)>& r) {
    b.validate();
    const auto N = static_cast<long>(s.values.size());
    quad::KahanSum acc;
    for (long k = -b.B(); k <= b.B(); ++k) {
        const double bk = b.at(k);
        if (bk == 0 || std::labs(k) >= N) continue;
        const long K = std::labs(k);
        quad::KahanSum inner;
        for (long t = 0; t + K < N; ++t) inner.add(s.values[static_cast<std::size_t>(t)] * s.values[static_cast<std::size_t>(t + K)]);
        acc.add(bk * (inner.value() - double(N - K) * r(K)));
    }
    return s.h * s.h * acc.value();
}

/// Coefficients of the univariate Appell polynomial P_l for the marginal law of X_t.
inline std::vector<double> appell_coefficients(int l, const LinearProcessModel& m) {
    if (l < 1 || l > 6) throw std::invalid_argument("appell_sum: 1 <= l <= 6");
    std::vector<BigRational> kappa(static_cast<std::size_t>(l) + 1, BigRational(0));
    for (int r = 2; r <= l; ++r) kappa[static_cast<std::size_t>(r)] = BigRational(m.marginal_cumulant(r));
    const auto p = wick::appell_univariate(l, kappa);
    std::vector<double> c(static_cast<std::size_t>(l) + 1, 0.0);
    for (const auto& [e, v] : p) c[static_cast<std::size_t>(e[0])] = v.convert_to<double>();
    return c;
}

/// S = h sum_t P_l(X_t).
inline double appell_sum(const SampleSeries& s, int l, const LinearProcessModel& m) {
    const auto c = appell_coefficients(l, m);
    quad::KahanSum acc;
    for (double x : s.values) {
        double v = 0;
        for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
        acc.add(v);
    }
    return s.h * acc.value();
}

// ---------------------------------------------------------------------------
// fractional Riesz-Bessel model

struct ThetaFRBM {
    double alpha = 0.2, gamma = 1.0, c = 1.0;

    void validate() const {
        if (!(alpha >= 0 && alpha < 0.5)) throw std::invalid_argument("FRBM: alpha in [0, 1/2)");
        if (!(gamma >= 0.5)) throw std::invalid_argument("FRBM: gamma >= 1/2");
        if (!(c > 0)) throw std::invalid_argument("FRBM: c > 0");
        if (!(alpha + gamma > 0.5)) throw std::invalid_argument("FRBM: alpha + gamma > 1/2");
    }
};

/// c / (|lambda|^{2 alpha} (1 + |lambda|^2)^gamma); a pole at 0 when alpha > 0.
inline double frbm_spectral(double lambda, const ThetaFRBM& th, int d = 1) {
    (void)d;
    if (lambda == 0 && th.alpha > 0) throw std::domain_error("frbm_spectral: pole at lambda = 0");
    const double a = std::abs(lambda);
    return th.c / (std::pow(a, 2 * th.alpha) * std::pow(1 + a * a, th.gamma));
}

/// Integrable on the line exactly when alpha + gamma > 1/2 (and alpha < 1/2).
inline bool frbm_integrable(const ThetaFRBM& th) { return th.alpha < 0.5 && th.alpha + th.gamma > 0.5; }

/// Aliased density sum_m f(lambda + 2 pi m / h) with |m| <= M plus a power-law tail estimate.
inline double frbm_aliased(double lambda, const ThetaFRBM& th, double h, int M = 64) {
    const double P = 2 * M_PI / h;
    double s = 0;
    for (int m = -M; m <= M; ++m) {
        const double l = lambda + P * m;
        if (l == 0) continue;
        s += frbm_spectral(l, th);
    }
    const double q = 2 * (th.alpha + th.gamma);
    s += 2 * th.c * std::pow(P, -q) * std::pow(M + 0.5, 1 - q) / (q - 1);
    return s;
}

/// Spectral-synthesis plan for a Gaussian FRBM path on [0, T) with step h:
/// 2N frequencies k dw (dw = pi / T) carrying the aliased density mass; the
/// zero frequency carries the integrated mass of the pole cell.
struct FrbmSynthesis {
    ThetaFRBM theta;
    double T = 0, h = 0;
    std::size_t N = 0;
    std::vector<double> weights;  ///< variance carried by each of the 2N frequencies
};

inline FrbmSynthesis make_frbm_synthesis(const ThetaFRBM& th, double T, double h) {
    th.validate();
    if (!frbm_integrable(th)) throw std::invalid_argument("simulate_frbm: non-integrable density");
    FrbmSynthesis p;
    p.theta = th;
    p.T = T;
    p.h = h;
    p.N = static_cast<std::size_t>(std::llround(T / h));
    if (p.N < 4) throw std::invalid_argument("simulate_frbm: T / h too small");
    const std::size_t L = 2 * p.N;
    const double dw = 2 * M_PI / (double(L) * h);
    p.weights.resize(L);
    const double half = dw / 2;
    const double core = th.alpha > 0 ? 2 * th.c * std::pow(half, 1 - 2 * th.alpha) / (1 - 2 * th.alpha) : 2 * th.c * half;
    p.weights[0] = core + frbm_aliased(0.0, th, h) * dw;  // the aliased sum skips the m = 0 cell
    for (std::size_t k = 1; k < L; ++k) p.weights[k] = frbm_aliased(dw * double(k), th, h) * dw;
    return p;
}

namespace detail {
inline void fft_inplace(std::vector<cplx>& buf, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft_1d(static_cast<int>(buf.size()), p, p, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
}
}  // namespace detail

inline SampleSeries simulate_frbm(const FrbmSynthesis& plan, std::uint64_t seed, std::uint64_t replica = 0) {
    const std::size_t L = plan.weights.size();
    std::vector<cplx> buf(L);
    auto eng = replica_engine(seed, replica);
    std::normal_distribution<double> nd(0, 1);
    for (std::size_t k = 0; k < L; ++k) {
        const double re = nd(eng), im = nd(eng);
        buf[k] = std::sqrt(plan.weights[k]) * cplx(re, im);
    }
    detail::fft_inplace(buf, FFTW_BACKWARD);
    SampleSeries s;
    s.h = plan.h;
    s.seed = seed;
    s.replica = replica;
    s.values.resize(plan.N);
    for (std::size_t j = 0; j < plan.N; ++j) s.values[j] = buf[j].real();
    return s;
}

inline SampleSeries simulate_frbm(const ThetaFRBM& th, double T, double h, std::uint64_t seed, std::uint64_t replica = 0) {
    return simulate_frbm(make_frbm_synthesis(th, T, h), seed, replica);
}

/// Autocovariance r(m h), m = 0..N-1, of the synthesised path.
inline std::vector<double> frbm_synthesis_autocovariance(const FrbmSynthesis& plan) {
    std::vector<cplx> buf(plan.weights.begin(), plan.weights.end());
    detail::fft_inplace(buf, FFTW_BACKWARD);
    std::vector<double> r(plan.N);
    for (std::size_t m = 0; m < plan.N; ++m) r[m] = buf[m].real();
    return r;
}

/// Exact expectation of periodogram_fourier for the synthesised path.
inline FourierPeriodogram frbm_expected_periodogram(const FrbmSynthesis& plan) {
    const auto r = frbm_synthesis_autocovariance(plan);
    const std::size_t N = plan.N;
    std::vector<cplx> buf(N);
    buf[0] = double(N) * r[0];
    for (std::size_t m = 1; m < N; ++m) buf[m] = 2.0 * double(N - m) * r[m];
    detail::fft_inplace(buf, FFTW_FORWARD);
    FourierPeriodogram p;
    const double T = plan.h * double(N);
    p.dlambda = 2 * M_PI / T;
    const double scale = plan.h * plan.h / (2 * M_PI * T);
    for (std::size_t k = 1; k <= N / 2; ++k) {
        p.lambda.push_back(p.dlambda * double(k));
        p.I.push_back(scale * buf[k].real());
    }
    return p;
}

// ---------------------------------------------------------------------------
// Monte Carlo CLT experiments

struct CltConfig {
    enum class Functional { sum, quadratic } functional = Functional::quadratic;
    int l = 2;         ///< Appell order for sums
    LagKernel bhat;    ///< kernel for quadratic forms
    LinearProcessModel model;
    std::size_t N = 1 << 14;
    std::size_t replicas = 2000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct CltStats {
    double mean = 0, variance = 0, skewness = 0, excess_kurtosis = 0;
    double ks_distance = 0;  ///< sup distance between the standardised sample and N(0,1)
    double target = 0;       ///< asymptotic variance of T^{-1/2} F
    double ratio = 0;        ///< variance / target
    double ratio_se = 0;     ///< Monte Carlo standard error of the ratio
    std::string target_note;
    std::vector<double> values;  ///< T^{-1/2} F per replica, in replica order
};

/// 2 int b^2 f^2 dmu + (d4 / d2^2) (int b f dmu)^2 with f = d2 |a|^2.
inline double quadratic_target(const LagKernel& b, const LinearProcessModel& m, std::size_t G = 8192) {
    const auto d = m.innovation.cumulants();
    const double bf2 = quad::periodic_mean([&](double l) { const double v = b.symbol(l) * m.spectral_density(l); return v * v; }, G);
    const double bf = quad::periodic_mean([&](double l) { return b.symbol(l) * m.spectral_density(l); }, G);
    return 2 * bf2 + d[4] / (d[2] * d[2]) * bf * bf;
}

/// l! f^{*l}(0) for Gaussian models (any model when l = 1).
inline double sum_target(int l, const LinearProcessModel& m) {
    double fact = 1;
    for (int i = 2; i <= l; ++i) fact *= i;
    auto f = m.density_symbol();
    f.exact_coefficient = nullptr;
    return fact * hermite_sum_variance(f, l).value;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline CltStats summarize(std::vector<double> v, double target) {
    CltStats st;
    const double n = double(v.size());
    quad::KahanSum s1;
    for (double x : v) s1.add(x);
    st.mean = s1.value() / n;
    quad::KahanSum s2, s3, s4;
    for (double x : v) {
        const double d = x - st.mean;
        s2.add(d * d);
        s3.add(d * d * d);
        s4.add(d * d * d * d);
    }
    const double m2 = s2.value() / n, m3 = s3.value() / n, m4 = s4.value() / n;
    st.variance = n > 1 ? s2.value() / (n - 1) : 0;
    if (m2 > 0) {
        st.skewness = m3 / std::pow(m2, 1.5);
        st.excess_kurtosis = m4 / (m2 * m2) - 3;
        std::vector<double> z(v);
        std::sort(z.begin(), z.end());
        const double sd = std::sqrt(st.variance);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double F = normal_cdf((z[i] - st.mean) / sd);
            st.ks_distance = std::max({st.ks_distance, std::abs(F - double(i) / n), std::abs(double(i + 1) / n - F)});
        }
    }
    st.target = target;
    if (target > 0) {
        st.ratio = st.variance / target;
        st.ratio_se = st.ratio * std::sqrt((2 + std::max(st.excess_kurtosis, -2.0)) / std::max(n - 1, 1.0));
    }
    st.values = std::move(v);
    return st;
}

/// Runs a replica loop with `threads` workers; results land by replica index.
inline void parallel_replicas(std::size_t replicas, unsigned threads, const std::function<void(std::size_t)>& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || replicas < 2) {
        for (std::size_t r = 0; r < replicas; ++r) body(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t r = next++; r < replicas; r = next++) body(r);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline CltStats mc_clt_experiment(const CltConfig& cfg) {
    cfg.model.validate();
    if (cfg.replicas < 2) throw std::invalid_argument("mc_clt_experiment: at least two replicas");
    double target = 0;
    std::string note;
    if (cfg.functional == CltConfig::Functional::quadratic) {
        cfg.bhat.validate();
        target = quadratic_target(cfg.bhat, cfg.model);
    } else {
        if (cfg.l > 1 && !cfg.model.innovation.cumulants().gaussian()) {
            target = std::nan("");
            note = "sum target available for Gaussian innovations (or l = 1) only";
        } else {
            target = sum_target(cfg.l, cfg.model);
        }
    }
    const double scale = 1 / std::sqrt(double(cfg.N));
    std::vector<double> vals(cfg.replicas);
    auto r = [&](long k) { return cfg.model.autocovariance(k); };
    parallel_replicas(cfg.replicas, cfg.threads, [&](std::size_t rep) {
        try {
            const auto s = simulate_linear(cfg.model, cfg.N, cfg.seed, rep);
            const double F = cfg.functional == CltConfig::Functional::quadratic ? quadratic_form(s, cfg.bhat, r) : appell_sum(s, cfg.l, cfg.model);
            vals[rep] = F * scale;
        } catch (const std::exception& e) {
            throw std::runtime_error("replica " + std::to_string(rep) + ": " + e.what());
        }
    });
    auto st = summarize(std::move(vals), target);
    st.target_note = note;
    return st;
}

}  // namespace szego
