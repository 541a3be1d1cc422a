#pragma once

// Special functions for the fractional Riesz-Bessel family.

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace szego::special {

struct Hyp1F1Result {
    double value = 0;      ///< exp(-scale_exp) * 1F1(a; b; z)
    double scale_exp = 0;  ///< exponent removed from the value (0 unless scaled)
    bool converged = true;
};

namespace detail {

inline bool nonpositive_integer(double a) { return a <= 0 && a == std::floor(a); }

/// Power series of exp(-shift) 1F1(a; b; z), summed until terms stop mattering.
inline Hyp1F1Result hyp1f1_series(double a, double b, double z, double shift, std::size_t max_terms = 20000) {
    Hyp1F1Result r;
    r.scale_exp = shift;
    double term = std::exp(-shift), sum = term;
    for (std::size_t n = 0; n < max_terms; ++n) {
        const double nn = static_cast<double>(n);
        term *= (a + nn) / (b + nn) * z / (nn + 1);
        sum += term;
        if (term == 0 || (std::abs(term) < 1e-17 * std::abs(sum) && nn > z)) return r.value = sum, r;
    }
    r.value = sum;
    r.converged = false;
    return r;
}

/// Large positive z: 1F1(a;b;z) ~ Gamma(b)/Gamma(a) e^z z^{a-b} sum_n (b-a)_n (1-a)_n / (n! z^n),
/// truncated at the smallest term. Returns the value scaled by exp(-z).
inline Hyp1F1Result hyp1f1_asymptotic(double a, double b, double z) {
    Hyp1F1Result r;
    r.scale_exp = z;
    double term = 1, sum = 1, prev = std::numeric_limits<double>::infinity();
    for (int n = 0; n < 200; ++n) {
        const double next = term * (b - a + n) * (1 - a + n) / ((n + 1) * z);
        if (std::abs(next) >= std::abs(prev) && n > 0) break;
        prev = std::abs(next);
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    const double lead = std::exp(boost::math::lgamma(b) - boost::math::lgamma(a) + (a - b) * std::log(z));
    r.value = lead * sum;
    r.converged = prev < 1e-12 * std::abs(sum) || std::abs(term) < 1e-14 * std::abs(sum);
    return r;
}

}  // namespace detail

inline constexpr double kHyp1F1AsymptoticSwitch = 60.0;

/// exp(-z) 1F1(a; b; z) for z >= 0, b > 0: series for moderate z, the
/// asymptotic expansion beyond the switch (unless a is a nonpositive integer,
/// when the series terminates).
inline Hyp1F1Result hyp1f1_scaled(double a, double b, double z) {
    if (!(b > 0)) throw std::domain_error("hyp1f1: b > 0 required");
    if (z < 0) throw std::domain_error("hyp1f1: z >= 0 required");
    if (detail::nonpositive_integer(a) || z <= kHyp1F1AsymptoticSwitch) return detail::hyp1f1_series(a, b, z, z);
    return detail::hyp1f1_asymptotic(a, b, z);
}

/// 1F1(a; b; z) unscaled (overflows for large z).
inline double hyp1f1(double a, double b, double z) {
    const auto r = hyp1f1_scaled(a, b, z);
    return r.value * std::exp(r.scale_exp);
}

/// Matern correlation 2^{1-nu}/Gamma(nu) x^nu K_nu(x), nu = gamma - d/2, value 1 at x = 0.
inline double matern_covariance(double x, double gamma, int d) {
    const double nu = gamma - d / 2.0;
    if (d < 1) throw std::domain_error("matern_covariance: d >= 1");
    if (!(nu > 0)) throw std::domain_error("matern_covariance: gamma > d/2 required");
    if (x < 0) throw std::domain_error("matern_covariance: x >= 0 required");
    if (x == 0) return 1.0;
    if (x > 700) return 0.0;
    const double logpre = (1 - nu) * std::log(2.0) - boost::math::lgamma(nu) + nu * std::log(x);
    return std::exp(logpre) * boost::math::cyl_bessel_k(nu, x);
}

/// Modified Bessel function of the second kind (thin wrapper, used by tests and reports).
inline double bessel_k(double nu, double x) { return boost::math::cyl_bessel_k(nu, x); }

struct KernelValue {
    double value = 0;
    bool converged = true;
};

/// Time kernel of the Riesz-Bessel transfer (i lambda)^{-alpha} (1 + i lambda)^{-gamma}:
/// zero for t < 0, else 2 pi / Gamma(alpha + gamma) t^{alpha+gamma-1} e^{-t} 1F1(alpha; alpha+gamma; t).
inline KernelValue rb_time_kernel(double t, double alpha, double gamma) {
    if (alpha < 0) throw std::domain_error("rb_time_kernel: alpha >= 0 required");
    if (!(alpha + gamma > 1)) throw std::domain_error("rb_time_kernel: alpha + gamma > 1 required");
    KernelValue k;
    // t^{s-1} with s > 1 vanishes at the origin
    if (t <= 0) return k;
    const double s = alpha + gamma;
    const auto h = hyp1f1_scaled(alpha, s, t);
    // e^{-t} 1F1 = h.value * e^{h.scale_exp - t}
    const double logv = std::log(2 * M_PI) - boost::math::lgamma(s) + (s - 1) * std::log(t) + (h.scale_exp - t);
    k.value = std::exp(logv) * h.value;
    k.converged = h.converged;
    return k;
}

}  // namespace szego::special
