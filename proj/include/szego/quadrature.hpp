#pragma once

// Fixed-order Gauss-Legendre panels and compensated summation. Panels are
// laid out by the caller (usually aligned with the zeros of an oscillating
// kernel), which keeps every quadrature deterministic.

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace szego::quad {

/// Neumaier-compensated accumulator.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0, comp_ = 0;
};

/// 20-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss_panel(const F& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

/// Sum of Gauss-Legendre panels over consecutive breakpoints.
template <class F>
double panels(const F& f, const std::vector<double>& breaks) {
    KahanSum s;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) s.add(gauss_panel(f, breaks[i], breaks[i + 1]));
    return s.value();
}

/// Breakpoints a, a+step, ..., up to b (b always included).
inline std::vector<double> uniform_breaks(double a, double b, double step) {
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / step - 1e-12));
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
    out.push_back(b);
    return out;
}

/// Midpoint-free periodic trapezoid rule: mean of f over G equispaced points
/// of [-pi, pi). Exact for trigonometric polynomials of degree < G.
template <class F>
double periodic_mean(const F& f, std::size_t G) {
    KahanSum s;
    const double h = 2 * M_PI / static_cast<double>(G);
    for (std::size_t i = 0; i < G; ++i) s.add(f(-M_PI + h * static_cast<double>(i)));
    return s.value() / static_cast<double>(G);
}

}  // namespace szego::quad
