#include "szego/special.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <complex>

using namespace szego::special;

namespace {

double scaled(double a, double b, double z) {
    const auto r = hyp1f1_scaled(a, b, z);
    EXPECT_TRUE(r.converged) << a << " " << b << " " << z;
    return r.value * std::exp(r.scale_exp - z);
}

}  // namespace

TEST(Hyp1F1, ElementaryCases) {
    for (double z : {0.0, 0.5, 3.0, 20.0, 59.0, 61.0, 150.0, 600.0}) {
        // 1F1(a; a; z) = e^z
        EXPECT_NEAR(scaled(1, 1, z), 1.0, 1e-12) << z;
        EXPECT_NEAR(scaled(2.5, 2.5, z), 1.0, 1e-12) << z;
        // 1F1(1; 2; z) = (e^z - 1) / z
        if (z > 0) EXPECT_NEAR(scaled(1, 2, z), -std::expm1(-z) / z, 1e-12 * (1 / z)) << z;
    }
    EXPECT_NEAR(hyp1f1(1, 1, 2.0), std::exp(2.0), 1e-12 * std::exp(2.0));
}

TEST(Hyp1F1, TerminatingSeries) {
    // a = -2: 1 - 2z/b + z^2 / (b (b + 1))
    for (double z : {0.1, 10.0, 80.0}) {
        const double b = 1.7;
        const double expect = 1 - 2 * z / b + z * z / (b * (b + 1));
        EXPECT_NEAR(hyp1f1(-2, b, z), expect, 1e-10 * std::abs(expect)) << z;
    }
}

TEST(Hyp1F1, ContinuousAcrossAsymptoticSwitch) {
    const double s = kHyp1F1AsymptoticSwitch;
    for (double a : {0.2, 0.45}) {
        const double lo = scaled(a, a + 1.1, s - 1e-9), hi = scaled(a, a + 1.1, s + 1e-9);
        EXPECT_NEAR(lo / hi, 1.0, 1e-10);
    }
}

TEST(Hyp1F1, DerivativeIdentity) {
    // d/dz 1F1(a;b;z) = (a/b) 1F1(a+1;b+1;z); checked by central differences on the unscaled value
    const double a = 0.3, b = 1.4;
    for (double z : {1.0, 5.0, 30.0}) {
        const double h = 1e-5 * (1 + z);
        const double num = (hyp1f1(a, b, z + h) - hyp1f1(a, b, z - h)) / (2 * h);
        EXPECT_NEAR(num / (a / b * hyp1f1(a + 1, b + 1, z)), 1.0, 1e-7) << z;
    }
    EXPECT_THROW(hyp1f1_scaled(0.5, 0.0, 1.0), std::domain_error);
    EXPECT_THROW(hyp1f1_scaled(0.5, 1.0, -1.0), std::domain_error);
}

TEST(Bessel, HalfIntegerOrders) {
    for (double x : {0.05, 1.0, 7.5}) {
        const double k12 = std::sqrt(M_PI / (2 * x)) * std::exp(-x);
        EXPECT_NEAR(bessel_k(0.5, x), k12, 1e-13 * k12);
        EXPECT_NEAR(bessel_k(1.5, x), k12 * (1 + 1 / x), 1e-13 * k12 * (1 + 1 / x));
    }
}

TEST(Matern, ClosedFormsInOneDimension) {
    for (double x : {0.0, 0.3, 2.0, 15.0}) {
        // nu = 1/2 and nu = 3/2
        EXPECT_NEAR(matern_covariance(x, 1.0, 1), std::exp(-x), 1e-13);
        EXPECT_NEAR(matern_covariance(x, 2.0, 1), (1 + x) * std::exp(-x), 1e-13);
    }
    // nu = 1/2 also from gamma = 3/2 in two dimensions
    EXPECT_NEAR(matern_covariance(1.2, 1.5, 2), std::exp(-1.2), 1e-13);
    EXPECT_EQ(matern_covariance(800, 2.0, 1), 0.0);
    EXPECT_THROW(matern_covariance(1.0, 0.5, 1), std::domain_error);
}

TEST(RieszBessel, CausalAndGammaShaped) {
    EXPECT_EQ(rb_time_kernel(-0.5, 0.2, 1.0).value, 0.0);
    EXPECT_EQ(rb_time_kernel(-1e-12, 0.2, 1.0).value, 0.0);
    // alpha = 0: 2 pi t^{g-1} e^{-t} / Gamma(g)
    for (double t : {0.1, 1.0, 8.0, 120.0}) {
        const double g = 1.6;
        const double expect = 2 * M_PI * std::pow(t, g - 1) * std::exp(-t) / std::tgamma(g);
        EXPECT_NEAR(rb_time_kernel(t, 0.0, g).value, expect, 1e-12 * expect + 1e-300) << t;
    }
    EXPECT_EQ(rb_time_kernel(0.0, 0.0, 1.5).value, 0.0);
    EXPECT_THROW(rb_time_kernel(1.0, 0.0, 1.0), std::domain_error);
    EXPECT_THROW(rb_time_kernel(1.0, 0.1, 0.5), std::domain_error);
}

TEST(RieszBessel, FourierTransformIsTransfer) {
    // int_0^inf k(t) e^{-i lambda t} dt = 2 pi (i lambda)^{-alpha} (1 + i lambda)^{-gamma}
    const double alpha = 0.3, gamma = 1.2, lambda = 0.7;
    auto part = [&](bool re) {
        return [=](double t) {
            const double k = rb_time_kernel(t, alpha, gamma).value;
            return re ? k * std::cos(lambda * t) : -k * std::sin(lambda * t);
        };
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double P = 2 * M_PI / lambda;
    double R = 0, I = 0;
    for (int k = 0; k < 2000; ++k) {
        R += GK::integrate(part(true), k * P, (k + 1) * P, 10);
        I += GK::integrate(part(false), k * P, (k + 1) * P, 10);
    }
    const std::complex<double> expect =
        2 * M_PI * std::pow(std::complex<double>(0, lambda), -alpha) * std::pow(std::complex<double>(1, lambda), -gamma);
    // the kernel decays like t^{alpha - 1}, so the cut-off tail is of relative size (cut-off)^{alpha - 1}
    EXPECT_LT(std::abs(std::complex<double>(R, I) / expect - 1.0), 2e-3);
}
