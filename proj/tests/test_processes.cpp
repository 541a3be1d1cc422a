#include "szego/processes.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>

using namespace szego;

namespace {

double ar1_r(double phi, long h) { return std::pow(phi, double(std::labs(h))) / (1 - phi * phi); }

// Autocovariance of the kernel phi^j, j < L (unit innovation variance), in closed form.
double ar1_r_truncated(double phi, long L, long h) {
    h = std::labs(h);
    if (h >= L) return 0;
    return std::pow(phi, double(h)) * (1 - std::pow(phi, 2.0 * double(L - h))) / (1 - phi * phi);
}

}  // namespace

TEST(Rng, ReplicaStreamsAreReproducibleAndDistinct) {
    auto a = replica_engine(42, 7), b = replica_engine(42, 7), c = replica_engine(42, 8), d = replica_engine(43, 7);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
    const auto m = ar1_model(0.4, Innovation::gaussian());
    EXPECT_EQ(simulate_linear(m, 64, 5, 3).values, simulate_linear(m, 64, 5, 3).values);
    EXPECT_NE(simulate_linear(m, 64, 5, 3).values, simulate_linear(m, 64, 5, 4).values);
}

TEST(Innovation, TwoPointCumulantsFromMoments) {
    // symmetric +-s: m2 = s^2, m4 = s^4, m6 = s^6, m8 = s^8, odd moments vanish
    const double s = 1.3, m2 = s * s, m4 = std::pow(s, 4), m6 = std::pow(s, 6), m8 = std::pow(s, 8);
    const auto d = Innovation::two_point(s).cumulants();
    EXPECT_NEAR(d[2], m2, 1e-12);
    EXPECT_NEAR(d[4], m4 - 3 * m2 * m2, 1e-12);
    EXPECT_NEAR(d[6], m6 - 15 * m4 * m2 + 30 * std::pow(m2, 3), 1e-10);
    EXPECT_NEAR(d[8], m8 - 28 * m6 * m2 - 35 * m4 * m4 + 420 * m4 * m2 * m2 - 630 * std::pow(m2, 4), 1e-9);
}

TEST(Innovation, GammaSampleMoments) {
    const auto xi = Innovation::centered_gamma(2.0, 0.5);
    const auto d = xi.cumulants();
    EXPECT_NEAR(d[2], 8.0, 1e-12);   // k / rate^2
    EXPECT_NEAR(d[3], 32.0, 1e-12);  // 2 k / rate^3
    auto eng = replica_engine(1, 0);
    const std::size_t n = 400000;
    double s1 = 0, s2 = 0, s3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xi.sample(eng);
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
    }
    EXPECT_NEAR(s1 / double(n), 0.0, 5 * std::sqrt(8.0 / double(n)));
    EXPECT_NEAR(s2 / double(n), 8.0, 0.1);
    EXPECT_NEAR(s3 / double(n), 32.0, 2.0);
    EXPECT_THROW(parse_innovation("cauchy", 1, 1), std::invalid_argument);
    EXPECT_THROW(Innovation::centered_gamma(1, -1).validate(), std::invalid_argument);
}

TEST(Model, Ar1AutocovarianceAndTruncation) {
    const auto m = ar1_model(0.7, Innovation::gaussian(2.0));
    EXPECT_LT(m.truncation_mass, 1e-6);
    const long L = long(m.kernel.size());
    for (long h : {0L, 1L, 5L, -3L, L - 1, L}) EXPECT_NEAR(m.autocovariance(h), 2.0 * ar1_r_truncated(0.7, L, h), 1e-12);
    // the truncation is invisible at the 1e-6 level in r(0)
    EXPECT_NEAR(m.autocovariance(0) / (2.0 * ar1_r(0.7, 0)), 1.0, 1e-6);
    // f(0) = d2 (sum_j phi^j)^2 over the kept lags
    EXPECT_NEAR(m.spectral_density(0.0), 2.0 * std::pow((1 - std::pow(0.7, double(L))) / 0.3, 2), 1e-10);
    EXPECT_THROW(ar1_model(1.0, Innovation::gaussian()), std::invalid_argument);
}

TEST(Model, TransferModelMatchesAr1) {
    // a(lambda) = 1 / (1 - phi e^{-i lambda}) has one-sided coefficients phi^j
    SpectralSymbol a;
    a.family = "ar1_transfer";
    a.eval = [](const std::vector<double>& x) { return 1.0 / (1.0 - 0.5 * std::exp(cplx(0, -x[0]))); };
    a.z = Rational(0);
    const auto m = model_from_transfer(a, Innovation::gaussian(), 1e-8, 256);
    for (long h : {0L, 1L, 4L}) EXPECT_NEAR(m.autocovariance(h), ar1_r(0.5, h), 1e-6);
}

TEST(Simulation, SampleAutocovarianceNearModel) {
    const double phi = 0.5;
    const auto m = ar1_model(phi, Innovation::gaussian());
    const auto s = simulate_linear(m, 1 << 17, 99);
    const double N = double(s.values.size());
    for (long h : {0L, 1L, 2L}) {
        double acc = 0;
        for (std::size_t t = 0; t + std::size_t(h) < s.values.size(); ++t) acc += s.values[t] * s.values[t + std::size_t(h)];
        // Bartlett scale: sd of the sample autocovariance ~ sqrt(2 sum r^2 / N)
        const double sd = std::sqrt(2 * (1 + phi * phi) / std::pow(1 - phi * phi, 3) / N);
        EXPECT_NEAR(acc / N, ar1_r(phi, h), 5 * sd) << h;
    }
}

TEST(Periodogram, FftMatchesDirectSum) {
    const auto m = ar1_model(0.3, Innovation::two_point(1.0));
    auto s = simulate_linear(m, 96, 3);
    s.h = 0.25;
    const auto p = periodogram_fourier(s);
    ASSERT_EQ(p.I.size(), 48u);
    const auto direct = periodogram(s, p.lambda);
    for (std::size_t k = 0; k < direct.size(); ++k) EXPECT_NEAR(p.I[k], direct[k], 1e-10 * (1 + direct[k]));
    EXPECT_NEAR(p.dlambda, 2 * M_PI / 24.0, 1e-15);
}

TEST(Functionals, QuadraticFormAgainstDirectSum) {
    const auto m = ar1_model(0.4, Innovation::gaussian());
    const auto s = simulate_linear(m, 200, 11);
    const auto b = LagKernel::from_symmetric({1.0, -0.5, 0.25});
    auto r = [&](long k) { return m.autocovariance(k); };
    double direct = 0;
    for (long t = 0; t < 200; ++t)
        for (long u = 0; u < 200; ++u) direct += (s.values[std::size_t(t)] * s.values[std::size_t(u)] - r(t - u)) * b.at(t - u);
    EXPECT_NEAR(quadratic_form(s, b, r), direct, 1e-9 * (1 + std::abs(direct)));
    EXPECT_NEAR(b.symbol(0.7), 1 - std::cos(0.7) + 0.5 * std::cos(1.4), 1e-14);
    EXPECT_THROW((LagKernel{{1.0, 2.0}}).validate(), std::invalid_argument);
    EXPECT_THROW((LagKernel{{1.0, 2.0, 3.0}}).validate(), std::invalid_argument);
}

TEST(Functionals, AppellCoefficientsForGaussianMarginal) {
    const auto m = ar1_model(0.5, Innovation::gaussian());
    const double v = m.autocovariance(0);
    const auto c2 = appell_coefficients(2, m);
    EXPECT_NEAR(c2[0], -v, 1e-9);
    EXPECT_NEAR(c2[2], 1, 1e-12);
    const auto c4 = appell_coefficients(4, m);
    // x^4 - 6 v x^2 + 3 v^2
    EXPECT_NEAR(c4[2], -6 * v, 1e-9);
    EXPECT_NEAR(c4[0], 3 * v * v, 1e-9);
}

TEST(Targets, ClosedFormsForAr1) {
    const double phi = 0.5;
    const auto m = ar1_model(phi, Innovation::gaussian());
    const long L = long(m.kernel.size());
    double sum_r2 = 0;
    for (long h = -L; h <= L; ++h) sum_r2 += std::pow(ar1_r_truncated(phi, L, h), 2);
    EXPECT_NEAR(sum_target(1, m), std::pow((1 - std::pow(phi, double(L))) / (1 - phi), 2), 1e-9);
    EXPECT_NEAR(sum_target(2, m), 2 * sum_r2, 1e-9);
    // the untruncated value is within the truncation error
    EXPECT_NEAR(sum_target(2, m), 2 * (1 + phi * phi) / std::pow(1 - phi * phi, 3), 1e-3);
    const auto delta = LagKernel{{1.0}};
    EXPECT_NEAR(quadratic_target(delta, m), 2 * sum_r2, 1e-9);
    // two-point innovations add d4 / d2^2 (int f dmu)^2 = -2 r(0)^2
    const auto m2 = ar1_model(phi, Innovation::two_point(1.0));
    EXPECT_NEAR(quadratic_target(delta, m2), 2 * sum_r2 - 2 * std::pow(ar1_r_truncated(phi, L, 0), 2), 1e-9);
}

TEST(Summary, StatisticsOfKnownSample) {
    const auto st = summarize({1, 2, 3, 4, 10}, 2.0);
    EXPECT_DOUBLE_EQ(st.mean, 4.0);
    EXPECT_DOUBLE_EQ(st.variance, 12.5);
    // population central moments of {-3, -2, -1, 0, 6}
    const double m2 = 10.0, m3 = (-27 - 8 - 1 + 0 + 216) / 5.0;
    EXPECT_NEAR(st.skewness, m3 / std::pow(m2, 1.5), 1e-12);
    EXPECT_DOUBLE_EQ(st.ratio, 6.25);
}

TEST(Clt, ThreadCountDoesNotChangeReplicas) {
    CltConfig cfg;
    cfg.model = ar1_model(0.5, Innovation::gaussian());
    cfg.bhat = LagKernel{{1.0}};
    cfg.N = 512;
    cfg.replicas = 40;
    cfg.seed = 123;
    const auto one = mc_clt_experiment(cfg);
    cfg.threads = 4;
    const auto four = mc_clt_experiment(cfg);
    EXPECT_EQ(one.values, four.values);
}

TEST(Clt, QuadraticVarianceNearTarget) {
    CltConfig cfg;
    cfg.model = ar1_model(0.5, Innovation::gaussian());
    cfg.bhat = LagKernel{{1.0}};
    cfg.N = 2048;
    cfg.replicas = 600;
    cfg.seed = 7;
    cfg.threads = 4;
    const auto st = mc_clt_experiment(cfg);
    EXPECT_NEAR(st.ratio, 1.0, 4 * st.ratio_se + 0.02);
    EXPECT_NEAR(st.mean, 0.0, 4 * std::sqrt(st.variance / 600));
}

TEST(Frbm, SynthesisVarianceMatchesBetaIntegral) {
    // int_R c |l|^{-2a} (1 + l^2)^{-g} dl = c B(1/2 - a, a + g - 1/2)
    const ThetaFRBM th{0.2, 1.0, 1.0};
    const double exact = boost::math::beta(0.3, 0.7);
    const auto plan = make_frbm_synthesis(th, 256, 1.0 / 16);
    const auto r = frbm_synthesis_autocovariance(plan);
    EXPECT_NEAR(r[0] / exact, 1.0, 0.01);
    double sum = 0;
    for (double w : plan.weights) sum += w;
    EXPECT_NEAR(r[0], sum, 1e-10 * sum);
    EXPECT_THROW(make_frbm_synthesis(ThetaFRBM{0.6, 1, 1}, 16, 1), std::invalid_argument);
    EXPECT_THROW(frbm_spectral(0.0, th), std::domain_error);
}

TEST(Frbm, ExpectedPeriodogramMatchesMonteCarlo) {
    const ThetaFRBM th{0.2, 1.0, 1.0};
    const auto plan = make_frbm_synthesis(th, 16, 0.25);
    const auto expect = frbm_expected_periodogram(plan);
    const std::size_t R = 2000;
    std::vector<double> mean(expect.I.size(), 0.0);
    for (std::size_t rep = 0; rep < R; ++rep) {
        const auto p = periodogram_fourier(simulate_frbm(plan, 5, rep));
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p.I[k] / double(R);
    }
    // periodogram ordinates are roughly exponential: sd of the mean ~ E I / sqrt(R)
    for (std::size_t k = 0; k < mean.size(); k += 3) EXPECT_NEAR(mean[k], expect.I[k], 6 * expect.I[k] / std::sqrt(double(R))) << k;
}
