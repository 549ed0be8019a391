#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "laginv/laginv.hpp"

using namespace laginv;

namespace {

estimation_problem problem(const char* h, double a) { return {parse(h), a}; }

mc_config config(const char* h, double a, double lambda, std::size_t M, std::uint64_t seed = 7) {
    return {problem(h, a), lambda, 100000, seed, M};
}

// Var u(X) for u(x) = (1 - 1/x)^2 1{x > 1}, X ~ Gamma(3, 1): the
// Rao-Blackwell estimator of exp(-lambda) from three exponential draws.
// Composite Simpson on [1, 80].
double rao_blackwell_variance() {
    const int panels = 40000;
    const double lo = 1.0, hi = 80.0, step = (hi - lo) / panels;
    auto f = [](double x) {
        const double u = (1.0 - 1.0 / x) * (1.0 - 1.0 / x);
        return u * u * x * x * std::exp(-x) / 2.0;
    };
    double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i)
        s += f(lo + i * step) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * step / 3.0 - std::exp(-2.0);
}

} // namespace

TEST(Rng, SplitMixReference) {
    splitmix64 g(1234567);
    EXPECT_EQ(g.next(), 6457827717110365317ULL);
    EXPECT_EQ(g.next(), 3203168211198807973ULL);
    EXPECT_EQ(g.next(), 9817491932198370423ULL);
}

TEST(Rng, XoshiroReference) {
    // seeded through SplitMix64, reference values from an independent port
    xoshiro256ss g(42);
    EXPECT_EQ(g(), 1546998764402558742ULL);
    EXPECT_EQ(g(), 6990951692964543102ULL);
    EXPECT_EQ(g(), 12544586762248559009ULL);
    EXPECT_EQ(g(), 17057574109182124193ULL);
}

TEST(Rng, UniformOpenInterval) {
    xoshiro256ss g(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = g.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, SubstreamsDiffer) {
    auto a = xoshiro256ss::substream(5, 0), b = xoshiro256ss::substream(5, 1), c = xoshiro256ss::substream(6, 0);
    const auto x = a(), y = b(), z = c();
    EXPECT_NE(x, y);
    EXPECT_NE(x, z);
    EXPECT_EQ(xoshiro256ss::substream(5, 1)(), y);
}

TEST(SampleGamma, MeanShapeThree) {
    xoshiro256ss g(2024);
    moment_accumulator m;
    for (int i = 0; i < 100000; ++i)
        m.add(sample_gamma(3.0, 2.0, g));
    EXPECT_NEAR(m.mean, 1.5, 4.0 * std::sqrt(0.75 / 1e5));
    EXPECT_NEAR(m.variance(), 0.75, 0.03);
}

TEST(SampleGamma, Exponential) {
    xoshiro256ss g(11);
    moment_accumulator m;
    for (int i = 0; i < 100000; ++i)
        m.add(sample_gamma(1.0, 1.0, g));
    EXPECT_NEAR(m.mean, 1.0, 4.0 * std::sqrt(1.0 / 1e5));
}

TEST(SampleGamma, SmallShape) {
    xoshiro256ss g(3);
    moment_accumulator m;
    for (int i = 0; i < 100000; ++i) {
        const double x = sample_gamma(0.3, 1.5, g);
        ASSERT_GE(x, 0.0);
        m.add(x);
    }
    const double mean = 0.3 / 1.5, var = 0.3 / 2.25;
    EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / 1e5));
}

TEST(SampleGamma, Deterministic) {
    xoshiro256ss a(99), b(99);
    for (int i = 0; i < 10; ++i)
        EXPECT_EQ(sample_gamma(2.5, 1.0, a), sample_gamma(2.5, 1.0, b));
}

TEST(SampleGamma, Errors) {
    xoshiro256ss g(1);
    EXPECT_THROW(sample_gamma(0.0, 1.0, g), domain_error);
    EXPECT_THROW(sample_gamma(1.0, -1.0, g), domain_error);
}

TEST(Accumulator, MergeMatchesSequential) {
    xoshiro256ss g(8);
    std::vector<double> xs(10007);
    for (auto& x : xs)
        x = 1e6 + g.uniform();
    moment_accumulator all, left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 3000 ? left : right).add(xs[i]);
    }
    left.merge(right);
    EXPECT_EQ(left.count, all.count);
    EXPECT_NEAR(left.mean, all.mean, 1e-14 * all.mean);
    EXPECT_NEAR(left.variance(), all.variance(), 1e-9);
    EXPECT_NEAR(all.variance(), 1.0 / 12.0, 3e-3);
}

TEST(RunMc, ReciprocalTarget) {
    const auto r = run_mc(config("1/s", 3.0, 2.0, 10));
    EXPECT_EQ(r.reps, 100000u);
    EXPECT_EQ(r.theoretical_value, 0.5);
    EXPECT_NEAR(r.empirical_mean, 0.5, 0.01);
    EXPECT_LE(std::abs(r.z_score), 4.0);
    EXPECT_NEAR(r.std_error, std::sqrt(r.empirical_var / 1e5), 1e-15);
    EXPECT_NEAR(r.z_score, (r.empirical_mean - 0.5) / r.std_error, 1e-9);
    // Var(X/3) = a / (9 lambda^2)
    EXPECT_NEAR(r.variance_series_value, 3.0 / 36.0, 1e-14);
    EXPECT_NEAR(r.empirical_var, 3.0 / 36.0, 0.05 * 3.0 / 36.0);
}

TEST(RunMc, ConstantTarget) {
    const auto r = run_mc(config("1", 2.0, 0.7, 10));
    EXPECT_EQ(r.empirical_mean, 1.0);
    EXPECT_EQ(r.empirical_var, 0.0);
    EXPECT_EQ(r.z_score, 0.0);
    EXPECT_EQ(r.cr_bound, 0.0);
}

TEST(RunMc, ExponentialSurvival) {
    const auto r = run_mc(config("exp(-s)", 3.0, 1.0, 120));
    EXPECT_LE(std::abs(r.z_score), 4.0);
    ASSERT_TRUE(std::isfinite(r.variance_series_value));
    EXPECT_NEAR(r.empirical_var, r.variance_series_value, 0.15 * r.variance_series_value);
    const double oracle = rao_blackwell_variance();
    EXPECT_NEAR(oracle, 0.0519637631174713, 1e-9);
    EXPECT_NEAR(r.variance_series_value, oracle, 0.02 * oracle);
}

TEST(RunMcProperty, VarianceDominatesCrBound) {
    for (const auto& cfg : {config("1/s", 3.0, 2.0, 10), config("exp(-s)", 3.0, 1.0, 120),
                            config("1/(s+1)", 2.0, 1.0, 80), config("s", 5.0, 1.0, 200)}) {
        const auto r = run_mc(cfg);
        EXPECT_GE(r.empirical_var, r.cr_bound * (1.0 - 3.0 / std::sqrt(1e5))) << cfg.problem.h.source();
        EXPECT_LE(std::abs(r.z_score), 4.0) << cfg.problem.h.source();
    }
}

TEST(RunMcProperty, SeedDeterminism) {
    auto cfg = config("1/(s+1)", 2.0, 1.0, 60, 123);
    cfg.reps = 20000;
    const auto a = run_mc(cfg), b = run_mc(cfg);
    EXPECT_EQ(a.empirical_mean, b.empirical_mean);
    EXPECT_EQ(a.empirical_var, b.empirical_var);
    cfg.seed = 124;
    EXPECT_NE(run_mc(cfg).empirical_mean, a.empirical_mean);
}

TEST(RunMcProperty, ThreadCountIrrelevant) {
    auto cfg = config("exp(-s)", 3.0, 1.0, 120, 5);
    cfg.reps = 20000;
    cfg.threads = 1;
    const auto one = run_mc(cfg);
    cfg.threads = 7;
    const auto many = run_mc(cfg);
    EXPECT_EQ(one.empirical_mean, many.empirical_mean);
    EXPECT_EQ(one.empirical_var, many.empirical_var);
}

TEST(RunMc, Errors) {
    auto cfg = config("1/s", 3.0, 2.0, 10);
    cfg.reps = 99;
    EXPECT_THROW(run_mc(cfg), domain_error);
    EXPECT_THROW(run_mc(config("1/s", 3.0, 0.0, 10)), domain_error);
    EXPECT_THROW(run_mc(config("exp(s)", 3.0, 1.0, 80)), divergence_error);
}
