#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "laginv/error.hpp"
#include "laginv/rng.hpp"
#include "laginv/umvue.hpp"

namespace laginv {

inline constexpr std::size_t gamma_sampler_iteration_cap = 1000000;

// Standard normal by the Marsaglia polar method; the second variate of each
// accepted pair is dropped so the stream position depends only on the draw count.
inline double sample_normal(xoshiro256ss& rng) {
    for (std::size_t i = 0; i < gamma_sampler_iteration_cap; ++i) {
        const double u = 2.0 * rng.uniform() - 1.0;
        const double v = 2.0 * rng.uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0)
            return u * std::sqrt(-2.0 * std::log(s) / s);
    }
    throw domain_error("normal sampler exceeded iteration cap");
}

// One draw from Gamma(a, lambda) (rate parametrisation), Marsaglia-Tsang with
// the U^(1/a) boost for a < 1.
inline double sample_gamma(double a, double lambda, xoshiro256ss& rng) {
    if (!(a > 0.0) || !(lambda > 0.0))
        throw domain_error("gamma sampler requires a > 0 and lambda > 0");
    const bool boost = a < 1.0;
    const double shape = boost ? a + 1.0 : a;
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (std::size_t i = 0; i < gamma_sampler_iteration_cap; ++i) {
        const double x = sample_normal(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0)
            continue;
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            double g = d * v;
            if (boost)
                g *= std::pow(rng.uniform(), 1.0 / a);
            return g / lambda;
        }
    }
    throw domain_error("gamma sampler exceeded iteration cap");
}

// One-pass mean/variance (Welford), mergeable with Chan's update.
struct moment_accumulator {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const moment_accumulator& o) noexcept {
        if (o.count == 0)
            return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(count + o.count);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / n;
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }

    double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

struct mc_config {
    estimation_problem problem;
    double lambda_true;
    std::size_t reps;
    std::uint64_t seed;
    std::size_t order;
    double lambda0 = 1.0;
    unsigned threads = 0; // 0: hardware concurrency
};

struct mc_report {
    double empirical_mean;
    double empirical_var;
    double std_error;
    double theoretical_value;
    double variance_series_value; // partial sum + tail, NaN when the series diverges
    double cr_bound;
    double z_score;
    std::size_t reps;
};

inline constexpr std::size_t mc_block_count = 64;

inline mc_report run_mc(const mc_config& cfg) {
    if (cfg.reps < 100)
        throw domain_error("Monte Carlo needs at least 100 replications");
    if (!(cfg.lambda_true > 0.0))
        throw domain_error("true rate must be positive");
    const estimator_series u = build_umvue(cfg.problem, cfg.lambda0, cfg.order);
    const double a = cfg.problem.a;

    // Fixed blocks with their own substreams; merging in block order keeps
    // the result independent of thread scheduling.
    const std::size_t blocks = std::min(mc_block_count, cfg.reps);
    std::vector<moment_accumulator> acc(blocks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
            const std::size_t n = cfg.reps / blocks + (b < cfg.reps % blocks ? 1 : 0);
            xoshiro256ss rng = xoshiro256ss::substream(cfg.seed, b);
            moment_accumulator m;
            for (std::size_t i = 0; i < n; ++i)
                m.add(u(sample_gamma(a, cfg.lambda_true, rng)));
            acc[b] = m;
        }
    };
    unsigned nthreads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, blocks));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    moment_accumulator total;
    for (const auto& m : acc)
        total.merge(m);

    mc_report r{};
    r.reps = cfg.reps;
    r.empirical_mean = total.mean;
    r.empirical_var = total.variance();
    r.std_error = std::sqrt(r.empirical_var / static_cast<double>(cfg.reps));
    r.theoretical_value = eval_real(cfg.problem.h, cfg.lambda_true);
    const double diff = r.empirical_mean - r.theoretical_value;
    if (r.std_error > 0.0)
        r.z_score = diff / r.std_error;
    else
        r.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    try {
        const variance_result v = variance_series(cfg.problem, cfg.lambda_true, cfg.order);
        r.variance_series_value = v.value + v.tail;
    } catch (const divergence_error&) {
        r.variance_series_value = std::numeric_limits<double>::quiet_NaN();
    }
    r.cr_bound = cr_bound(cfg.problem, cfg.lambda_true);
    return r;
}

} // namespace laginv
