#pragma once

// Best unbiased estimation of h(lambda) from X ~ Gamma(a, lambda), a known.
//
// The estimator is u(x) = sum_n beta_n(lambda0) q_{n;lambda0}(x) with
//
//   beta_n(lambda) = (-1)^n H^(n)(0) / sqrt(n! [a]_n),   H(y) = h(lambda/(1-y)),
//
// and Var_lambda u(X) = sum_{n>=1} beta_n(lambda)^2. A sample of size n with
// per-observation shape a0 reduces to the single statistic X = X_1+...+X_n
// with total shape n*a0; everything below sees only the total shape.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "laginv/diagnostics.hpp"
#include "laginv/error.hpp"
#include "laginv/expr.hpp"
#include "laginv/inversion.hpp"
#include "laginv/numeric.hpp"
#include "laginv/power_series.hpp"

namespace laginv {

struct estimation_problem {
    transform_expr h;
    double a;
    std::optional<std::size_t> sample_size;
    std::optional<double> per_observation_shape;

    estimation_problem(transform_expr fn, double shape) : h(std::move(fn)), a(shape) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw domain_error("shape a must be positive");
    }

    // Sample of n observations, each Gamma(a0, lambda).
    static estimation_problem from_sample(transform_expr fn, std::size_t n, double a0) {
        if (n == 0)
            throw domain_error("sample size must be at least 1");
        estimation_problem p(std::move(fn), static_cast<double>(n) * a0);
        p.sample_size = n;
        p.per_observation_shape = a0;
        return p;
    }
};

struct beta_coeffs {
    double lambda;
    std::vector<double> values;
    coeff_diagnostics diagnostics;
};

namespace detail {

// sqrt(n! / [a]_n) for n = 0..M, accumulated as a sum of logarithms.
inline std::vector<double> norm_ratios(double a, std::size_t M) {
    std::vector<double> r(M + 1);
    double log_ratio = 0.0;
    r[0] = 1.0;
    for (std::size_t n = 1; n <= M; ++n) {
        log_ratio += std::log(static_cast<double>(n) / (a + static_cast<double>(n - 1)));
        r[n] = std::exp(0.5 * log_ratio);
    }
    return r;
}

inline void require_rate(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw domain_error("rate lambda must be positive");
}

} // namespace detail

// beta_n from the Taylor coefficients of H(y) = h(lambda/(1-y)):
// beta_n = (-1)^n [y^n]H * sqrt(n!/[a]_n).
inline beta_coeffs beta_simple(const estimation_problem& p, double lambda, std::size_t M) {
    detail::require_rate(lambda);
    (void)eval_real(p.h, lambda);
    beta_coeffs out{lambda, {}, {}};
    try {
        const power_series H = moebius_substitution(p.h, lambda, M, false);
        const auto ratio = detail::norm_ratios(p.a, M);
        out.values.resize(M + 1);
        for (std::size_t n = 0; n <= M; ++n) {
            const double v = H[n] * ratio[n];
            out.values[n] = n % 2 == 0 ? v : -v;
        }
        out.diagnostics = classify_coefficients(out.values);
    } catch (const singularity_error&) {
        out.values.clear();
        out.diagnostics = detail::failed({}, decay_kind::diverging);
    }
    return out;
}

// beta_n = (-1)^n lambda d^n/dlambda^n [lambda^(n-1) h(lambda)] / sqrt(n! [a]_n),
// one Leibniz product per n. Independent of the substitution route above.
inline beta_coeffs beta_derivative_form(const estimation_problem& p, double lambda, std::size_t M) {
    detail::require_rate(lambda);
    const power_series jet_h = eval_jet(p.h, lambda, M);
    beta_coeffs out{lambda, std::vector<double>(M + 1), {}};
    for (std::size_t n = 0; n <= M; ++n) {
        const power_series hn = jet_h.truncated(n);
        const power_series power = pow(power_series::identity(lambda, n), static_cast<long long>(n) - 1);
        const double d = derivative_at(mul(hn, power), n);
        const double log_norm = 0.5 * (log_factorial(n) + log_pochhammer(p.a, n));
        const double v = lambda * d / std::exp(log_norm);
        out.values[n] = n % 2 == 0 ? v : -v;
    }
    out.diagnostics = classify_coefficients(out.values);
    return out;
}

inline estimator_series build_umvue(const estimation_problem& p, double lambda0, std::size_t M,
                                    bool allow_failed = false) {
    beta_coeffs beta = beta_simple(p, lambda0, M);
    if (beta.diagnostics.status == verdict::fails && (!allow_failed || beta.values.empty()))
        throw divergence_error("UMVUE coefficients of '" + p.h.source() + "' are not square-summable (" +
                                   std::string(to_string(beta.diagnostics.decay.kind)) + ")",
                               {});
    return {lambda0, std::move(beta.values), p.a, series_kind::umvue};
}

struct variance_result {
    double value;              // sum_{n=1..M} beta_n^2
    double tail;               // fitted estimate of sum_{n>M} beta_n^2
    std::vector<double> terms; // beta_n^2, n = 1..M
    verdict status;
};

inline variance_result variance_series(const estimation_problem& p, double lambda, std::size_t M) {
    const beta_coeffs beta = beta_simple(p, lambda, M);
    variance_result r{0.0, beta.diagnostics.tail_estimate, {}, beta.diagnostics.status};
    compensated_sum s;
    std::vector<double> partial;
    for (std::size_t n = 1; n < beta.values.size(); ++n) {
        const double t = beta.values[n] * beta.values[n];
        r.terms.push_back(t);
        s.add(t);
        partial.push_back(s.value());
    }
    r.value = s.value();
    if (beta.diagnostics.status == verdict::fails)
        throw divergence_error("variance series of '" + p.h.source() + "' diverges at lambda = " +
                                   std::to_string(lambda),
                               std::move(partial));
    return r;
}

// lambda^2 h'(lambda)^2 / a, with a the total shape.
inline double cr_bound(const estimation_problem& p, double lambda) {
    detail::require_rate(lambda);
    const power_series jet = eval_jet(p.h, lambda, 1);
    const double slope = jet[1];
    return lambda * lambda * slope * slope / p.a;
}

} // namespace laginv
