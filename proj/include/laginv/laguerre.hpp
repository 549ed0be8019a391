#pragma once

// Orthonormal polynomials for the gamma density
//
//   f(x) = lambda^a / Gamma(a) * x^(a-1) * exp(-lambda x),   x > 0,
//
// normalised to unit norm with positive leading coefficient. With
// L_n^(alpha) the associated Laguerre polynomials,
//
//   q_n(x) = (-1)^n sqrt(n! / [a]_n) L_n^(a-1)(x),   q_{n;lambda}(x) = q_n(lambda x).
//
// Evaluation uses the normalised three-term recurrence
//
//   sqrt((n+1)(n+a)) q_{n+1} = (x - 2n - a) q_n - sqrt(n(n+a-1)) q_{n-1}.
//
// Monomial coefficient tables exist only up to degree 40; they serve algebra
// and tests, never evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "laginv/error.hpp"
#include "laginv/numeric.hpp"

namespace laginv {

// 113-bit significand; the monomial tables and inner products need it.
using wide_float = boost::multiprecision::cpp_bin_float_quad;

inline constexpr std::size_t basis_degree_cap = 200;
inline constexpr std::size_t basis_table_cap = 40;
inline constexpr std::size_t rodrigues_degree_cap = 60;

struct gamma_model {
    double a;
    double lambda;

    gamma_model(double shape, double rate) : a(shape), lambda(rate) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw domain_error("gamma shape must be positive");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw domain_error("gamma rate must be positive");
    }

    // E[X^k] = [a]_k / lambda^k
    double moment(std::size_t k) const { return std::exp(log_pochhammer(a, k) - static_cast<double>(k) * std::log(lambda)); }
};

// q_0(x), ..., q_n(x) for shape a at unit rate by the normalised recurrence.
// No degree cap; callers decide how far to go. T = long double gives the
// extended-precision variant used for series evaluation.
template <class T = double>
std::vector<T> ortho_values(double a, std::size_t n, double x) {
    std::vector<T> q(n + 1);
    const T ax = a, xx = x;
    q[0] = 1;
    if (n >= 1)
        q[1] = (xx - ax) / std::sqrt(ax);
    for (std::size_t k = 1; k < n; ++k) {
        const T kd = static_cast<T>(k);
        q[k + 1] = ((xx - 2 * kd - ax) * q[k] - std::sqrt(kd * (kd + ax - 1)) * q[k - 1]) / std::sqrt((kd + 1) * (kd + ax));
    }
    return q;
}

class ortho_basis {
public:
    ortho_basis(double a, std::size_t max_degree) : a_(a), max_degree_(max_degree) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw domain_error("basis shape must be positive");
        if (max_degree > basis_degree_cap)
            throw domain_error("basis degree " + std::to_string(max_degree) + " exceeds cap " +
                               std::to_string(basis_degree_cap));
        build_table();
    }

    double shape() const noexcept { return a_; }
    std::size_t max_degree() const noexcept { return max_degree_; }
    std::size_t table_degree() const noexcept { return table_.size() - 1; }

    // Monomial coefficients of q_n at unit rate, constant term first.
    std::span<const double> coefficients(std::size_t n) const {
        check_table(n);
        return table_[n];
    }

    // The same coefficients before rounding to double.
    std::span<const wide_float> extended_coefficients(std::size_t n) const {
        check_table(n);
        return table_ext_[n];
    }

    // q_n(x) at unit rate.
    double eval(std::size_t n, double x) const {
        check_degree(n);
        double prev = 1.0;
        if (n == 0)
            return prev;
        double cur = (x - a_) / std::sqrt(a_);
        for (std::size_t k = 1; k < n; ++k) {
            const double kd = static_cast<double>(k);
            const double next =
                ((x - 2.0 * kd - a_) * cur - std::sqrt(kd * (kd + a_ - 1.0)) * prev) / std::sqrt((kd + 1.0) * (kd + a_));
            prev = cur;
            cur = next;
        }
        return cur;
    }

    // q_0(x), ..., q_n(x) at unit rate.
    std::vector<double> eval_all(std::size_t n, double x) const;

private:
    double a_;
    std::size_t max_degree_;
    std::vector<std::vector<double>> table_;
    std::vector<std::vector<wide_float>> table_ext_;

    void check_table(std::size_t n) const {
        if (n >= table_.size())
            throw domain_error("no monomial table for degree " + std::to_string(n));
    }

    void check_degree(std::size_t n) const {
        if (n > max_degree_)
            throw domain_error("degree " + std::to_string(n) + " outside basis of maximum degree " +
                               std::to_string(max_degree_));
    }

    // c_{n,k} = (-1)^(n+k) sqrt(n! [a]_n) / ([a]_k (n-k)! k!), all factors
    // positive, accumulated in wide precision.
    void build_table() {
        const std::size_t top = std::min(max_degree_, basis_table_cap);
        table_.assign(top + 1, {});
        table_ext_.assign(top + 1, {});
        const wide_float a = a_;
        std::vector<wide_float> fact(top + 1, wide_float(1)), poch(top + 1, wide_float(1));
        for (std::size_t j = 1; j <= top; ++j) {
            fact[j] = fact[j - 1] * j;
            poch[j] = poch[j - 1] * (a + (j - 1));
        }
        for (std::size_t n = 0; n <= top; ++n) {
            const wide_float norm = sqrt(fact[n] * poch[n]);
            auto& row = table_ext_[n];
            row.resize(n + 1);
            table_[n].resize(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                const wide_float mag = norm / (poch[k] * fact[n - k] * fact[k]);
                row[k] = ((n + k) % 2 == 0) ? mag : wide_float(-mag);
                table_[n][k] = static_cast<double>(row[k]);
            }
        }
    }
};

inline std::vector<double> ortho_basis::eval_all(std::size_t n, double x) const {
    check_degree(n);
    return ortho_values(a_, n, x);
}

inline ortho_basis build_basis(double a, std::size_t max_degree) { return {a, max_degree}; }

// q_{n;lambda}(x) = q_n(lambda x)
inline double eval_q(const ortho_basis& basis, std::size_t n, double lambda, double x) {
    if (x < 0.0)
        throw domain_error("basis evaluation requires x >= 0");
    return basis.eval(n, lambda * x);
}

// Monomial coefficients of q_{n;lambda}.
inline std::vector<double> scaled_coefficients(const ortho_basis& basis, std::size_t n, double lambda) {
    const auto c = basis.coefficients(n);
    std::vector<double> out(c.begin(), c.end());
    double p = 1.0;
    for (double& v : out) {
        v *= p;
        p *= lambda;
    }
    return out;
}

inline std::vector<double> poly_mul(std::span<const double> p, std::span<const double> q) {
    if (p.empty() || q.empty())
        return {};
    std::vector<double> r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            r[i + j] += p[i] * q[j];
    return r;
}

namespace detail {

template <class T, class U>
std::vector<wide_float> poly_product_wide(std::span<const T> p, std::span<const U> q) {
    std::vector<wide_float> prod(p.size() + q.size() - 1, wide_float(0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            prod[i + j] += wide_float(p[i]) * wide_float(q[j]);
    return prod;
}

// sum_k prod[k] [a]_k / lambda^k
inline double moment_sum(const std::vector<wide_float>& prod, const gamma_model& model) {
    const wide_float a = model.a;
    const wide_float lambda = model.lambda;
    const wide_float huge = std::numeric_limits<double>::max();
    wide_float moment = 1;
    wide_float sum = 0;
    for (std::size_t k = 0; k < prod.size(); ++k) {
        if (k > 0)
            moment *= (a + (k - 1)) / lambda;
        if (prod[k] == 0)
            continue;
        const wide_float term = prod[k] * moment;
        if (!(abs(term) < huge))
            throw overflow_error("moment inner product overflows binary64 at degree " + std::to_string(k));
        sum += term;
    }
    const double result = static_cast<double>(sum);
    if (!std::isfinite(result))
        throw overflow_error("moment inner product overflows binary64");
    return result;
}

} // namespace detail

// E[p(X) q(X)] for X ~ Gamma(a, lambda), exact up to rounding: the product
// polynomial is integrated term by term with E[X^k] = [a]_k / lambda^k. The
// product and the moment sum are formed in wide precision because the
// monomial expansion cancels heavily.
inline double moment_inner_product(std::span<const double> p, std::span<const double> q, const gamma_model& model) {
    if (p.empty() || q.empty())
        return 0.0;
    return detail::moment_sum(detail::poly_product_wide(p, q), model);
}

inline double moment_inner_product(const ortho_basis& basis, std::span<const double> p, std::span<const double> q,
                                   const gamma_model& model) {
    if (p.size() + q.size() > 2 * basis.max_degree() + 2)
        throw domain_error("polynomial degrees exceed twice the basis degree");
    return moment_inner_product(p, q, model);
}

// E[q_{n;lambda}(X) q_{m;lambda}(X)] from the unrounded tables. At degree 15
// and a = 1/2 the terms reach 1e13, so even 80-bit tables lose 1e-7.
inline double basis_inner_product(const ortho_basis& basis, std::size_t n, std::size_t m, const gamma_model& model) {
    if (model.a != basis.shape())
        throw domain_error("model shape differs from basis shape");
    auto scaled = [&](std::size_t k) {
        const auto c = basis.extended_coefficients(k);
        std::vector<wide_float> out(c.begin(), c.end());
        wide_float p = 1;
        for (auto& v : out) {
            v *= p;
            p *= model.lambda;
        }
        return out;
    };
    const auto p = scaled(n);
    const auto q = scaled(m);
    return detail::moment_sum(detail::poly_product_wide<wide_float, wide_float>(p, q), model);
}

// Sum_k coeffs[k] x^(k + offset_power) exp(-lambda x); offset_power is a-1.
struct weighted_poly {
    double offset_power;
    double lambda;
    std::vector<double> coeffs;

    // d/dx of every term: c x^(k+a-1) e^(-lx) -> c (k+a-1) x^(k+a-2) e^(-lx) - l c x^(k+a-1) e^(-lx)
    weighted_poly derivative() const {
        std::vector<double> out(coeffs.size(), 0.0);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            if (coeffs[k] == 0.0)
                continue;
            const double power = static_cast<double>(k) + offset_power;
            if (k == 0) {
                if (power != 0.0)
                    throw domain_error("derivative leaves the weighted polynomial family");
            } else {
                out[k - 1] += coeffs[k] * power;
            }
            out[k] -= lambda * coeffs[k];
        }
        return {offset_power, lambda, std::move(out)};
    }
};

// d^n/dx^n [x^n f(x)] / f(x) as a weighted polynomial relative to the gamma
// density (n = 0 gives the density itself, coefficient 1).
inline weighted_poly rodrigues_poly(std::size_t n, const gamma_model& model) {
    if (n > rodrigues_degree_cap)
        throw domain_error("Rodrigues degree " + std::to_string(n) + " exceeds cap " +
                           std::to_string(rodrigues_degree_cap));
    weighted_poly w{model.a - 1.0, model.lambda, std::vector<double>(n + 1, 0.0)};
    w.coeffs[n] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        w = w.derivative();
    return w;
}

} // namespace laginv
