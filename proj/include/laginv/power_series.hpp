#pragma once

// Truncated Taylor series ("jets") in one real variable.
//
// A power_series of order N at center c stores the N+1 numbers
// f^(k)(c) / k!, k = 0..N. Arithmetic between two series truncates to the
// smaller order; nothing is ever zero-padded. Coefficients are kept finite
// at all times: any operation that would produce NaN or Inf throws a
// singularity_error instead.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "laginv/error.hpp"
#include "laginv/numeric.hpp"

namespace laginv {

inline constexpr std::size_t default_max_order = 512;
inline constexpr std::size_t hard_max_order = 4096;

namespace detail {
inline std::atomic<std::size_t>& max_order_setting() {
    static std::atomic<std::size_t> value{default_max_order};
    return value;
}
} // namespace detail

// Largest order a power_series may be constructed with.
inline std::size_t max_order() { return detail::max_order_setting().load(); }

inline void set_max_order(std::size_t n) {
    if (n == 0 || n > hard_max_order)
        throw domain_error("maximum jet order must lie in [1, " + std::to_string(hard_max_order) + "]");
    detail::max_order_setting().store(n);
}

// Restores the previous cap on scope exit.
class scoped_max_order {
public:
    explicit scoped_max_order(std::size_t n) : previous_(max_order()) { set_max_order(n); }
    ~scoped_max_order() { detail::max_order_setting().store(previous_); }
    scoped_max_order(const scoped_max_order&) = delete;
    scoped_max_order& operator=(const scoped_max_order&) = delete;

private:
    std::size_t previous_;
};

class power_series {
public:
    power_series(double center, std::vector<double> coeffs) : center_(center), coeffs_(std::move(coeffs)) {
        if (coeffs_.empty())
            throw domain_error("power series needs at least one coefficient");
        if (coeffs_.size() - 1 > max_order())
            throw domain_error("series order " + std::to_string(coeffs_.size() - 1) + " exceeds maximum " +
                               std::to_string(max_order()));
        if (!std::isfinite(center_))
            throw domain_error("series center must be finite");
        for (std::size_t k = 0; k < coeffs_.size(); ++k)
            if (!std::isfinite(coeffs_[k]))
                throw singularity_error("non-finite Taylor coefficient at index " + std::to_string(k));
    }

    static power_series constant(double value, double center, std::size_t order) {
        std::vector<double> c(order + 1, 0.0);
        c[0] = value;
        return {center, std::move(c)};
    }

    static power_series zero(double center, std::size_t order) { return constant(0.0, center, order); }
    static power_series one(double center, std::size_t order) { return constant(1.0, center, order); }

    // Jet of t -> t at `center`. With step != 1 this is the jet of the scaled
    // variable t = center + step*u, so every series built from it carries
    // f^(k)(center) * step^k / k!.
    static power_series identity(double center, std::size_t order, double step = 1.0) {
        std::vector<double> c(order + 1, 0.0);
        c[0] = center;
        if (order >= 1)
            c[1] = step;
        return {center, std::move(c)};
    }

    double center() const noexcept { return center_; }
    std::size_t order() const noexcept { return coeffs_.size() - 1; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    double operator[](std::size_t k) const { return coeffs_.at(k); }

    // Sum of the truncated series at center + dt.
    double eval_offset(double dt) const noexcept {
        double r = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;)
            r = r * dt + coeffs_[k];
        return r;
    }

    power_series truncated(std::size_t order) const {
        const std::size_t n = std::min(order, this->order());
        return {center_, std::vector<double>(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(n) + 1)};
    }

    friend bool operator==(const power_series&, const power_series&) = default;

private:
    double center_;
    std::vector<double> coeffs_;
};

namespace detail {

inline void require_same_center(const power_series& a, const power_series& b) {
    if (a.center() != b.center())
        throw domain_error("series centers differ: " + std::to_string(a.center()) + " vs " +
                           std::to_string(b.center()));
}

inline std::size_t common_order(const power_series& a, const power_series& b) {
    return std::min(a.order(), b.order());
}

} // namespace detail

inline power_series add(const power_series& a, const power_series& b) {
    detail::require_same_center(a, b);
    const std::size_t n = detail::common_order(a, b);
    std::vector<double> c(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        c[k] = a[k] + b[k];
    return {a.center(), std::move(c)};
}

inline power_series sub(const power_series& a, const power_series& b) {
    detail::require_same_center(a, b);
    const std::size_t n = detail::common_order(a, b);
    std::vector<double> c(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        c[k] = a[k] - b[k];
    return {a.center(), std::move(c)};
}

inline power_series scale(const power_series& a, double factor) {
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    for (double& x : c)
        x *= factor;
    return {a.center(), std::move(c)};
}

inline power_series neg(const power_series& a) { return scale(a, -1.0); }

inline power_series add_constant(const power_series& a, double value) {
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    c[0] += value;
    return {a.center(), std::move(c)};
}

// Cauchy product truncated to the common order.
inline power_series mul(const power_series& a, const power_series& b) {
    detail::require_same_center(a, b);
    const std::size_t n = detail::common_order(a, b);
    const auto ac = a.coeffs();
    const auto bc = b.coeffs();
    std::vector<double> c(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        compensated_sum s;
        for (std::size_t j = 0; j <= k; ++j)
            s.add(ac[j] * bc[k - j]);
        c[k] = s.value();
    }
    return {a.center(), std::move(c)};
}

inline power_series div(const power_series& a, const power_series& b) {
    detail::require_same_center(a, b);
    if (b[0] == 0.0)
        throw singularity_error("division by a series with zero constant term");
    const std::size_t n = detail::common_order(a, b);
    const auto ac = a.coeffs();
    const auto bc = b.coeffs();
    std::vector<double> q(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        compensated_sum s(ac[k]);
        for (std::size_t j = 1; j <= k; ++j)
            s.add(-bc[j] * q[k - j]);
        q[k] = s.value() / bc[0];
    }
    return {a.center(), std::move(q)};
}

// Jet of t -> outer(inner(t)) at inner.center(). outer must be expanded
// around the constant term of inner.
inline power_series compose(const power_series& outer, const power_series& inner) {
    const double c0 = inner[0];
    if (std::abs(c0 - outer.center()) > 1e-14 * std::max(1.0, std::abs(c0)))
        throw domain_error("composition: inner constant term " + std::to_string(c0) +
                           " does not match outer center " + std::to_string(outer.center()));
    const std::size_t n = detail::common_order(outer, inner);
    const power_series shift = add_constant(inner.truncated(n), -c0);
    power_series r = power_series::constant(outer[n], inner.center(), n);
    for (std::size_t k = n; k-- > 0;)
        r = add_constant(mul(r, shift), outer[k]);
    return r;
}

inline power_series exp(const power_series& a) {
    const std::size_t n = a.order();
    const auto ac = a.coeffs();
    std::vector<double> b(n + 1);
    b[0] = std::exp(ac[0]);
    for (std::size_t k = 1; k <= n; ++k) {
        compensated_sum s;
        for (std::size_t j = 1; j <= k; ++j)
            s.add(static_cast<double>(j) * ac[j] * b[k - j]);
        b[k] = s.value() / static_cast<double>(k);
    }
    return {a.center(), std::move(b)};
}

inline power_series log(const power_series& a) {
    const auto ac = a.coeffs();
    if (!(ac[0] > 0.0))
        throw domain_error("log of a series with nonpositive constant term");
    const std::size_t n = a.order();
    std::vector<double> b(n + 1);
    b[0] = std::log(ac[0]);
    for (std::size_t k = 1; k <= n; ++k) {
        compensated_sum s(ac[k]);
        for (std::size_t j = 1; j < k; ++j)
            s.add(-static_cast<double>(j) * b[j] * ac[k - j] / static_cast<double>(k));
        b[k] = s.value() / ac[0];
    }
    return {a.center(), std::move(b)};
}

inline power_series pow(const power_series& a, long long exponent) {
    if (exponent < 0)
        return div(power_series::one(a.center(), a.order()), pow(a, -exponent));
    power_series result = power_series::one(a.center(), a.order());
    power_series base = a;
    auto e = static_cast<unsigned long long>(exponent);
    while (e != 0) {
        if (e & 1u)
            result = mul(result, base);
        e >>= 1u;
        if (e != 0)
            base = mul(base, base);
    }
    return result;
}

// Real exponent. Integral exponents route through repeated multiplication so
// that a zero or negative constant term is allowed there.
inline power_series pow(const power_series& a, double exponent) {
    if (std::floor(exponent) == exponent && std::abs(exponent) <= 1e9)
        return pow(a, static_cast<long long>(exponent));
    const auto ac = a.coeffs();
    if (!(ac[0] > 0.0))
        throw domain_error("non-integer power of a series with nonpositive constant term");
    const std::size_t n = a.order();
    std::vector<double> b(n + 1);
    b[0] = std::pow(ac[0], exponent);
    for (std::size_t k = 1; k <= n; ++k) {
        compensated_sum s;
        for (std::size_t j = 1; j <= k; ++j)
            s.add((exponent * static_cast<double>(j) - static_cast<double>(k - j)) * ac[j] * b[k - j]);
        b[k] = s.value() / (static_cast<double>(k) * ac[0]);
    }
    return {a.center(), std::move(b)};
}

// f^(k)(center) = k! * coeffs[k].
inline double derivative_at(const power_series& ps, std::size_t k) {
    if (k > ps.order())
        throw domain_error("derivative order " + std::to_string(k) + " exceeds series order " +
                           std::to_string(ps.order()));
    return scale_by_factorial(ps[k], k);
}

inline power_series operator+(const power_series& a, const power_series& b) { return add(a, b); }
inline power_series operator-(const power_series& a, const power_series& b) { return sub(a, b); }
inline power_series operator*(const power_series& a, const power_series& b) { return mul(a, b); }
inline power_series operator/(const power_series& a, const power_series& b) { return div(a, b); }
inline power_series operator-(const power_series& a) { return neg(a); }

} // namespace laginv
