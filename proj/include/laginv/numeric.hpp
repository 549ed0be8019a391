#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "laginv/error.hpp"

namespace laginv {

// Neumaier's variant of Kahan summation; robust when an addend is larger
// than the running sum.
class compensated_sum {
public:
    compensated_sum() = default;
    explicit compensated_sum(double init) : sum_(init) {}

    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    compensated_sum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double sum_compensated(std::span<const double> xs) noexcept {
    compensated_sum s;
    for (double x : xs)
        s.add(x);
    return s.value();
}

namespace detail {
inline constexpr double log_switch_magnitude = 1e300;
}

// log([a]_n) for a > 0. Multiplies directly while the product stays below
// 1e300 and accumulates logarithms from there on.
inline double log_pochhammer(double a, std::size_t n) {
    if (!(a > 0.0))
        throw domain_error("Pochhammer symbol requires a > 0");
    double prod = 1.0;
    double log_acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double f = a + static_cast<double>(j);
        if (prod * f > detail::log_switch_magnitude) {
            log_acc += std::log(prod);
            prod = 1.0;
        }
        prod *= f;
    }
    return log_acc + std::log(prod);
}

// [a]_n = a (a+1) ... (a+n-1). Throws overflow_error when the value is not
// representable as a double.
inline double pochhammer(double a, std::size_t n) {
    if (!(a > 0.0))
        throw domain_error("Pochhammer symbol requires a > 0");
    double prod = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        prod *= a + static_cast<double>(j);
        if (prod > detail::log_switch_magnitude) {
            const double lg = log_pochhammer(a, n);
            if (lg >= std::log(std::numeric_limits<double>::max()))
                throw overflow_error("Pochhammer symbol overflows binary64");
            return std::exp(lg);
        }
    }
    return prod;
}

inline double log_factorial(std::size_t k) {
    return std::lgamma(static_cast<double>(k) + 1.0);
}

// k! * c, exact for small k; switches to log space above k = 150 where k!
// alone would leave the double range.
inline double scale_by_factorial(double c, std::size_t k) {
    if (c == 0.0)
        return 0.0;
    if (k <= 150) {
        double f = 1.0;
        for (std::size_t j = 2; j <= k; ++j)
            f *= static_cast<double>(j);
        const double r = f * c;
        if (!std::isfinite(r))
            throw overflow_error("k! * coefficient overflows binary64");
        return r;
    }
    const double lg = log_factorial(k) + std::log(std::abs(c));
    if (lg >= std::log(std::numeric_limits<double>::max()))
        throw overflow_error("k! * coefficient overflows binary64");
    return std::copysign(std::exp(lg), c);
}

} // namespace laginv
