#pragma once

// Finite-sample surrogate for square-summability of a coefficient sequence.
//
// Only finitely many coefficients are ever available, so whether sum c_n^2
// converges cannot be decided. Instead the trailing window of the sequence
// is fitted twice:
//
//   log|c_n| ~ A + b n          slope b < -0.05            -> geometric(e^b)
//   log|c_n| ~ B + p log n      exponent p < -0.55         -> polynomial(p)
//                               -0.55 <= p < -0.5          -> polynomial(p), suspect
//   otherwise                   b > 0.05 or p > 0          -> diverging
//                               else                       -> stalled
//
// The window is the last max(10, N/4) non-negligible coefficients. When
// that fit fails on a sequence that keeps changing sign, the log-log fit is
// repeated on the local peaks of |c_n| (see envelope_fit). A
// sequence that drops to rounding noise before index N counts as
// terminated and is reported as geometric (rate 0 when the fit does not
// give a faster-than-threshold slope).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "laginv/numeric.hpp"

namespace laginv {

inline constexpr double geometric_slope_threshold = -0.05;
inline constexpr double diverging_slope_threshold = 0.05;
inline constexpr double polynomial_exponent_threshold = -0.55;
inline constexpr double square_summable_exponent = -0.5;
inline constexpr std::size_t min_fit_window = 10;

enum class decay_kind { geometric, polynomial, stalled, diverging };
enum class verdict { converges, suspect, fails };

struct decay_class {
    decay_kind kind = decay_kind::stalled;
    double rate = 0.0;     // geometric only
    double exponent = 0.0; // polynomial only
};

struct coeff_diagnostics {
    std::vector<double> coeffs;
    double sum_squares = 0.0;
    decay_class decay;
    double tail_estimate = 0.0;
    verdict status = verdict::fails;
};

inline std::string_view to_string(decay_kind k) {
    switch (k) {
    case decay_kind::geometric:
        return "geometric";
    case decay_kind::polynomial:
        return "polynomial";
    case decay_kind::stalled:
        return "stalled";
    case decay_kind::diverging:
        return "diverging";
    }
    return "stalled";
}

inline std::string_view to_string(verdict v) {
    switch (v) {
    case verdict::converges:
        return "converges";
    case verdict::suspect:
        return "suspect";
    case verdict::fails:
        return "fails";
    }
    return "fails";
}

inline verdict worst(verdict a, verdict b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

namespace detail {

struct line_fit {
    double intercept;
    double slope;
};

inline line_fit least_squares(std::span<const double> xs, std::span<const double> ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {my - slope * mx, slope};
}

// Log-log fit through the local maxima of |c_n| over the last three
// quarters of an oscillating sequence. Needs two sign changes and three
// peaks there.
inline std::optional<line_fit> envelope_fit(std::span<const double> c) {
    const std::size_t start = std::max<std::size_t>(1, c.size() / 4);
    if (c.size() < 3 || start + 1 >= c.size())
        return std::nullopt;
    int sign_changes = 0;
    for (std::size_t i = start + 1; i < c.size(); ++i)
        if ((c[i] < 0.0) != (c[i - 1] < 0.0) && c[i] != 0.0 && c[i - 1] != 0.0)
            ++sign_changes;
    if (sign_changes < 2)
        return std::nullopt;
    std::vector<double> lx, ly;
    for (std::size_t i = start; i + 1 < c.size(); ++i) {
        const double v = std::abs(c[i]);
        if (v > 0.0 && v >= std::abs(c[i - 1]) && v > std::abs(c[i + 1])) {
            lx.push_back(std::log(static_cast<double>(i)));
            ly.push_back(std::log(v));
        }
    }
    if (lx.size() < 3)
        return std::nullopt;
    return least_squares(lx, ly);
}

inline coeff_diagnostics failed(std::vector<double> coeffs, decay_kind kind) {
    coeff_diagnostics d;
    d.coeffs = std::move(coeffs);
    d.sum_squares = std::numeric_limits<double>::infinity();
    d.decay.kind = kind;
    d.tail_estimate = std::numeric_limits<double>::infinity();
    d.status = verdict::fails;
    return d;
}

} // namespace detail

inline double sum_of_squares(std::span<const double> c) {
    compensated_sum s;
    for (double x : c)
        s.add(x * x);
    return s.value();
}

inline coeff_diagnostics classify_coefficients(std::vector<double> coeffs) {
    for (double c : coeffs)
        if (!std::isfinite(c))
            return detail::failed(std::move(coeffs), decay_kind::diverging);

    coeff_diagnostics d;
    d.sum_squares = sum_of_squares(coeffs);
    if (!std::isfinite(d.sum_squares)) {
        d = detail::failed(std::move(coeffs), decay_kind::diverging);
        return d;
    }

    const std::size_t n_top = coeffs.empty() ? 0 : coeffs.size() - 1;
    double scale = 0.0;
    for (double c : coeffs)
        scale = std::max(scale, std::abs(c));
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;

    std::vector<std::size_t> significant;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        if (std::abs(coeffs[i]) > noise)
            significant.push_back(i);

    d.coeffs = std::move(coeffs);
    d.decay.kind = decay_kind::geometric;
    d.status = verdict::converges;

    const std::size_t window = std::max(min_fit_window, n_top / 4);
    const std::size_t take = std::min(window, significant.size());
    std::vector<double> xs, ys;
    for (std::size_t i = significant.size() - take; i < significant.size(); ++i) {
        xs.push_back(static_cast<double>(significant[i]));
        ys.push_back(std::log(std::abs(d.coeffs[significant[i]])));
    }

    const bool terminated = significant.empty() || significant.back() + 2 <= n_top;
    if (terminated || xs.size() < 3) {
        d.decay.rate = 0.0;
        if (xs.size() >= 3) {
            const auto fit = detail::least_squares(xs, ys);
            if (fit.slope < geometric_slope_threshold)
                d.decay.rate = std::exp(fit.slope);
        }
        d.tail_estimate = 0.0;
        return d;
    }

    const double n_last = static_cast<double>(n_top);
    const auto lin = detail::least_squares(xs, ys);
    if (lin.slope < geometric_slope_threshold) {
        const double r = std::exp(lin.slope);
        d.decay = {decay_kind::geometric, r, 0.0};
        d.tail_estimate = std::exp(2.0 * (lin.intercept + lin.slope * (n_last + 1.0))) / (1.0 - r * r);
        return d;
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < 1.0)
            continue;
        lx.push_back(std::log(xs[i]));
        ly.push_back(ys[i]);
    }
    const auto loglog = lx.size() >= 2 ? detail::least_squares(lx, ly) : detail::line_fit{0.0, 0.0};
    const double p = loglog.slope;
    if (p < square_summable_exponent && lin.slope <= diverging_slope_threshold) {
        d.decay = {decay_kind::polynomial, 0.0, p};
        d.status = p < polynomial_exponent_threshold ? verdict::converges : verdict::suspect;
        // sum_{n>N} B^2 n^(2p) ~ B^2 (N + 1/2)^(2p+1) / (-2p-1)
        d.tail_estimate =
            std::exp(2.0 * loglog.intercept) * std::pow(n_last + 0.5, 2.0 * p + 1.0) / (-2.0 * p - 1.0);
        return d;
    }

    if (const auto env = detail::envelope_fit(d.coeffs); env && env->slope < square_summable_exponent) {
        d.decay = {decay_kind::polynomial, 0.0, env->slope};
        d.status = env->slope < polynomial_exponent_threshold ? verdict::converges : verdict::suspect;
        d.tail_estimate =
            std::exp(2.0 * env->intercept) * std::pow(n_last + 0.5, 2.0 * env->slope + 1.0) / (-2.0 * env->slope - 1.0);
        return d;
    }

    d.decay = {lin.slope > diverging_slope_threshold || p > 0.0 ? decay_kind::diverging : decay_kind::stalled, 0.0,
               p};
    d.status = verdict::fails;
    d.tail_estimate = std::numeric_limits<double>::infinity();
    return d;
}

} // namespace laginv
